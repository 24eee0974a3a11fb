"""
Unit tests for random streams, matrices, reverse-mode differentiation and Adam
"""

import numpy as np
import pytest

from src.errors import ContractError, DimensionError, NumericError
from src.numeric.autodiff import (
    Tape, add, backward, concat, hadamard, matmul, mse, relu, row_mean, spmm, total,
)
from src.numeric.gradcheck import gradient_check
from src.numeric.matrix import SparseAdjacency, as_dense
from src.numeric.optim import AdamState, ParamStore, adam_step
from src.numeric.rng import RngStream, gaussian


class TestRngStream:
    """Replay and independence of split streams"""

    def test_same_seed_and_path_replays(self):
        a = RngStream(42).split(3).split(1)
        b = RngStream(42, path=(3, 1))
        assert np.array_equal(a.standard_normal(4, 5), b.standard_normal(4, 5))

    def test_split_ignores_parent_draws(self):
        """A child stream does not depend on how much the parent has consumed"""
        parent = RngStream(7)
        first = parent.split(0).standard_normal(2, 2)
        parent.standard_normal(100, 100)
        assert np.array_equal(parent.split(0).standard_normal(2, 2), first)

    def test_siblings_differ(self):
        root = RngStream(0)
        assert not np.array_equal(root.split(0).standard_normal(3, 3), root.split(1).standard_normal(3, 3))

    def test_large_seed_is_masked(self):
        assert RngStream(2 ** 64 + 5).seed == 5

    def test_gaussian_rejects_empty_shape(self):
        with pytest.raises(ValueError):
            gaussian(RngStream(0), 0, 3)

    def test_gaussian_moments(self):
        draws = gaussian(RngStream(3), 1000, 1000)
        assert abs(draws.mean()) <= 0.005
        assert abs(draws.var() - 1.0) <= 0.01

    def test_split_streams_are_uncorrelated(self):
        root = RngStream(21)
        a = root.split(0).standard_normal(100_000, 1).ravel()
        b = root.split(1).standard_normal(100_000, 1).ravel()
        assert abs(np.corrcoef(a, b)[0, 1]) <= 0.01


class TestSparseAdjacency:
    """Canonical CSR construction"""

    def test_duplicates_keep_first_weight(self):
        adj = SparseAdjacency.from_entries(3, [0, 0, 1], [1, 1, 2], [2.0, 5.0, 1.0])
        assert adj.entries == [(0, 1, 2.0), (1, 2, 1.0)]

    def test_entries_are_row_major(self):
        adj = SparseAdjacency.from_entries(3, [2, 0, 1], [0, 2, 1])
        assert [(r, c) for r, c, _ in adj.entries] == [(0, 2), (1, 1), (2, 0)]

    def test_out_of_range_index(self):
        with pytest.raises(ContractError):
            SparseAdjacency.from_entries(2, [0], [2])

    def test_negative_weight(self):
        with pytest.raises(ContractError):
            SparseAdjacency.from_entries(2, [0], [1], [-1.0])

    def test_undirected_edges_are_symmetric(self):
        adj = SparseAdjacency.from_undirected_edges(4, [(0, 1), (1, 2), (3, 3)])
        assert adj.is_symmetric()
        assert adj.nnz == 5
        assert list(adj.degrees()) == [1, 2, 1, 1]

    def test_block_diagonal(self):
        a = SparseAdjacency.from_undirected_edges(2, [(0, 1)])
        b = SparseAdjacency.identity(3)
        packed = SparseAdjacency.block_diagonal([a, b])
        dense = packed.to_dense()
        assert packed.node_count == 5
        assert dense[0, 1] == 1.0 and dense[2, 2] == 1.0
        assert dense[:2, 2:].sum() == 0.0

    def test_permute(self):
        adj = SparseAdjacency.from_undirected_edges(3, [(0, 1)])
        order = np.array([2, 0, 1])
        expected = adj.to_dense()[order][:, order]
        assert np.array_equal(adj.permute(order).to_dense(), expected)

    def test_as_dense_rejects_nan(self):
        with pytest.raises(NumericError):
            as_dense([[1.0, np.nan]])

    def test_as_dense_rejects_rank_three(self):
        with pytest.raises(DimensionError):
            as_dense(np.zeros((2, 2, 2)))


class TestAutodiff:
    """Traced operations and their gradients"""

    def test_plain_operands_are_not_traced(self):
        out = matmul(np.eye(2), np.ones((2, 3)))
        assert isinstance(out, np.ndarray)

    def test_matmul_matches_triple_loop(self):
        rng = RngStream(5)
        a = rng.split(0).standard_normal(5, 4)
        b = rng.split(1).standard_normal(4, 3)
        expected = np.zeros((5, 3))
        for i in range(5):
            for j in range(3):
                for k in range(4):
                    expected[i, j] += a[i, k] * b[k, j]
        assert np.max(np.abs(matmul(a, b) - expected)) <= 1e-12

    def test_spmm_matches_dense_product(self):
        rng = RngStream(6)
        mask = rng.split(0).uniform(0.0, 1.0, (6, 6)) < 0.3
        rows, cols = np.nonzero(mask)
        weights = rng.split(1).uniform(0.5, 2.0, len(rows))
        adj = SparseAdjacency.from_entries(6, rows, cols, weights)
        x = rng.split(2).standard_normal(6, 2)
        assert np.max(np.abs(spmm(adj, x) - adj.to_dense() @ x)) <= 1e-12

    def test_spmm_with_no_edges(self):
        x = RngStream(7).standard_normal(4, 3)
        assert np.array_equal(spmm(SparseAdjacency.empty(4), x), np.zeros((4, 3)))

    def test_unused_slot_gets_zero_gradient(self):
        params = ParamStore()
        params.add("used", np.array([[3.0]]))
        params.add("unused", np.array([[1.0, 2.0]]))
        w = params.bind(Tape())
        backward(total(hadamard(w["used"], w["used"])), params)
        assert params.grads["used"][0, 0] == pytest.approx(6.0)
        assert np.array_equal(params.grads["unused"], np.zeros((1, 2)))

    def test_matmul_shape_mismatch(self):
        with pytest.raises(DimensionError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_add_broadcasts_row(self):
        out = add(np.zeros((3, 2)), np.array([[1.0, 2.0]]))
        assert np.array_equal(out, np.array([[1.0, 2.0]] * 3))

    def test_add_rejects_other_shapes(self):
        with pytest.raises(DimensionError):
            add(np.zeros((3, 2)), np.zeros((2, 2)))

    def test_row_mean_of_empty_matrix(self):
        with pytest.raises(ContractError):
            row_mean(np.zeros((0, 3)))

    def test_backward_requires_scalar(self):
        params = ParamStore()
        params.add("w", np.ones((2, 2)))
        tape = Tape()
        w = params.bind(tape)["w"]
        with pytest.raises(ContractError):
            backward(relu(w), params)

    def test_simple_gradient(self):
        """d/dW sum(X W) = Xᵀ 1"""
        params = ParamStore()
        params.add("w", np.zeros((2, 1)))
        tape = Tape()
        w = params.bind(tape)["w"]
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        backward(total(matmul(x, w)), params)
        assert np.allclose(params.grads["w"], [[4.0], [6.0]])
        assert len(tape) == 0

    def test_composite_gradient_check(self):
        """Every operation combined in one loss agrees with central differences"""
        rng = RngStream(11)
        adj = SparseAdjacency.from_undirected_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        x = rng.split(0).standard_normal(4, 3)
        target = rng.split(1).standard_normal(1, 5)

        params = ParamStore()
        params.add("a", rng.split(2).standard_normal(3, 3))
        params.add("b", rng.split(3).standard_normal(1, 3))
        params.add("c", rng.split(4).standard_normal(6, 5))
        params.add("gate", rng.split(5).standard_normal(4, 3))

        def loss_fn(p):
            w = p.bind(Tape())
            h = relu(add(matmul(spmm(adj, x), w["a"]), w["b"]))
            h = hadamard(h, w["gate"])
            wide = concat([h, spmm(adj, h)])
            return mse(row_mean(matmul(wide, w["c"])), target)

        errors = gradient_check(loss_fn, params)
        assert set(errors) == {"a", "b", "c", "gate"}
        assert max(errors.values()) <= 1e-5


class TestAdam:
    """Optimizer contract and first-step behavior"""

    def test_step_before_backward(self):
        params = ParamStore()
        params.add("w", np.ones((1, 1)))
        with pytest.raises(ContractError):
            adam_step(params, AdamState())

    def test_first_step_moves_by_learning_rate(self):
        """Bias correction makes the first update lr * sign(g)"""
        params = ParamStore()
        params.add("w", np.array([[1.0, -1.0]]))
        tape = Tape()
        w = params.bind(tape)["w"]
        backward(total(hadamard(w, w)), params)
        adam_step(params, AdamState(learning_rate=0.1))
        assert np.allclose(params.values["w"], [[0.9, -0.9]], atol=1e-6)

    def test_zero_learning_rate_leaves_values(self):
        params = ParamStore()
        params.add("w", np.array([[2.0]]))
        tape = Tape()
        backward(total(params.bind(tape)["w"]), params)
        adam_step(params, AdamState(learning_rate=0.0))
        assert params.values["w"][0, 0] == 2.0

    def test_zero_gradient_leaves_values(self):
        params = ParamStore()
        params.add("w", np.array([[2.0, -1.0]]))
        params.add("u", np.array([[0.5]]))
        w = params.bind(Tape())
        backward(total(hadamard(w["u"], w["u"])), params)
        adam_step(params, AdamState(learning_rate=0.1))
        assert np.array_equal(params.values["w"], [[2.0, -1.0]])
        assert params.values["u"][0, 0] != 0.5

    def test_converges_on_quadratic(self):
        """(w - 3)^2 from w = 0"""
        params = ParamStore()
        params.add("w", np.zeros((1, 1)))
        state = AdamState(learning_rate=0.1)
        for _ in range(100):
            w = params.bind(Tape())
            backward(mse(w["w"], np.array([[3.0]])), params)
            adam_step(params, state)
        assert abs(params.values["w"][0, 0] - 3.0) < 0.5

    def test_duplicate_slot(self):
        params = ParamStore()
        params.add("w", np.ones((1, 1)))
        with pytest.raises(ContractError):
            params.add("w", np.ones((1, 1)))
