"""
Unit tests for the denoising network, its training loop and checkpoints
"""

import numpy as np
import pytest

from src.errors import CheckpointError, ContractError, DimensionError
from src.numeric.gradcheck import gradient_check
from src.numeric.matrix import SparseAdjacency
from src.numeric.rng import RngStream
from src.graphs.batching import normalize_adjacency, pool_graph
from src.denoiser.checkpoint import load_checkpoint, read_archive, save_checkpoint, write_archive
from src.denoiser.network import (
    DenoiserConfig, DenoiserParams, denoiser_forward, denoiser_slot_shapes, init_denoiser_params,
    reconstruction_loss, time_embed,
)
from src.denoiser.trainer import train


@pytest.fixture
def small_config():
    return DenoiserConfig(input_dim=3, hidden_dim=6, time_embed_dim=4, num_steps=50, epochs=3, seed=1)


class TestDenoiserConfig:
    """Hyperparameter validation"""

    def test_odd_time_embedding(self):
        with pytest.raises(ContractError):
            DenoiserConfig(input_dim=3, time_embed_dim=5)

    def test_unknown_noise_mode(self):
        with pytest.raises(ContractError):
            DenoiserConfig(input_dim=3, noise_mode="brown")

    def test_dict_round_trip(self, small_config):
        assert DenoiserConfig.from_dict(small_config.to_dict()) == small_config


class TestForward:
    """Network shape, symmetry and loss behavior"""

    def test_time_embedding(self):
        emb = time_embed(0, 6)
        assert np.array_equal(emb, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        emb = time_embed(7, 4)
        assert emb[0] == pytest.approx(np.sin(7.0))
        assert emb[3] == pytest.approx(np.cos(7.0 / 100.0))

    def test_slot_layout(self, small_config):
        shapes = denoiser_slot_shapes(small_config)
        assert len(shapes) == 12
        assert shapes['enc1.weight'] == (3, 6)
        assert shapes['head.out.weight'] == (6, 3)

    def test_trace_shapes(self, small_config, random_graph):
        g = random_graph(7, 3)
        params = init_denoiser_params(small_config, RngStream(0))
        trace = denoiser_forward(params, g.features, normalize_adjacency(g.adjacency), 10)
        assert trace.prediction.shape == (7, 3)
        assert trace.representation().shape == (7, 12)

    def test_wrong_feature_width(self, small_config, random_graph):
        g = random_graph(4, 5)
        params = init_denoiser_params(small_config, RngStream(0))
        with pytest.raises(DimensionError):
            denoiser_forward(params, g.features, normalize_adjacency(g.adjacency), 1)

    def test_zero_parameters_predict_zero(self, small_config, random_graph):
        g = random_graph(5, 3)
        params = init_denoiser_params(small_config, RngStream(0))
        for name in params.store:
            params.store.values[name] = np.zeros_like(params.store.values[name])
        a_hat = normalize_adjacency(g.adjacency)
        x0 = np.where(g.features >= 0, 1.0, -1.0)
        assert np.array_equal(denoiser_forward(params, g.features, a_hat, 3).prediction, np.zeros((5, 3)))
        loss = reconstruction_loss(params, g.features, x0, a_hat, 3)
        assert loss.value[0, 0] == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_permutation_equivariance(self, small_config, random_graph, seed):
        n = 5 + seed % 8
        g = random_graph(n, 3, seed=seed)
        params = init_denoiser_params(small_config, RngStream(4))
        order = RngStream(100 + seed).permutation(n)
        base = denoiser_forward(params, g.features, normalize_adjacency(g.adjacency), 20)
        permuted = denoiser_forward(params, g.features[order], normalize_adjacency(g.adjacency.permute(order)), 20)
        assert np.max(np.abs(permuted.prediction - base.prediction[order])) <= 1e-10
        assert np.max(np.abs(permuted.representation() - base.representation()[order])) <= 1e-10
        pooled_base = pool_graph(base.representation(), np.zeros(n, dtype=np.int64))
        pooled_permuted = pool_graph(permuted.representation(), np.zeros(n, dtype=np.int64))
        assert np.max(np.abs(pooled_permuted - pooled_base)) <= 1e-12

    def test_symmetric_nodes_match(self, small_config):
        """Leaves of a star with equal features get equal representations"""
        adjacency = SparseAdjacency.from_undirected_edges(4, [(0, 1), (0, 2), (0, 3)])
        x = np.array([[1.0, -2.0, 0.5], [0.3, 0.3, 0.3], [0.3, 0.3, 0.3], [0.3, 0.3, 0.3]])
        params = init_denoiser_params(small_config, RngStream(6))
        rep = denoiser_forward(params, x, normalize_adjacency(adjacency), 5).representation()
        assert np.allclose(rep[1], rep[2]) and np.allclose(rep[2], rep[3])

    def test_gradients_match_finite_differences(self, small_config, random_graph):
        g = random_graph(5, 3, seed=3)
        a_hat = normalize_adjacency(g.adjacency)
        x0 = g.features
        x_t = 0.8 * x0 + 0.6 * RngStream(8).standard_normal(5, 3)
        params = init_denoiser_params(small_config, RngStream(7))

        def loss_fn(store):
            return reconstruction_loss(DenoiserParams(config=small_config, store=store), x_t, x0, a_hat, 12)

        errors = gradient_check(loss_fn, params.store)
        assert len(errors) == 12
        assert max(errors.values()) <= 1e-4


class TestTraining:
    """Denoiser training loop"""

    def test_zero_learning_rate_keeps_parameters(self, ring_hub_dataset):
        cfg = DenoiserConfig(input_dim=ring_hub_dataset.feature_dim, hidden_dim=8, time_embed_dim=4,
                             num_steps=50, epochs=2, batch_size=8, learning_rate=0.0, seed=3)
        start = init_denoiser_params(cfg, RngStream(99))
        before = {name: value.copy() for name, value in start.store.values.items()}
        result = train(ring_hub_dataset, cfg, params=start)
        for name, value in result.params.store.values.items():
            assert np.array_equal(value, before[name])
        assert len(result.log) == 2
        assert result.log[0].batches == 5

    def test_same_seed_same_weights(self, ring_hub_dataset):
        cfg = DenoiserConfig(input_dim=ring_hub_dataset.feature_dim, hidden_dim=8, time_embed_dim=4,
                             num_steps=50, epochs=2, batch_size=8, seed=11)
        a = train(ring_hub_dataset, cfg).params.store.values
        b = train(ring_hub_dataset, cfg).params.store.values
        assert all(np.array_equal(a[name], b[name]) for name in a)

    def test_loss_decreases(self, tiny_node_dataset):
        cfg = DenoiserConfig(input_dim=2, hidden_dim=16, time_embed_dim=8, num_steps=100,
                             epochs=200, learning_rate=1e-2, seed=0)
        losses = train(tiny_node_dataset, cfg).losses
        assert len(losses) == 200
        assert losses[-10:].mean() < 0.5 * losses[0]

    def test_dimension_mismatch(self, tiny_node_dataset):
        with pytest.raises(DimensionError):
            train(tiny_node_dataset, DenoiserConfig(input_dim=5, epochs=1))

    def test_log_frame(self, tiny_node_dataset):
        cfg = DenoiserConfig(input_dim=2, hidden_dim=4, time_embed_dim=4, num_steps=10, epochs=4)
        frame = train(tiny_node_dataset, cfg).to_dataframe()
        assert list(frame.columns) == ['epoch', 'mean_loss', 'batches', 'seconds']
        assert list(frame['epoch']) == [1, 2, 3, 4]
        assert (frame['batches'] == 1).all()


class TestCheckpoint:
    """Binary parameter archives"""

    def test_round_trip(self, tmp_path, small_config):
        params = init_denoiser_params(small_config, RngStream(2))
        save_checkpoint(params, tmp_path / "model.ddm")
        loaded, cfg = load_checkpoint(tmp_path / "model.ddm", expected_input_dim=3)
        assert cfg == small_config
        for name, value in params.store.values.items():
            assert np.array_equal(loaded.store.values[name], value)

    def test_truncated(self, tmp_path, small_config):
        path = tmp_path / "model.ddm"
        save_checkpoint(init_denoiser_params(small_config, RngStream(2)), path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_bytes(self, tmp_path, small_config):
        path = tmp_path / "model.ddm"
        save_checkpoint(init_denoiser_params(small_config, RngStream(2)), path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "model.ddm"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(CheckpointError, match="magic"):
            read_archive(path)

    def test_input_dim_mismatch(self, tmp_path, small_config):
        path = tmp_path / "model.ddm"
        save_checkpoint(init_denoiser_params(small_config, RngStream(2)), path)
        with pytest.raises(CheckpointError, match="input dimension"):
            load_checkpoint(path, expected_input_dim=4)

    def test_wrong_slot_shape(self, tmp_path, small_config):
        params = init_denoiser_params(small_config, RngStream(2))
        slots = dict(params.store.values)
        slots['dec1.weight'] = np.zeros((2, 2))
        write_archive(tmp_path / "bad.ddm", slots, {"kind": "denoiser", "config": small_config.to_dict()})
        with pytest.raises(CheckpointError, match="dec1.weight"):
            load_checkpoint(tmp_path / "bad.ddm")

    def test_wrong_kind(self, tmp_path):
        write_archive(tmp_path / "reps.ddm", {"step.1": np.zeros((1, 1))}, {"kind": "representations"})
        with pytest.raises(CheckpointError, match="not a denoiser"):
            load_checkpoint(tmp_path / "reps.ddm")
