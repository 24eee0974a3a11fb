"""
Dense and sparse matrix storage.

Dense matrices are plain float64 numpy arrays of rank 2. Adjacency matrices are
wrapped in SparseAdjacency, which keeps a canonical CSR form (row-major, sorted,
deduplicated) on top of scipy.sparse.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.errors import ContractError, DimensionError, NumericError

DenseMatrix = np.ndarray


def as_dense(values, name: str = "matrix") -> DenseMatrix:
    """Coerce to a finite rank-2 float64 array"""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {array.shape}")
    return check_finite(array, name)


def check_finite(values: np.ndarray, name: str) -> np.ndarray:
    """Raise NumericError if any entry is NaN or Inf"""
    if not np.all(np.isfinite(values)):
        raise NumericError(f"{name} produced non-finite values")
    return values


@dataclass(frozen=True)
class SparseAdjacency:
    """
    Square sparse adjacency in canonical CSR form

    Attributes:
        node_count: Number of nodes (matrix is node_count x node_count)
        matrix: scipy CSR matrix, sorted indices, no duplicates
    """
    node_count: int
    matrix: sp.csr_matrix

    @classmethod
    def from_entries(
        cls,
        node_count: int,
        rows: Iterable[int],
        cols: Iterable[int],
        weights: Optional[Iterable[float]] = None,
    ) -> "SparseAdjacency":
        """
        Build from coordinate lists; repeated (row, col) pairs keep their first weight

        Args:
            node_count: Matrix size
            rows: Row index per entry
            cols: Column index per entry
            weights: Weight per entry (default 1.0)

        Returns:
            SparseAdjacency
        """
        rows = np.asarray(list(rows), dtype=np.int64)
        cols = np.asarray(list(cols), dtype=np.int64)
        if weights is None:
            data = np.ones(len(rows), dtype=np.float64)
        else:
            data = np.asarray(list(weights), dtype=np.float64)
        if not (len(rows) == len(cols) == len(data)):
            raise DimensionError("Entry lists must have equal length")
        if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= node_count or cols.max() >= node_count):
            raise ContractError(f"Adjacency index out of range for node_count={node_count}")
        if len(data) and (not np.all(np.isfinite(data)) or data.min() < 0):
            raise ContractError("Adjacency weights must be finite and non-negative")

        keys = rows * max(node_count, 1) + cols
        _, first = np.unique(keys, return_index=True)
        matrix = sp.csr_matrix(
            (data[first], (rows[first], cols[first])), shape=(node_count, node_count)
        )
        matrix.sort_indices()
        return cls(node_count=node_count, matrix=matrix)

    @classmethod
    def from_undirected_edges(cls, node_count: int, edges: Iterable[Tuple[int, int]]) -> "SparseAdjacency":
        """Symmetric unit-weight adjacency; each undirected edge listed once"""
        edges = list(edges)
        src = [u for u, v in edges] + [v for u, v in edges if u != v]
        dst = [v for u, v in edges] + [u for u, v in edges if u != v]
        return cls.from_entries(node_count, src, dst)

    @classmethod
    def identity(cls, node_count: int) -> "SparseAdjacency":
        idx = range(node_count)
        return cls.from_entries(node_count, idx, idx)

    @classmethod
    def empty(cls, node_count: int) -> "SparseAdjacency":
        return cls.from_entries(node_count, [], [])

    @classmethod
    def block_diagonal(cls, blocks: List["SparseAdjacency"]) -> "SparseAdjacency":
        """Stack adjacencies into one disconnected graph"""
        total = sum(b.node_count for b in blocks)
        if not blocks:
            return cls.empty(0)
        matrix = sp.block_diag([b.matrix for b in blocks], format="csr")
        matrix.sort_indices()
        return cls(node_count=total, matrix=matrix)

    @property
    def entries(self) -> List[Tuple[int, int, float]]:
        """(row, col, weight) triples in row-major order"""
        coo = self.matrix.tocoo()
        return [(int(r), int(c), float(w)) for r, c, w in zip(coo.row, coo.col, coo.data)]

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def degrees(self) -> np.ndarray:
        """Number of stored neighbours per node (self-loops count once)"""
        return np.diff(self.matrix.indptr)

    def is_symmetric(self) -> bool:
        return (abs(self.matrix - self.matrix.T) > 0).nnz == 0

    def to_dense(self) -> DenseMatrix:
        return self.matrix.toarray()

    def permute(self, order: np.ndarray) -> "SparseAdjacency":
        """P·A·Pᵀ where new node i is old node order[i]"""
        order = np.asarray(order)
        matrix = self.matrix[order][:, order].tocsr()
        matrix.sort_indices()
        return SparseAdjacency(node_count=self.node_count, matrix=matrix)
