from .matrix import DenseMatrix, SparseAdjacency, as_dense, check_finite
from .rng import RngStream, gaussian
from .autodiff import (
    Node, Tape, add, backward, concat, hadamard, matmul, mse, relu, row_mean, spmm, total, value_of,
)
from .optim import AdamState, ParamStore, adam_step
from .gradcheck import gradient_check

__all__ = [
    'DenseMatrix', 'SparseAdjacency', 'as_dense', 'check_finite',
    'RngStream', 'gaussian',
    'Node', 'Tape', 'add', 'backward', 'concat', 'hadamard', 'matmul', 'mse', 'relu',
    'row_mean', 'spmm', 'total', 'value_of',
    'AdamState', 'ParamStore', 'adam_step', 'gradient_check',
]
