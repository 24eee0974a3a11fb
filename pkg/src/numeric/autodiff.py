"""
Reverse-mode differentiation over the operations the denoiser needs.

A Tape records Nodes in creation order during one forward pass. Operations
accept plain matrices or Nodes; with no Node operand they return a plain
matrix and record nothing. `backward` walks the tape in reverse, accumulates
gradients into the ParamStore slots bound to leaf nodes, then clears the tape.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import ContractError, DimensionError
from src.numeric.matrix import SparseAdjacency, check_finite

GradFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tape:
    """Ordered record of one forward pass"""

    def __init__(self):
        self.nodes: List["Node"] = []

    def leaf(self, value: np.ndarray, slot: Optional[str] = None) -> "Node":
        node = Node(value=value, tape=self, slot=slot)
        self.nodes.append(node)
        return node

    def record(self, value: np.ndarray, parents: Tuple, backward_fn: GradFn) -> "Node":
        node = Node(value=value, tape=self, parents=parents, backward_fn=backward_fn)
        self.nodes.append(node)
        return node

    def clear(self) -> None:
        self.nodes = []

    def __len__(self):
        return len(self.nodes)


@dataclass(eq=False)
class Node:
    """A traced matrix value"""
    value: np.ndarray
    tape: Tape = field(repr=False)
    parents: Tuple = field(default=(), repr=False)
    backward_fn: Optional[GradFn] = field(default=None, repr=False)
    slot: Optional[str] = None
    grad: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.value.shape


Operand = Union[np.ndarray, Node]


def value_of(x: Operand) -> np.ndarray:
    return x.value if isinstance(x, Node) else x


def _tape_of(*operands: Operand) -> Optional[Tape]:
    for x in operands:
        if isinstance(x, Node):
            return x.tape
    return None


def _emit(op: str, value: np.ndarray, operands: Tuple, backward_fn: GradFn) -> Operand:
    check_finite(value, op)
    tape = _tape_of(*operands)
    if tape is None:
        return value
    return tape.record(value, operands, backward_fn)


def matmul(a: Operand, b: Operand) -> Operand:
    """Matrix product a @ b"""
    av, bv = value_of(a), value_of(b)
    if av.shape[1] != bv.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {av.shape} x {bv.shape}")
    return _emit("matmul", av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def spmm(adj: SparseAdjacency, x: Operand) -> Operand:
    """Sparse-dense product adj @ x; differentiable in x only"""
    xv = value_of(x)
    if adj.node_count != xv.shape[0]:
        raise DimensionError(f"spmm shape mismatch: adjacency {adj.node_count}x{adj.node_count} vs {xv.shape}")
    out = np.asarray(adj.matrix @ xv)
    return _emit("spmm", out, (x,), lambda g: (np.asarray(adj.matrix.T @ g),))


def add(a: Operand, b: Operand) -> Operand:
    """Elementwise sum; `b` may be a 1 x k row broadcast over the rows of `a`"""
    av, bv = value_of(a), value_of(b)
    if av.shape == bv.shape:
        return _emit("add", av + bv, (a, b), lambda g: (g, g))
    if bv.shape[0] == 1 and bv.shape[1] == av.shape[1]:
        return _emit("add", av + bv, (a, b), lambda g: (g, g.sum(axis=0, keepdims=True)))
    raise DimensionError(f"add shape mismatch: {av.shape} + {bv.shape}")


def hadamard(a: Operand, b: Operand) -> Operand:
    """Elementwise product"""
    av, bv = value_of(a), value_of(b)
    if av.shape != bv.shape:
        raise DimensionError(f"hadamard shape mismatch: {av.shape} vs {bv.shape}")
    return _emit("hadamard", av * bv, (a, b), lambda g: (g * bv, g * av))


def relu(a: Operand) -> Operand:
    av = value_of(a)
    mask = av > 0
    return _emit("relu", np.where(mask, av, 0.0), (a,), lambda g: (g * mask,))


def concat(parts: Sequence[Operand]) -> Operand:
    """Column-wise concatenation"""
    values = [value_of(p) for p in parts]
    rows = {v.shape[0] for v in values}
    if len(rows) != 1:
        raise DimensionError(f"concat row mismatch: {[v.shape for v in values]}")
    bounds = np.cumsum([0] + [v.shape[1] for v in values])

    def backward_fn(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(values)))

    return _emit("concat", np.concatenate(values, axis=1), tuple(parts), backward_fn)


def row_mean(a: Operand) -> Operand:
    """Mean over rows, giving a 1 x cols matrix"""
    av = value_of(a)
    n = av.shape[0]
    if n == 0:
        raise ContractError("row_mean of a matrix with no rows")
    return _emit(
        "row_mean",
        av.mean(axis=0, keepdims=True),
        (a,),
        lambda g: (np.repeat(g / n, n, axis=0),),
    )


def total(a: Operand) -> Operand:
    """Sum of all entries as a 1 x 1 matrix"""
    av = value_of(a)
    return _emit("total", np.array([[av.sum()]]), (a,), lambda g: (np.full(av.shape, g[0, 0]),))


def mse(prediction: Operand, target: Operand) -> Operand:
    """Mean squared error over all entries as a 1 x 1 matrix"""
    pv, tv = value_of(prediction), value_of(target)
    if pv.shape != tv.shape:
        raise DimensionError(f"mse shape mismatch: {pv.shape} vs {tv.shape}")
    diff = pv - tv
    scale = 2.0 / diff.size

    def backward_fn(g):
        grad = g[0, 0] * scale * diff
        return grad, -grad

    return _emit("mse", np.array([[np.mean(diff * diff)]]), (prediction, target), backward_fn)


def backward(loss: Node, params) -> None:
    """
    Propagate d(loss)/d(slot) into every bound ParamStore slot, then clear the tape

    Args:
        loss: 1 x 1 node produced by traced operations
        params: ParamStore whose slots were bound to the loss's tape
    """
    if not isinstance(loss, Node):
        raise ContractError("backward needs a traced loss node")
    if loss.value.shape != (1, 1):
        raise ContractError(f"backward needs a scalar loss, got shape {loss.value.shape}")

    params.zero_grad()
    tape = loss.tape
    loss.grad = np.ones((1, 1))

    for node in reversed(tape.nodes):
        if node.grad is None:
            continue
        if node.backward_fn is not None:
            for parent, grad in zip(node.parents, node.backward_fn(node.grad)):
                if isinstance(parent, Node) and grad is not None:
                    parent.grad = grad if parent.grad is None else parent.grad + grad
        if node.slot is not None:
            params.accumulate(node.slot, node.grad)

    tape.clear()
    params.mark_backward()
