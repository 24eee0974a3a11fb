"""
Parameter storage and the Adam optimizer.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple

import numpy as np

from src.errors import ContractError, DimensionError
from src.numeric.autodiff import Node, Tape
from src.numeric.matrix import check_finite


class ParamStore:
    """
    Named parameter slots, each a value matrix with a same-shape gradient

    Gradients are zeroed at the start of every backward pass.
    """

    def __init__(self):
        self.values: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.has_gradients = False

    def add(self, name: str, value: np.ndarray) -> None:
        value = np.array(value, dtype=np.float64)
        if value.ndim != 2:
            raise DimensionError(f"Slot {name} must be 2-D, got shape {value.shape}")
        if name in self.values:
            raise ContractError(f"Slot {name} already exists")
        self.values[name] = value
        self.grads[name] = np.zeros_like(value)

    def bind(self, tape: Tape) -> Dict[str, Node]:
        """Leaf node per slot on `tape`"""
        return {name: tape.leaf(value, slot=name) for name, value in self.values.items()}

    def zero_grad(self) -> None:
        for name, value in self.values.items():
            self.grads[name] = np.zeros_like(value)

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        if grad.shape != self.values[name].shape:
            raise DimensionError(f"Gradient for {name} has shape {grad.shape}, slot is {self.values[name].shape}")
        self.grads[name] = self.grads[name] + grad

    def mark_backward(self) -> None:
        self.has_gradients = True

    def shapes(self) -> Dict[str, Tuple[int, int]]:
        return {name: value.shape for name, value in self.values.items()}

    def names(self) -> List[str]:
        return list(self.values)

    def copy(self) -> "ParamStore":
        clone = ParamStore()
        for name, value in self.values.items():
            clone.add(name, value)
        return clone

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def __len__(self):
        return len(self.values)


@dataclass
class AdamState:
    """Adam moments and hyperparameters"""
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: ParamStore, state: AdamState) -> None:
    """
    One bias-corrected Adam update of every slot, in place

    Args:
        params: Parameters with gradients from a preceding backward
        state: Optimizer state; step counter is incremented
    """
    if not params.has_gradients:
        raise ContractError("adam_step called before any backward pass")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step

    for name in params:
        g = params.grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        if state.m[name].shape != g.shape:
            raise DimensionError(f"Adam moment for {name} has shape {state.m[name].shape}, gradient is {g.shape}")

        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)

        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        updated = params.values[name] - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        params.values[name] = check_finite(updated, f"adam update of {name}")
