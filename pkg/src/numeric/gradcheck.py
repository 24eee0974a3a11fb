"""
Finite-difference gradient checking.
"""

from typing import Callable, Dict

import numpy as np

from src.numeric.autodiff import Node, backward
from src.numeric.optim import ParamStore


def gradient_check(
    loss_fn: Callable[[ParamStore], Node],
    params: ParamStore,
    h: float = 1e-5,
) -> Dict[str, float]:
    """
    Compare reverse-mode gradients with central differences

    `loss_fn` must bind `params` to a fresh tape and return the traced scalar
    loss; it must be deterministic (re-create any random stream inside).

    Args:
        loss_fn: Builds the loss from the current parameter values
        params: Parameters to check (values are restored afterwards)
        h: Finite-difference step

    Returns:
        Relative error per slot: ||g_ad - g_fd|| / max(||g_ad||, ||g_fd||, 1e-12)
    """
    backward(loss_fn(params), params)
    analytic = {name: grad.copy() for name, grad in params.grads.items()}

    errors = {}
    for name in params.names():
        original = params.values[name]
        numeric = np.zeros_like(original)
        for index in np.ndindex(original.shape):
            plus = original.copy()
            plus[index] += h
            params.values[name] = plus
            f_plus = loss_fn(params).value[0, 0]

            minus = original.copy()
            minus[index] -= h
            params.values[name] = minus
            f_minus = loss_fn(params).value[0, 0]

            numeric[index] = (f_plus - f_minus) / (2.0 * h)
        params.values[name] = original

        scale = max(np.linalg.norm(analytic[name]), np.linalg.norm(numeric), 1e-12)
        errors[name] = float(np.linalg.norm(analytic[name] - numeric) / scale)
    return errors
