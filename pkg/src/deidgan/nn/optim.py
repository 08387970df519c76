"""Bias-corrected Adam on named parameter collections."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .tensor import Tensor


@dataclass
class AdamState:
    """First/second moment accumulators plus the applied-step counter.

    t advances only on applied steps; a skipped step leaves the state
    bitwise untouched.
    """

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    def ensure(self, name: str, shape, dtype) -> None:
        if name not in self.m:
            self.m[name] = np.zeros(shape, dtype=dtype)
            self.v[name] = np.zeros(shape, dtype=dtype)


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    alpha: float,
    beta1: float,
    beta2: float,
    eps: float = 1e-8,
) -> None:
    """Apply one Adam update in place and advance the step counter."""
    if alpha < 0:
        raise ContractViolation(f"adam_step alpha must be >= 0, got {alpha}")
    t = state.t + 1
    for name, p in params.items():
        g = np.asarray(grads[name])
        if g.shape != p.data.shape:
            raise ContractViolation(
                f"adam_step gradient shape {g.shape} != parameter shape "
                f"{p.data.shape} for {name!r}"
            )
        state.ensure(name, p.data.shape, p.data.dtype)
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        mhat = m / (1.0 - beta1**t)
        vhat = v / (1.0 - beta2**t)
        p.data -= (alpha * mhat / (np.sqrt(vhat) + eps)).astype(p.data.dtype)
    state.t = t


def adam_deltas(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    alpha: float,
    beta1: float,
    beta2: float,
    eps: float = 1e-8,
) -> dict[str, np.ndarray]:
    """Compute Adam increments against plain arrays without applying them.

    Used by the master-weight update path, which owns the commit step.
    Advances moments and t exactly like adam_step.
    """
    t = state.t + 1
    deltas = {}
    for name, p in params.items():
        g = np.asarray(grads[name])
        if g.shape != p.shape:
            raise ContractViolation(
                f"adam gradient shape {g.shape} != parameter shape {p.shape} "
                f"for {name!r}"
            )
        state.ensure(name, p.shape, p.dtype)
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        mhat = m / (1.0 - beta1**t)
        vhat = v / (1.0 - beta2**t)
        deltas[name] = (-alpha * mhat / (np.sqrt(vhat) + eps)).astype(p.dtype)
    state.t = t
    return deltas
