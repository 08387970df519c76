"""Emulated mixed-precision training.

Half precision is emulated in software: working values are constrained to
the binary16-representable set but kept in float32 storage, so every
numerical effect (flush-to-zero, overflow to infinity, master-weight
accumulation below working resolution) is reproduced without half-precision
hardware.  A parallel ledger accounts storage bytes as if buffers really
were 2 bytes per element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .nn import Tensor
from .nn.optim import AdamState, adam_deltas

SCALE_INIT = 2.0**12
SCALE_MIN = 2.0**-14
SCALE_MAX = 2.0**24
GROWTH_INTERVAL = 200


def quantize_fp16(x):
    """Round to the nearest IEEE-754 binary16 value (ties to even).

    Values above 65504 overflow to +-infinity per the IEEE rounding rule;
    magnitudes below 2**-25 flush to zero; subnormals survive down to
    2**-24.  Accepts floats, arrays, or tensors and returns the same kind.
    """
    if isinstance(x, Tensor):
        return Tensor(quantize_fp16(x.data), precision=nn.FP16_EMULATED)
    arr = np.asarray(x)
    with np.errstate(over="ignore"):
        q = arr.astype(np.float16)
    out = q.astype(np.float32 if arr.dtype != np.float64 else np.float64)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def fp16_boundary(x: Tensor) -> Tensor:
    """Layer-boundary storage cast.

    Forward values are binary16-rounded; the straight-through backward also
    binary16-rounds the incoming gradient, emulating half-precision storage
    of activations and activation gradients.
    """

    def vjp(g):
        return (fp16_boundary(g),)

    with np.errstate(over="ignore"):
        data = x.data.astype(np.float16).astype(x.data.dtype)
    return nn.make_op(data, (x,), vjp, "fp16_cast", precision=nn.FP16_EMULATED)


@dataclass
class LossScaler:
    """Dynamic power-of-two loss scale with halve-on-overflow policy."""

    scale: float = SCALE_INIT
    growth_interval: int = GROWTH_INTERVAL
    consecutive_good_steps: int = 0

    def note_overflow(self) -> None:
        self.scale = max(self.scale / 2.0, SCALE_MIN)
        self.consecutive_good_steps = 0

    def note_good_step(self) -> None:
        self.consecutive_good_steps += 1
        if self.consecutive_good_steps >= self.growth_interval:
            self.scale = min(self.scale * 2.0, SCALE_MAX)
            self.consecutive_good_steps = 0


@dataclass
class MemoryLedger:
    """Logical byte accounting for the training state.

    Element counts are mode-independent; bytes per element depend on the
    storage mode: mixed precision keeps working weights and activations at
    2 B/element plus full-precision masters, while moments stay 4 B/element
    in both modes.
    """

    elements: dict[str, int] = field(
        default_factory=lambda: {"weights": 0, "activations": 0, "moments": 0}
    )

    def register(self, category: str, n_elements: int) -> None:
        self.elements[category] = self.elements.get(category, 0) + int(n_elements)

    def report(self, mode: str) -> dict:
        w, a, m = (
            self.elements.get("weights", 0),
            self.elements.get("activations", 0),
            self.elements.get("moments", 0),
        )
        if mode == "mpt":
            wb, ab, mb = 6 * w, 2 * a, 4 * m
        elif mode == "fp32":
            wb, ab, mb = 4 * w, 4 * a, 4 * m
        else:
            raise ValueError(f"unknown ledger mode: {mode!r}")
        return {
            "mode": mode,
            "weights_bytes": wb,
            "activations_bytes": ab,
            "moments_bytes": mb,
            "total_bytes": wb + ab + mb,
        }


def memory_report(ledger: MemoryLedger) -> dict:
    """Per-category and grand totals for both storage modes."""
    return {"fp32": ledger.report("fp32"), "mpt": ledger.report("mpt")}


class MasterWeights:
    """Full-precision master copy per parameter plus the binary16-constrained
    working copy the forward/backward passes actually see."""

    def __init__(self, params: dict[str, Tensor]):
        self.params = params
        self.master = {n: p.data.astype(np.float32, copy=True) for n, p in params.items()}
        for p in params.values():
            p.data = quantize_fp16(p.data)
            p.precision = nn.FP16_EMULATED

    def apply_deltas(self, deltas: dict[str, np.ndarray]) -> None:
        for name, d in deltas.items():
            self.master[name] += d
            self.params[name].data = quantize_fp16(self.master[name])

    def working_matches_master(self) -> bool:
        return all(
            np.array_equal(self.params[n].data, quantize_fp16(m))
            for n, m in self.master.items()
        )


def scaled_backward(loss: Tensor, scaler: LossScaler, params: dict[str, Tensor]) -> dict:
    """Gradients of (scale * loss), binary16-rounded for storage.

    Overflowed entries come back infinite and are caught downstream by
    check_finite_and_unscale.
    """
    scaled = nn.mul(loss, scaler.scale)
    grads = nn.backward(scaled, params)
    return {n: quantize_fp16(g.data) for n, g in grads.items()}


def check_finite_and_unscale(grads: dict, scaler: LossScaler):
    """Either (True, fp32 unscaled gradients) or (False, None) on overflow.

    Overflow halves the scale; it is a normal control-flow outcome.
    """
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            scaler.note_overflow()
            return False, None
    inv = 1.0 / scaler.scale
    return True, {n: (g * inv).astype(np.float32) for n, g in grads.items()}


def master_update(
    mw: MasterWeights,
    grads_fp32: dict[str, np.ndarray],
    state: AdamState,
    alpha: float,
    beta1: float,
    beta2: float,
    eps: float = 1e-8,
) -> None:
    """Adam step on the fp32 masters; working copies re-derived by
    quantization.  The step counter advances only here (applied steps)."""
    deltas = adam_deltas(mw.master, grads_fp32, state, alpha, beta1, beta2, eps)
    mw.apply_deltas(deltas)
