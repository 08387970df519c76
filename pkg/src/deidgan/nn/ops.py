"""Layer-level operations composed from tensor primitives.

Convolutions use the cross-correlation convention with zero padding;
shapes follow floor((H + 2*pad - kh)/stride) + 1.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolation
from . import tensor as T
from .tensor import Tensor


def op_matmul(a: Tensor, b: Tensor) -> Tensor:
    return T.matmul(a, b)


def conv2d(x: Tensor, w: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """Cross-correlate x (N,C,H,W) with filters w (F,C,kh,kw)."""
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ContractViolation(
            f"conv2d expects 4-d input and weight, got {x.shape} and {w.shape}"
        )
    n, c, h, wid = x.shape
    f, cw, kh, kw = w.shape
    if c != cw:
        raise ContractViolation(f"conv2d channel mismatch: input {c}, weight {cw}")
    if stride < 1:
        raise ContractViolation(f"conv2d stride must be >= 1, got {stride}")
    oh = T._conv_out_extent(h, kh, stride, pad)
    ow = T._conv_out_extent(wid, kw, stride, pad)
    if oh < 1 or ow < 1:
        raise ContractViolation(
            f"conv2d output extent non-positive for input {x.shape}, "
            f"kernel {(kh, kw)}, stride {stride}, pad {pad}"
        )
    cols = T.im2col(x, kh, kw, stride, pad)
    w2 = T.reshape(w, (f, c * kh * kw))
    out = T.matmul(w2, cols)  # (F, N*OH*OW)
    return T.transpose(T.reshape(out, (f, n, oh, ow)), (1, 0, 2, 3))


def conv2d_transpose(x: Tensor, w: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """Adjoint of conv2d: maps (N,F,H,W) through w (F,C,kh,kw) to
    (N,C,(H-1)*stride - 2*pad + kh, ...)."""
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ContractViolation(
            f"conv2d_transpose expects 4-d input and weight, got {x.shape} and {w.shape}"
        )
    n, f, h, wid = x.shape
    fw, c, kh, kw = w.shape
    if f != fw:
        raise ContractViolation(
            f"conv2d_transpose channel mismatch: input {f}, weight {fw}"
        )
    if stride < 1:
        raise ContractViolation(f"conv2d_transpose stride must be >= 1, got {stride}")
    oh = (h - 1) * stride - 2 * pad + kh
    ow = (wid - 1) * stride - 2 * pad + kw
    if oh < 1 or ow < 1:
        raise ContractViolation(
            f"conv2d_transpose output extent non-positive for input {x.shape}, "
            f"kernel {(kh, kw)}, stride {stride}, pad {pad}"
        )
    x2 = T.reshape(T.transpose(x, (1, 0, 2, 3)), (f, n * h * wid))
    w2 = T.reshape(w, (f, c * kh * kw))
    cols = T.matmul(T.transpose(w2), x2)  # (C*kh*kw, N*H*W)
    return T.col2im(cols, (n, c, oh, ow), kh, kw, stride, pad)


def op_activation(x: Tensor, kind: str, slope: float = 0.01) -> Tensor:
    if kind == "relu":
        return T.relu(x)
    if kind == "leaky_relu":
        return T.leaky_relu(x, slope)
    if kind == "tanh":
        return T.tanh(x)
    raise ContractViolation(f"unknown activation kind: {kind!r}")


def instance_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-sample, per-channel standardization over H*W, then affine."""
    if eps <= 0:
        raise ContractViolation(f"instance_norm eps must be > 0, got {eps}")
    if x.data.ndim != 4:
        raise ContractViolation(f"instance_norm expects (N,C,H,W), got {x.shape}")
    mu = T.tmean(x, axis=(2, 3), keepdims=True)
    xc = T.sub(x, mu)
    var = T.tmean(T.mul(xc, xc), axis=(2, 3), keepdims=True)
    xn = T.div(xc, T.sqrt(T.add(var, eps)))
    c = x.shape[1]
    g4 = T.reshape(gamma, (1, c, 1, 1))
    b4 = T.reshape(beta, (1, c, 1, 1))
    return T.add(T.mul(xn, g4), b4)


def l2_normalize(v: Tensor, eps: float = 1e-12) -> Tensor:
    """v / max(||v||_2, eps) along the last axis."""
    if eps <= 0:
        raise ContractViolation(f"l2_normalize eps must be > 0, got {eps}")
    norm = T.sqrt(T.tsum(T.mul(v, v), axis=-1, keepdims=True))
    return T.div(v, T.maximum_scalar(norm, eps))


def dense(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x (N,din) @ w (din,dout) + b."""
    out = T.matmul(x, w)
    if b is not None:
        out = T.add(out, b)
    return out


def spatial_broadcast(v: Tensor, h: int, w: int) -> Tensor:
    """Tile per-sample vectors (N,L) into constant feature planes (N,L,h,w)."""
    n, l = v.shape
    return T.broadcast_to(T.reshape(v, (n, l, 1, 1)), (n, l, h, w))


def he_normal(rng: np.random.Generator, shape, fan_in: int, gain: float = 2.0):
    std = float(np.sqrt(gain / fan_in))
    return (rng.standard_normal(shape) * std).astype(np.float32)
