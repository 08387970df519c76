"""Dense tensors with define-by-run reverse-mode automatic differentiation.

Every operation records its inputs on a per-pass tape (a DAG in creation
order).  Backward rules are themselves written in terms of tensor
operations, so gradients can be differentiated again (needed by the
critic's gradient-norm regularizer).
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from ..errors import ContractViolation

FP32_MASTER = "fp32-master"
FP16_EMULATED = "fp16-emulated"

# Grad-recording switch, shared by every op in the process.  Single-element
# list so closures observe toggles.
_GRAD_ENABLED = [True]


@contextmanager
def no_grad():
    """Disable tape recording inside the block."""
    prev = _GRAD_ENABLED[0]
    _GRAD_ENABLED[0] = False
    try:
        yield
    finally:
        _GRAD_ENABLED[0] = prev


@contextmanager
def grad_mode(enabled: bool):
    prev = _GRAD_ENABLED[0]
    _GRAD_ENABLED[0] = enabled
    try:
        yield
    finally:
        _GRAD_ENABLED[0] = prev


def _as_array(data, dtype=None):
    arr = np.asarray(data)
    if dtype is not None:
        return arr.astype(dtype, copy=False)
    if arr.dtype == np.float64 or arr.dtype == np.float32:
        return arr
    return arr.astype(np.float32)


class Tensor:
    """N-dimensional array with optional tape linkage.

    data is a flat-compatible numpy array (row-major); precision tags the
    storage discipline (fp16-emulated values are constrained to the
    binary16-representable set but kept in float storage).
    """

    __slots__ = ("data", "requires_grad", "precision", "op", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False, dtype=None, precision=FP32_MASTER):
        self.data = _as_array(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.precision = precision
        self.op = "leaf"
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, precision=self.precision)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self.op}, requires_grad={self.requires_grad})"

    # operator sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def astensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def make_op(data, parents, vjp, op_name: str, precision=FP32_MASTER) -> Tensor:
    """Build a graph node.  Extension point for ops defined outside this
    module (e.g. the binary16 storage cast)."""
    out = Tensor(data, precision=precision)
    out.op = op_name
    if _GRAD_ENABLED[0] and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _sum_to(g: Tensor, shape: tuple) -> Tensor:
    """Reduce a broadcast gradient back to the given shape."""
    if g.shape == shape:
        return g
    extra = g.data.ndim - len(shape)
    if extra > 0:
        g = tsum(g, axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = tsum(g, axis=axes, keepdims=True)
    if g.shape != shape:
        g = reshape(g, shape)
    return g


# -- elementwise binary ops ---------------------------------------------


def add(a, b) -> Tensor:
    a, b = astensor(a), astensor(b)
    return make_op(
        a.data + b.data,
        (a, b),
        lambda g: (_sum_to(g, a.shape), _sum_to(g, b.shape)),
        "add",
    )


def sub(a, b) -> Tensor:
    a, b = astensor(a), astensor(b)
    return make_op(
        a.data - b.data,
        (a, b),
        lambda g: (_sum_to(g, a.shape), _sum_to(neg(g), b.shape)),
        "sub",
    )


def mul(a, b) -> Tensor:
    a, b = astensor(a), astensor(b)
    return make_op(
        a.data * b.data,
        (a, b),
        lambda g: (_sum_to(mul(g, b), a.shape), _sum_to(mul(g, a), b.shape)),
        "mul",
    )


def div(a, b) -> Tensor:
    a, b = astensor(a), astensor(b)
    return make_op(
        a.data / b.data,
        (a, b),
        lambda g: (
            _sum_to(div(g, b), a.shape),
            _sum_to(neg(div(mul(g, a), mul(b, b))), b.shape),
        ),
        "div",
    )


def neg(a) -> Tensor:
    a = astensor(a)
    return make_op(-a.data, (a,), lambda g: (neg(g),), "neg")


def power(a, exponent: float) -> Tensor:
    a = astensor(a)
    e = float(exponent)
    return make_op(
        a.data**e,
        (a,),
        lambda g: (mul(g, mul(power(a, e - 1.0), e)),),
        "pow",
    )


# -- elementwise unary ops ----------------------------------------------


def exp(a) -> Tensor:
    a = astensor(a)
    out = make_op(np.exp(a.data), (a,), None, "exp")
    if out._parents:
        out._vjp = lambda g: (mul(g, out),)
    return out


def log(a) -> Tensor:
    a = astensor(a)
    return make_op(np.log(a.data), (a,), lambda g: (div(g, a),), "log")


def sqrt(a) -> Tensor:
    a = astensor(a)
    out = make_op(np.sqrt(a.data), (a,), None, "sqrt")
    if out._parents:
        out._vjp = lambda g: (div(mul(g, 0.5), out),)
    return out


def tanh(a) -> Tensor:
    a = astensor(a)
    out = make_op(np.tanh(a.data), (a,), None, "tanh")
    if out._parents:
        out._vjp = lambda g: (mul(g, sub(1.0, mul(out, out))),)
    return out


def sigmoid(a) -> Tensor:
    a = astensor(a)
    out = make_op(1.0 / (1.0 + np.exp(-a.data)), (a,), None, "sigmoid")
    if out._parents:
        out._vjp = lambda g: (mul(g, mul(out, sub(1.0, out))),)
    return out


def relu(a) -> Tensor:
    a = astensor(a)
    mask = (a.data > 0).astype(a.data.dtype)
    return make_op(a.data * mask, (a,), lambda g: (mul(g, Tensor(mask)),), "relu")


def leaky_relu(a, slope: float) -> Tensor:
    if not 0.0 < slope < 1.0:
        raise ContractViolation(f"leaky_relu slope must be in (0,1), got {slope}")
    a = astensor(a)
    mask = np.where(a.data > 0, a.data.dtype.type(1), a.data.dtype.type(slope))
    return make_op(a.data * mask, (a,), lambda g: (mul(g, Tensor(mask)),), "leaky_relu")


def absolute(a) -> Tensor:
    a = astensor(a)
    sign = np.sign(a.data)
    return make_op(np.abs(a.data), (a,), lambda g: (mul(g, Tensor(sign)),), "abs")


def clamp(a, lo=None, hi=None) -> Tensor:
    a = astensor(a)
    data = np.clip(a.data, lo, hi)
    mask = np.ones_like(a.data)
    if lo is not None:
        mask = mask * (a.data >= lo)
    if hi is not None:
        mask = mask * (a.data <= hi)
    return make_op(data, (a,), lambda g: (mul(g, Tensor(mask)),), "clamp")


def maximum_scalar(a, c: float) -> Tensor:
    return clamp(a, lo=c)


# -- structural ops ------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = astensor(a), astensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractViolation(
            f"matmul expects (r,k)x(k,c) operands, got {a.shape} x {b.shape}"
        )
    return make_op(
        a.data @ b.data,
        (a, b),
        lambda g: (matmul(g, transpose(b)), matmul(transpose(a), g)),
        "matmul",
    )


def transpose(a, axes=None) -> Tensor:
    a = astensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.data.ndim)))
    inv = tuple(np.argsort(axes))
    return make_op(
        np.transpose(a.data, axes),
        (a,),
        lambda g: (transpose(g, inv),),
        "transpose",
    )


def reshape(a, shape) -> Tensor:
    a = astensor(a)
    orig = a.shape
    return make_op(
        a.data.reshape(shape), (a,), lambda g: (reshape(g, orig),), "reshape"
    )


def broadcast_to(a, shape) -> Tensor:
    a = astensor(a)
    orig = a.shape
    return make_op(
        np.broadcast_to(a.data, shape).copy(),
        (a,),
        lambda g: (_sum_to(g, orig),),
        "broadcast",
    )


def concat(parts, axis: int) -> Tensor:
    parts = [astensor(p) for p in parts]
    sizes = [p.shape[axis] for p in parts]
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def vjp(g):
        return tuple(
            narrow(g, axis, int(offsets[i]), sizes[i]) for i in range(len(parts))
        )

    return make_op(np.concatenate([p.data for p in parts], axis=axis), tuple(parts), vjp, "concat")


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    a = astensor(a)
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, start + length)
    full = a.shape

    def vjp(g):
        return (_embed(g, axis, start, full),)

    return make_op(a.data[tuple(idx)].copy(), (a,), vjp, "narrow")


def _embed(a, axis: int, start: int, full_shape: tuple) -> Tensor:
    a = astensor(a)
    idx = [slice(None)] * len(full_shape)
    idx[axis] = slice(start, start + a.shape[axis])
    data = np.zeros(full_shape, dtype=a.data.dtype)
    data[tuple(idx)] = a.data
    length = a.shape[axis]

    def vjp(g):
        return (narrow(g, axis, start, length),)

    return make_op(data, (a,), vjp, "embed")


def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = astensor(a)
    in_shape = a.shape
    if axis is None:
        axes = tuple(range(a.data.ndim))
    elif isinstance(axis, int):
        axes = (axis,)
    else:
        axes = tuple(axis)

    def vjp(g):
        kshape = list(in_shape)
        for ax in axes:
            kshape[ax] = 1
        return (broadcast_to(reshape(g, tuple(kshape)), in_shape),)

    return make_op(np.sum(a.data, axis=axis, keepdims=keepdims), (a,), vjp, "sum")


def tmean(a, axis=None, keepdims=False) -> Tensor:
    a = astensor(a)
    if axis is None:
        count = a.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def max_detached(a, axis=None, keepdims=False) -> Tensor:
    """Maximum as a constant (no gradient path); numerical-stability helper."""
    a = astensor(a)
    return Tensor(np.max(a.data, axis=axis, keepdims=keepdims))


def log_softmax(a, axis: int) -> Tensor:
    a = astensor(a)
    shifted = sub(a, max_detached(a, axis=axis, keepdims=True))
    return sub(shifted, log(tsum(exp(shifted), axis=axis, keepdims=True)))


def softmax(a, axis: int) -> Tensor:
    return exp(log_softmax(a, axis))


# -- patch extraction (the convolution workhorse) ------------------------


def _conv_out_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    return (extent + 2 * pad - kernel) // stride + 1


def _im2col_data(x: np.ndarray, kh, kw, stride, pad) -> np.ndarray:
    n, c, h, w = x.shape
    oh = _conv_out_extent(h, kh, stride, pad)
    ow = _conv_out_extent(w, kw, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = np.empty((c, kh, kw, n, oh, ow), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, i, j] = xp[
                :, :, i : i + stride * oh : stride, j : j + stride * ow : stride
            ].transpose(1, 0, 2, 3)
    return cols.reshape(c * kh * kw, n * oh * ow)


def _col2im_data(cols: np.ndarray, x_shape, kh, kw, stride, pad) -> np.ndarray:
    n, c, h, w = x_shape
    oh = _conv_out_extent(h, kh, stride, pad)
    ow = _conv_out_extent(w, kw, stride, pad)
    cols6 = cols.reshape(c, kh, kw, n, oh, ow)
    buf = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            buf[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += (
                cols6[:, i, j].transpose(1, 0, 2, 3)
            )
    if pad:
        return buf[:, :, pad : pad + h, pad : pad + w].copy()
    return buf


def im2col(x, kh: int, kw: int, stride: int, pad: int) -> Tensor:
    """Unfold (N,C,H,W) into patch columns (C*kh*kw, N*OH*OW)."""
    x = astensor(x)
    shape = x.shape

    def vjp(g):
        return (col2im(g, shape, kh, kw, stride, pad),)

    return make_op(_im2col_data(x.data, kh, kw, stride, pad), (x,), vjp, "im2col")


def col2im(cols, x_shape, kh: int, kw: int, stride: int, pad: int) -> Tensor:
    """Adjoint of im2col: scatter-add patch columns back to (N,C,H,W)."""
    cols = astensor(cols)

    def vjp(g):
        return (im2col(g, kh, kw, stride, pad),)

    return make_op(_col2im_data(cols.data, x_shape, kh, kw, stride, pad), (cols,), vjp, "col2im")


# -- reverse-mode driver --------------------------------------------------


def _topo_order(root: Tensor) -> list:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def gradients(output: Tensor, wrt, create_graph: bool = False) -> list[Tensor]:
    """Reverse-mode gradients of a scalar output for each tensor in wrt.

    Tensors unreachable from the output get zero gradients.  With
    create_graph the returned gradients are themselves differentiable.
    """
    if output.data.size != 1:
        raise ContractViolation(
            f"gradients requires a scalar output, got shape {output.shape}"
        )
    wrt = list(wrt)
    grads: dict[int, Tensor] = {id(output): Tensor(np.ones_like(output.data))}
    order = _topo_order(output)
    with grad_mode(create_graph):
        for node in reversed(order):
            g = grads.get(id(node))
            if g is None or node._vjp is None:
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None or not parent.requires_grad:
                    continue
                held = grads.get(id(parent))
                grads[id(parent)] = pg if held is None else add(held, pg)
    out = []
    for w in wrt:
        g = grads.get(id(w))
        out.append(g if g is not None else Tensor(np.zeros_like(w.data)))
    return out


def backward(loss: Tensor, params: dict) -> dict:
    """Gradient map name -> Tensor for a named parameter collection."""
    names = list(params)
    gs = gradients(loss, [params[n] for n in names])
    return dict(zip(names, gs))
