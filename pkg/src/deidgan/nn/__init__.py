from .tensor import (
    FP16_EMULATED,
    FP32_MASTER,
    Tensor,
    absolute,
    add,
    astensor,
    backward,
    broadcast_to,
    clamp,
    col2im,
    concat,
    div,
    exp,
    grad_mode,
    gradients,
    im2col,
    leaky_relu,
    log,
    log_softmax,
    make_op,
    matmul,
    max_detached,
    maximum_scalar,
    mul,
    narrow,
    neg,
    no_grad,
    power,
    relu,
    reshape,
    sigmoid,
    softmax,
    sqrt,
    sub,
    tanh,
    tmean,
    transpose,
    tsum,
)
from .ops import (
    conv2d,
    conv2d_transpose,
    dense,
    he_normal,
    instance_norm,
    l2_normalize,
    op_activation,
    op_matmul,
    spatial_broadcast,
)
from .optim import AdamState, adam_deltas, adam_step

__all__ = [
    "FP16_EMULATED",
    "FP32_MASTER",
    "AdamState",
    "Tensor",
    "absolute",
    "adam_deltas",
    "adam_step",
    "add",
    "astensor",
    "backward",
    "broadcast_to",
    "clamp",
    "col2im",
    "concat",
    "conv2d",
    "conv2d_transpose",
    "dense",
    "div",
    "exp",
    "grad_mode",
    "gradients",
    "he_normal",
    "im2col",
    "instance_norm",
    "l2_normalize",
    "leaky_relu",
    "log",
    "log_softmax",
    "make_op",
    "matmul",
    "max_detached",
    "maximum_scalar",
    "mul",
    "narrow",
    "neg",
    "no_grad",
    "op_activation",
    "op_matmul",
    "power",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "spatial_broadcast",
    "sqrt",
    "sub",
    "tanh",
    "tmean",
    "transpose",
    "tsum",
]
