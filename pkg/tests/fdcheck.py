"""Central finite-difference gradient oracle.

Kept on the test side so it stays independent of the autodiff engine it
checks.  Scalar functions only; float64 inputs keep the difference
quotients well below the tolerances they gate.
"""

import numpy as np

from deidgan import nn

H_DEFAULT = 1e-3


def _perturbed_args(tensors, wrt_index, delta):
    # requires_grad is preserved so functions that differentiate internally
    # (the gradient-penalty path) still see a live graph.
    args = []
    for j, t in enumerate(tensors):
        data = t.data.copy()
        if j == wrt_index:
            data += delta
        args.append(nn.Tensor(data, requires_grad=t.requires_grad))
    return args


def fd_gradient(f, tensors, wrt_index, h=H_DEFAULT):
    """Coordinate-wise central differences of scalar f wrt tensors[wrt_index]."""
    grad = np.zeros(tensors[wrt_index].shape, dtype=np.float64)
    flat = grad.reshape(-1)
    basis = np.zeros_like(grad)
    bflat = basis.reshape(-1)
    for i in range(flat.size):
        vals = []
        bflat[i] = h
        for sign in (+1.0, -1.0):
            vals.append(f(*_perturbed_args(tensors, wrt_index, sign * basis)).item())
        bflat[i] = 0.0
        flat[i] = (vals[0] - vals[1]) / (2.0 * h)
    return grad


def fd_directional(f, tensors, wrt_index, direction, h=H_DEFAULT):
    """Central-difference directional derivative along a fixed direction."""
    vals = []
    for sign in (+1.0, -1.0):
        vals.append(f(*_perturbed_args(tensors, wrt_index, sign * h * direction)).item())
    return (vals[0] - vals[1]) / (2.0 * h)


def rel_err(analytic, numeric):
    denom = max(float(np.max(np.abs(numeric))), 1e-6)
    return float(np.max(np.abs(analytic - numeric))) / denom


def check_grads(f, tensors, wrt=None, h=H_DEFAULT, tol=1e-4):
    """Assert autodiff gradients of scalar f match coordinate-wise FD."""
    idx = list(wrt) if wrt is not None else [
        i for i, t in enumerate(tensors) if t.requires_grad
    ]
    loss = f(*tensors)
    grads = nn.gradients(loss, [tensors[i] for i in idx])
    for g, i in zip(grads, idx):
        num = fd_gradient(f, tensors, i, h)
        e = rel_err(g.data, num)
        assert e <= tol, f"autodiff/FD mismatch on arg {i}: rel err {e:.3e} > {tol}"


def check_grads_directional(f, tensors, wrt, rng, n_dirs=4, h=H_DEFAULT, tol=1e-4):
    """Directional-derivative FD check; tractable for large parameter tensors."""
    loss = f(*tensors)
    grads = nn.gradients(loss, [tensors[i] for i in wrt])
    for g, i in zip(grads, wrt):
        for _ in range(n_dirs):
            v = rng.standard_normal(tensors[i].shape)
            v /= max(np.linalg.norm(v.reshape(-1)), 1e-12)
            num = fd_directional(f, tensors, i, v, h)
            ana = float(np.sum(g.data * v))
            denom = max(abs(num), 1e-6)
            e = abs(ana - num) / denom
            assert e <= tol, (
                f"directional autodiff/FD mismatch on arg {i}: "
                f"rel err {e:.3e} > {tol}"
            )
