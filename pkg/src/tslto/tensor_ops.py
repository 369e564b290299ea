"""Dense third-order tensor algebra: unfolding, mode products, Tucker
reconstruction, masked projection, and first-difference operators.

Unfolding convention: the mode-k unfolding places mode k on the rows; the
column index orders the remaining modes ascending, with the earlier mode
varying fastest.  Under this convention the mode-1 unfolding of a Tucker
reconstruction factors as U1 @ unfold(G, 1) @ kron(U3, U2).T, which is what
the factor-gradient formulas assume.
"""

import numpy as np

MODES = (1, 2, 3)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def kronecker(a, b):
    """Kronecker product of two matrices."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("kronecker requires nonempty matrices")
    return np.kron(a, b)


def unfold(x, mode):
    """Mode-k unfolding of a third-order tensor.

    Returns a (D_k, prod of remaining dims) matrix.  Column index of entry
    (i1, i2, i3) is the remaining indices in ascending mode order, earlier
    mode varying fastest (e.g. mode 1: col = i2 + i3 * D2, zero-based).
    """
    _check_mode(mode)
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={x.ndim}")
    axis = mode - 1
    return np.moveaxis(x, axis, 0).reshape((x.shape[axis], -1), order="F")


def fold(m, mode, dims):
    """Inverse of :func:`unfold`: fold a matrix back into a tensor of `dims`."""
    _check_mode(mode)
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError("dims must have three entries")
    axis = mode - 1
    rest = [d for i, d in enumerate(dims) if i != axis]
    if m.shape != (dims[axis], rest[0] * rest[1]):
        raise ValueError(
            f"matrix shape {m.shape} inconsistent with dims {dims} and mode {mode}"
        )
    t = m.reshape((dims[axis], rest[0], rest[1]), order="F")
    return np.moveaxis(t, 0, axis)


def mode_n_product(x, a, mode):
    """Mode-n product X x_n A; replaces dimension D_n by A.shape[0]."""
    _check_mode(mode)
    x = np.asarray(x)
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] != x.shape[mode - 1]:
        raise ValueError(
            f"matrix shape {a.shape} does not match tensor dim {x.shape[mode - 1]} "
            f"along mode {mode}"
        )
    dims = list(x.shape)
    dims[mode - 1] = a.shape[0]
    return fold(a @ unfold(x, mode), mode, dims)


def tucker_reconstruct(g, u1, u2, u3):
    """Reconstruct G x_1 U1 x_2 U2 x_3 U3 from a core tensor and factors."""
    out = mode_n_product(g, u1, 1)
    out = mode_n_product(out, u2, 2)
    return mode_n_product(out, u3, 3)


def project_observed(x, mask):
    """Keep entries of x on the observation mask, zero elsewhere."""
    x = np.asarray(x)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ValueError(f"mask shape {mask.shape} != tensor shape {x.shape}")
    return np.where(mask, x, 0.0)


def toeplitz_diff(m):
    """Consecutive-row differences: row j of the result is m[j] - m[j+1].

    Applies the (n-1) x n banded [1, -1] difference matrix without
    materializing it.
    """
    m = np.asarray(m)
    if m.shape[0] < 2:
        raise ValueError("toeplitz_diff needs at least two rows")
    return m[:-1] - m[1:]


def toeplitz_diff_adjoint(m):
    """Adjoint (transpose) of :func:`toeplitz_diff`: maps (n-1) x c to n x c."""
    m = np.asarray(m)
    out = np.zeros((m.shape[0] + 1, m.shape[1]), dtype=np.result_type(m, float))
    out[:-1] += m
    out[1:] -= m
    return out


def frobenius_norm(x):
    """Frobenius norm of a tensor or matrix."""
    return float(np.linalg.norm(np.asarray(x).ravel()))


def l0_count(x):
    """Number of nonzero entries."""
    return int(np.count_nonzero(np.asarray(x)))


def l20_count(m):
    """Number of nonzero rows of a matrix."""
    m = np.asarray(m)
    return int(np.count_nonzero(np.any(m != 0, axis=1)))
