"""Real-dataset preparation: rank selection from the mode unfoldings'
singular spectra, Tucker smoothing to build a low-rank ground truth, and the
invertible core-scaling transform applied before solving."""

from dataclasses import dataclass

import numpy as np

from .solver import hosvd_factors
from .tensor_ops import mode_n_product, unfold


@dataclass
class ScaleTransform:
    shift: float = 20.0
    core_scale: float = 0.14
    ranks: tuple = (2, 5, 6)

    def validate(self):
        if self.core_scale == 0:
            raise ValueError("core_scale must be nonzero")


def select_rank(x, theta=0.95):
    """Smallest per-mode rank capturing a theta share of squared singular mass."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ValueError("rank selection is undefined for the zero tensor")
    ranks = []
    for mode in (1, 2, 3):
        sv2 = np.linalg.svd(unfold(x, mode), compute_uv=False) ** 2
        shares = np.cumsum(sv2) / np.sum(sv2)
        ranks.append(int(np.argmax(shares >= theta)) + 1)
    return tuple(ranks)


def hosvd(x, ranks):
    """Truncated HOSVD: (core, [u1, u2, u3])."""
    x = np.asarray(x, dtype=float)
    if any(r > d for r, d in zip(ranks, x.shape)):
        raise ValueError(f"ranks {tuple(ranks)} exceed dims {x.shape}")
    factors = hosvd_factors(x, ranks)
    core = x
    for mode, u in enumerate(factors, start=1):
        core = mode_n_product(core, u.T, mode)
    return core, factors


def _reconstruct(core, factors):
    out = core
    for mode, u in enumerate(factors, start=1):
        out = mode_n_product(out, u, mode)
    return out


def tucker_smooth(x, ranks):
    """HOSVD truncation at the given ranks, then reconstruction."""
    core, factors = hosvd(x, ranks)
    return _reconstruct(core, factors)


def scale_transform(x, t=None):
    """Shift, decompose, scale the core, reconstruct."""
    t = t or ScaleTransform()
    t.validate()
    core, factors = hosvd(np.asarray(x, dtype=float) - t.shift, t.ranks)
    return _reconstruct(core * t.core_scale, factors)


def scale_revert(x, t=None):
    """Inverse of :func:`scale_transform` on rank-exact inputs."""
    t = t or ScaleTransform()
    t.validate()
    core, factors = hosvd(np.asarray(x, dtype=float), t.ranks)
    return _reconstruct(core / t.core_scale, factors) + t.shift


def observation_mask_from_zeros(x):
    """Mask of observed entries for datasets encoding missing values as zeros."""
    return np.asarray(x) != 0
