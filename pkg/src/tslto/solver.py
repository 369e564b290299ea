"""ADMM driver for the sparse low-rank tensor recovery model.

One outer iteration updates, in order: the completed tensor X, the Tucker
core G, the three factors U1-U3 (Gauss-Seidel, each by a curvilinear
manifold search), the anomaly tensor R (one backtracking proximal-gradient
step), the low-rank surrogate L, the auxiliary blocks Y1-Y3 and Z (group /
elementwise hard thresholds), and finally the Lagrange multipliers.  The
penalty weights alpha, gamma and s grow by a fixed factor each iteration up
to a cap.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .prox import group_hard_threshold_l20, hard_threshold_l0
from .stiefel import (
    SmoothObjective,
    factor_coefficient,
    minimize_on_stiefel,
)
from .tensor_ops import (
    fold,
    frobenius_norm,
    l0_count,
    l20_count,
    mode_n_product,
    project_observed,
    toeplitz_diff,
    toeplitz_diff_adjoint,
    tucker_reconstruct,
    unfold,
)


class SolverDivergenceError(RuntimeError):
    """Raised when the iteration produces non-finite state."""


@dataclass
class SolverConfig:
    beta: float = 450.0
    lam: tuple = (1.2, 1.2, 1.2)
    mu1: float = 5.0
    mu2: float = 20.0
    alpha: tuple = (100.0, 100.0, 100.0)
    gamma: float = 10.0
    s: float = 2.0
    growth: float = 1.15
    penalty_cap: float = 100.0
    eps: float = 1e-4
    ranks: tuple = (3, 3, 3)
    max_outer: int = 2000
    max_inner: int = 60
    prox_lambda0: float = 0.0  # 0 means 1/s at initialization
    prox_rho: float = 0.5
    seed: int = 0

    def validate(self):
        if self.beta < 0 or self.mu1 < 0 or self.mu2 < 0 or min(self.lam) < 0:
            raise ValueError("objective weights must be nonnegative")
        if min(self.alpha) <= 0 or self.gamma <= 0 or self.s <= 0:
            raise ValueError("penalty parameters alpha, gamma, s must be positive")
        if self.growth < 1:
            raise ValueError("growth must be >= 1")
        if not 0 < self.prox_rho < 1:
            raise ValueError("prox_rho must lie in (0, 1)")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be >= 1")
        if len(self.ranks) != 3 or min(self.ranks) < 1:
            raise ValueError("ranks must be three positive integers")


@dataclass
class SolverState:
    x: np.ndarray
    l: np.ndarray
    r: np.ndarray
    g: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    z: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    w: np.ndarray
    p: np.ndarray
    alpha: np.ndarray
    gamma: float
    s: float
    prox_lam: float
    iter: int = 0

    @property
    def factors(self):
        return (self.u1, self.u2, self.u3)

    def residuals(self):
        res_y = sum(
            frobenius_norm(y - toeplitz_diff(u))
            for y, u in zip((self.y1, self.y2, self.y3), self.factors)
        )
        res_z = frobenius_norm(self.z - block_diff(unfold(self.r, 1)))
        res_xlr = frobenius_norm(self.x - self.l - self.r)
        return res_y, res_z, res_xlr


@dataclass
class SolveResult:
    x: np.ndarray
    l: np.ndarray
    r: np.ndarray
    iterations: int
    residuals: tuple
    objective_trace: list
    trace: list = field(default_factory=list)
    converged: bool = False


def block_diff(m):
    """Row differences followed by column differences (T_l @ M @ T_r.T)."""
    d = m[:-1] - m[1:]
    return d[:, :-1] - d[:, 1:]


def block_diff_adjoint(m):
    """Adjoint of :func:`block_diff` (T_l.T @ M @ T_r)."""
    rows = np.zeros((m.shape[0] + 1, m.shape[1]))
    rows[:-1] += m
    rows[1:] -= m
    out = np.zeros((rows.shape[0], rows.shape[1] + 1))
    out[:, :-1] += rows
    out[:, 1:] -= rows
    return out


def hosvd_factors(x, ranks):
    """Leading left singular vectors of each mode unfolding."""
    factors = []
    for mode, r in zip((1, 2, 3), ranks):
        u, _, _ = np.linalg.svd(unfold(x, mode), full_matrices=False)
        factors.append(u[:, :r].copy())
    return factors


def init_state(y, mask, cfg):
    """Zero-filled observed start with HOSVD factors and zero multipliers."""
    cfg.validate()
    y = np.asarray(y, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    dims = y.shape
    if any(r > d for r, d in zip(cfg.ranks, dims)):
        raise ValueError(f"ranks {cfg.ranks} exceed tensor dims {dims}")
    if not mask.any():
        raise ValueError("empty observation mask: the model is unidentifiable")
    x0 = project_observed(y, mask)
    l0 = x0.copy()
    r0 = np.zeros(dims)
    u1, u2, u3 = hosvd_factors(l0, cfg.ranks)
    g0 = mode_n_product(
        mode_n_product(mode_n_product(l0, u1.T, 1), u2.T, 2), u3.T, 3
    )
    prox_lam = cfg.prox_lambda0 if cfg.prox_lambda0 > 0 else 1.0 / cfg.s
    return SolverState(
        x=x0,
        l=l0,
        r=r0,
        g=g0,
        u1=u1,
        u2=u2,
        u3=u3,
        y1=toeplitz_diff(u1),
        y2=toeplitz_diff(u2),
        y3=toeplitz_diff(u3),
        z=np.zeros((dims[0] - 1, dims[1] * dims[2] - 1)),
        v1=np.zeros((dims[0] - 1, cfg.ranks[0])),
        v2=np.zeros((dims[1] - 1, cfg.ranks[1])),
        v3=np.zeros((dims[2] - 1, cfg.ranks[2])),
        w=np.zeros((dims[0] - 1, dims[1] * dims[2] - 1)),
        p=np.zeros(dims),
        alpha=np.asarray(cfg.alpha, dtype=float),
        gamma=float(cfg.gamma),
        s=float(cfg.s),
        prox_lam=float(prox_lam),
    )


def update_X(state, y, mask):
    """X = Y on the mask, L + R - P/s elsewhere."""
    free = state.l + state.r - state.p / state.s
    return np.where(mask, y, free)


def update_G(state):
    """Core that minimizes the Tucker fit to L given orthonormal factors."""
    return mode_n_product(
        mode_n_product(mode_n_product(state.l, state.u1.T, 1), state.u2.T, 2),
        state.u3.T,
        3,
    )


def update_U(state, cfg):
    """Gauss-Seidel pass over the three factor subproblems.

    The quadratic fit term (beta/2) * ||U M - L_[i]||^2 is evaluated through
    its r x r normal form (A = beta * M M^T, C = beta * L_[i] M^T), computed
    once per subproblem, so inner search iterations cost O(D r^2).
    """
    us = [state.u1, state.u2, state.u3]
    ys = (state.y1, state.y2, state.y3)
    vs = (state.v1, state.v2, state.v3)
    for i, mode in enumerate((1, 2, 3)):
        m = factor_coefficient(state.g, us[0], us[1], us[2], mode)
        l_unf = unfold(state.l, mode)
        a = cfg.beta * (m @ m.T)
        c = cfg.beta * (l_unf @ m.T)
        const = 0.5 * cfg.beta * float(np.vdot(l_unf, l_unf))
        y, v, alpha = ys[i], vs[i], state.alpha[i]

        def evaluate(u, a=a, c=c, const=const, y=y, v=v, alpha=alpha):
            res = y - toeplitz_diff(u)
            return (
                0.5 * float(np.vdot(u @ a, u))
                - float(np.vdot(u, c))
                + const
                + float(np.vdot(res, v))
                + 0.5 * alpha * float(np.vdot(res, res))
            )

        def gradient(u, a=a, c=c, y=y, v=v, alpha=alpha):
            return u @ a - c - toeplitz_diff_adjoint(
                v + alpha * (y - toeplitz_diff(u))
            )

        us[i] = minimize_on_stiefel(
            SmoothObjective(evaluate, gradient), us[i], max_iters=cfg.max_inner
        )
    return tuple(us)


def _r_smooth_value(r, state):
    res_z = state.z - block_diff(unfold(r, 1))
    res_xlr = state.x - state.l - r
    return (
        float(np.vdot(res_z, state.w))
        + 0.5 * state.gamma * float(np.vdot(res_z, res_z))
        + float(np.vdot(res_xlr, state.p))
        + 0.5 * state.s * float(np.vdot(res_xlr, res_xlr))
    )


def _r_smooth_gradient(r, state):
    dims = r.shape
    res_z = state.z - block_diff(unfold(r, 1))
    grad_mat = -block_diff_adjoint(state.w) - state.gamma * block_diff_adjoint(res_z)
    return (
        fold(grad_mat, 1, dims)
        - state.p
        - state.s * (state.x - state.l - r)
    )


def update_R(state, cfg, max_halvings=50):
    """One backtracking proximal-gradient step on the anomaly tensor.

    Returns the new tensor and the accepted step, which warm-starts the next
    outer iteration's line search.
    """
    r = state.r
    f0 = _r_smooth_value(r, state)
    grad = _r_smooth_gradient(r, state)
    lam = state.prox_lam
    for _ in range(max_halvings):
        candidate = hard_threshold_l0(r - lam * grad, lam * cfg.mu1)
        delta = candidate - r
        quad = f0 + float(np.vdot(grad, delta)) + float(np.vdot(delta, delta)) / (
            2.0 * lam
        )
        if _r_smooth_value(candidate, state) <= quad + 1e-12 * (1.0 + abs(quad)):
            return candidate, lam
        lam *= cfg.prox_rho
    raise SolverDivergenceError(
        "proximal line search for the anomaly block exhausted "
        f"{max_halvings} halvings (penalty scaling diverged)"
    )


def update_L(state, cfg):
    """Closed-form blend of the Tucker fit and the feasibility target."""
    recon = tucker_reconstruct(state.g, state.u1, state.u2, state.u3)
    denom = cfg.beta + state.s
    return (
        cfg.beta / denom * recon
        + state.s / denom * (state.x - state.r)
        + state.p / denom
    )


def update_Y(state, cfg):
    """Group hard threshold on the shifted factor differences."""
    out = []
    for u, v, alpha, lam_i in zip(
        state.factors, (state.v1, state.v2, state.v3), state.alpha, cfg.lam
    ):
        out.append(
            group_hard_threshold_l20(toeplitz_diff(u) - v / alpha, lam_i / alpha)
        )
    return tuple(out)


def update_Z(state, cfg):
    """Elementwise hard threshold on the doubly-differenced anomaly block."""
    target = block_diff(unfold(state.r, 1)) - state.w / state.gamma
    return hard_threshold_l0(target, cfg.mu2 / state.gamma)


def update_multipliers(state):
    v1 = state.v1 + state.alpha[0] * (state.y1 - toeplitz_diff(state.u1))
    v2 = state.v2 + state.alpha[1] * (state.y2 - toeplitz_diff(state.u2))
    v3 = state.v3 + state.alpha[2] * (state.y3 - toeplitz_diff(state.u3))
    w = state.w + state.gamma * (state.z - block_diff(unfold(state.r, 1)))
    p = state.p + state.s * (state.x - state.l - state.r)
    return v1, v2, v3, w, p


def _relative_change(prev, cur):
    denom = frobenius_norm(prev)
    diff = frobenius_norm(prev - cur)
    return diff / denom if denom > 0 else diff


def check_convergence(prev_blocks, cur_blocks, eps):
    """All four relative block changes (X, G, L, R) below eps.

    A zero-norm previous block falls back to absolute change.
    """
    return all(
        _relative_change(p, c) < eps for p, c in zip(prev_blocks, cur_blocks)
    )


def model_objective(state, cfg):
    recon = tucker_reconstruct(state.g, state.u1, state.u2, state.u3)
    return (
        0.5 * cfg.beta * frobenius_norm(recon - state.l) ** 2
        + sum(
            lam_i * l20_count(y)
            for lam_i, y in zip(cfg.lam, (state.y1, state.y2, state.y3))
        )
        + cfg.mu1 * l0_count(state.r)
        + cfg.mu2 * l0_count(state.z)
    )


def solve(y, mask, cfg, trace_every=0):
    """Run the full ADMM loop; returns recovered X, low-rank L, anomaly R.

    trace_every > 0 records a diagnostics row every that many iterations
    (iteration, objective, the three feasibility residuals, and the four
    relative block changes).
    """
    y = np.asarray(y, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    state = init_state(y, mask, cfg)
    obj_trace = []
    trace = []
    converged = False
    rel_changes = (np.inf,) * 4
    for k in range(1, cfg.max_outer + 1):
        state.iter = k
        prev_blocks = (state.x, state.g, state.l, state.r)

        state.x = update_X(state, y, mask)
        state.g = update_G(state)
        state.u1, state.u2, state.u3 = update_U(state, cfg)
        state.r, state.prox_lam = update_R(state, cfg)
        state.l = update_L(state, cfg)
        state.y1, state.y2, state.y3 = update_Y(state, cfg)
        state.z = update_Z(state, cfg)
        state.v1, state.v2, state.v3, state.w, state.p = update_multipliers(state)

        cur_blocks = (state.x, state.g, state.l, state.r)
        if not all(np.all(np.isfinite(b)) for b in cur_blocks):
            raise SolverDivergenceError(
                f"non-finite state at outer iteration {k}"
            )
        rel_changes = tuple(
            _relative_change(p, c) for p, c in zip(prev_blocks, cur_blocks)
        )
        objective = model_objective(state, cfg)
        obj_trace.append(objective)
        if trace_every and (k % trace_every == 0 or k == 1):
            trace.append((k, objective, *state.residuals(), *rel_changes))
        if k > 1 and all(rc < cfg.eps for rc in rel_changes):
            converged = True
            break

        state.alpha = np.minimum(state.alpha * cfg.growth, cfg.penalty_cap)
        state.gamma = min(state.gamma * cfg.growth, cfg.penalty_cap)
        state.s = min(state.s * cfg.growth, cfg.penalty_cap)

    if trace_every and (not trace or trace[-1][0] != state.iter):
        trace.append(
            (state.iter, obj_trace[-1], *state.residuals(), *rel_changes)
        )
    return SolveResult(
        x=state.x,
        l=state.l,
        r=state.r,
        iterations=state.iter,
        residuals=state.residuals(),
        objective_trace=obj_trace,
        trace=trace,
        converged=converged,
    )


def ablation_config(cfg, variant):
    """Config with regularizer weights zeroed per the named ablation variant.

    a: no row-sparsity terms (lam); b: no anomaly sparsity (mu1); c: no
    block-continuity sparsity (mu2); d: a+b; e: a+c; f: b+c; g: all three;
    full: unchanged.
    """
    zero_lam = variant in ("a", "d", "e", "g")
    zero_mu1 = variant in ("b", "d", "f", "g")
    zero_mu2 = variant in ("c", "e", "f", "g")
    if variant == "full":
        return replace(cfg)
    if not (zero_lam or zero_mu1 or zero_mu2):
        raise ValueError(f"unknown ablation variant {variant!r}")
    return replace(
        cfg,
        lam=(0.0, 0.0, 0.0) if zero_lam else cfg.lam,
        mu1=0.0 if zero_mu1 else cfg.mu1,
        mu2=0.0 if zero_mu2 else cfg.mu2,
    )
