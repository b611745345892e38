# fusion/solvers.py
"""
Solvers for the joint osmosis model.

``ipiano_fuse`` is the outer block-coordinate inertial proximal scheme with
Lipschitz backtracking on both blocks. Its v-block proximal step for the
Huberized TV is computed by ``prox_huber_tv``, an accelerated primal-dual
iteration on the saddle-point form

    min_p max_y  <grad p, y> - H*(y) + 1/(2 zeta) ||p - v_diamond||^2,
    H*(y) = eps/(2 eta) ||y||^2 + indicator(|y| <= eta pixelwise).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

import numpy as np

from .energy import (
    REGULARIZERS,
    energy_O,
    energy_total,
    grad_u_O,
    grad_v_O,
    huber,
    prox_D,
    prox_tikhonov,
    reference_image,
)
from .exceptions import BacktrackingError, NumericalError
from .grid import GRAD_NORM_SQ_BOUND, div, grad, inner, pixel_norm
from .images import (
    ModelWeights,
    as_image,
    check_alpha,
    check_positive,
    check_same_shape,
    clamp_floor,
)
from .trace import EnergyTrace, TraceRow

logger = logging.getLogger(__name__)

INIT_CHOICES = ("f", "convex", "average")

# initial iPiano step: 0.99 (1 - 2 beta) / L
STEP_SAFETY = 0.99


# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------

@dataclass(frozen=True)
class IPianoConfig:
    beta1: float = 0.4
    beta2: float = 0.4
    L1_0: float = 1.0
    L2_0: float = 1.0
    lam: float = 2.0
    tol: float = 1e-6
    maxiter: int = 10000
    backtrack_maxiter: int = 60
    min_iter: int = 2

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            beta = getattr(self, name)
            if not 0 <= beta < 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5), got {beta}")
        if not (self.L1_0 > 0 and self.L2_0 > 0):
            raise ValueError("initial Lipschitz estimates must be > 0")
        if not self.lam > 1:
            raise ValueError(f"backtracking growth factor must be > 1, got {self.lam}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.maxiter < 1 or self.backtrack_maxiter < 1 or self.min_iter < 1:
            raise ValueError("iteration caps must be >= 1")

    @staticmethod
    def step(L, beta):
        """Step size ``0.99 (1 - 2 beta) / L`` used after every change of L."""
        return STEP_SAFETY * (1.0 - 2.0 * beta) / L

    @staticmethod
    def step_bound(L, beta):
        """Upper bound ``2 (1 - beta) / L`` every accepted step stays below."""
        return 2.0 * (1.0 - beta) / L


@dataclass(frozen=True)
class PDConfig:
    inner_tol: float = 1e-4
    inner_maxiter: int = 10000
    # None: the strong-convexity modulus 1/zeta2 of the primal term
    gamma_hat: Optional[float] = None
    tau0: float = 0.35
    sigma0: float = 0.35

    def __post_init__(self):
        if not self.inner_tol > 0:
            raise ValueError(f"inner_tol must be > 0, got {self.inner_tol}")
        if self.inner_maxiter < 1:
            raise ValueError("inner_maxiter must be >= 1")
        if self.gamma_hat is not None and not self.gamma_hat > 0:
            raise ValueError(f"gamma_hat must be > 0, got {self.gamma_hat}")
        if not (self.tau0 > 0 and self.sigma0 > 0):
            raise ValueError("tau0 and sigma0 must be > 0")
        if self.tau0 * self.sigma0 * GRAD_NORM_SQ_BOUND > 1.0:
            raise ValueError(
                f"tau0 * sigma0 * 8 must not exceed 1, got {self.tau0 * self.sigma0 * GRAD_NORM_SQ_BOUND}"
            )


# -------------------------------------------------------------------
# Inner primal-dual solver
# -------------------------------------------------------------------

class PrimalDualResult(NamedTuple):
    v: np.ndarray
    y: Optional[np.ndarray]
    iterations: int
    gap: float
    converged: bool
    max_step_product: float


def prox_huber_conjugate(y, sigma, eta, eps):
    """Shrink by ``1 + sigma eps / eta`` and project each pixel onto the eta-ball."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not eta > 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    shrunk = np.asarray(y, dtype=np.float64) / (1.0 + sigma * eps / eta)
    scale = np.maximum(1.0, pixel_norm(shrunk) / eta)
    return shrunk / scale[..., np.newaxis, :, :]


def prox_s(p, v_diamond, tau, zeta2):
    """``(1/zeta2 + 1/tau)^-1 (v_diamond/zeta2 + p/tau)``, a convex combination of p and v_diamond."""
    if math.isinf(tau):
        return np.array(v_diamond, dtype=np.float64, copy=True)
    return p + (tau / (tau + zeta2)) * (v_diamond - p)


def _relative_gaps(p, y, v_diamond, eta, eps, zeta):
    """Per-channel relative primal-dual gap of the Huber-TV proximal problem."""
    div_y = div(y)
    primal = (
        eta * np.sum(huber(pixel_norm(grad(p)), eps), axis=(-2, -1))
        + np.sum((p - v_diamond) ** 2, axis=(-2, -1)) / (2.0 * zeta)
    )
    dual = (
        -eps / (2.0 * eta) * np.sum(y ** 2, axis=(-3, -2, -1))
        - np.sum(v_diamond * div_y, axis=(-2, -1))
        - 0.5 * zeta * np.sum(div_y ** 2, axis=(-2, -1))
    )
    return (primal - dual) / np.maximum(np.abs(primal), np.finfo(np.float64).tiny)


def prox_huber_tv(v_diamond, eta, eps, zeta2, cfg=None, y0=None):
    """
    Approximate ``argmin_v eta H_eps(grad v) + 1/(2 zeta2) ||v - v_diamond||^2``.

    Channels are independent problems solved side by side; the loop stops once
    every channel's relative primal-dual gap is below ``cfg.inner_tol``. At the
    iteration cap the iterate with the smallest gap is returned with
    ``converged=False``.
    """
    cfg = cfg or PDConfig()
    v_diamond = np.asarray(v_diamond, dtype=np.float64)
    if not np.all(np.isfinite(v_diamond)):
        raise ValueError("v_diamond must be finite")
    if not zeta2 > 0:
        raise ValueError(f"zeta2 must be > 0, got {zeta2}")
    dual_shape = v_diamond.shape[:-2] + (2,) + v_diamond.shape[-2:]
    if eta == 0:
        return PrimalDualResult(v_diamond.copy(), np.zeros(dual_shape), 0, 0.0, True, 0.0)

    gamma_hat = cfg.gamma_hat if cfg.gamma_hat is not None else 1.0 / zeta2
    tau, sigma = cfg.tau0, cfg.sigma0
    max_step_product = tau * sigma

    p = v_diamond.copy()
    p_bar = p.copy()
    y = np.zeros(dual_shape) if y0 is None else np.array(y0, dtype=np.float64, copy=True)

    gap = float(np.max(_relative_gaps(p, y, v_diamond, eta, eps, zeta2)))
    if gap < cfg.inner_tol:
        return PrimalDualResult(p, y, 0, gap, True, max_step_product)
    best = (gap, p, y)

    for t in range(1, cfg.inner_maxiter + 1):
        y = prox_huber_conjugate(y + sigma * grad(p_bar), sigma, eta, eps)
        p_next = prox_s(p + tau * div(y), v_diamond, tau, zeta2)
        omega = 1.0 / math.sqrt(1.0 + 2.0 * gamma_hat * tau)
        tau, sigma = omega * tau, sigma / omega
        max_step_product = max(max_step_product, tau * sigma)
        p_bar = p_next + omega * (p_next - p)
        p = p_next

        gap = float(np.max(_relative_gaps(p, y, v_diamond, eta, eps, zeta2)))
        if gap < best[0]:
            best = (gap, p, y)
        if gap < cfg.inner_tol:
            return PrimalDualResult(p, y, t, gap, True, max_step_product)

    gap, p, y = best
    logger.warning(
        "primal-dual stopped at %d iterations with relative gap %.3e (tol %.1e)",
        cfg.inner_maxiter, gap, cfg.inner_tol,
    )
    return PrimalDualResult(p, y, cfg.inner_maxiter, gap, False, max_step_product)


# -------------------------------------------------------------------
# Outer block-coordinate iPiano
# -------------------------------------------------------------------

@dataclass
class IPianoState:
    u_curr: np.ndarray
    u_prev: np.ndarray
    v_curr: np.ndarray
    v_prev: np.ndarray
    L1: float
    L2: float
    zeta1: float
    zeta2: float
    iter: int = 0
    # dual variable of the inner solve, reused as a warm start
    y: Any = field(default=None, repr=False)

    def dump(self):
        return {
            "iter": self.iter,
            "L1": self.L1,
            "L2": self.L2,
            "zeta1": self.zeta1,
            "zeta2": self.zeta2,
            "u_range": (float(self.u_curr.min()), float(self.u_curr.max())),
            "v_range": (float(self.v_curr.min()), float(self.v_curr.max())),
        }


class FusionResult(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    trace: EnergyTrace
    state: IPianoState


def initial_image(f, b, alpha, init="f"):
    """Starting u: ``f``, the alpha-convex combination, or the plain average."""
    if init == "f":
        return np.array(f, dtype=np.float64, copy=True)
    if init == "convex":
        return alpha * f + (1.0 - alpha) * b
    if init == "average":
        return 0.5 * (f + b)
    raise ValueError(f"unknown init {init!r}; choose from {INIT_CHOICES}")


def descent_gap(o_new, o_curr, gradient, step, L):
    """``O(p) - O(x) - <grad O(x), p - x> - L/2 ||p - x||^2``."""
    return o_new - o_curr - inner(gradient, step) - 0.5 * L * inner(step, step)


def _accepts(gap, step):
    # a block that did not move has gap exactly 0
    return gap < 0 or (gap <= 0 and not np.any(step))


def _check_finite(iteration, **arrays):
    for name, array in arrays.items():
        if not np.all(np.isfinite(array)):
            raise NumericalError(name, iteration)


def _prox_v(v_diamond, weights, zeta2, regularizer, pd_cfg, y0):
    if regularizer == "tikhonov":
        return PrimalDualResult(prox_tikhonov(v_diamond, weights.eta, zeta2), None, 0, 0.0, True, 0.0)
    return prox_huber_tv(v_diamond, weights.eta, weights.eps, zeta2, pd_cfg, y0=y0)


def ipiano_fuse(f, b, alpha, weights=None, cfg=None, init="f", pd_cfg=None,
                regularizer="huber-tv", callback=None):
    """
    Minimize ``O(u, v) + gamma D(u) + eta R(v)`` by block-coordinate iPiano.

    Both blocks take their explicit step from ``(u^k, v^k)``; the proximal
    points are accepted when both descent-lemma gaps are negative, otherwise
    the failing block's Lipschitz estimate grows by ``cfg.lam`` and its step is
    recomputed. Lipschitz estimates never shrink. Accepted iterates are clamped
    at ``weights.offset``. The run ends when the energy change drops below
    ``cfg.tol`` times ``max(|E|, |E0|)`` (after at least ``cfg.min_iter``
    iterations) or at ``cfg.maxiter``.

    Returns ``FusionResult(u, v, trace, state)``.
    """
    weights = weights or ModelWeights()
    cfg = cfg or IPianoConfig()
    pd_cfg = pd_cfg or PDConfig()
    if regularizer not in REGULARIZERS:
        raise ValueError(f"unknown regularizer {regularizer!r}; choose from {REGULARIZERS}")

    f = as_image(f)
    b = as_image(b)
    alpha = check_alpha(alpha)
    check_same_shape(f=f, b=b, alpha=alpha)
    check_positive(f, "f")
    check_positive(b, "b")

    ref = reference_image(f, b, alpha)
    u = initial_image(f, b, alpha, init)
    v = ref.copy()
    state = IPianoState(
        u_curr=u, u_prev=u.copy(), v_curr=v, v_prev=v.copy(),
        L1=cfg.L1_0, L2=cfg.L2_0,
        zeta1=cfg.step(cfg.L1_0, cfg.beta1), zeta2=cfg.step(cfg.L2_0, cfg.beta2),
    )

    trace = EnergyTrace()
    trace.initial = energy_total(u, v, f, b, alpha, weights, ref=ref, regularizer=regularizer)
    energy_prev = trace.initial.E
    logger.info(
        "ipiano start: %s image %dx%d, E0=%.6e, init=%s, weights=%s",
        f.shape[0], f.shape[1], f.shape[2], energy_prev, init, weights,
    )

    for k in range(1, cfg.maxiter + 1):
        state.iter = k
        u, u_prev, v, v_prev = state.u_curr, state.u_prev, state.v_curr, state.v_prev

        o_curr = energy_O(u, v, ref, weights.mu)
        g_u = grad_u_O(u, v)
        g_v = grad_v_O(u, v, ref, weights.mu)
        _check_finite(k, grad_u=g_u, grad_v=g_v)
        inertia_u = cfg.beta1 * (u - u_prev)
        inertia_v = cfg.beta2 * (v - v_prev)

        p1 = p2 = None
        inner_iters = 0
        for _ in range(cfg.backtrack_maxiter):
            if p1 is None:
                u_diamond = u - state.zeta1 * g_u + inertia_u
                p1 = clamp_floor(prox_D(u_diamond, f, alpha, weights.gamma, state.zeta1), weights.offset)
                _check_finite(k, u=p1)
                gap_u = descent_gap(energy_O(p1, v, ref, weights.mu), o_curr, g_u, p1 - u, state.L1)
            if p2 is None:
                v_diamond = v - state.zeta2 * g_v + inertia_v
                prox_result = _prox_v(v_diamond, weights, state.zeta2, regularizer, pd_cfg, state.y)
                inner_iters += prox_result.iterations
                p2 = clamp_floor(prox_result.v, weights.offset)
                _check_finite(k, v=p2)
                gap_v = descent_gap(energy_O(u, p2, ref, weights.mu), o_curr, g_v, p2 - v, state.L2)

            ok_u = _accepts(gap_u, p1 - u)
            ok_v = _accepts(gap_v, p2 - v)
            if ok_u and ok_v:
                break
            if not ok_u:
                state.L1 *= cfg.lam
                state.zeta1 = cfg.step(state.L1, cfg.beta1)
                p1 = None
            if not ok_v:
                state.L2 *= cfg.lam
                state.zeta2 = cfg.step(state.L2, cfg.beta2)
                p2 = None
        else:
            dump = state.dump()
            dump.update(gap_u=gap_u, gap_v=gap_v)
            raise BacktrackingError(
                f"no admissible step after {cfg.backtrack_maxiter} backtracking trials", dump,
            )

        if not prox_result.converged:
            trace.warnings.append((k, prox_result.gap))
        state.y = prox_result.y
        state.u_prev, state.u_curr = u, p1
        state.v_prev, state.v_curr = v, p2

        breakdown = energy_total(p1, p2, f, b, alpha, weights, ref=ref, regularizer=regularizer)
        if not math.isfinite(breakdown.E):
            raise NumericalError("energy", k)
        row = TraceRow(
            k, breakdown.E, breakdown.O, breakdown.D, breakdown.R,
            state.zeta1, state.zeta2, state.L1, state.L2,
            float(gap_u), float(gap_v), int(inner_iters),
        )
        trace.append(row)
        logger.debug(
            "iter %d: E=%.10e O=%.6e D=%.6e R=%.6e L1=%.3g L2=%.3g inner=%d",
            k, row.E, row.O, row.D, row.R, row.L1, row.L2, row.inner_iters,
        )
        if callback is not None:
            callback(row)

        change = abs(breakdown.E - energy_prev)
        energy_prev = breakdown.E
        if k >= cfg.min_iter and change <= cfg.tol * max(abs(breakdown.E), abs(trace.initial.E)):
            trace.stop_reason = "converged"
            break
    else:
        trace.stop_reason = "maxiter"

    logger.info(
        "ipiano %s after %d iterations: E=%.6e (E0=%.6e), L1=%.3g, L2=%.3g",
        trace.stop_reason, len(trace), energy_prev, trace.initial.E, state.L1, state.L2,
    )
    return FusionResult(state.u_curr, state.v_curr, trace, state)
