# fusion/baselines.py
"""
Comparison methods: linear osmosis, seamless Poisson editing, and the
direct alpha composite.

The osmosis operator ``div(grad u - d u)`` is discretized on the staggered
faces of the pixel grid. Face drifts are ``2 (v_j - v_i) / (v_j + v_i)`` and u
is averaged onto the face, so the operator has zero column sums (the pixel
mean is conserved), ``(I - tau A)`` is an M-matrix (non-negativity of the
implicit scheme) and ``c * v`` is an exact steady state.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, spsolve

from .exceptions import ConvergenceError, ShapeMismatchError
from .grid import div, face_average_matrix, grad, gradient_matrix, laplacian, laplacian_matrix
from .images import as_image, check_alpha, check_positive, check_same_shape

logger = logging.getLogger(__name__)

SCHEMES = ("implicit", "explicit")
LINEAR_SOLVERS = ("bicgstab", "direct")
DRIFT_BLENDS = ("alpha", "mean")


@dataclass(frozen=True)
class OsmosisEvolutionConfig:
    time_step: float = 1000.0
    final_time: float = 10000.0
    scheme: str = "implicit"
    linear_solver: str = "bicgstab"
    solver_tol: float = 1e-5
    solver_maxiter: int = 500

    def __post_init__(self):
        if not self.time_step > 0:
            raise ValueError(f"time_step must be > 0, got {self.time_step}")
        if not self.final_time > 0:
            raise ValueError(f"final_time must be > 0, got {self.final_time}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise ValueError(f"linear_solver must be one of {LINEAR_SOLVERS}, got {self.linear_solver!r}")
        if not self.solver_tol > 0 or self.solver_maxiter < 1:
            raise ValueError("solver_tol must be > 0 and solver_maxiter >= 1")

    @property
    def n_steps(self):
        return max(1, math.ceil(self.final_time / self.time_step - 1e-12))


class OsmosisResult(NamedTuple):
    """Terminal image plus per-step channel means and minima (step 0 is the start)."""

    u: np.ndarray
    means: np.ndarray
    minima: np.ndarray


def _map_channels(function, channels, workers):
    if workers <= 1 or len(channels) == 1:
        return [function(c) for c in channels]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, channels))


# -------------------------------------------------------------------
# Osmosis operator
# -------------------------------------------------------------------

def face_drift(v):
    """Staggered drift ``2 (v_j - v_i) / (v_j + v_i)`` on each face; closing faces are zero."""
    check_positive(v, "v")
    v = np.asarray(v, dtype=np.float64)
    d = np.zeros(v.shape[:-2] + (2,) + v.shape[-2:])
    d[..., 0, :, :-1] = 2.0 * (v[..., :, 1:] - v[..., :, :-1]) / (v[..., :, 1:] + v[..., :, :-1])
    d[..., 1, :-1, :] = 2.0 * (v[..., 1:, :] - v[..., :-1, :]) / (v[..., 1:, :] + v[..., :-1, :])
    return d


def face_average(u):
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape[:-2] + (2,) + u.shape[-2:])
    out[..., 0, :, :-1] = 0.5 * (u[..., :, 1:] + u[..., :, :-1])
    out[..., 1, :-1, :] = 0.5 * (u[..., 1:, :] + u[..., :-1, :])
    return out


def blended_face_drift(f, b, alpha, blend="alpha"):
    """
    Face drift for osmosis fusion, mixed from the drifts of f and b.

    ``alpha`` weights the two drifts by alpha averaged onto the face;
    ``mean`` takes f's drift where alpha is 1, b's where it is 0 and their
    plain average on the transition zone in between.
    """
    if blend not in DRIFT_BLENDS:
        raise ValueError(f"drift blend must be one of {DRIFT_BLENDS}, got {blend!r}")
    alpha = check_alpha(alpha)
    if blend == "mean":
        alpha = np.where((alpha > 0) & (alpha < 1), 0.5, np.round(alpha))
    weight = face_average(alpha)
    return weight * face_drift(f) + (1.0 - weight) * face_drift(b)


def osmosis_flux(u, drift_faces):
    return grad(u) - drift_faces * face_average(u)


def osmosis_apply(u, drift_faces):
    return div(osmosis_flux(u, drift_faces))


def osmosis_matrix_apply(u, v):
    """``div(grad u - d u)`` with the staggered drift of v and zero boundary flux."""
    check_same_shape(u=u, v=v)
    return osmosis_apply(u, face_drift(v))


def osmosis_matrix(drift_faces):
    """Sparse matrix of :func:`osmosis_apply` for one channel's ``(2, H, W)`` face drift."""
    _, height, width = drift_faces.shape
    g = gradient_matrix(height, width)
    a = face_average_matrix(height, width)
    flux = g - sparse.diags(drift_faces.ravel()) @ a
    return (-(g.T @ flux)).tocsr()


def explicit_step_limit(system):
    """Largest time step keeping ``I + tau A`` entrywise non-negative, for an assembled osmosis matrix A."""
    return 1.0 / float(np.max(-system.diagonal()))


# -------------------------------------------------------------------
# Linear osmosis evolution
# -------------------------------------------------------------------

def _evolve_channel(u0, drift_faces, cfg):
    height, width = u0.shape
    system = osmosis_matrix(drift_faces)
    n_steps = cfg.n_steps
    tau = cfg.final_time / n_steps
    u = u0.ravel().copy()
    means = [u.mean()]
    minima = [u.min()]

    if cfg.scheme == "explicit":
        limit = explicit_step_limit(system)
        if tau > limit:
            raise ValueError(f"explicit scheme needs time_step <= {limit:.4g}, got {tau:.4g}")
        for _ in range(n_steps):
            u = u + tau * (system @ u)
            means.append(u.mean())
            minima.append(u.min())
        return u.reshape(height, width), means, minima

    implicit = (sparse.identity(height * width, format="csr") - tau * system).tocsc()
    for step in range(1, n_steps + 1):
        if cfg.linear_solver == "direct":
            u_next = spsolve(implicit, u)
        else:
            u_next, info = bicgstab(implicit, u, x0=u, rtol=cfg.solver_tol, atol=0.0,
                                    maxiter=cfg.solver_maxiter)
            if info != 0:
                residual = float(np.linalg.norm(implicit @ u_next - u) / np.linalg.norm(u))
                raise ConvergenceError(
                    f"BiCGStab failed at osmosis step {step} (info={info})",
                    iterations=cfg.solver_maxiter, residual=residual,
                )
        u = u_next
        means.append(u.mean())
        minima.append(u.min())
    return u.reshape(height, width), means, minima


def linear_osmosis(u0, v=None, cfg=None, drift_faces=None, workers=1):
    """
    Evolve ``u_t = div(grad u - d u)`` from u0 up to ``cfg.final_time``.

    The drift comes from the guide image v, or is passed in directly as
    ``drift_faces`` with shape ``(C, 2, H, W)``. For a guide v the evolution
    tends to ``mean(u0) / mean(v) * v`` channel-wise.
    """
    cfg = cfg or OsmosisEvolutionConfig()
    u0 = as_image(u0)
    check_positive(u0, "u0")
    if drift_faces is None:
        if v is None:
            raise ValueError("linear_osmosis needs a guide image v or drift_faces")
        v = as_image(v)
        check_same_shape(u0=u0, v=v)
        drift_faces = face_drift(v)
    if drift_faces.shape != (u0.shape[0], 2) + u0.shape[1:]:
        raise ShapeMismatchError(f"drift of shape {drift_faces.shape} does not fit u0 of shape {u0.shape}")

    results = _map_channels(
        lambda c: _evolve_channel(u0[c], drift_faces[c], cfg), range(u0.shape[0]), workers,
    )
    u = np.stack([r[0] for r in results])
    means = np.array([r[1] for r in results]).T
    minima = np.array([r[2] for r in results]).T
    logger.info(
        "linear osmosis (%s, %d steps): max mean drift %.3e, min value %.4g",
        cfg.scheme, cfg.n_steps, float(np.max(np.abs(means - means[0]))), float(minima.min()),
    )
    return OsmosisResult(u, means, minima)


def steady_state(u0, v):
    """Closed-form osmosis steady state ``mean(u0) / mean(v) * v`` per channel."""
    u0, v = as_image(u0), as_image(v)
    return u0.mean(axis=(1, 2), keepdims=True) / v.mean(axis=(1, 2), keepdims=True) * v


def direct_blend(f, b, alpha):
    """Alpha composite ``alpha f + (1 - alpha) b``."""
    alpha = check_alpha(alpha)
    check_same_shape(f=f, b=b, alpha=alpha)
    return alpha * f + (1.0 - alpha) * b


def osmosis_fusion(f, b, alpha, cfg=None, drift_blend="alpha", workers=1):
    """Osmosis fusion baseline: evolve the alpha composite under the blended drift."""
    f, b = as_image(f), as_image(b)
    drift_faces = blended_face_drift(f, b, alpha, drift_blend)
    return linear_osmosis(direct_blend(f, b, alpha), cfg=cfg, drift_faces=drift_faces, workers=workers)


# -------------------------------------------------------------------
# Poisson editing
# -------------------------------------------------------------------

def check_mask(mask):
    mask = np.asarray(mask)
    if mask.ndim == 3 and mask.shape[0] == 1:
        mask = mask[0]
    if mask.ndim != 2:
        raise ShapeMismatchError(f"mask must be a single (H, W) channel, got shape {mask.shape}")
    if not np.all((mask == 0) | (mask == 1)):
        raise ValueError("mask entries must be 0 or 1")
    return mask.astype(bool)


def poisson_edit(f, b, mask, tol=1e-6, workers=1):
    """
    Seamless cloning: ``laplacian(u) = laplacian(f)`` on the mask, ``u = b`` elsewhere.

    Solved as one sparse linear system per channel. When the mask covers the
    whole grid the system only fixes u up to a constant; the result is then f
    shifted to the mean of b.
    """
    f, b = as_image(f), as_image(b)
    mask = check_mask(mask)
    check_same_shape(f=f, b=b, mask=mask)
    if not mask.any():
        return b.copy()
    if mask.all():
        return f - f.mean(axis=(1, 2), keepdims=True) + b.mean(axis=(1, 2), keepdims=True)

    height, width = mask.shape
    lap = laplacian_matrix(height, width)
    inside = mask.ravel()
    lap_in = lap[inside][:, inside].tocsc()
    lap_out = lap[inside][:, ~inside]
    target = laplacian(f)

    def solve(c):
        known = b[c].ravel()[~inside]
        rhs = target[c].ravel()[inside] - lap_out @ known
        out = b[c].ravel().copy()
        out[inside] = spsolve(lap_in, rhs)
        return out.reshape(height, width)

    u = np.stack(_map_channels(solve, range(f.shape[0]), workers))
    residual = float(np.max(np.abs((laplacian(u) - target)[:, mask]))) if mask.any() else 0.0
    scale = max(1.0, float(np.max(np.abs(target))))
    if not residual <= tol * scale:
        raise ConvergenceError("Poisson system solved inaccurately", residual=residual)
    logger.info("poisson edit: %d masked pixels, residual %.3e", int(mask.sum()), residual)
    return u
