# fusion/energy.py
"""
The three terms of the joint osmosis energy and their derivatives.

    E(u, v) = O(u, v) + gamma * D(u) + eta * R(v)

    O(u, v) = 1/2 sum v |grad(u/v)|^2 + mu/2 ||v - f^alpha b^(1-alpha)||^2
    D(u)    = 1/2 sum alpha (u - f)^2
    R(v)    = sum H_eps(|grad v|)      (Huberized TV)  or  1/2 ||grad v||^2

Every function works channel-wise on ``(C, H, W)`` images with one shared
``(H, W)`` alpha map; sums run over all channels.
"""

from typing import NamedTuple

import numpy as np
from scipy.sparse import identity
from scipy.sparse.linalg import spsolve

from .grid import div, grad, laplacian, laplacian_matrix, pixel_norm
from .images import check_alpha, check_positive, check_same_shape

REGULARIZERS = ("huber-tv", "tikhonov")


class EnergyBreakdown(NamedTuple):
    """Total energy and its unweighted parts: ``E = O + gamma*D + eta*R``."""

    E: float
    O: float
    D: float
    R: float


# -------------------------------------------------------------------
# Reference image and drift
# -------------------------------------------------------------------

def reference_image(f, b, alpha):
    """Pixelwise geometric interpolation ``f**alpha * b**(1 - alpha)``."""
    alpha = check_alpha(alpha)
    check_same_shape(f=f, b=b, alpha=alpha)
    check_positive(f, "f")
    check_positive(b, "b")
    return np.power(f, alpha) * np.power(b, 1.0 - alpha)


def drift(v):
    """Drift field ``grad(log v)``; unchanged when v is scaled by a positive constant."""
    check_positive(v, "v")
    return grad(np.log(v))


def drift_transport(u, v, flux="consistent"):
    """
    Discrete transport flux ``d * u`` of the osmosis term.

    ``consistent`` uses ``grad(u) - v * grad(u / v)``, which agrees with
    ``drift(v) * u`` to first order and makes :func:`grad_u_O` the exact
    derivative of :func:`energy_O`. ``pointwise`` multiplies ``drift(v)`` by u.
    """
    if flux == "consistent":
        return grad(u) - v[..., np.newaxis, :, :] * grad(u / v)
    if flux == "pointwise":
        return drift(v) * u[..., np.newaxis, :, :]
    raise ValueError(f"unknown flux discretization {flux!r}")


# -------------------------------------------------------------------
# Osmosis term
# -------------------------------------------------------------------

def energy_O(u, v, ref, mu):
    check_same_shape(u=u, v=v, ref=ref)
    ratio_grad = grad(u / v)
    osmosis = 0.5 * np.sum(v * np.sum(ratio_grad ** 2, axis=-3))
    fidelity = 0.5 * mu * np.sum((v - ref) ** 2)
    return float(osmosis + fidelity)


def grad_u_O(u, v, flux="consistent"):
    """Derivative of O in u: ``-(laplacian(u) - div(d u)) / v``."""
    check_same_shape(u=u, v=v)
    check_positive(v, "v")
    return -(laplacian(u) - div(drift_transport(u, v, flux))) / v


def grad_v_O(u, v, ref, mu):
    """
    Derivative of O in v.

    Written compactly as ``1/2 |grad(u/v)|^2 + (u/v^2) div(v grad(u/v)) + mu (v - ref)``;
    expanding the divergence gives the familiar sum of ``|grad u|^2``,
    ``grad u . grad v``, ``|grad v|^2`` and divergence terms.
    """
    check_same_shape(u=u, v=v, ref=ref)
    check_positive(v, "v")
    ratio_grad = grad(u / v)
    flux = v[..., np.newaxis, :, :] * ratio_grad
    return (
        0.5 * np.sum(ratio_grad ** 2, axis=-3)
        + (u / v ** 2) * div(flux)
        + mu * (v - ref)
    )


# -------------------------------------------------------------------
# Fidelity term
# -------------------------------------------------------------------

def energy_D(u, f, alpha):
    return float(0.5 * np.sum(alpha * (u - f) ** 2))


def prox_D(u_diamond, f, alpha, gamma, zeta):
    """
    Proximal map of ``zeta * gamma * D``:
    ``(gamma alpha + 1/zeta)^-1 (gamma alpha f + u_diamond / zeta)``.

    Evaluated as the convex combination ``u + w (f - u)`` with
    ``w = gamma alpha zeta / (1 + gamma alpha zeta)``, so alpha = 0 returns
    ``u_diamond`` unchanged.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if not zeta > 0:
        raise ValueError(f"zeta must be > 0, got {zeta}")
    weight = gamma * alpha * zeta / (1.0 + gamma * alpha * zeta)
    return u_diamond + weight * (f - u_diamond)


# -------------------------------------------------------------------
# Regularizers
# -------------------------------------------------------------------

def huber(t, eps):
    """Huber function: ``t^2 / (2 eps)`` up to eps, ``t - eps/2`` above."""
    t = np.asarray(t, dtype=np.float64)
    return np.where(t <= eps, t ** 2 / (2.0 * eps), t - 0.5 * eps)


def huber_tv(v, eps):
    return float(np.sum(huber(pixel_norm(grad(v)), eps)))


def energy_R_huber(v, eta, eps):
    return eta * huber_tv(v, eps)


def tikhonov(v):
    return float(0.5 * np.sum(grad(v) ** 2))


def regularizer_value(v, eps, regularizer="huber-tv"):
    if regularizer == "huber-tv":
        return huber_tv(v, eps)
    if regularizer == "tikhonov":
        return tikhonov(v)
    raise ValueError(f"unknown regularizer {regularizer!r}; choose from {REGULARIZERS}")


def prox_tikhonov(v_diamond, eta, zeta):
    """Proximal map of ``zeta * eta/2 ||grad v||^2``: solves ``(I - zeta eta laplacian) v = v_diamond``."""
    if eta == 0:
        return np.array(v_diamond, dtype=np.float64, copy=True)
    channels, height, width = v_diamond.shape
    system = (identity(height * width, format="csr") - zeta * eta * laplacian_matrix(height, width)).tocsc()
    out = np.empty_like(v_diamond, dtype=np.float64)
    for c in range(channels):
        out[c] = spsolve(system, v_diamond[c].ravel()).reshape(height, width)
    return out


# -------------------------------------------------------------------
# Joint energy
# -------------------------------------------------------------------

def energy_total(u, v, f, b, alpha, weights, ref=None, regularizer="huber-tv"):
    """Evaluate E and its parts; R is reported unweighted."""
    if ref is None:
        ref = reference_image(f, b, alpha)
    o = energy_O(u, v, ref, weights.mu)
    d = energy_D(u, f, alpha)
    r = regularizer_value(v, weights.eps, regularizer)
    return EnergyBreakdown(E=o + weights.gamma * d + weights.eta * r, O=o, D=d, R=r)
