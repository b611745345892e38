# fusion/grid.py
"""
Discrete differential operators on rectangular pixel grids.

Arrays are laid out as ``(..., H, W)`` with unit spacing. A vector field adds
a component axis just before the grid axes, ``(..., 2, H, W)``: component 0
is the x (column) difference, component 1 the y (row) difference.

``grad`` uses forward differences with a zero last column/row (Neumann
closure); ``div`` is its negative adjoint, so that
``<grad u, p> + <u, div p> == 0`` holds exactly and ``||grad||^2 <= 8``.
"""

import logging

import numpy as np
from scipy import sparse

from .exceptions import ConvergenceError

logger = logging.getLogger(__name__)

# ||grad||^2 for forward differences with Neumann closure never exceeds this.
GRAD_NORM_SQ_BOUND = 8.0


def grad(u):
    """Forward-difference gradient of ``u`` over its last two axes."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape[:-2] + (2,) + u.shape[-2:])
    out[..., 0, :, :-1] = u[..., :, 1:] - u[..., :, :-1]
    out[..., 1, :-1, :] = u[..., 1:, :] - u[..., :-1, :]
    return out


def div(p):
    """Backward-difference divergence, the negative adjoint of :func:`grad`."""
    p = np.asarray(p, dtype=np.float64)
    px = p[..., 0, :, :]
    py = p[..., 1, :, :]
    out = np.zeros(px.shape)

    out[..., :, 0] = px[..., :, 0]
    out[..., :, 1:-1] = px[..., :, 1:-1] - px[..., :, :-2]
    out[..., :, -1] = -px[..., :, -2]

    out[..., 0, :] += py[..., 0, :]
    out[..., 1:-1, :] += py[..., 1:-1, :] - py[..., :-2, :]
    out[..., -1, :] -= py[..., -2, :]
    return out


def laplacian(u):
    """Five-point Laplacian with Neumann boundary, defined as ``div(grad(u))``."""
    return div(grad(u))


def pixel_norm(p):
    """Euclidean length of a vector field at every pixel."""
    return np.sqrt(np.sum(np.asarray(p) ** 2, axis=-3))


def inner(a, b):
    """Plain inner product of two equally shaped arrays."""
    return float(np.vdot(np.ravel(a), np.ravel(b)))


# -------------------------------------------------------------------
# Sparse matrix forms (row-major flattening of a single H x W channel)
# -------------------------------------------------------------------

def _forward_difference_1d(n):
    main = -np.ones(n)
    main[-1] = 0.0
    upper = np.ones(n - 1)
    return sparse.diags([main, upper], [0, 1], shape=(n, n), format="csr")


def _face_average_1d(n):
    main = np.full(n, 0.5)
    main[-1] = 0.0
    upper = np.full(n - 1, 0.5)
    return sparse.diags([main, upper], [0, 1], shape=(n, n), format="csr")


def gradient_matrix(height, width):
    """Sparse ``(2HW, HW)`` matrix acting like :func:`grad` on a flattened channel."""
    _check_dimensions(height, width)
    gx = sparse.kron(sparse.identity(height), _forward_difference_1d(width))
    gy = sparse.kron(_forward_difference_1d(height), sparse.identity(width))
    return sparse.vstack([gx, gy], format="csr")


def face_average_matrix(height, width):
    """Sparse ``(2HW, HW)`` matrix averaging a channel onto the grid faces.

    Rows follow the layout of :func:`gradient_matrix`; the closing faces
    (last column for x, last row for y) are zero.
    """
    _check_dimensions(height, width)
    ax = sparse.kron(sparse.identity(height), _face_average_1d(width))
    ay = sparse.kron(_face_average_1d(height), sparse.identity(width))
    return sparse.vstack([ax, ay], format="csr")


def laplacian_matrix(height, width):
    """Sparse ``-G^T G``, the matrix of :func:`laplacian`."""
    g = gradient_matrix(height, width)
    return (-(g.T @ g)).tocsr()


def _check_dimensions(height, width):
    if height < 2 or width < 2:
        raise ValueError(f"grid must be at least 2x2, got {height}x{width}")


def operator_norm_sq_estimate(height, width, tol=1e-12, maxiter=100000):
    """
    Power-iteration estimate of ``||grad||^2`` on a ``height x width`` grid.

    Iterates on ``-laplacian``, which is symmetric positive semi-definite, and
    returns the Rayleigh quotient ``||grad x||^2 / ||x||^2``. The quotient never
    exceeds the largest eigenvalue, hence never exceeds 8.
    """
    _check_dimensions(height, width)
    rng = np.random.default_rng(0)
    rows, cols = np.indices((height, width))
    x = np.where((rows + cols) % 2 == 0, 1.0, -1.0) + 0.1 * rng.standard_normal((height, width))
    x /= np.linalg.norm(x)

    estimate = 0.0
    for iteration in range(1, maxiter + 1):
        y = -laplacian(x)
        previous, estimate = estimate, inner(x, y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(estimate - previous) <= tol * estimate:
            logger.debug(
                "operator norm %dx%d: %.12f after %d iterations",
                height, width, estimate, iteration,
            )
            return estimate
    raise ConvergenceError(
        f"power iteration for ||grad||^2 on {height}x{width} did not settle",
        iterations=maxiter,
        residual=abs(estimate - previous),
    )
