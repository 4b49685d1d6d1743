"""Discrete isotropic total variation and PDHG denoising.

The gradient is the forward difference with a zero difference past the last
sample (Neumann). Dirichlet faces are handled by embedding the array in one
layer of zeros on those faces first, so jumps to zero count in the energy.
tv_divergence is the exact negative transpose of tv_gradient.
"""

import logging
import math
from typing import List, Tuple, Union

import numpy as np

from src.common.errors import NumericalError, raise_on_errors
from src.common.models import Field
from src.optim.models import (
    DIRICHLET_ALL,
    DIRICHLET_DETECTION_PLANE,
    TvConfig,
    validate_tv_config,
)

logger = logging.getLogger(__name__)

GAP_CHECK_EVERY = 10

ArrayOrField = Union[np.ndarray, Field]


def _values(p: ArrayOrField) -> np.ndarray:
    return p.values if isinstance(p, Field) else np.asarray(p, dtype=np.float64)


def _pad_widths(ndim: int, boundary: str) -> List[Tuple[int, int]]:
    if boundary == DIRICHLET_ALL:
        return [(1, 1)] * ndim
    if boundary == DIRICHLET_DETECTION_PLANE:
        return [(1, 0)] + [(0, 0)] * (ndim - 1)
    return [(0, 0)] * ndim


def _crop(q: np.ndarray, widths: List[Tuple[int, int]]) -> np.ndarray:
    return q[tuple(slice(lo, q.shape[i] - hi) for i, (lo, hi) in enumerate(widths))]


def tv_gradient(p: np.ndarray, boundary: str) -> np.ndarray:
    """Forward-difference gradient, shape (ndim,) + padded shape."""
    q = np.pad(p, _pad_widths(p.ndim, boundary))
    grad = np.zeros((q.ndim,) + q.shape)
    for axis in range(q.ndim):
        lead = [slice(None)] * q.ndim
        lead[axis] = slice(0, -1)
        grad[(axis,) + tuple(lead)] = np.diff(q, axis=axis)
    return grad


def tv_divergence(g: np.ndarray, boundary: str) -> np.ndarray:
    """Negative transpose of tv_gradient: <grad p, g> = -<p, div g>."""
    ndim = g.shape[0]
    div = np.zeros(g.shape[1:])
    for axis in range(ndim):
        ga = g[axis]
        n = ga.shape[axis]
        if n < 2:
            continue
        first = [slice(None)] * ndim
        middle = [slice(None)] * ndim
        prev = [slice(None)] * ndim
        last = [slice(None)] * ndim
        first[axis] = 0
        middle[axis] = slice(1, n - 1)
        prev[axis] = slice(0, n - 2)
        last[axis] = n - 1
        d = np.empty_like(ga)
        d[tuple(first)] = ga[tuple(first)]
        d[tuple(middle)] = ga[tuple(middle)] - ga[tuple(prev)]
        prev_last = [slice(None)] * ndim
        prev_last[axis] = n - 2
        d[tuple(last)] = -ga[tuple(prev_last)]
        div += d
    return _crop(div, _pad_widths(ndim, boundary))


def _magnitude(grad: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(grad ** 2, axis=0))


def tv_energy(p: ArrayOrField, cfg: TvConfig = None) -> float:
    """Sum over voxels of the Euclidean norm of the gradient."""
    cfg = cfg or TvConfig()
    return float(np.sum(_magnitude(tv_gradient(_values(p), cfg.boundary))))


def _project_dual(y: np.ndarray, radius: float) -> np.ndarray:
    norm = _magnitude(y)
    return y / np.maximum(1.0, norm / radius)[None]


def _denoise_objective(x: np.ndarray, p: np.ndarray, lam: float, boundary: str) -> float:
    return 0.5 * float(np.sum((x - p) ** 2)) + lam * float(np.sum(_magnitude(tv_gradient(x, boundary))))


def _dual_objective(y: np.ndarray, p: np.ndarray, boundary: str, nonneg: bool) -> float:
    """-G*(-K^T y) for G(x) = 1/2 |x - p|^2 (+ indicator of x >= 0)."""
    s = tv_divergence(y, boundary)
    x = np.maximum(0.0, p + s) if nonneg else p + s
    return -(float(np.sum(s * x)) - 0.5 * float(np.sum((x - p) ** 2)))


def tv_denoise(p: ArrayOrField, lam: float, cfg: TvConfig = None) -> ArrayOrField:
    """Minimize 1/2 |q - p|^2 + lam * TV(q), over q >= 0 when cfg.nonneg.

    Accelerated primal-dual hybrid gradient on the 1-strongly convex data
    term, stopped once the relative primal-dual gap drops below pdhg_tol.
    Returns the same kind (array or Field) it was given.
    """
    cfg = cfg or TvConfig()
    raise_on_errors(validate_tv_config(cfg))
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    data = _values(p)
    start = np.maximum(data, 0.0) if cfg.nonneg else data.copy()
    if lam == 0:
        return _wrap(p, start)

    boundary = cfg.boundary
    tau = sigma = 1.0 / math.sqrt(4.0 * data.ndim)
    gamma = 1.0
    x = start.copy()
    x_bar = x.copy()
    y = np.zeros((data.ndim,) + np.pad(data, _pad_widths(data.ndim, boundary)).shape)

    gap = math.inf
    for it in range(1, cfg.pdhg_iters + 1):
        y = _project_dual(y + sigma * tv_gradient(x_bar, boundary), lam)
        x_old = x
        x = (x + tau * tv_divergence(y, boundary) + tau * data) / (1.0 + tau)
        if cfg.nonneg:
            x = np.maximum(x, 0.0)
        theta = 1.0 / math.sqrt(1.0 + 2.0 * gamma * tau)
        tau *= theta
        sigma /= theta
        x_bar = x + theta * (x - x_old)

        if it % GAP_CHECK_EVERY == 0 or it == cfg.pdhg_iters:
            primal = _denoise_objective(x, data, lam, boundary)
            if not math.isfinite(primal):
                raise NumericalError("TV denoising diverged")
            gap = (primal - _dual_objective(y, data, boundary, cfg.nonneg)) / max(abs(primal), 1e-300)
            if gap <= cfg.pdhg_tol:
                break
    logger.debug("tv_denoise: %d iterations, relative gap %.3g", it, gap)

    if _denoise_objective(x, data, lam, boundary) > _denoise_objective(start, data, lam, boundary):
        x = start
    return _wrap(p, x)


def _wrap(template: ArrayOrField, values: np.ndarray) -> ArrayOrField:
    if isinstance(template, Field):
        return Field(values=values, spacing=template.spacing, provenance=dict(template.provenance))
    return values
