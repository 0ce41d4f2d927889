"""2D validation path for the circular-waveguide cutoff.

The cutoff wavenumber of the lowest (TE11) mode is the square root of the
first nonzero Neumann eigenvalue of the Laplacian on the disc cross-section.
A cut-cell finite-volume discretization (fractional cell areas and face
apertures) keeps the staircase error small enough to validate the analytic
1.8412 c / (pi d) value at modest resolutions.
"""

from __future__ import annotations

import numpy as np
from scipy.constants import c as C0
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import eigsh

from ..errors import ConvergenceError, DomainError

_SUBSAMPLES = 16
_MIN_AREA = 1e-3


def _disc_fractions(n: int, h: float, radius: float):
    """Cell area fractions and face apertures for a disc of given radius.

    The grid covers [-radius-h, radius+h]^2 with n+2 cells per side.
    """
    m = n + 2
    lo = -radius - h
    s = _SUBSAMPLES

    # cell area fractions via subsampling
    cs = (np.arange(m * s) + 0.5) * (h / s) + lo
    inside = (cs[:, None] ** 2 + cs[None, :] ** 2) <= radius**2
    area = inside.reshape(m, s, m, s).mean(axis=(1, 3))

    # face apertures: fraction of each grid line segment inside the disc
    nodes = np.arange(m + 1) * h + lo
    seg = (np.arange(s) + 0.5) * (h / s)
    # vertical faces at x=nodes[i], spanning y in [nodes[j], nodes[j]+h]
    ys = nodes[:-1, None] + seg[None, :]
    ap_x = ((nodes[:, None, None] ** 2 + ys[None, :, :] ** 2) <= radius**2).mean(axis=2)
    ap_y = ap_x.T.copy()  # disc is symmetric under x<->y
    return area, ap_x, ap_y


def cutoff_2d(diameter_m: float, resolution: int) -> float:
    """Numerical cutoff frequency from the disc Neumann eigenproblem.

    resolution = cells per diameter (>= 16). Returns c*sqrt(mu)/(2*pi) where
    mu is the first nonzero eigenvalue.
    """
    if not diameter_m > 0:
        raise DomainError(f"diameter must be positive, got {diameter_m}")
    if resolution < 16:
        raise DomainError(f"resolution must be >= 16, got {resolution}")
    radius = 0.5 * diameter_m
    h = diameter_m / resolution
    area, ap_x, ap_y = _disc_fractions(resolution, h, radius)
    m = area.shape[0]

    keep = area >= _MIN_AREA
    ids = np.full(area.shape, -1, dtype=np.int64)
    ids[keep] = np.arange(int(keep.sum()))
    n_dof = int(keep.sum())

    rows, cols, vals = [], [], []

    def _couple(ia, ib, w):
        ok = (ia >= 0) & (ib >= 0) & (w > 0)
        a, b, ww = ia[ok], ib[ok], w[ok]
        rows.extend((a, b, a, b))
        cols.extend((b, a, a, b))
        vals.extend((-ww, -ww, ww, ww))

    # x-neighbors share the vertical face at the interior node plane
    _couple(ids[:-1, :].ravel(), ids[1:, :].ravel(), ap_x[1:-1, :].ravel())
    _couple(ids[:, :-1].ravel(), ids[:, 1:].ravel(), ap_y[:, 1:-1].ravel())

    lap = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dof, n_dof),
    ).tocsr()
    mass = area[keep] * h**2

    # symmetric similarity transform of the generalized problem
    d = 1.0 / np.sqrt(mass)
    b = lap.multiply(d[:, None]).multiply(d[None, :])
    sigma = -0.25 * (2 * np.pi / diameter_m) ** 2  # generic negative shift
    try:
        mu = eigsh(b, k=4, sigma=sigma, which="LM", return_eigenvectors=False)
    except Exception as exc:
        raise ConvergenceError(f"2D Neumann eigensolve failed: {exc}") from exc
    mu = np.sort(mu)
    tol = abs(mu[-1]) * 1e-8
    nonzero = mu[mu > tol]
    if nonzero.size == 0:
        raise ConvergenceError("no nonzero Neumann eigenvalue found", residuals=list(mu))
    return float(C0 * np.sqrt(nonzero[0]) / (2 * np.pi))
