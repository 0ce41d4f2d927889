"""Wall-deformation frequency shifts (Slater perturbation) and piezo tuning."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DomainError, EmptySelectionError
from .grid import DiscretizedDomain
from .modes import EigenMode

#: selector signature: (face_centers (N,3), outward_normals (N,3)) -> bool (N,)
PatchSelector = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Deformation:
    """Normal displacement of a metal-wall patch.

    delta_m > 0 moves the wall into the vacuum (cavity volume removed);
    delta_m < 0 pulls it outward. |delta_m| <= grid spacing keeps the
    first-order estimate meaningful; larger values trigger a warning.
    """

    patch: PatchSelector
    delta_m: float


def boundary_faces(domain: DiscretizedDomain):
    """Metal boundary faces as (centers (N,3), outward normals (N,3), vacuum cell idx (N,3)).

    Normals point from vacuum into metal.
    """
    mask = domain.cell_mask
    h, org = domain.h, domain.origin
    centers, normals, cells = [], [], []
    for axis in range(3):
        m_lo = mask.take(range(0, mask.shape[axis] - 1), axis=axis)
        m_hi = mask.take(range(1, mask.shape[axis]), axis=axis)
        for sign, vac_side in ((1, m_lo & ~m_hi), (-1, m_hi & ~m_lo)):
            idx = np.argwhere(vac_side)
            if idx.size == 0:
                continue
            cell = idx.copy()
            if sign < 0:
                cell[:, axis] += 1  # vacuum cell is on the high side
            ctr = (cell + 0.5) * h + org
            ctr[:, axis] += sign * 0.5 * h  # face plane between the two cells
            nrm = np.zeros((len(idx), 3))
            nrm[:, axis] = sign
            centers.append(ctr)
            normals.append(nrm)
            cells.append(cell)
    if not centers:
        raise DomainError("domain has no metal boundary faces")
    return np.vstack(centers), np.vstack(normals), np.vstack(cells)


def slater_shift(mode: EigenMode, deformation: Deformation) -> float:
    """First-order frequency shift for a wall patch displaced by delta.

    df/f = (dU_H - dU_E) / U_total over the swept volume: removing wall-side
    volume where the magnetic energy dominates raises the frequency, removing
    electric-energy-dominated volume lowers it.
    """
    domain = mode.domain
    if abs(deformation.delta_m) > domain.h:
        warnings.warn(
            f"|delta| = {abs(deformation.delta_m):.3g} m exceeds the grid spacing "
            f"{domain.h:.3g} m; first-order estimate may be inaccurate"
        )
    centers, normals, cells = boundary_faces(domain)
    sel = np.asarray(deformation.patch(centers, normals), dtype=bool)
    if sel.shape != (len(centers),):
        raise DomainError("patch selector must return one bool per boundary face")
    if not sel.any():
        raise EmptySelectionError("deformation patch selects no boundary faces")

    u_e = mode.cell_energy_density()
    u_h = mode.cell_magnetic_energy_density()
    h = domain.h
    u_total = float((u_e + u_h)[domain.cell_mask].sum()) * h**3

    ci = cells[sel]
    swept = h**2 * deformation.delta_m  # signed: removed (>0) or added (<0)
    du_e = float(u_e[ci[:, 0], ci[:, 1], ci[:, 2]].sum()) * swept
    du_h = float(u_h[ci[:, 0], ci[:, 1], ci[:, 2]].sum()) * swept
    return mode.frequency_hz * (du_h - du_e) / u_total


def deformed_domain(domain: DiscretizedDomain, deformation: Deformation) -> DiscretizedDomain:
    """Staircase re-solve oracle: flip the swept cell layer(s) of the patch.

    Only inward displacements (delta > 0) are supported; the displacement is
    rounded to whole cell layers (at least one).
    """
    if deformation.delta_m <= 0:
        raise DomainError("re-solve oracle supports inward (delta > 0) displacements")
    layers = max(1, round(deformation.delta_m / domain.h))
    centers, normals, cells = boundary_faces(domain)
    sel = np.asarray(deformation.patch(centers, normals), dtype=bool)
    if not sel.any():
        raise EmptySelectionError("deformation patch selects no boundary faces")
    removed = np.zeros_like(domain.cell_mask)
    ci = cells[sel]
    ni = normals[sel].astype(int)
    for layer in range(layers):
        pos = ci - (layer) * ni  # march inward opposite the outward normal
        ok = np.all((pos >= 0) & (pos < domain.cell_mask.shape), axis=1)
        pos = pos[ok]
        removed[pos[:, 0], pos[:, 1], pos[:, 2]] = True
    removed &= domain.cell_mask
    return domain.with_cells_removed(removed)


def piezo_tuning_curve(sensitivity_hz_per_v: float, v_max: float, voltages) -> np.ndarray:
    """Linear stress-tuning model: df = sensitivity * V, clamped at sensitivity * v_max."""
    if sensitivity_hz_per_v < 0:
        raise DomainError(f"sensitivity magnitude must be >= 0, got {sensitivity_hz_per_v}")
    if v_max <= 0:
        raise DomainError(f"v_max must be positive, got {v_max}")
    v = np.asarray(voltages, dtype=float)
    if np.any(v < 0):
        raise DomainError("voltages must be nonnegative")
    return sensitivity_hz_per_v * np.minimum(v, v_max)
