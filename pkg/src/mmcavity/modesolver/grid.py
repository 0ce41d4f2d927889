"""Staggered-grid discretization of a cavity geometry.

Electric-field unknowns live on Yee edges (Ex on x-directed edges, etc.);
curl values live on faces. Metal walls are perfect electric conductors.

A plain binary staircase mask misplaces curved PEC walls by O(h), which at
desk resolutions costs several percent in frequency with grid-alignment
noise on top. The discretization therefore uses partially filled cells
(conformal weights): each edge carries its vacuum length fraction, each face
its vacuum area fraction, and the curl-curl eigenproblem becomes the
generalized form

    sum_f (circ_f)^2 / A_f = (k h)^2 * sum_e m_e x_e^2,
    circ_f = sum_e +- ell_e x_e,

reduced to a standard symmetric problem with diagonal scalings. Edges with
less than half their length in vacuum are dropped (PEC), so the unknown set
still matches midpoint-style sampling; the fractional weights restore the
wall position to first order. All-vacuum grids (the box validation domain)
reduce exactly to the classic Yee curl-curl.

The masked operator is applied matrix-free through precomputed gather
indices over packed (vacuum-only) vectors; see ``operators.py``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..errors import CapacityError, DomainError
from ..geometry import CavityGeometry

_PAD_CELLS = 2
_DEFAULT_BUDGET_BYTES = 6e9
_EDGE_SAMPLES = 8
_FACE_SAMPLES = 4  # per side
_MIN_FACE_AREA = 0.25
_EDGE_KEEP = 0.05


def _tube_union_mask(tubes, xs, ys, zs):
    """Membership of the tube union on the tensor grid xs x ys x zs."""
    X = xs[:, None, None]
    Y = ys[None, :, None]
    Z = zs[None, None, :]
    out = None
    for t in tubes:
        ax, ay, az = t.axis
        cx, cy, cz = t.center
        ta = (X - cx) * ax + (Y - cy) * ay + (Z - cz) * az
        d2 = (X - cx) ** 2 + (Y - cy) ** 2 + (Z - cz) ** 2
        m = (np.abs(ta) <= t.half_length) & (d2 - ta * ta <= t.radius**2)
        out = m if out is None else (out | m)
    return out


def _offsets(n, h):
    return (np.arange(n) + 0.5) / n * h - 0.5 * h


def _edge_fractions(tubes, xs, ys, zs, axis, h):
    """Vacuum length fraction of each edge; edges run along ``axis``.

    (xs, ys, zs) are the edge-midpoint coordinates.
    """
    frac = None
    for off in _offsets(_EDGE_SAMPLES, h):
        coords = [xs, ys, zs]
        coords[axis] = coords[axis] + off
        m = _tube_union_mask(tubes, *coords).astype(np.float32)
        frac = m if frac is None else frac + m
    return frac / _EDGE_SAMPLES


def _face_fractions(tubes, xs, ys, zs, normal, h):
    """Vacuum area fraction of each face; ``normal`` is the face normal axis.

    (xs, ys, zs) are the face-center coordinates.
    """
    t1, t2 = [a for a in range(3) if a != normal]
    frac = None
    for o1 in _offsets(_FACE_SAMPLES, h):
        for o2 in _offsets(_FACE_SAMPLES, h):
            coords = [xs, ys, zs]
            coords[t1] = coords[t1] + o1
            coords[t2] = coords[t2] + o2
            m = _tube_union_mask(tubes, *coords).astype(np.float32)
            frac = m if frac is None else frac + m
    return frac / _FACE_SAMPLES**2


def _pack_ids(mask, offset):
    """Running unknown ids (C order) over True entries, -1 elsewhere."""
    ids = np.full(mask.shape, -1, dtype=np.int64)
    ids[mask] = offset + np.arange(int(mask.sum()), dtype=np.int64)
    return ids


def _pad_axis(ids, axis, side):
    """Shift ids by one along ``axis`` with a -1 fill plane on ``side``."""
    pad = [(0, 0)] * ids.ndim
    pad[axis] = (1, 0) if side == "start" else (0, 1)
    return np.pad(ids, pad, constant_values=-1)


@dataclass(frozen=True)
class DiscretizedDomain:
    """Masked Yee grid: geometry, spacing, unknown layout and stencil tables."""

    geometry: CavityGeometry | None
    h: float
    origin: np.ndarray
    shape: tuple[int, int, int]  # cells per axis
    cell_mask: np.ndarray
    edge_masks: tuple[np.ndarray, np.ndarray, np.ndarray]
    face_masks: tuple = field(repr=False, default=None)
    face_gather: tuple = field(repr=False, default=None)  # 4 int32 arrays into packed E
    edge_gather: tuple = field(repr=False, default=None)  # 4 int32 arrays into packed F
    node_mask: np.ndarray = field(repr=False, default=None)  # interior vacuum nodes
    div_gather: tuple = field(repr=False, default=None)  # 6 edge ids per interior node
    grad_gather: tuple = field(repr=False, default=None)  # 2 node ids per packed edge
    edge_ell: np.ndarray = field(repr=False, default=None)  # packed length fractions
    edge_mass: np.ndarray = field(repr=False, default=None)  # packed dual-volume weights
    face_inv_area: np.ndarray = field(repr=False, default=None)  # packed 1/A_f
    full_ell: tuple = field(repr=False, default=None)  # full-grid fraction arrays
    full_dual: tuple = field(repr=False, default=None)
    full_area: tuple = field(repr=False, default=None)

    @property
    def n_edges(self) -> int:
        return sum(int(m.sum()) for m in self.edge_masks)

    @property
    def n_faces(self) -> int:
        return sum(int(m.sum()) for m in self.face_masks)

    @property
    def n_vacuum_cells(self) -> int:
        return int(self.cell_mask.sum())

    @property
    def vacuum_volume_m3(self) -> float:
        """Rasterized vacuum volume (cell-center count times cell volume)."""
        return self.n_vacuum_cells * self.h**3

    def connected_components(self) -> int:
        _, n = ndimage.label(self.cell_mask)
        return int(n)

    def cell_centers(self):
        nx, ny, nz = self.shape
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.h
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.h
        zs = self.origin[2] + (np.arange(nz) + 0.5) * self.h
        return xs, ys, zs

    # --- packed <-> full-grid conversion -------------------------------

    def pack(self, ex, ey, ez):
        mx, my, mz = self.edge_masks
        return np.concatenate([ex[mx], ey[my], ez[mz]])

    def unpack(self, packed):
        mx, my, mz = self.edge_masks
        nx_, ny_ = int(mx.sum()), int(my.sum())
        ex = np.zeros(mx.shape)
        ey = np.zeros(my.shape)
        ez = np.zeros(mz.shape)
        ex[mx] = packed[:nx_]
        ey[my] = packed[nx_ : nx_ + ny_]
        ez[mz] = packed[nx_ + ny_ :]
        return ex, ey, ez

    def unpack_faces(self, packed):
        fx, fy, fz = self.face_masks
        nx_, ny_ = int(fx.sum()), int(fy.sum())
        hx = np.zeros(fx.shape)
        hy = np.zeros(fy.shape)
        hz = np.zeros(fz.shape)
        hx[fx] = packed[:nx_]
        hy[fy] = packed[nx_ : nx_ + ny_]
        hz[fz] = packed[nx_ + ny_ :]
        return hx, hy, hz

    def with_cells_removed(self, removed: np.ndarray) -> "DiscretizedDomain":
        """Domain with ``removed`` cells flipped to metal (wall pushed in).

        Edges touching a removed cell become PEC; the new wall is a plain
        staircase there. Meant for re-solve checks of small deformations.
        """
        if removed.shape != self.cell_mask.shape:
            raise DomainError("removed-cell mask shape mismatch")
        cell_mask = self.cell_mask & ~removed
        grown = np.pad(removed, 1, constant_values=False)
        mx, my, mz = self.edge_masks
        kill_x = (
            grown[1:-1, :-1, :-1] | grown[1:-1, 1:, :-1] | grown[1:-1, :-1, 1:] | grown[1:-1, 1:, 1:]
        )
        kill_y = (
            grown[:-1, 1:-1, :-1] | grown[1:, 1:-1, :-1] | grown[:-1, 1:-1, 1:] | grown[1:, 1:-1, 1:]
        )
        kill_z = (
            grown[:-1, :-1, 1:-1] | grown[1:, :-1, 1:-1] | grown[:-1, 1:, 1:-1] | grown[1:, 1:, 1:-1]
        )
        masks = (mx & ~kill_x, my & ~kill_y, mz & ~kill_z)
        return _assemble(
            self.geometry,
            self.h,
            self.origin,
            self.shape,
            cell_mask,
            masks,
            self.full_ell,
            self.full_dual,
            self.full_area,
        )


def _assemble(geometry, h, origin, shape, cell_mask, edge_masks, full_ell, full_dual, full_area):
    """Build face activity masks, packed gather tables and weight vectors."""
    nx, ny, nz = shape
    mx, my, mz = edge_masks
    ex_id = _pack_ids(mx, 0)
    ey_id = _pack_ids(my, int(mx.sum()))
    ez_id = _pack_ids(mz, int(mx.sum()) + int(my.sum()))
    n_edges = int(mx.sum() + my.sum() + mz.sum())
    if n_edges == 0:
        raise DomainError("discretization has no vacuum edges")

    # face slots: Hx=(dEz/dy - dEy/dz), Hy=(dEx/dz - dEz/dx), Hz=(dEy/dx - dEx/dy)
    fx_slots = (ez_id[:, 1:, :], ez_id[:, :-1, :], ey_id[:, :, 1:], ey_id[:, :, :-1])
    fy_slots = (ex_id[:, :, 1:], ex_id[:, :, :-1], ez_id[1:, :, :], ez_id[:-1, :, :])
    fz_slots = (ey_id[1:, :, :], ey_id[:-1, :, :], ex_id[:, 1:, :], ex_id[:, :-1, :])

    face_masks = []
    face_ids = []
    offset = 0
    for slots in (fx_slots, fy_slots, fz_slots):
        active = (slots[0] >= 0) | (slots[1] >= 0) | (slots[2] >= 0) | (slots[3] >= 0)
        face_masks.append(active)
        face_ids.append(_pack_ids(active, offset))
        offset += int(active.sum())
    n_faces = offset

    def _sel(slots, sentinel, mask):
        return tuple(np.where(s[mask] >= 0, s[mask], sentinel).astype(np.int32) for s in slots)

    fg_parts = [
        _sel(fx_slots, n_edges, face_masks[0]),
        _sel(fy_slots, n_edges, face_masks[1]),
        _sel(fz_slots, n_edges, face_masks[2]),
    ]
    face_gather = tuple(np.concatenate([p[s] for p in fg_parts]) for s in range(4))

    fx_id, fy_id, fz_id = face_ids
    # dual curl slots per edge component (+,-,-,+ pattern); out-of-range
    # neighbors become the -1 fill and end up pointing at the zero slot
    ex_slots = (
        _pad_axis(fz_id, 1, "end"),
        _pad_axis(fz_id, 1, "start"),
        _pad_axis(fy_id, 2, "end"),
        _pad_axis(fy_id, 2, "start"),
    )
    ey_slots = (
        _pad_axis(fx_id, 2, "end"),
        _pad_axis(fx_id, 2, "start"),
        _pad_axis(fz_id, 0, "end"),
        _pad_axis(fz_id, 0, "start"),
    )
    ez_slots = (
        _pad_axis(fy_id, 0, "end"),
        _pad_axis(fy_id, 0, "start"),
        _pad_axis(fx_id, 1, "end"),
        _pad_axis(fx_id, 1, "start"),
    )
    eg_parts = [
        _sel(ex_slots, n_faces, mx),
        _sel(ey_slots, n_faces, my),
        _sel(ez_slots, n_faces, mz),
    ]
    edge_gather = tuple(np.concatenate([p[s] for p in eg_parts]) for s in range(4))

    # conformal weights, clamped for conditioning
    ell = np.concatenate([full_ell[c][edge_masks[c]] for c in range(3)]).astype(np.float64)
    ell = np.clip(ell, 0.01, 1.0)
    dual = np.concatenate([full_dual[c][edge_masks[c]] for c in range(3)]).astype(np.float64)
    mass = ell * np.clip(dual, _MIN_FACE_AREA, 1.0)  # dual-volume weight
    area = np.concatenate([full_area[c][face_masks[c]] for c in range(3)]).astype(np.float64)
    inv_area = 1.0 / np.clip(area, _MIN_FACE_AREA, 1.0)

    # interior vacuum nodes (all six incident edges vacuum) carry the static
    # potentials whose weighted gradients span the curl-curl null space
    node_mask = (
        mx[1:, 1:-1, 1:-1]
        & mx[:-1, 1:-1, 1:-1]
        & my[1:-1, 1:, 1:-1]
        & my[1:-1, :-1, 1:-1]
        & mz[1:-1, 1:-1, 1:]
        & mz[1:-1, 1:-1, :-1]
    )
    n_nodes = int(node_mask.sum())
    div_slots = (
        ex_id[1:, 1:-1, 1:-1],
        ex_id[:-1, 1:-1, 1:-1],
        ey_id[1:-1, 1:, 1:-1],
        ey_id[1:-1, :-1, 1:-1],
        ez_id[1:-1, 1:-1, 1:],
        ez_id[1:-1, 1:-1, :-1],
    )
    div_gather = tuple(s[node_mask].astype(np.int32) for s in div_slots)
    assert all((g >= 0).all() for g in div_gather), "interior node touching a metal edge"

    nid = np.full((nx + 1, ny + 1, nz + 1), -1, dtype=np.int64)
    inner = np.full(node_mask.shape, -1, dtype=np.int64)
    inner[node_mask] = np.arange(n_nodes)
    nid[1:-1, 1:-1, 1:-1] = inner
    ga_parts = [
        (nid[:-1, :, :][mx], nid[1:, :, :][mx]),
        (nid[:, :-1, :][my], nid[:, 1:, :][my]),
        (nid[:, :, :-1][mz], nid[:, :, 1:][mz]),
    ]
    ga = [np.concatenate([p[s] for p in ga_parts]) for s in range(2)]
    grad_gather = tuple(np.where(g >= 0, g, n_nodes).astype(np.int32) for g in ga)

    for m in tuple(edge_masks) + tuple(face_masks):
        m.flags.writeable = False
    return DiscretizedDomain(
        geometry=geometry,
        h=h,
        origin=np.asarray(origin, dtype=float),
        shape=shape,
        cell_mask=cell_mask,
        edge_masks=tuple(edge_masks),
        face_masks=tuple(face_masks),
        face_gather=face_gather,
        edge_gather=edge_gather,
        node_mask=node_mask,
        div_gather=div_gather,
        grad_gather=grad_gather,
        edge_ell=ell,
        edge_mass=mass,
        face_inv_area=inv_area,
        full_ell=full_ell,
        full_dual=full_dual,
        full_area=full_area,
    )


def estimate_bytes(shape, vacuum_fraction=1.0):
    """Rough peak-memory estimate for discretizing and solving on this grid."""
    cells = float(np.prod(shape))
    n_edges = 3.3 * cells * vacuum_fraction
    transient = cells * 8 * 12  # id arrays and broadcast temporaries
    solver = n_edges * 8 * 80  # Krylov basis and workspace
    masks = cells * 10
    return transient + solver + masks


def discretize(
    geometry: CavityGeometry,
    resolution: int,
    pad_cells: int = _PAD_CELLS,
    budget_bytes: float = _DEFAULT_BUDGET_BYTES,
) -> DiscretizedDomain:
    """Rasterize a geometry at ``resolution`` cells per (smallest) tube diameter."""
    if resolution < 8:
        raise DomainError(f"resolution must be >= 8 cells per diameter, got {resolution}")
    h = geometry.min_diameter() / resolution
    lo, hi = geometry.bounding_box
    shape = tuple(int(np.ceil((hi[i] - lo[i]) / h - 1e-9)) + 2 * pad_cells for i in range(3))
    origin = np.asarray(lo) - pad_cells * h

    est = estimate_bytes(shape, vacuum_fraction=0.2)
    if est > budget_bytes:
        suggested = max(8, int(resolution * (budget_bytes / est) ** (1 / 3)))
        raise CapacityError(
            f"grid {shape} at resolution {resolution} needs ~{est/1e9:.1f} GB "
            f"(budget {budget_bytes/1e9:.1f} GB); try resolution <= {suggested}",
            suggested_resolution=suggested,
        )

    nx, ny, nz = shape
    xn = origin[0] + np.arange(nx + 1) * h
    yn = origin[1] + np.arange(ny + 1) * h
    zn = origin[2] + np.arange(nz + 1) * h
    xc, yc, zc = xn[:-1] + 0.5 * h, yn[:-1] + 0.5 * h, zn[:-1] + 0.5 * h

    tubes = geometry.tubes
    cell_mask = _tube_union_mask(tubes, xc, yc, zc)
    full_ell = (
        _edge_fractions(tubes, xc, yn, zn, 0, h),  # Ex edges
        _edge_fractions(tubes, xn, yc, zn, 1, h),  # Ey edges
        _edge_fractions(tubes, xn, yn, zc, 2, h),  # Ez edges
    )
    full_area = (
        _face_fractions(tubes, xn, yc, zc, 0, h),  # Hx faces
        _face_fractions(tubes, xc, yn, zc, 1, h),  # Hy faces
        _face_fractions(tubes, xc, yc, zn, 2, h),  # Hz faces
    )
    # dual faces are transverse squares centered on the edge midpoints
    full_dual = (
        _face_fractions(tubes, xc, yn, zn, 0, h),
        _face_fractions(tubes, xn, yc, zn, 1, h),
        _face_fractions(tubes, xn, yn, zc, 2, h),
    )
    edge_masks = tuple(f > _EDGE_KEEP for f in full_ell)
    return _assemble(
        geometry, h, origin, shape, cell_mask, edge_masks, full_ell, full_dual, full_area
    )


def box_domain(a: float, b: float, l: float, cells_min_side: int) -> DiscretizedDomain:
    """All-vacuum rectangular PEC box, for closed-form solver validation.

    The box dimensions are rounded to whole cells; compare against analytic
    formulas using ``effective_dims`` (= shape * h). All conformal weights
    are 1, so the operator is exactly the classic Yee curl-curl.
    """
    if min(a, b, l) <= 0:
        raise DomainError("box dimensions must be positive")
    if cells_min_side < 4:
        raise DomainError("need at least 4 cells across the smallest side")
    h = min(a, b, l) / cells_min_side
    shape = tuple(max(1, round(d / h)) for d in (a, b, l))
    nx, ny, nz = shape
    cell_mask = np.ones(shape, dtype=bool)

    mx = np.zeros((nx, ny + 1, nz + 1), dtype=bool)
    my = np.zeros((nx + 1, ny, nz + 1), dtype=bool)
    mz = np.zeros((nx + 1, ny + 1, nz), dtype=bool)
    mx[:, 1:-1, 1:-1] = True  # interior edges only: tangential E = 0 on walls
    my[1:-1, :, 1:-1] = True
    mz[1:-1, 1:-1, :] = True
    full_ell = tuple(np.ones(m.shape, dtype=np.float32) for m in (mx, my, mz))
    full_dual = tuple(np.ones(m.shape, dtype=np.float32) for m in (mx, my, mz))
    full_area = (
        np.ones((nx + 1, ny, nz), dtype=np.float32),
        np.ones((nx, ny + 1, nz), dtype=np.float32),
        np.ones((nx, ny, nz + 1), dtype=np.float32),
    )
    return _assemble(
        None, h, np.zeros(3), shape, cell_mask, (mx, my, mz), full_ell, full_dual, full_area
    )


def effective_dims(domain: DiscretizedDomain):
    return tuple(n * domain.h for n in domain.shape)
