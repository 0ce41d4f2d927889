"""Matrix-free masked operators over packed vacuum-edge vectors.

The generalized conformal eigenproblem  K x = (k h)^2 M x  with
K = G_ell^T diag(1/A_f) G_ell (G_ell = edge-length-weighted curl) and
M = diag(m_e) is reduced to a standard symmetric one for y = M^(1/2) x:

    A y = D_s C^T D_A C D_s y / h^2,   D_s = diag(ell_e / sqrt(m_e)).

``CurlCurlOperator`` applies A; its eigenvalues are (2 pi f / c)^2.
``GradientProjector`` removes the static null-space component, which for
this scaling consists of vectors (sqrt(m)/ell) * (node potential
differences); cleaning solves a small weighted node Laplacian with CG.
"""

from __future__ import annotations

import numpy as np

from .._kernels import BACKEND, gather4, gather6
from .grid import DiscretizedDomain


class CurlCurlOperator:
    """Symmetric PSD conformal curl-curl in the mass-scaled (y) basis."""

    def __init__(self, domain: DiscretizedDomain):
        self.domain = domain
        self.n = domain.n_edges
        self.n_faces = domain.n_faces
        self._inv_h2 = 1.0 / domain.h**2
        self._fi = domain.face_gather
        self._ei = domain.edge_gather
        self._s = domain.edge_ell / np.sqrt(domain.edge_mass)
        self._inv_area = domain.face_inv_area
        self._e_pad = np.zeros(self.n + 1)
        self._f_pad = np.zeros(self.n_faces + 1)
        self.n_applies = 0

    def apply(self, y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty(self.n)
        np.multiply(y, self._s, out=self._e_pad[: self.n])
        fi, ei = self._fi, self._ei
        fbuf = self._f_pad[: self.n_faces]
        gather4(self._e_pad, fi[0], fi[1], fi[2], fi[3], 1.0, fbuf)
        fbuf *= self._inv_area
        gather4(self._f_pad, ei[0], ei[1], ei[2], ei[3], self._inv_h2, out)
        out *= self._s
        self.n_applies += 1
        return out

    def to_field(self, y: np.ndarray) -> np.ndarray:
        """Convert a mass-scaled eigenvector to physical field values."""
        return y / np.sqrt(self.domain.edge_mass)

    def curl(self, x: np.ndarray) -> np.ndarray:
        """Packed face values of curl E from field values x."""
        np.multiply(x, self.domain.edge_ell, out=self._e_pad[: self.n])
        fi = self._fi
        out = np.empty(self.n_faces)
        gather4(self._e_pad, fi[0], fi[1], fi[2], fi[3], 1.0, out)
        out *= self._inv_area / self.domain.h
        return out

    @property
    def backend(self) -> str:
        return BACKEND


class GradientProjector:
    """Projection onto the orthogonal complement of the static null space.

    Null vectors are w * (potential differences) with w = sqrt(m)/ell; the
    least-squares potential solves the weighted interior-node Laplacian.
    """

    def __init__(self, domain: DiscretizedDomain, tol: float = 1e-10, maxiter: int = 4000):
        self.domain = domain
        self.n_edges = domain.n_edges
        self.n_nodes = len(domain.div_gather[0])
        self.tol = tol
        self.maxiter = maxiter
        self._di = domain.div_gather
        self._gi = domain.grad_gather
        self._w = np.sqrt(domain.edge_mass) / domain.edge_ell
        self._w2 = self._w**2
        self._e_pad = np.zeros(self.n_edges + 1)
        self._p_pad = np.zeros(self.n_nodes + 1)
        self._sent = np.full(len(self._gi[0]), self.n_nodes, dtype=np.int32)

    def divergence(self, x: np.ndarray) -> np.ndarray:
        """Net outflow of x at each interior node (unit lattice)."""
        self._e_pad[: self.n_edges] = x
        d = self._di
        out = np.empty(self.n_nodes)
        gather6(self._e_pad, d[0], d[1], d[2], d[3], d[4], d[5], 1.0, out)
        return out

    def grad_t(self, psi: np.ndarray) -> np.ndarray:
        """Adjoint of ``divergence``: edge values psi_a - psi_b."""
        self._p_pad[: self.n_nodes] = psi
        out = np.empty(self.n_edges)
        gather4(self._p_pad, self._gi[0], self._gi[1], self._sent, self._sent, 1.0, out)
        return out

    def _laplacian(self, psi: np.ndarray) -> np.ndarray:
        return self.divergence(self._w2 * self.grad_t(psi))

    def project(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        """Return (y cleaned of the null space, removed energy fraction)."""
        if self.n_nodes == 0:
            return y, 0.0
        b = self.divergence(self._w * y)
        psi = np.zeros(self.n_nodes)
        r = b.copy()
        p = r.copy()
        rs = float(r @ r)
        if rs == 0.0:
            return y, 0.0
        limit = (self.tol**2) * rs
        for _ in range(self.maxiter):
            ap = self._laplacian(p)
            alpha = rs / float(p @ ap)
            psi += alpha * p
            r -= alpha * ap
            rs_new = float(r @ r)
            if rs_new <= limit:
                break
            p *= rs_new / rs
            p += r
            rs = rs_new
        g = self._w * self.grad_t(psi)
        y_clean = y - g
        denom = float(y @ y)
        frac = float(g @ g) / denom if denom > 0 else 0.0
        return y_clean, frac
