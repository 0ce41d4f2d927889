"""Lowest nonzero eigenpairs of the masked curl-curl operator.

Strategy: Lanczos iteration on the pseudo-inverse, applied through conjugate
gradients. The operator is positive semidefinite with a large static
(gradient) null space at zero. Every Krylov vector is kept in range(A) by
explicit divergence cleaning (projection out of the gradient space); inside
that subspace A is positive definite, so plain CG is a valid inner solver.
Without the cleaning, inverse iteration amplifies null-space roundoff by the
CG iteration count at every outer step and diverges within a few steps.

Converged pairs are locked and deflated; repeated restarts pick up
degenerate partners. Acceptance of a pair requires the true relative
residual ||A v - lam v|| <= tol * lam * ||v||.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError


@dataclass
class SolveStats:
    lanczos_steps: int = 0
    cg_iterations: int = 0
    restarts: int = 0
    residuals: list = field(default_factory=list)
    null_fractions: list = field(default_factory=list)


def _cg(apply_a, b, tol, maxiter, stats=None):
    """CG for A x = b with A PSD and b (nearly) in range(A).

    Returns (x, rel_residual) for the best iterate seen; exits early when the
    residual stagnates (the consistency floor set by leftover null content).
    """
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    b_norm = np.sqrt(rs)
    if b_norm == 0.0:
        return x, 0.0
    limit = tol * b_norm
    best_x = x.copy()
    best_rs = rs
    since_best = 0
    ap = np.empty_like(b)
    for _ in range(maxiter):
        apply_a(p, out=ap)
        pap = float(p @ ap)
        if pap <= 0:
            break  # numerically outside the PD subspace
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if stats is not None:
            stats.cg_iterations += 1
        if rs_new < best_rs:
            best_rs = rs_new
            best_x[:] = x
            since_best = 0
        else:
            since_best += 1
        if np.sqrt(rs_new) <= limit:
            return x, np.sqrt(rs_new) / b_norm
        if since_best >= 300:
            break  # stagnated at the consistency floor
        p *= rs_new / rs
        p += r
        rs = rs_new
    return best_x, np.sqrt(best_rs) / b_norm


def _deflate(v, basis):
    for u in basis:
        v -= (u @ v) * u
    return v


def lowest_eigenpairs(
    apply_a,
    project,
    n_dofs: int,
    n_modes: int,
    tol: float = 1e-8,
    cg_tol: float = 1e-11,
    cg_maxiter: int = 30000,
    max_steps: int = 140,
    max_restarts: int = 10,
    seed: int = 7,
):
    """Return (eigenvalues, eigenvectors, stats) for the lowest nonzero modes.

    ``apply_a(x, out=None)`` applies the PSD operator; ``project(x)`` returns
    (x cleaned of the null space, removed fraction). Eigenvalues ascend.
    Raises ConvergenceError (with the best residuals) on failure.
    """
    rng = np.random.default_rng(seed)
    stats = SolveStats()
    locked_vals: list[float] = []
    locked_vecs: list[np.ndarray] = []

    def clean(v):
        v, frac = project(v)
        stats.null_fractions.append(frac)
        return v

    def make_start():
        v = clean(apply_a(rng.standard_normal(n_dofs)))
        _deflate(v, locked_vecs)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ConvergenceError("start vector annihilated; no nonzero spectrum left")
        return v / nrm

    def true_pair(v):
        av = apply_a(v.copy())
        lam = float(v @ av)
        resid = float(np.linalg.norm(av - lam * v)) / abs(lam)
        return lam, resid

    best_residuals = []
    for restart in range(max_restarts):
        if len(locked_vals) >= n_modes:
            break
        stats.restarts = restart
        q = [make_start()]
        alphas: list[float] = []
        betas: list[float] = []
        newly_locked = 0
        for j in range(max_steps):
            y, _ = _cg(apply_a, q[-1], cg_tol, cg_maxiter, stats)
            y = clean(y)
            stats.lanczos_steps += 1
            _deflate(y, locked_vecs)
            if betas:
                y -= betas[-1] * q[-2]
            a_j = float(q[-1] @ y)
            y -= a_j * q[-1]
            for _ in range(2):  # full reorthogonalization, twice for safety
                for u in q:
                    y -= (u @ y) * u
            alphas.append(a_j)
            b_j = float(np.linalg.norm(y))
            t = np.diag(alphas)
            if betas:
                off = np.array(betas)
                t += np.diag(off, 1) + np.diag(off, -1)
            theta, s = np.linalg.eigh(t)
            order = np.argsort(theta)[::-1]
            want = n_modes - len(locked_vals)
            candidates = []
            for idx in order[: want + 1]:
                if theta[idx] <= 0:
                    continue
                bound = b_j * abs(s[-1, idx])  # Lanczos residual estimate on A^+
                if bound > 1e-4 * theta[idx] and j + 1 < max_steps:
                    continue
                candidates.append(idx)
            if candidates:
                qmat = np.column_stack(q)
                for idx in candidates:
                    v = qmat @ s[:, idx]
                    v = clean(v)
                    _deflate(v, locked_vecs)
                    nrm = np.linalg.norm(v)
                    if nrm < 1e-8:
                        continue
                    v /= nrm
                    lam, resid = true_pair(v)
                    if resid > tol:
                        # one inverse-iteration polish step
                        w, _ = _cg(apply_a, v, cg_tol, cg_maxiter, stats)
                        w = clean(w)
                        _deflate(w, locked_vecs)
                        nw = np.linalg.norm(w)
                        if nw > 0:
                            w /= nw
                            lam_w, resid_w = true_pair(w)
                            if resid_w < resid:
                                v, lam, resid = w, lam_w, resid_w
                    if resid <= tol and lam > 0:
                        locked_vals.append(lam)
                        locked_vecs.append(v)
                        stats.residuals.append(resid)
                        newly_locked += 1
                    else:
                        best_residuals.append(resid)
                if len(locked_vals) >= n_modes or newly_locked:
                    break  # rebuild the Krylov space after locking
            if b_j < 1e-12:
                break  # invariant subspace exhausted
            q.append(y / b_j)
            betas.append(b_j)
        if len(locked_vals) >= n_modes:
            break

    if len(locked_vals) < n_modes:
        raise ConvergenceError(
            f"converged {len(locked_vals)}/{n_modes} modes after "
            f"{stats.lanczos_steps} Lanczos steps",
            residuals=best_residuals or stats.residuals,
        )

    order = np.argsort(locked_vals)
    vals = np.array([locked_vals[i] for i in order])
    vecs = np.column_stack([locked_vecs[i] for i in order])
    return vals, vecs, stats
