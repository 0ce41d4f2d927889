import time

import numpy as np

from mmcavity.modesolver import box_domain
from mmcavity.modesolver.eigensolver import _cg, _deflate
from mmcavity.modesolver.operators import CurlCurlOperator

dom = box_domain(2.2e-3, 1.1e-3, 2.2e-3, 6)
op = CurlCurlOperator(dom)
apply_a = op.apply
n = op.n
rng = np.random.default_rng(7)

locked_vecs = []
v = apply_a(rng.standard_normal(n))
v /= np.linalg.norm(v)
q = [v]
alphas, betas = [], []
for j in range(25):
    t0 = time.time()
    y, rr = _cg(apply_a, q[-1], 1e-11, 30000)
    tcg = time.time() - t0
    if betas:
        y -= betas[-1] * q[-2]
    a_j = float(q[-1] @ y)
    y -= a_j * q[-1]
    for _ in range(2):
        for u in q:
            y -= (u @ y) * u
    alphas.append(a_j)
    b_j = float(np.linalg.norm(y))
    t = np.diag(alphas)
    if betas:
        off = np.array(betas)
        t += np.diag(off, 1) + np.diag(off, -1)
    theta, s = np.linalg.eigh(t)
    top = theta[-1]
    bound = b_j * abs(s[-1, -1])
    print(
        f"j={j} cg_relres={rr:.1e} cg_time={tcg:.3f}s alpha={a_j:.3e} beta={b_j:.3e} "
        f"top_theta={top:.6e} bound/theta={bound/top:.2e}"
    )
    if bound / top < 1e-9:
        qmat = np.column_stack(q)
        vv = qmat @ s[:, -1]
        vv /= np.linalg.norm(vv)
        av = apply_a(vv.copy())
        lam = float(vv @ av)
        print("  lam", lam, "resid", np.linalg.norm(av - lam * vv) / lam)
        break
    q.append(y / b_j)
    betas.append(b_j)
print("applies:", op.n_applies)
