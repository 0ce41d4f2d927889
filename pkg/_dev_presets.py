import sys
import time

import numpy as np

from mmcavity.geometry import cutoff_frequency, preset
from mmcavity.modesolver import discretize, richardson, solve_modes

res = int(sys.argv[1]) if len(sys.argv) > 1 else 8
names = sys.argv[2].split(",") if len(sys.argv) > 2 else ["elbow", "tee", "star4", "cross3_hybrid"]
for name in names:
    g = preset(name)
    fc = cutoff_frequency(g.min_diameter())
    t0 = time.time()
    dom = discretize(g, res)
    m = solve_modes(dom, g.target_hz, 1)[0]
    dom2 = discretize(g, res // 2) if res >= 16 else None
    line = (
        f"{name:14s} res={res:3d} n={dom.n_edges:7d} f={m.frequency_hz/1e9:8.3f} GHz "
        f"(target {g.target_hz/1e9:.1f}, fc {fc/1e9:.2f}) resid={m.residual:.1e} t={time.time()-t0:.1f}s"
    )
    if dom2 is not None:
        m2 = solve_modes(dom2, g.target_hz, 1)[0]
        fext = richardson(m2.frequency_hz, m.frequency_hz)
        line += f" | coarse {m2.frequency_hz/1e9:.3f} ext {fext/1e9:.3f}"
    print(line, flush=True)
