import sys
import time

import numpy as np
from scipy.constants import c as C0
from scipy.special import jnp_zeros

from mmcavity.geometry import CavityGeometry, Tube, cutoff_frequency
from mmcavity.modesolver import discretize, solve_modes

d = 1.6e-3
hl = 3.2e-3  # full length 6.4 mm
g = CavityGeometry((Tube((0, 0, 0), (0, 0, 1.0), d, hl),), name="tube")
fc = cutoff_frequency(d)
p11 = jnp_zeros(1, 1)[0]
f_te111 = C0 / (2 * np.pi) * np.sqrt((2 * p11 / d) ** 2 + (np.pi / (2 * hl)) ** 2)
print(f"analytic: fc={fc/1e9:.3f}  TE111={f_te111/1e9:.3f} GHz")
for res in [int(x) for x in (sys.argv[1] if len(sys.argv) > 1 else "8,12,16").split(",")]:
    t0 = time.time()
    dom = discretize(g, res)
    vol_err = dom.vacuum_volume_m3 / (np.pi * (d / 2) ** 2 * 2 * hl) - 1
    m = solve_modes(dom, fc, 1)[0]
    print(
        f"res={res:3d} n={dom.n_edges:7d} vol_err={vol_err:+.3%} "
        f"f={m.frequency_hz/1e9:.3f} GHz ({m.frequency_hz/f_te111-1:+.2%} vs TE111) t={time.time()-t0:.1f}s",
        flush=True,
    )
