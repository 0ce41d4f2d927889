import sys
import time

import numpy as np

from mmcavity.geometry import CavityGeometry, Tube, _arm, _bar, cutoff_frequency
from mmcavity.modesolver import discretize, solve_modes

d = 1.6e-3
reach = 4 * d
fc = cutoff_frequency(d)
res = int(sys.argv[2]) if len(sys.argv) > 2 else 10

which = sys.argv[1]
if which == "elbow":
    for ov_frac in (0.0, -0.15, -0.25, -0.35):
        ov = ov_frac * d
        g = CavityGeometry(
            (_arm((-1, 0, 0), d, reach, ov), _arm((0, 1, 0), d, reach, ov)), name="elbow"
        )
        t0 = time.time()
        m = solve_modes(discretize(g, res), 109e9, 1)[0]
        print(
            f"elbow ov={ov_frac:+.2f}d res={res} f={m.frequency_hz/1e9:.3f} GHz "
            f"({m.frequency_hz/fc:.4f} fc) t={time.time()-t0:.0f}s",
            flush=True,
        )
elif which == "tee":
    for ov_frac in (0.3, 0.1, 0.0, -0.1):
        ov = ov_frac * d
        g = CavityGeometry((_bar((1, 0, 0), d, reach), _arm((0, 1, 0), d, reach, ov)), name="tee")
        t0 = time.time()
        m = solve_modes(discretize(g, res), 98e9, 1)[0]
        print(
            f"tee   ov={ov_frac:+.2f}d res={res} f={m.frequency_hz/1e9:.3f} GHz t={time.time()-t0:.0f}s",
            flush=True,
        )
elif which == "star4":
    for off_frac in (0.0, 0.2, 0.3, 0.4):
        off = off_frac * d
        g = CavityGeometry(
            (
                Tube((0, 0, -off / 2), (1, 0, 0), d, reach),
                Tube((0, 0, +off / 2), (0, 1, 0), d, reach),
            ),
            name="star4",
        )
        t0 = time.time()
        m = solve_modes(discretize(g, res), 92e9, 1)[0]
        print(
            f"star4 off={off_frac:.2f}d res={res} f={m.frequency_hz/1e9:.3f} GHz t={time.time()-t0:.0f}s",
            flush=True,
        )
