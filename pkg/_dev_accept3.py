import time

from mmcavity.geometry import cutoff_frequency, preset
from mmcavity.modesolver import discretize, mode_volume, richardson, solve_modes

t_all = time.time()
for name in ("elbow", "tee", "star4", "cross3_hybrid"):
    g = preset(name)
    t0 = time.time()
    m8 = solve_modes(discretize(g, 8), g.target_hz, 1)[0]
    m16 = solve_modes(discretize(g, 16), g.target_hz, 1)[0]
    fx = richardson(m8.frequency_hz, m16.frequency_hz)
    v, ratio = mode_volume(m16)
    print(
        f"{name:14s} f8={m8.frequency_hz/1e9:8.3f} f16={m16.frequency_hz/1e9:8.3f} "
        f"ext={fx/1e9:8.3f} GHz (target {g.target_hz/1e9:6.1f}, err {fx/g.target_hz-1:+.2%}) "
        f"V/l3={ratio:.4f} t={time.time()-t0:.0f}s",
        flush=True,
    )
print(f"total {time.time()-t_all:.0f}s, fc(1.6mm)={cutoff_frequency(1.6e-3)/1e9:.2f}")
