"""Pure-numpy stencil kernels, used when the compiled extension is absent."""

import numpy as np


def gather4(src, i0, i1, i2, i3, scale, out):
    """out[m] = (src[i0[m]] - src[i1[m]] - src[i2[m]] + src[i3[m]]) * scale."""
    np.take(src, i0, out=out)
    out -= src[i1]
    out -= src[i2]
    out += src[i3]
    if scale != 1.0:
        out *= scale
    return out


def gather6(src, i0, i1, i2, i3, i4, i5, scale, out):
    """Signed 6-point gather (+,-,+,-,+,-), used for the discrete divergence."""
    np.take(src, i0, out=out)
    out -= src[i1]
    out += src[i2]
    out -= src[i3]
    out += src[i4]
    out -= src[i5]
    if scale != 1.0:
        out *= scale
    return out
