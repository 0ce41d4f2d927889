# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels for the masked Yee-grid operators.

The eigensolver spends essentially all of its time in these two gathers
(edge field -> face curl, face field -> edge dual curl), so they are the
package's compiled hot core. Signatures mirror ``fallback.py`` exactly.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gather4(double[::1] src, int[::1] i0, int[::1] i1, int[::1] i2, int[::1] i3,
            double scale, double[::1] out):
    cdef Py_ssize_t m, n = i0.shape[0]
    for m in range(n):
        out[m] = (src[i0[m]] - src[i1[m]] - src[i2[m]] + src[i3[m]]) * scale
    return np.asarray(out)


def gather6(double[::1] src, int[::1] i0, int[::1] i1, int[::1] i2, int[::1] i3,
            int[::1] i4, int[::1] i5, double scale, double[::1] out):
    cdef Py_ssize_t m, n = i0.shape[0]
    for m in range(n):
        out[m] = (src[i0[m]] - src[i1[m]] + src[i2[m]] - src[i3[m]]
                  + src[i4[m]] - src[i5[m]]) * scale
    return np.asarray(out)
