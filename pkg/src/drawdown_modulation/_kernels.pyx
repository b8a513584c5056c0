# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled wealth-path kernels.

Every floating point operation here is mirrored, in the same order, by
``_pykernels``; the two backends agree bit for bit as long as the C compiler
does not contract multiply-adds (the build passes ``-ffp-contract=off``).

Account values are normalised so that ``V(0) = 1``.
"""

cdef extern from "_stepcore.h" nogil:
    int ddmod_grid_sums(const double *values, const unsigned char *idx,
                        long n_paths, long n, int modulated,
                        const double *gains, const double *dmaxes,
                        long n_par, double *out)


cdef double TOL = 1e-12

MARKOWITZ = 0
MODULATED = 1
STATUS_BANKRUPT = 1
STATUS_BREACH = 2


def path_stats(const double[::1] values, const unsigned char[:, ::1] idx,
               int kind, double gain, double d_max,
               double[::1] wealth, double[::1] dstar):
    """Per-path terminal wealth ratio and maximum percentage drawdown.

    Returns a status bit mask (``STATUS_BANKRUPT``, ``STATUS_BREACH``).
    """
    cdef Py_ssize_t n_paths = idx.shape[0]
    cdef Py_ssize_t n = idx.shape[1]
    cdef Py_ssize_t p, k
    cdef double v, vmax, d, worst, f, x, slack
    cdef int status = 0
    with nogil:
        for p in range(n_paths):
            v = 1.0
            vmax = 1.0
            d = 0.0
            worst = 0.0
            for k in range(n):
                x = values[idx[p, k]]
                if kind == 1:
                    if d - (d_max + TOL) > 0.0:
                        status |= 2
                    slack = d_max - d
                    slack = slack if slack > 0.0 else 0.0
                    f = gain * (slack / (1.0 - d))
                else:
                    f = gain
                v = v + (f * v) * x
                if -TOL * vmax - v > 0.0:
                    status |= 1
                v = v if v > 0.0 else 0.0
                vmax = v if v > vmax else vmax
                d = (vmax - v) / vmax
                worst = d if d > worst else worst
            wealth[p] = v
            dstar[p] = worst
    return status


def grid_sums(const double[::1] values, const unsigned char[:, ::1] idx,
              int kind, const double[::1] gains, const double[::1] dmaxes,
              double[:, ::1] out):
    """Accumulate sum R, sum R^2, sum d*, sum d*^2 for every parameter pair.

    ``out`` has shape ``(len(gains), 4)``; each row is accumulated
    sequentially over paths in index order. ``dmaxes`` is ignored for
    Markowitz gains. Returns a status bit mask.
    """
    cdef int status
    if gains.shape[0] == 0 or idx.shape[0] == 0:
        return 0
    with nogil:
        status = ddmod_grid_sums(&values[0], &idx[0, 0], idx.shape[0],
                                 idx.shape[1], kind == 1, &gains[0],
                                 &dmaxes[0], gains.shape[0], &out[0, 0])
    return status
