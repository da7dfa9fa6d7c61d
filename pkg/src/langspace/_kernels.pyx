# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, atan, atan2, sqrt, asin, fabs, M_PI

cnp.import_array()

cdef double WGS84_A = 6378137.0
cdef double WGS84_F = 1.0 / 298.257223563
cdef double WGS84_B = WGS84_A * (1.0 - WGS84_F)
cdef int MAX_ITER = 200
cdef double TOL = 1e-12
cdef double DEG = M_PI / 180.0


cdef inline double _great_circle(double lat1, double lon1, double lat2, double lon2) nogil:
    cdef double p1 = lat1 * DEG
    cdef double p2 = lat2 * DEG
    cdef double dp = p2 - p1
    cdef double dl = (lon2 - lon1) * DEG
    cdef double s1 = sin(dp / 2)
    cdef double s2 = sin(dl / 2)
    cdef double h = s1 * s1 + cos(p1) * cos(p2) * s2 * s2
    if h > 1.0:
        h = 1.0
    if h < 0.0:
        h = 0.0
    return 2 * WGS84_A * asin(sqrt(h))


cdef double _vincenty(double lat1, double lon1, double lat2, double lon2) nogil:
    if lat1 == lat2 and lon1 == lon2:
        return 0.0
    if lat1 > lat2 or (lat1 == lat2 and lon1 > lon2):
        return _vincenty(lat2, lon2, lat1, lon1)
    cdef double a = WGS84_A, b = WGS84_B, f = WGS84_F
    cdef double L = (lon2 - lon1) * DEG
    cdef double U1 = atan((1 - f) * tan(lat1 * DEG))
    cdef double U2 = atan((1 - f) * tan(lat2 * DEG))
    cdef double sinU1 = sin(U1), cosU1 = cos(U1)
    cdef double sinU2 = sin(U2), cosU2 = cos(U2)
    cdef double lam = L, lam_prev, sin_lam, cos_lam, t1, t2
    cdef double sin_sigma = 0, cos_sigma = 0, sigma = 0, sin_alpha, cos2_alpha = 0
    cdef double cos_2sm = 0, C, u2, A, B, d_sigma
    cdef int it
    cdef bint converged = False
    for it in range(MAX_ITER):
        sin_lam = sin(lam)
        cos_lam = cos(lam)
        t1 = cosU2 * sin_lam
        t2 = cosU1 * sinU2 - sinU1 * cosU2 * cos_lam
        sin_sigma = sqrt(t1 * t1 + t2 * t2)
        if sin_sigma == 0.0:
            return _great_circle(lat1, lon1, lat2, lon2)
        cos_sigma = sinU1 * sinU2 + cosU1 * cosU2 * cos_lam
        sigma = atan2(sin_sigma, cos_sigma)
        sin_alpha = cosU1 * cosU2 * sin_lam / sin_sigma
        cos2_alpha = 1.0 - sin_alpha * sin_alpha
        if cos2_alpha != 0.0:
            cos_2sm = cos_sigma - 2.0 * sinU1 * sinU2 / cos2_alpha
        else:
            cos_2sm = 0.0
        C = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha))
        lam_prev = lam
        lam = L + (1.0 - C) * f * sin_alpha * (
            sigma + C * sin_sigma * (cos_2sm + C * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm))
        )
        if fabs(lam - lam_prev) < TOL:
            converged = True
            break
    if not converged:
        return _great_circle(lat1, lon1, lat2, lon2)

    u2 = cos2_alpha * (a * a - b * b) / (b * b)
    A = 1.0 + u2 / 16384.0 * (4096.0 + u2 * (-768.0 + u2 * (320.0 - 175.0 * u2)))
    B = u2 / 1024.0 * (256.0 + u2 * (-128.0 + u2 * (74.0 - 47.0 * u2)))
    d_sigma = B * sin_sigma * (
        cos_2sm + B / 4.0 * (
            cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)
            - B / 6.0 * cos_2sm * (-3.0 + 4.0 * sin_sigma * sin_sigma) * (-3.0 + 4.0 * cos_2sm * cos_2sm)
        )
    )
    return b * A * (sigma - d_sigma)


def great_circle(double lat1, double lon1, double lat2, double lon2):
    return _great_circle(lat1, lon1, lat2, lon2)


def vincenty_inverse(double lat1, double lon1, double lat2, double lon2):
    return _vincenty(lat1, lon1, lat2, lon2)


def geodesic_pairs(lat1, lon1, lat2, lon2):
    cdef const double[::1] a1 = np.ascontiguousarray(lat1, dtype=np.float64)
    cdef const double[::1] o1 = np.ascontiguousarray(lon1, dtype=np.float64)
    cdef const double[::1] a2 = np.ascontiguousarray(lat2, dtype=np.float64)
    cdef const double[::1] o2 = np.ascontiguousarray(lon2, dtype=np.float64)
    cdef Py_ssize_t n = a1.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _vincenty(a1[i], o1[i], a2[i], o2[i])
    return out


def prefix_pairs(codes, lengths, ia, ib):
    cdef const int[:, ::1] c = np.ascontiguousarray(codes, dtype=np.int32)
    cdef const int[::1] ln = np.ascontiguousarray(lengths, dtype=np.int32)
    cdef const Py_ssize_t[::1] xa = np.ascontiguousarray(ia, dtype=np.intp)
    cdef const Py_ssize_t[::1] xb = np.ascontiguousarray(ib, dtype=np.intp)
    cdef Py_ssize_t n = xa.shape[0], k, i, j
    cdef int m, p
    out = np.empty(n, dtype=np.int32)
    cdef int[::1] ov = out
    with nogil:
        for k in range(n):
            i = xa[k]
            j = xb[k]
            m = ln[i] if ln[i] < ln[j] else ln[j]
            p = 0
            while p < m and c[i, p] == c[j, p]:
                p += 1
            ov[k] = p
    return out
