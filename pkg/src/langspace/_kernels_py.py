"""Pure-Python kernels, used when the compiled ``_kernels`` extension is absent.

Both backends implement the same arithmetic in the same order so results
agree to rounding.
"""
import math

import numpy as np

WGS84_A = 6378137.0
WGS84_F = 1 / 298.257223563
WGS84_B = WGS84_A * (1 - WGS84_F)

MAX_ITER = 200
TOL = 1e-12


def great_circle(lat1, lon1, lat2, lon2):
    """Haversine distance in metres on a sphere of the WGS84 equatorial radius."""
    p1 = math.radians(lat1)
    p2 = math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    h = min(1.0, max(0.0, h))
    return 2 * WGS84_A * math.asin(math.sqrt(h))


def vincenty_inverse(lat1, lon1, lat2, lon2):
    """Ellipsoidal distance in metres; falls back to :func:`great_circle`
    when the longitude iteration does not converge (near-antipodal points)."""
    if lat1 == lat2 and lon1 == lon2:
        return 0.0
    if (lat1, lon1) > (lat2, lon2):
        # fixed argument order makes the result exactly symmetric
        lat1, lon1, lat2, lon2 = lat2, lon2, lat1, lon1
    a, b, f = WGS84_A, WGS84_B, WGS84_F
    L = math.radians(lon2 - lon1)
    U1 = math.atan((1 - f) * math.tan(math.radians(lat1)))
    U2 = math.atan((1 - f) * math.tan(math.radians(lat2)))
    sinU1, cosU1 = math.sin(U1), math.cos(U1)
    sinU2, cosU2 = math.sin(U2), math.cos(U2)

    lam = L
    for _ in range(MAX_ITER):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        t1 = cosU2 * sin_lam
        t2 = cosU1 * sinU2 - sinU1 * cosU2 * cos_lam
        sin_sigma = math.sqrt(t1 * t1 + t2 * t2)
        if sin_sigma == 0.0:
            # antipodal on the equator: iteration is degenerate
            return great_circle(lat1, lon1, lat2, lon2)
        cos_sigma = sinU1 * sinU2 + cosU1 * cosU2 * cos_lam
        sigma = math.atan2(sin_sigma, cos_sigma)
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
        if abs(lam - lam_prev) < TOL:
            break
    else:
        return great_circle(lat1, lon1, lat2, lon2)

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


def geodesic_pairs(lat1, lon1, lat2, lon2):
    """Elementwise :func:`vincenty_inverse` over four equal-length arrays."""
    lat1 = np.asarray(lat1, dtype=np.float64)
    lon1 = np.asarray(lon1, dtype=np.float64)
    lat2 = np.asarray(lat2, dtype=np.float64)
    lon2 = np.asarray(lon2, dtype=np.float64)
    out = np.empty(lat1.shape[0], dtype=np.float64)
    for i in range(out.shape[0]):
        out[i] = vincenty_inverse(float(lat1[i]), float(lon1[i]), float(lat2[i]), float(lon2[i]))
    return out


def prefix_pairs(codes, lengths, ia, ib):
    """Longest common prefix length between rows ``codes[ia[k]]`` and ``codes[ib[k]]``.

    ``codes`` is an int32 matrix of interned lineage node ids padded with -1,
    ``lengths`` the true row lengths.
    """
    codes = np.asarray(codes, dtype=np.int32)
    lengths = np.asarray(lengths, dtype=np.int32)
    ia = np.asarray(ia, dtype=np.intp)
    ib = np.asarray(ib, dtype=np.intp)
    out = np.empty(ia.shape[0], dtype=np.int32)
    for k in range(ia.shape[0]):
        ra = codes[ia[k]]
        rb = codes[ib[k]]
        m = min(lengths[ia[k]], lengths[ib[k]])
        n = 0
        while n < m and ra[n] == rb[n]:
            n += 1
        out[k] = n
    return out
