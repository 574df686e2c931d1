"""Suzuki-Abe border following (topological structural analysis), numba kernel.

Works on a zero-framed int32 label image in place. Directions are indexed
clockwise in image coordinates (row grows downward), starting at east.
"""
from __future__ import annotations

import numba
import numpy as np

_DI = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
_DJ = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)


@numba.njit(cache=True)
def _dir_of(di, dj):
    for k in range(8):
        if _DI[k] == di and _DJ[k] == dj:
            return k
    return -1


@numba.njit(cache=True)
def _grow(a, n):
    out = np.empty((max(2 * a.shape[0], n),) + a.shape[1:], dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@numba.njit(cache=True)
def trace(f):
    """Follow every border of the framed binary image ``f`` (values 0/1).

    Returns ``(points, starts, parent, is_hole)`` where contour ``k`` owns
    ``points[starts[k]:starts[k+1]]`` as (row, col) pairs in the unframed
    image, ``parent[k]`` is the enclosing contour index or -1 for the frame.
    """
    h, w = f.shape
    cap_pts = 1024
    cap_c = 64
    pts = np.empty((cap_pts, 2), dtype=np.int32)
    starts = np.empty(cap_c + 1, dtype=np.int64)
    # indexed by border number NBD; border 1 is the frame (a hole border)
    par = np.empty(cap_c + 2, dtype=np.int64)
    hole = np.empty(cap_c + 2, dtype=np.bool_)
    par[1] = 0
    hole[1] = True
    nbd = 1
    npts = 0
    starts[0] = 0
    for i in range(1, h - 1):
        lnbd = 1
        for j in range(1, w - 1):
            fij = f[i, j]
            if fij == 0:
                continue
            is_outer = False
            start = False
            i2, j2 = i, j
            if fij == 1 and f[i, j - 1] == 0:
                is_outer = True
                start = True
                i2, j2 = i, j - 1
            elif fij >= 1 and f[i, j + 1] == 0:
                start = True
                i2, j2 = i, j + 1
                if fij > 1:
                    lnbd = fij
            if start:
                nbd += 1
                k = nbd - 1  # contour ordinal + 1
                if nbd + 1 >= par.shape[0]:
                    par = _grow(par, nbd + 2)
                    hole = _grow(hole, nbd + 2)
                if k + 1 >= starts.shape[0]:
                    starts = _grow(starts, k + 2)
                hole[nbd] = not is_outer
                bprime_hole = hole[lnbd]
                if is_outer:
                    par[nbd] = lnbd if bprime_hole else par[lnbd]
                else:
                    par[nbd] = par[lnbd] if bprime_hole else lnbd

                # 3.1: clockwise from (i2, j2) around (i, j) for a nonzero pixel
                d0 = _dir_of(i2 - i, j2 - j)
                found = -1
                for s in range(8):
                    d = (d0 + s) % 8
                    if f[i + _DI[d], j + _DJ[d]] != 0:
                        found = d
                        break
                if found < 0:
                    f[i, j] = -nbd
                    if npts + 1 > pts.shape[0]:
                        pts = _grow(pts, npts + 1)
                    pts[npts, 0] = i - 1
                    pts[npts, 1] = j - 1
                    npts += 1
                else:
                    i1, j1 = i + _DI[found], j + _DJ[found]
                    i2, j2 = i1, j1
                    i3, j3 = i, j
                    while True:
                        if npts + 1 > pts.shape[0]:
                            pts = _grow(pts, npts + 1)
                        pts[npts, 0] = i3 - 1
                        pts[npts, 1] = j3 - 1
                        npts += 1
                        # 3.3: counterclockwise from the element after (i2, j2)
                        d0 = _dir_of(i2 - i3, j2 - j3)
                        east_zero = False
                        d4 = -1
                        for s in range(1, 9):
                            d = (d0 - s) % 8
                            ni, nj = i3 + _DI[d], j3 + _DJ[d]
                            if f[ni, nj] != 0:
                                d4 = d
                                break
                            if d == 0:
                                east_zero = True
                        i4, j4 = i3 + _DI[d4], j3 + _DJ[d4]
                        # 3.4
                        if east_zero:
                            f[i3, j3] = -nbd
                        elif f[i3, j3] == 1:
                            f[i3, j3] = nbd
                        # 3.5
                        if i4 == i and j4 == j and i3 == i1 and j3 == j1:
                            break
                        i2, j2 = i3, j3
                        i3, j3 = i4, j4
                starts[k] = npts
            # 4
            fij = f[i, j]
            if fij != 1:
                lnbd = abs(fij)
    m = nbd - 1
    parent = np.empty(m, dtype=np.int64)
    is_hole = np.empty(m, dtype=np.bool_)
    for b in range(2, nbd + 1):
        parent[b - 2] = par[b] - 2 if par[b] >= 2 else -1
        is_hole[b - 2] = hole[b]
    out_starts = np.empty(m + 1, dtype=np.int64)
    out_starts[0] = 0
    for k in range(1, m + 1):
        out_starts[k] = starts[k]
    return pts[:npts].copy(), out_starts, parent, is_hole


@numba.njit(cache=True)
def shoelace_areas(points, starts):
    m = starts.shape[0] - 1
    out = np.empty(m, dtype=np.float64)
    for k in range(m):
        a, b = starts[k], starts[k + 1]
        s = 0.0
        for t in range(a, b):
            u = t + 1 if t + 1 < b else a
            s += points[t, 1] * points[u, 0] - points[u, 1] * points[t, 0]
        out[k] = abs(s) / 2.0
    return out
