# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: interface walking and SDE stepping.

Mirrors _pure.py exactly: same geometry tables, same arithmetic, same RNG
consumption order, bit-identical outputs on the same inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, sqrt, tan, fabs

from .. import hexgeom as _hx

cnp.import_array()

cdef double SQRT3 = 1.7320508075688772935
cdef double INV_SQRT3 = 1.0 / SQRT3
cdef double TWOPI = 6.283185307179586476925287

BACKEND = "cython"

REACHED_B = 0
HIT_H0 = 1
HIT_RADIUS = 2
STEP_LIMIT = 3

# Geometry tables, copied from the derived numpy versions at import.
cdef long NEIGH[2][3][2]
cdef long HEXOFF[2][3][2]
cdef int TURN[2][3][2]
cdef int BACK[2][3]
cdef int FRONT[2][3]
cdef int FLK[2][3][2]

_neigh = _hx.NEIGH_ARR
_hexoff = _hx.HEXOFF_ARR
_turn = _hx.TURN_ARR
_back = _hx.BACK_ARR
_front = _hx.FRONT_ARR
_flanks = np.array(
    [[list(_hx.EDGE_FLANKS[c][k]) for k in range(3)] for c in range(2)],
    dtype=np.int8,
)
for _c in range(2):
    for _k in range(3):
        NEIGH[_c][_k][0] = _neigh[_c, _k, 0]
        NEIGH[_c][_k][1] = _neigh[_c, _k, 1]
        HEXOFF[_c][_k][0] = _hexoff[_c, _k, 0]
        HEXOFF[_c][_k][1] = _hexoff[_c, _k, 1]
        TURN[_c][_k][0] = _turn[_c, _k, 0]
        TURN[_c][_k][1] = _turn[_c, _k, 1]
        BACK[_c][_k] = _back[_c, _k]
        FRONT[_c][_k] = _front[_c, _k]
        FLK[_c][_k][0] = _flanks[_c, _k, 0]
        FLK[_c][_k][1] = _flanks[_c, _k, 1]


cdef inline int vclass_of(long y) nogil:
    cdef long m = y % 3
    if m < 0:
        m += 3
    return <int>(m - 1)


cdef inline int color_at(const unsigned char[:, ::1] grid, long i0, long j0,
                         long cx, long cy) nogil:
    cdef long j = cy / 3
    cdef long i = (cx - j) / 2
    cdef long gj = j - j0
    cdef long gi = i - i0
    if gj < 0 or gi < 0 or gj >= grid.shape[0] or gi >= grid.shape[1]:
        return 2
    return grid[gj, gi]


cdef inline double angle_inc(double px, double py, double qx, double qy) nogil:
    return atan2(px * qy - py * qx, px * qx + py * qy)


cdef inline int is_h0_corner(long x, long y) nogil:
    if x == 0:
        return y == 2 or y == -2
    if x == 1 or x == -1:
        return y == 1 or y == -1
    return 0


def explore(const unsigned char[:, ::1] grid, long i0, long j0,
            prev_xy, start_xy, b_xy, bint stop_at_h0, double stop12r2,
            long max_steps):
    cdef long ux = prev_xy[0], uy = prev_xy[1]
    cdef long x = start_xy[0], y = start_xy[1]
    cdef long bx = b_xy[0], by = b_xy[1]

    cdef int cls = vclass_of(y)
    cdef int kin = -1, k
    for k in range(3):
        if NEIGH[cls][k][0] == ux - x and NEIGH[cls][k][1] == uy - y:
            kin = k
    if kin < 0:
        raise ValueError("prev vertex is not a neighbor of the start vertex")

    cdef long cap = 1024
    cdef cnp.ndarray[cnp.int64_t, ndim=2] verts = np.empty((cap, 2), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cw = np.empty(cap, dtype=np.float64)
    cdef long n = 0
    cdef double wind = 0.0
    cdef long hit = -1
    cdef int status = STEP_LIMIT
    cdef int fh, kout, c
    cdef long nx, ny, step
    cdef long ox, oy

    verts[0, 0] = x
    verts[0, 1] = y
    cw[0] = 0.0
    n = 1
    if is_h0_corner(x, y):
        hit = 0
        if stop_at_h0:
            return np.asarray(verts[:1]).copy(), np.asarray(cw[:1]).copy(), 0, HIT_H0

    for step in range(max_steps):
        fh = FRONT[cls][kin]
        ox = x + HEXOFF[cls][fh][0]
        oy = y + HEXOFF[cls][fh][1]
        c = color_at(grid, i0, j0, ox, oy)
        if c > 1:
            raise AssertionError("walker queried an uncolored hexagon")
        kout = TURN[cls][kin][c]
        nx = x + NEIGH[cls][kout][0]
        ny = y + NEIGH[cls][kout][1]
        wind += angle_inc(<double>x, y * INV_SQRT3, <double>nx, ny * INV_SQRT3)
        kin = BACK[cls][kout]
        cls = 1 - cls
        x = nx
        y = ny
        if n >= cap:
            cap *= 2
            verts = _grow2(verts, cap)
            cw = _grow1(cw, cap)
        verts[n, 0] = x
        verts[n, 1] = y
        cw[n] = wind
        n += 1
        if hit < 0 and is_h0_corner(x, y):
            hit = n - 1
            if stop_at_h0:
                status = HIT_H0
                break
        if stop12r2 >= 0.0 and (3.0 * x * x + y * y) <= stop12r2:
            status = HIT_RADIUS
            break
        if x == bx and y == by:
            status = REACHED_B
            break

    return (
        np.asarray(verts[:n]).copy(),
        np.asarray(cw[:n]).copy(),
        hit,
        status,
    )


cdef cnp.ndarray[cnp.int64_t, ndim=2] _grow2(cnp.ndarray[cnp.int64_t, ndim=2] a, long cap):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] b = np.empty((cap, 2), dtype=np.int64)
    b[: a.shape[0]] = a
    return b


cdef cnp.ndarray[cnp.float64_t, ndim=1] _grow1(cnp.ndarray[cnp.float64_t, ndim=1] a, long cap):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(cap, dtype=np.float64)
    b[: a.shape[0]] = a
    return b


# ---------------------------------------------------------------------------
# Edge ids for visited bookkeeping: (base cell, family) with the base cell
# holding the lexicographically smaller center along the family step.

cdef inline long edge_flat_id(long x, long y, int cls, int k,
                              long i0, long j0, long nj, long ni) nogil:
    cdef long c1x = x + HEXOFF[cls][FLK[cls][k][0]][0]
    cdef long c1y = y + HEXOFF[cls][FLK[cls][k][0]][1]
    cdef long c2x = x + HEXOFF[cls][FLK[cls][k][1]][0]
    cdef long c2y = y + HEXOFF[cls][FLK[cls][k][1]][1]
    cdef long dx = c2x - c1x
    cdef long dy = c2y - c1y
    cdef long fam, bx_, by_
    # Families: (2,0) -> 0, (1,3) -> 1, (1,-3) -> 2 (negations swap base).
    if dx == 2:
        fam = 0; bx_ = c1x; by_ = c1y
    elif dx == -2:
        fam = 0; bx_ = c2x; by_ = c2y
    elif dx == 1 and dy == 3:
        fam = 1; bx_ = c1x; by_ = c1y
    elif dx == -1 and dy == -3:
        fam = 1; bx_ = c2x; by_ = c2y
    elif dx == 1 and dy == -3:
        fam = 2; bx_ = c1x; by_ = c1y
    else:
        fam = 2; bx_ = c2x; by_ = c2y
    cdef long j = by_ / 3
    cdef long i = (bx_ - j) / 2
    cdef long gj = j - j0
    cdef long gi = i - i0
    return (gj * ni + gi) * 3 + fam


cdef inline int interface_continue(const unsigned char[:, ::1] grid,
                                   long i0, long j0, long x, long y,
                                   int cls, int kin) nogil:
    cdef int out = -1, k, ca, cb
    for k in range(3):
        if k == kin:
            continue
        ca = color_at(grid, i0, j0, x + HEXOFF[cls][FLK[cls][k][0]][0],
                      y + HEXOFF[cls][FLK[cls][k][0]][1])
        cb = color_at(grid, i0, j0, x + HEXOFF[cls][FLK[cls][k][1]][0],
                      y + HEXOFF[cls][FLK[cls][k][1]][1])
        if ca == 2 or cb == 2 or ca == cb:
            continue
        if out >= 0:
            return -2
        out = k
    return out


def extract_loops(const unsigned char[:, ::1] grid, long i0, long j0):
    cdef long nj = grid.shape[0], ni = grid.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(nj * ni * 3, dtype=np.uint8)
    cdef unsigned char[::1] seen_v = seen
    loops = []
    cdef long gj, gi, i, j, cx, cy, f, gj2, gi2
    cdef long v1x, v1y, v2x, v2y, bx_, by_, tx, ty
    cdef long c1, c2
    cdef long cr
    cdef int cls, k01, cls_c, kout, kin, kk
    cdef long vx, vy, nx, ny
    cdef double wind
    cdef long area2
    cdef long eid
    # Family steps and shared-edge corner offsets, from hexgeom.
    fam_steps = _hx.EDGE_FAMILY_STEPS
    ev = _hx.EDGE_VERTS
    cdef long FS[3][2]
    cdef long EV[3][2][2]
    for f in range(3):
        FS[f][0] = fam_steps[f][0]
        FS[f][1] = fam_steps[f][1]
        for kk in range(2):
            EV[f][kk][0] = ev[f][kk][0]
            EV[f][kk][1] = ev[f][kk][1]

    for gj in range(nj):
        for gi in range(ni):
            c1 = grid[gj, gi]
            if c1 == 2:
                continue
            i = gi + i0
            j = gj + j0
            cx = 2 * i + j
            cy = 3 * j
            for f in range(3):
                gj2 = gj + FS[f][1]
                gi2 = gi + FS[f][0]
                if gj2 < 0 or gi2 < 0 or gj2 >= nj or gi2 >= ni:
                    continue
                c2 = grid[gj2, gi2]
                if c2 == 2 or c2 == c1:
                    continue
                v1x = cx + EV[f][0][0]
                v1y = cy + EV[f][0][1]
                v2x = cx + EV[f][1][0]
                v2y = cy + EV[f][1][1]
                # Blue hexagon on the right of v1 -> v2.
                if c1 == 1:
                    bx_ = cx; by_ = cy
                else:
                    bx_ = cx + 2 * FS[f][0] + FS[f][1]
                    by_ = cy + 3 * FS[f][1]
                cr = (v2x - v1x) * (by_ - v1y) - (v2y - v1y) * (bx_ - v1x)
                if cr > 0:
                    tx = v1x; ty = v1y
                    v1x = v2x; v1y = v2y
                    v2x = tx; v2y = ty
                cls = vclass_of(v1y)
                k01 = -1
                for kk in range(3):
                    if (NEIGH[cls][kk][0] == v2x - v1x
                            and NEIGH[cls][kk][1] == v2y - v1y):
                        k01 = kk
                eid = edge_flat_id(v1x, v1y, cls, k01, i0, j0, nj, ni)
                if seen_v[eid]:
                    continue
                # Walk the loop.
                lv_x = [v1x]
                lv_y = [v1y]
                vx = v1x; vy = v1y
                cls_c = cls
                kout = k01
                wind = 0.0
                area2 = 0
                while True:
                    seen_v[edge_flat_id(vx, vy, cls_c, kout, i0, j0, nj, ni)] = 1
                    nx = vx + NEIGH[cls_c][kout][0]
                    ny = vy + NEIGH[cls_c][kout][1]
                    wind += angle_inc(<double>vx, vy * INV_SQRT3,
                                      <double>nx, ny * INV_SQRT3)
                    area2 += vx * ny - nx * vy
                    kin = BACK[cls_c][kout]
                    cls_c = 1 - cls_c
                    vx = nx; vy = ny
                    if vx == v1x and vy == v1y:
                        break
                    lv_x.append(vx)
                    lv_y.append(vy)
                    kout = interface_continue(grid, i0, j0, vx, vy, cls_c, kin)
                    if kout == -2:
                        raise AssertionError("vertex with >2 interface edges")
                    if kout < 0:
                        raise AssertionError("open interface curve in painted grid")
                verts = np.stack(
                    [np.array(lv_x, dtype=np.int64), np.array(lv_y, dtype=np.int64)],
                    axis=1,
                )
                loops.append((verts, wind, area2))
    return loops


cdef inline int vertex_zone(const unsigned char[:, ::1] zone, long i0, long j0,
                            long x, long y) nogil:
    cdef int cls = vclass_of(y)
    cdef int z = 0, kk, s
    cdef int inner = 0
    cdef long cx, cy, j, i, gj, gi
    for kk in range(3):
        cx = x + HEXOFF[cls][kk][0]
        cy = y + HEXOFF[cls][kk][1]
        j = cy / 3
        i = (cx - j) / 2
        gj = j - j0
        gi = i - i0
        if gj < 0 or gi < 0 or gj >= zone.shape[0] or gi >= zone.shape[1]:
            s = 2
        else:
            s = zone[gj, gi]
        if s == 1:
            inner = 1
        elif s == 2:
            z = 2
    if inner:
        if z == 2:
            return -1
        return 1
    return z


def annulus_strands(const unsigned char[:, ::1] grid,
                    const unsigned char[:, ::1] zone_grid,
                    long i0, long j0, start_vertices, bint collect,
                    long max_count=-1):
    cdef long nj = grid.shape[0], ni = grid.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(nj * ni * 3, dtype=np.uint8)
    cdef unsigned char[::1] seen_v = seen
    cdef long count = 0
    strands = []
    cdef long x0, y0, vx, vy, nx, ny
    cdef int cls0, cls_c, k0, kout, kin, ca, cb, z, kk, col
    cdef long eid
    cdef long cx, cy, ii, jj
    cdef long LONG_SENTINEL = (<long>1) << 61
    cdef long b_last_i, b_last_j, y_last_i, y_last_j

    for sv in start_vertices:
        x0 = sv[0]
        y0 = sv[1]
        cls0 = vclass_of(y0)
        for k0 in range(3):
            ca = color_at(grid, i0, j0, x0 + HEXOFF[cls0][FLK[cls0][k0][0]][0],
                          y0 + HEXOFF[cls0][FLK[cls0][k0][0]][1])
            cb = color_at(grid, i0, j0, x0 + HEXOFF[cls0][FLK[cls0][k0][1]][0],
                          y0 + HEXOFF[cls0][FLK[cls0][k0][1]][1])
            if ca == 2 or cb == 2 or ca == cb:
                continue
            eid = edge_flat_id(x0, y0, cls0, k0, i0, j0, nj, ni)
            if seen_v[eid]:
                continue
            nx = x0 + NEIGH[cls0][k0][0]
            ny = y0 + NEIGH[cls0][k0][1]
            z = vertex_zone(zone_grid, i0, j0, nx, ny)
            if z == -1:
                raise AssertionError("annulus too thin: vertex touches both zones")
            if z == 1:
                continue
            vx = x0; vy = y0
            cls_c = cls0
            kout = k0
            verts_x = [vx]
            verts_y = [vy]
            bf = []
            yf = []
            b_last_i = b_last_j = y_last_i = y_last_j = LONG_SENTINEL
            while True:
                seen_v[edge_flat_id(vx, vy, cls_c, kout, i0, j0, nj, ni)] = 1
                if collect:
                    for kk in range(2):
                        cx = vx + HEXOFF[cls_c][FLK[cls_c][kout][kk]][0]
                        cy = vy + HEXOFF[cls_c][FLK[cls_c][kout][kk]][1]
                        col = color_at(grid, i0, j0, cx, cy)
                        jj = cy // 3
                        ii = (cx - jj) // 2
                        if col == 1:
                            if ii != b_last_i or jj != b_last_j:
                                bf.append((ii, jj))
                                b_last_i = ii
                                b_last_j = jj
                        else:
                            if ii != y_last_i or jj != y_last_j:
                                yf.append((ii, jj))
                                y_last_i = ii
                                y_last_j = jj
                nx = vx + NEIGH[cls_c][kout][0]
                ny = vy + NEIGH[cls_c][kout][1]
                kin = BACK[cls_c][kout]
                cls_c = 1 - cls_c
                vx = nx; vy = ny
                verts_x.append(vx)
                verts_y.append(vy)
                z = vertex_zone(zone_grid, i0, j0, vx, vy)
                if z == -1:
                    raise AssertionError("annulus too thin: vertex touches both zones")
                if z != 0:
                    if z == 2:
                        count += 1
                        if collect:
                            strands.append(
                                {
                                    "verts": np.stack(
                                        [
                                            np.array(verts_x, dtype=np.int64),
                                            np.array(verts_y, dtype=np.int64),
                                        ],
                                        axis=1,
                                    ),
                                    "blue": np.array(bf, dtype=np.int64),
                                    "yellow": np.array(yf, dtype=np.int64),
                                }
                            )
                        if 0 <= max_count < count:
                            return count, strands
                    break
                kout = interface_continue(grid, i0, j0, vx, vy, cls_c, kin)
                if kout == -2:
                    raise AssertionError("vertex with >2 interface edges")
                if kout < 0:
                    raise AssertionError("interface arc dead-ends in middle zone")
    return count, strands


# ---------------------------------------------------------------------------
# SDE stepping (Heun drift, shared Brownian increments, step halving)


def sde_path(double theta, double u, double w, double t,
             double kappa, double dt_max, double c_guard,
             const double[::1] t_stops, long stop_idx,
             const double[::1] normals):
    cdef double sk = sqrt(kappa)
    cdef double half_sk = 0.5 * sk
    cdef long n = normals.shape[0]
    cdef long n_stops = t_stops.shape[0]
    cdef long pos = 0
    cdef double target, m, dt_base, dt, dw, d0, d1, th_star, th_new
    cdef bint landing
    records = []
    while stop_idx < n_stops:
        target = t_stops[stop_idx]
        if t >= target:
            records.append((target, theta, u, w))
            stop_idx += 1
            continue
        m = theta if theta < TWOPI - theta else TWOPI - theta
        dt_base = dt_max if dt_max < c_guard * m * m else c_guard * m * m
        if dt_base >= target - t:
            dt = target - t
            landing = True
        else:
            dt = dt_base
            landing = False
        while True:
            if pos >= n:
                return (theta, u, w, t, stop_idx), pos, records, "need_normals"
            if dt < 1e-12 and not landing:
                return (theta, u, w, t, stop_idx), pos, records, "step_collapse"
            dw = sqrt(dt) * normals[pos]
            pos += 1
            d0 = 2.0 / tan(0.5 * theta)
            th_star = theta + d0 * dt + sk * dw
            if th_star <= 0.0 or th_star >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            d1 = 2.0 / tan(0.5 * th_star)
            th_new = theta + 0.5 * (d0 + d1) * dt + sk * dw
            if th_new <= 0.0 or th_new >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            break
        u += -0.5 * (th_new - theta) - half_sk * dw
        w += dw
        theta = th_new
        t = target if landing else t + dt
    return (theta, u, w, t, stop_idx), pos, records, "done"


def sde_path_record(double theta, double kappa, double dt_max, double c_guard,
                    double t_end, const double[::1] normals):
    cdef double sk = sqrt(kappa)
    cdef double half_sk = 0.5 * sk
    cdef double u = 0.0, w = 0.0, t = 0.0
    cdef long n = normals.shape[0]
    cdef long pos = 0
    cdef double m, dt_base, dt, dw, d0, d1, th_star, th_new
    cdef bint landing
    ts = [0.0]
    th_l = [theta]
    u_l = [0.0]
    w_l = [0.0]
    while t < t_end:
        m = theta if theta < TWOPI - theta else TWOPI - theta
        dt_base = dt_max if dt_max < c_guard * m * m else c_guard * m * m
        if dt_base >= t_end - t:
            dt = t_end - t
            landing = True
        else:
            dt = dt_base
            landing = False
        while True:
            if pos >= n:
                return ts, th_l, u_l, w_l, pos, "need_normals"
            if dt < 1e-12 and not landing:
                return ts, th_l, u_l, w_l, pos, "step_collapse"
            dw = sqrt(dt) * normals[pos]
            pos += 1
            d0 = 2.0 / tan(0.5 * theta)
            th_star = theta + d0 * dt + sk * dw
            if th_star <= 0.0 or th_star >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            d1 = 2.0 / tan(0.5 * th_star)
            th_new = theta + 0.5 * (d0 + d1) * dt + sk * dw
            if th_new <= 0.0 or th_new >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            break
        u += -0.5 * (th_new - theta) - half_sk * dw
        w += dw
        theta = th_new
        t = t_end if landing else t + dt
        ts.append(t)
        th_l.append(theta)
        u_l.append(u)
        w_l.append(w)
    return ts, th_l, u_l, w_l, pos, "done"
