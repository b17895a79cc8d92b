"""Pure-Python reference kernels.

These mirror the compiled extension exactly (same tables, same arithmetic,
same RNG consumption order) and are selected at import when the extension
is unavailable or HEXWIND_FORCE_PURE=1.  They are correctness references;
desk-scale experiments want the compiled core.
"""

from __future__ import annotations

import math

import numpy as np

from .. import hexgeom as hx

TWOPI = 2.0 * math.pi
_NEIGH = hx.NEIGHBOR_OFFSETS
_HEXOFF = hx.HEXAGON_OFFSETS
_TURN = hx.TURN_TABLE
_BACK = hx.BACK_INDEX
_FRONT = hx.FRONT_HEX
_RIGHT = hx.RIGHT_HEX
_LEFT = hx.LEFT_HEX
_FLANKS = hx.EDGE_FLANKS

BACKEND = "pure"

# Walk statuses shared with the compiled kernel.
REACHED_B = 0
HIT_H0 = 1
HIT_RADIUS = 2
STEP_LIMIT = 3


def _color(grid, i0, j0, cx, cy):
    j = cy // 3
    i = (cx - j) >> 1
    return grid[j - j0, i - i0]


def _angle_inc(px, py, qx, qy):
    # Principal-value rotation from (px,py) to (qx,qy); y is pre-divided by
    # sqrt(3) so the pair is proportional to the embedded position.
    return math.atan2(px * qy - py * qx, px * qx + py * qy)


def explore(grid, i0, j0, prev_xy, start_xy, b_xy, stop_at_h0, stop12r2, max_steps):
    """Trace the blue-on-right interface from an e-vertex.

    Returns (verts (m,2) int64, cumwind (m,) float64, hit_h0_index, status).
    ``prev_xy`` is the virtual incoming vertex (outside the domain) that
    orients the first step; it is not part of the path.
    """
    ux, uy = int(prev_xy[0]), int(prev_xy[1])
    x, y = int(start_xy[0]), int(start_xy[1])
    bx, by = int(b_xy[0]), int(b_xy[1])
    inv3 = 1.0 / hx.SQRT3

    cls = y % 3 - 1
    kin = _NEIGH[cls].index((ux - x, uy - y))

    verts_x = [x]
    verts_y = [y]
    cw = [0.0]
    wind = 0.0
    hit = -1
    if abs(x) <= 1 and abs(y) <= 2 and (x, y) in hx.ORIGIN_CORNERS:
        hit = 0
        if stop_at_h0:
            return (
                np.array([[x, y]], dtype=np.int64),
                np.array([0.0]),
                0,
                HIT_H0,
            )

    status = STEP_LIMIT
    for _ in range(max_steps):
        fh = _FRONT[cls][kin]
        ox, oy = _HEXOFF[cls][fh]
        c = _color(grid, i0, j0, x + ox, y + oy)
        kout = _TURN[cls][kin][c]
        nx_, ny_ = _NEIGH[cls][kout]
        nx, ny = x + nx_, y + ny_
        wind += _angle_inc(x, y * inv3, nx, ny * inv3)
        kin = _BACK[cls][kout]
        cls = 1 - cls
        x, y = nx, ny
        verts_x.append(x)
        verts_y.append(y)
        cw.append(wind)
        k = len(cw) - 1
        if hit < 0 and abs(x) <= 1 and abs(y) <= 2 and (x, y) in hx.ORIGIN_CORNERS:
            hit = k
            if stop_at_h0:
                status = HIT_H0
                break
        if stop12r2 >= 0 and 3 * x * x + y * y <= stop12r2:
            status = HIT_RADIUS
            break
        if x == bx and y == by:
            status = REACHED_B
            break

    verts = np.stack(
        [np.array(verts_x, dtype=np.int64), np.array(verts_y, dtype=np.int64)],
        axis=1,
    )
    return verts, np.array(cw), hit, status


def _edge_key(x, y, kout, cls):
    # Canonical undirected edge id: smaller endpoint in (y, x) lex order,
    # plus the outgoing slot index at that endpoint.
    nx_, ny_ = _NEIGH[cls][kout]
    ox, oy = x + nx_, y + ny_
    if (y, x) <= (oy, ox):
        return (x, y, kout)
    return (ox, oy, _BACK[cls][kout])


def _interface_continue(grid, i0, j0, x, y, cls, kin):
    """At vertex (x,y) arrived via slot kin, the unique other interface slot."""
    out = -1
    for k in range(3):
        if k == kin:
            continue
        a, b = _FLANKS[cls][k]
        ax, ay = _HEXOFF[cls][a]
        bx, by = _HEXOFF[cls][b]
        ca = _color(grid, i0, j0, x + ax, y + ay)
        cb = _color(grid, i0, j0, x + bx, y + by)
        if ca == 2 or cb == 2 or ca == cb:
            continue
        if out >= 0:
            raise AssertionError("vertex with more than two interface edges")
        out = k
    return out


def extract_loops(grid, i0, j0):
    """All oriented interface loops of a fully painted grid.

    The grid must color every hexagon adjacent to a colored hexagon
    (monochromatic boundary paint included), so every interface edge closes
    into a loop.  Returns a list of (verts (m,2) int64, total_winding).
    Orientation of traversal keeps blue on the right.
    """
    nj, ni = grid.shape
    inv3 = 1.0 / hx.SQRT3
    loops = []
    seen = set()
    colored = np.argwhere(grid != 2)
    for gj, gi in colored:
        i, j = int(gi) + i0, int(gj) + j0
        c1 = grid[gj, gi]
        cx, cy = hx.center_scaled(i, j)
        for f, (di, dj) in enumerate(hx.EDGE_FAMILY_STEPS):
            gj2, gi2 = gj + dj, gi + di
            if not (0 <= gj2 < nj and 0 <= gi2 < ni):
                continue
            c2 = grid[gj2, gi2]
            if c2 == 2 or c2 == c1:
                continue
            (dx1, dy1), (dx2, dy2) = hx.EDGE_VERTS[f]
            v1 = (cx + dx1, cy + dy1)
            v2 = (cx + dx2, cy + dy2)
            # Orient v1 -> v2 with the blue hexagon on the right.
            blue = (cx, cy) if c1 == 1 else hx.center_scaled(i + di, j + dj)
            cr = (v2[0] - v1[0]) * (blue[1] - v1[1]) - (v2[1] - v1[1]) * (
                blue[0] - v1[0]
            )
            if cr > 0:
                v1, v2 = v2, v1
            cls1 = v1[1] % 3 - 1
            k01 = _NEIGH[cls1].index((v2[0] - v1[0], v2[1] - v1[1]))
            key = _edge_key(v1[0], v1[1], k01, cls1)
            if key in seen:
                continue
            # Walk the loop, accumulating winding around the origin and
            # twice the signed area (shoelace, exact in scaled coords).
            vx, vy = v1
            cls, kout = cls1, k01
            lv_x, lv_y = [vx], [vy]
            wind = 0.0
            area2 = 0
            while True:
                seen.add(_edge_key(vx, vy, kout, cls))
                nx_, ny_ = _NEIGH[cls][kout]
                nx, ny = vx + nx_, vy + ny_
                wind += _angle_inc(vx, vy * inv3, nx, ny * inv3)
                area2 += vx * ny - nx * vy
                kin = _BACK[cls][kout]
                cls = 1 - cls
                vx, vy = nx, ny
                if (vx, vy) == (v1[0], v1[1]):
                    break
                lv_x.append(vx)
                lv_y.append(vy)
                kout = _interface_continue(grid, i0, j0, vx, vy, cls, kin)
                if kout < 0:
                    raise AssertionError("open interface curve in painted grid")
            verts = np.stack(
                [np.array(lv_x, dtype=np.int64), np.array(lv_y, dtype=np.int64)],
                axis=1,
            )
            loops.append((verts, wind, area2))
    return loops


def _vertex_zone(zone_grid, i0, j0, x, y):
    """Zone of a honeycomb vertex: max over its three hexagons.

    Site zones: 0 middle, 1 inner, 2 outer/absent.  Thin annuli where a
    vertex touches both inner and outer zones are rejected upstream.
    """
    cls = y % 3 - 1
    z = 0
    inner = False
    for ox, oy in _HEXOFF[cls]:
        cx, cy = x + ox, y + oy
        j = cy // 3
        i = (cx - j) >> 1
        gj, gi = j - j0, i - i0
        if 0 <= gj < zone_grid.shape[0] and 0 <= gi < zone_grid.shape[1]:
            s = zone_grid[gj, gi]
        else:
            s = 2
        if s == 1:
            inner = True
        elif s == 2:
            z = 2
    if inner:
        if z == 2:
            raise AssertionError("annulus too thin: vertex touches both zones")
        return 1
    return z


def annulus_strands(grid, zone_grid, i0, j0, start_vertices, collect, max_count=-1):
    """Interface arcs from the inner zone; crossing strands reach the outer.

    ``start_vertices`` is an iterable of candidate inner-zone vertices
    (scaled coords).  Returns (count, strands) where strands is a list of
    dicts with vertex and flank-site arrays for crossing arcs (only when
    ``collect``).  Early-exits once count exceeds ``max_count`` if >= 0.
    """
    seen = set()
    count = 0
    strands = []
    for x0, y0 in start_vertices:
        x0, y0 = int(x0), int(y0)
        cls0 = y0 % 3 - 1
        for k0 in range(3):
            a, b = _FLANKS[cls0][k0]
            ax, ay = _HEXOFF[cls0][a]
            bx, by = _HEXOFF[cls0][b]
            ca = _color(grid, i0, j0, x0 + ax, y0 + ay)
            cb = _color(grid, i0, j0, x0 + bx, y0 + by)
            if ca == 2 or cb == 2 or ca == cb:
                continue
            key = _edge_key(x0, y0, k0, cls0)
            if key in seen:
                continue
            nx_, ny_ = _NEIGH[cls0][k0]
            if _vertex_zone(zone_grid, i0, j0, x0 + nx_, y0 + ny_) == 1:
                continue  # inner-to-inner edge, no arc interior
            # Walk away from the inner zone.
            vx, vy, cls, kout = x0, y0, cls0, k0
            verts_x, verts_y = [vx], [vy]
            bf, yf = [], []
            while True:
                seen.add(_edge_key(vx, vy, kout, cls))
                if collect:
                    # Flank sites of this edge, split by color.
                    a, b = _FLANKS[cls][kout]
                    for h in (a, b):
                        ox, oy = _HEXOFF[cls][h]
                        cx, cy = vx + ox, vy + oy
                        col = _color(grid, i0, j0, cx, cy)
                        tgt = bf if col == 1 else yf
                        sij = hx.site_of_center(cx, cy)
                        if not tgt or tgt[-1] != sij:
                            tgt.append(sij)
                nx_, ny_ = _NEIGH[cls][kout]
                vx, vy = vx + nx_, vy + ny_
                kin = _BACK[cls][kout]
                cls = 1 - cls
                verts_x.append(vx)
                verts_y.append(vy)
                zone = _vertex_zone(zone_grid, i0, j0, vx, vy)
                if zone != 0:
                    if zone == 2:
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
                kout = _interface_continue(grid, i0, j0, vx, vy, cls, kin)
                if kout < 0:
                    raise AssertionError("interface arc dead-ends in middle zone")
    return count, strands


def sde_path(theta, u, w, t, kappa, dt_max, c_guard, t_stops, stop_idx, normals):
    """Heun predictor-corrector steps for dTheta = 2cot(Theta/2)dt + sqrt(k)dW.

    Consumes ``normals`` sequentially; a proposed step leaving (0, 2pi) is
    rejected, the step halved and a fresh normal drawn.  Records
    (theta, u, w) exactly at each stop time.  Returns
    (state, consumed, records, status) where status is "done", "need_normals"
    or "step_collapse"; state = (theta, u, w, t, stop_idx).
    """
    sk = math.sqrt(kappa)
    half_sk = 0.5 * sk
    n = len(normals)
    pos = 0
    records = []
    while stop_idx < len(t_stops):
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
            dw = math.sqrt(dt) * normals[pos]
            pos += 1
            d0 = 2.0 / math.tan(0.5 * theta)
            th_star = theta + d0 * dt + sk * dw
            if th_star <= 0.0 or th_star >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            d1 = 2.0 / math.tan(0.5 * th_star)
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


def sde_path_record(theta, kappa, dt_max, c_guard, t_end, normals):
    """Like sde_path but stores every accepted step (for trace solving).

    Returns (times, thetas, us, ws, consumed, status); arrays include the
    initial state at t=0.
    """
    sk = math.sqrt(kappa)
    half_sk = 0.5 * sk
    u = 0.0
    w = 0.0
    t = 0.0
    ts, th_l, u_l, w_l = [0.0], [theta], [0.0], [0.0]
    n = len(normals)
    pos = 0
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
            dw = math.sqrt(dt) * normals[pos]
            pos += 1
            d0 = 2.0 / math.tan(0.5 * theta)
            th_star = theta + d0 * dt + sk * dw
            if th_star <= 0.0 or th_star >= TWOPI:
                dt *= 0.5
                landing = False
                continue
            d1 = 2.0 / math.tan(0.5 * th_star)
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
