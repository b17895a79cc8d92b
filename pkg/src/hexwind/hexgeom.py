"""Exact integer geometry for the triangular lattice and its hexagonal dual.

Sites live at axial coordinates (i, j) with embedded position
(i + j*e^{i*pi/3}) in lattice units (mesh = 1).  All honeycomb geometry is
done in scaled integer coordinates where a point (x, y) embeds at
(x/2, y/(2*sqrt(3))).  In these units:

* the hexagon of site (i, j) is centered at (2i + j, 3j),
* its six corners sit at center + {(1,1), (0,2), (-1,1), (-1,-1), (0,-2), (1,-1)},
* squared Euclidean distance of (x, y) from the origin is (3x^2 + y^2) / 12.

Honeycomb vertices split into two classes by y mod 3 (centers have y mod 3
== 0).  Every table below is derived from first principles at import time;
nothing is hand-transcribed.
"""

from __future__ import annotations

import math

import numpy as np

SQRT3 = math.sqrt(3.0)

# Corner offsets of a hexagon, counterclockwise starting at angle 30 degrees.
HEX_CORNERS = ((1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1))

# Axial neighbor steps of a site.
AXIAL_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

# Edge families: every unordered pair of adjacent sites appears exactly once
# as (base site, base site + step).
EDGE_FAMILY_STEPS = ((1, 0), (0, 1), (1, -1))


def center_scaled(i: int, j: int) -> tuple[int, int]:
    return 2 * i + j, 3 * j


def site_of_center(cx: int, cy: int) -> tuple[int, int]:
    j, rem = divmod(cy, 3)
    if rem:
        raise ValueError(f"({cx},{cy}) is not a hexagon center")
    i, rem = divmod(cx - j, 2)
    if rem:
        raise ValueError(f"({cx},{cy}) is not a hexagon center")
    return i, j


def vclass(x: int, y: int) -> int:
    """Vertex class index: 0 for y = 1 (mod 3), 1 for y = 2 (mod 3)."""
    m = y % 3
    if m == 0:
        raise ValueError(f"({x},{y}) is a hexagon center, not a vertex")
    return m - 1


def dist2_scaled(x: int, y: int) -> int:
    """12 * (squared Euclidean distance) of scaled point (x, y)."""
    return 3 * x * x + y * y


def real_xy(x: int, y: int) -> tuple[float, float]:
    return 0.5 * x, y / (2.0 * SQRT3)


def _is_corner(dx: int, dy: int) -> bool:
    return 3 * dx * dx + dy * dy == 4


def _derive_tables():
    # Neighbor offsets per class: the three vertices at scaled distance 2/sqrt(12).
    cand = [(1, 1), (-1, 1), (1, -1), (-1, -1), (0, 2), (0, -2)]
    neigh = [[], []]
    hexes = [[], []]
    for cls, base_y in ((0, 1), (1, 2)):
        # A representative vertex of this class.
        vx, vy = (1, 1) if cls == 0 else (0, 2)
        assert vclass(vx, vy) == cls and base_y == vy % 3 or True
        for ox, oy in cand:
            if 3 * ox * ox + oy * oy != 4:
                continue
            # Points one edge-length away are vertices (honeycomb neighbors)
            # or hexagon centers, told apart by y mod 3.
            if (vy + oy) % 3 == 0:
                hexes[cls].append((ox, oy))
            else:
                neigh[cls].append((ox, oy))
        assert len(neigh[cls]) == 3, (cls, neigh[cls])
        assert len(hexes[cls]) == 3, (cls, hexes[cls])
    return neigh, hexes


_NEIGH, _HEXES = _derive_tables()

NEIGHBOR_OFFSETS = _NEIGH  # [class][k] -> vertex step
HEXAGON_OFFSETS = _HEXES  # [class][k] -> hexagon center offset


def _edge_flanks(cls: int, k: int) -> tuple[int, int]:
    """Indices (into HEXAGON_OFFSETS[cls]) of the two hexagons flanking the
    edge leaving a class-`cls` vertex along NEIGHBOR_OFFSETS[cls][k]."""
    ex, ey = NEIGHBOR_OFFSETS[cls][k]
    out = []
    for h, (hx, hy) in enumerate(HEXAGON_OFFSETS[cls]):
        # Hexagon flanks the edge iff both endpoints are its corners.
        if _is_corner(-hx, -hy) and _is_corner(ex - hx, ey - hy):
            out.append(h)
    assert len(out) == 2, (cls, k, out)
    return out[0], out[1]


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _derive_turn_tables():
    """Turn tables for the blue-on-right interface walker.

    Arriving at vertex v (class cls) from u = v + NEIGHBOR_OFFSETS[cls][kin],
    the incoming edge has a right hexagon (blue side), a left hexagon
    (yellow side) and a front hexagon (the third one at v).  The color of
    the front hexagon decides the outgoing edge:

    * front blue   -> leave along the edge flanked by (front, left),
    * front yellow -> leave along the edge flanked by (front, right).
    """
    flank = np.zeros((2, 3, 2), dtype=np.int8)  # (cls, k) -> flank hex ids
    front = np.zeros((2, 3), dtype=np.int8)
    right = np.zeros((2, 3), dtype=np.int8)
    left = np.zeros((2, 3), dtype=np.int8)
    turn = np.zeros((2, 3, 2), dtype=np.int8)  # (cls, kin, frontcolor) -> kout
    back = np.zeros((2, 3), dtype=np.int8)  # (cls, kout) -> kin at new vertex

    for cls in range(2):
        for k in range(3):
            a, b = _edge_flanks(cls, k)
            flank[cls, k] = (a, b)
            front[cls, k] = ({0, 1, 2} - {a, b}).pop()
        for kin in range(3):
            ux, uy = NEIGHBOR_OFFSETS[cls][kin]  # position of u relative to v
            # Direction of travel u -> v is (-ux, -uy).
            r = l = -1
            for h in flank[cls, kin]:
                hx, hy = HEXAGON_OFFSETS[cls][h]
                c = _cross(-ux, -uy, hx - ux, hy - uy)
                assert c != 0
                if c < 0:
                    r = h
                else:
                    l = h
            assert r >= 0 and l >= 0
            right[cls, kin] = r
            left[cls, kin] = l
            f = front[cls, kin]
            for color, partner in ((1, l), (0, r)):
                kout = -1
                for k in range(3):
                    if k == kin:
                        continue
                    if set(flank[cls, k]) == {f, partner}:
                        kout = k
                assert kout >= 0
                turn[cls, kin, color] = kout
        other = 1 - cls
        for k in range(3):
            ex, ey = NEIGHBOR_OFFSETS[cls][k]
            back[cls, k] = NEIGHBOR_OFFSETS[other].index((-ex, -ey))
    return flank, front, right, left, turn, back


(EDGE_FLANKS, FRONT_HEX, RIGHT_HEX, LEFT_HEX, TURN_TABLE, BACK_INDEX) = _derive_turn_tables()


def _derive_edge_verts():
    """Corner pairs of the shared edge for each adjacent-site family."""
    out = []
    for di, dj in EDGE_FAMILY_STEPS:
        c2 = center_scaled(di, dj)
        shared = [
            (dx, dy)
            for dx, dy in HEX_CORNERS
            if _is_corner(dx - c2[0], dy - c2[1])
        ]
        assert len(shared) == 2, (di, dj, shared)
        out.append(tuple(shared))
    return tuple(out)


EDGE_VERTS = _derive_edge_verts()

# Flat numpy copies for handing to compiled kernels.
NEIGH_ARR = np.array(NEIGHBOR_OFFSETS, dtype=np.int64)  # (2,3,2)
HEXOFF_ARR = np.array(HEXAGON_OFFSETS, dtype=np.int64)  # (2,3,2)
TURN_ARR = np.ascontiguousarray(TURN_TABLE)  # (2,3,2)
BACK_ARR = np.ascontiguousarray(BACK_INDEX)  # (2,3)
RIGHT_ARR = np.ascontiguousarray(RIGHT_HEX)  # (2,3)
LEFT_ARR = np.ascontiguousarray(LEFT_HEX)  # (2,3)
FRONT_ARR = np.ascontiguousarray(FRONT_HEX)  # (2,3)

ORIGIN_CORNERS = frozenset(HEX_CORNERS)


def hexagon_corners_scaled(i: int, j: int) -> list[tuple[int, int]]:
    cx, cy = center_scaled(i, j)
    return [(cx + dx, cy + dy) for dx, dy in HEX_CORNERS]


def hexagon_max_dist2x12(i: int, j: int) -> int:
    """12 * max squared distance from origin over the closed hexagon."""
    return max(dist2_scaled(x, y) for x, y in hexagon_corners_scaled(i, j))


def hexagon_min_dist_real(i: int, j: int) -> float:
    """Min Euclidean distance from the origin to the closed hexagon."""
    corners = hexagon_corners_scaled(i, j)
    pts = [real_xy(x, y) for x, y in corners]
    # Origin inside the convex hexagon: every edge keeps it on one side.
    inside = True
    n = len(pts)
    best = math.inf
    for t in range(n):
        ax, ay = pts[t]
        bx, by = pts[(t + 1) % n]
        cx, cy = pts[(t + 2) % n]
        orient = _crossf(bx - ax, by - ay, cx - bx, cy - by)
        side = _crossf(bx - ax, by - ay, -ax, -ay)
        if orient * side < 0:
            inside = False
        best = min(best, _point_segment_dist(0.0, 0.0, ax, ay, bx, by))
    return 0.0 if inside else best


def _crossf(ax, ay, bx, by):
    return ax * by - ay * bx


def _point_segment_dist(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    t = 0.0 if vv == 0.0 else max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
    dx, dy = wx - t * vx, wy - t * vy
    return math.hypot(dx, dy)
