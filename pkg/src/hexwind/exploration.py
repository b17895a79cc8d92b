"""Percolation exploration paths, winding numbers, and hitting times."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import hexgeom as hx
from . import _kernels as K
from .lattice import ABSENT, BLUE, YELLOW, Configuration, DiscreteDomain


class TraceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ExplorationSetup:
    """Domain plus (a, b) boundary painting, reusable across trials.

    The base grid holds the painted s-boundary colors (right s-boundary
    blue, left yellow) and ABSENT elsewhere; per-trial site colors are
    scattered on top.
    """

    domain: DiscreteDomain
    a: tuple[int, int]
    b: tuple[int, int]
    base_grid: np.ndarray
    prev_vertex: tuple[int, int]
    _site_gj: np.ndarray
    _site_gi: np.ndarray

    def trial_grid(self, config: Configuration) -> np.ndarray:
        g = self.base_grid.copy()
        g[self._site_gj, self._site_gi] = config.colors
        return g


def _cycle_index_of_vertex(domain: DiscreteDomain, v) -> int:
    vx, vy = int(v[0]), int(v[1])
    bv = domain.boundary_vertices
    hits = np.nonzero((bv[:, 0] == vx) & (bv[:, 1] == vy))[0]
    if len(hits) != 1:
        raise ValueError(f"vertex {(vx, vy)} is not a boundary vertex")
    return int(hits[0])


def make_setup(domain: DiscreteDomain, a, b) -> ExplorationSetup:
    """Paint the s-boundary for exploration from e-vertex a to e-vertex b."""
    a = (int(a[0]), int(a[1]))
    b = (int(b[0]), int(b[1]))
    if a == b:
        raise ValueError("a and b must be distinct e-vertices")
    if not (domain.is_e_vertex(a) and domain.is_e_vertex(b)):
        raise ValueError("a and b must be e-vertices of the domain")

    ka = _cycle_index_of_vertex(domain, a)
    kb = _cycle_index_of_vertex(domain, b)
    m = domain.boundary_edge_count()

    grid = np.full(domain.index_grid.shape, ABSENT, dtype=np.uint8)
    paint: dict[tuple[int, int], int] = {}
    out = domain.boundary_outside_site
    k = ka
    while k != kb:
        paint_site = (int(out[k, 0]), int(out[k, 1]))
        if paint.get(paint_site, BLUE) != BLUE:
            raise TraceError("s-boundary hexagon adjacent to both boundary arcs")
        paint[paint_site] = BLUE
        k = (k + 1) % m
    while k != ka:
        paint_site = (int(out[k, 0]), int(out[k, 1]))
        if paint.get(paint_site, YELLOW) != YELLOW:
            raise TraceError("s-boundary hexagon adjacent to both boundary arcs")
        paint[paint_site] = YELLOW
        k = (k + 1) % m
    for (i, j), c in paint.items():
        grid[j - domain.j0, i - domain.i0] = c

    # Virtual incoming vertex: across the outside edge at a, which is flanked
    # by the two painted hexagons meeting at a.
    blue_site = tuple(int(t) for t in out[ka])
    yellow_site = tuple(int(t) for t in out[(ka - 1) % m])
    cb = hx.center_scaled(*blue_site)
    cyel = hx.center_scaled(*yellow_site)
    cls = hx.vclass(*a)
    w = None
    for k3 in range(3):
        f1, f2 = hx.EDGE_FLANKS[cls][k3]
        cents = set()
        for f in (f1, f2):
            ox, oy = hx.HEXAGON_OFFSETS[cls][f]
            cents.add((a[0] + ox, a[1] + oy))
        if cents == {cb, cyel}:
            nx_, ny_ = hx.NEIGHBOR_OFFSETS[cls][k3]
            w = (a[0] + nx_, a[1] + ny_)
            break
    if w is None:
        raise TraceError("could not locate the outside edge at a")
    # Blue paint must sit on the right of the virtual step w -> a.
    dx, dy = a[0] - w[0], a[1] - w[1]
    cr = dx * (cb[1] - w[1]) - dy * (cb[0] - w[0])
    if cr >= 0:
        raise TraceError("boundary painting does not put blue on the right at a")

    sj = domain.sites_ij[:, 1] - domain.j0
    si = domain.sites_ij[:, 0] - domain.i0
    return ExplorationSetup(
        domain=domain,
        a=a,
        b=b,
        base_grid=grid,
        prev_vertex=w,
        _site_gj=sj,
        _site_gi=si,
    )


@dataclass(frozen=True, eq=False)
class ExplorationPath:
    """Directed interface walk with cached cumulative winding.

    ``verts`` are honeycomb vertices in scaled integer coordinates;
    ``cum_winding[k]`` is the continuous argument change from the start to
    vertex k.  ``hit_h0_index`` is the first index on the boundary of the
    origin hexagon, or -1.
    """

    domain: DiscreteDomain
    a: tuple[int, int]
    b: tuple[int, int]
    verts: np.ndarray
    cum_winding: np.ndarray
    hit_h0_index: int
    status: int

    def __len__(self) -> int:
        return len(self.verts)

    def positions(self) -> np.ndarray:
        """Embedded vertex positions in lattice units, shape (m, 2)."""
        return np.stack(
            [0.5 * self.verts[:, 0], self.verts[:, 1] / (2.0 * hx.SQRT3)], axis=1
        )

    def dist2(self) -> np.ndarray:
        """Squared distance from the origin per vertex, lattice units."""
        x = self.verts[:, 0].astype(np.float64)
        y = self.verts[:, 1].astype(np.float64)
        return (3.0 * x * x + y * y) / 12.0

    def to_csv(self, path) -> None:
        pos = self.positions()
        with open(path, "w") as fh:
            fh.write("index,x,y,cum_winding\n")
            for k in range(len(self.verts)):
                fh.write(
                    f"{k},{pos[k, 0]:.17g},{pos[k, 1]:.17g},{self.cum_winding[k]:.17g}\n"
                )


def trace_exploration(
    setup: ExplorationSetup,
    config: Configuration,
    stop_at_h0: bool = False,
    stop_radius: Optional[float] = None,
) -> ExplorationPath:
    """Trace the unique b-path from a to b with blue on the right.

    Stopping rules are parameters: the walk always terminates at b, and
    optionally at the first visit to the origin hexagon's boundary or at
    the first vertex within ``stop_radius`` of the origin (lattice units).
    """
    if config.domain is not setup.domain:
        raise ValueError("configuration belongs to a different domain")
    grid = setup.trial_grid(config)
    stop12r2 = -1.0
    if stop_radius is not None:
        stop12r2 = 12.0 * float(stop_radius) ** 2
    max_steps = 6 * setup.domain.n_sites + 64
    verts, cw, hit, status = K.explore(
        grid,
        setup.domain.i0,
        setup.domain.j0,
        setup.prev_vertex,
        setup.a,
        setup.b,
        stop_at_h0,
        stop12r2,
        max_steps,
    )
    if status == K.STEP_LIMIT:
        raise TraceError("exploration exceeded the step budget; walker bug")
    return ExplorationPath(
        domain=setup.domain,
        a=setup.a,
        b=setup.b,
        verts=verts,
        cum_winding=cw,
        hit_h0_index=int(hit),
        status=int(status),
    )


def winding(path: ExplorationPath, start: int, end: int) -> float:
    """arg(gamma(end)) - arg(gamma(start)) with arg continuous on the path."""
    n = len(path.verts)
    if not 0 <= start <= end < n:
        raise IndexError("winding range out of bounds")
    return float(path.cum_winding[end] - path.cum_winding[start])


def detect_event_A(path: ExplorationPath) -> bool:
    """True iff the path visits the boundary of the origin hexagon."""
    return path.hit_h0_index >= 0


@dataclass(frozen=True, eq=False)
class HitTimes:
    """First hitting indices tau_r and last prior indices T_{R,r}."""

    tau: dict
    last_before: dict


def hit_times(path: ExplorationPath, radii, pairs=()) -> HitTimes:
    """tau_r = first index with |vertex| <= r; T_{R,r} = last index at
    |vertex| >= R before tau_r.  Absence is encoded as None."""
    d2 = path.dist2()
    tau = {}
    for r in radii:
        idx = np.nonzero(d2 <= r * r)[0]
        tau[r] = int(idx[0]) if len(idx) else None
    last_before = {}
    for R, r in pairs:
        tr = tau.get(r)
        if tr is None:
            idx = np.nonzero(d2 <= r * r)[0]
            tr = int(idx[0]) if len(idx) else None
            tau[r] = tr
        if tr is None:
            last_before[(R, r)] = None
            continue
        outside = np.nonzero(d2[: tr + 1] >= R * R)[0]
        last_before[(R, r)] = int(outside[-1]) if len(outside) else None
    return HitTimes(tau=tau, last_before=last_before)
