"""Oriented interface-loop ensembles under monochromatic blue boundary.

Every edge separating a blue hexagon from a yellow one (boundary paint
included) is assigned the direction that keeps blue on the right; these
directed edges close into disjoint simple loops.  Counterclockwise loops
are outer boundaries of (filled) yellow clusters, clockwise ones of blue
clusters.

The loop-side arm-event predicates live here.  They are statements about
percolation in the disc of radius R, so when an event is queried for an
annulus whose outer radius is smaller than the ensemble's domain, the
ensemble is re-extracted on that sub-disc (same configuration restricted,
blue paint on the sub-disc's s-boundary); equivalence with the direct
detectors is exact in that reading and is enforced by the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import hexgeom as hx
from . import _kernels as K
from .arms import annulus_system, disc_mask
from .lattice import ABSENT, BLUE, Configuration, DiscreteDomain

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class Loop:
    """One closed oriented interface cycle.

    ``ccw`` is the intrinsic traversal orientation (signed area), which for
    blue-on-right orientation marks outer boundaries of yellow clusters;
    ``surrounds_origin`` is the winding of the loop around 0 being +-2pi.
    """

    verts: np.ndarray  # (m, 2) scaled vertex coordinates, traversal order
    winding: float  # total argument change around the origin
    area2: int  # twice the signed area in scaled coordinates

    @property
    def ccw(self) -> bool:
        return self.area2 > 0

    @property
    def cw(self) -> bool:
        return self.area2 < 0

    @property
    def surrounds_origin(self) -> bool:
        return abs(self.winding) > math.pi

    def __len__(self) -> int:
        return len(self.verts)


@dataclass(frozen=True, eq=False)
class LoopEnsemble:
    """All interface loops of a configuration with blue boundary paint."""

    domain: DiscreteDomain
    config: Configuration
    R: float  # extraction radius (defaults to the domain radius)
    loops: tuple

    def n_edges(self) -> int:
        return sum(len(lp) for lp in self.loops)

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for lp in self.loops:
                fh.write(
                    json.dumps(
                        {
                            "vertices": lp.verts.tolist(),
                            "counterclockwise": lp.ccw,
                            "surrounds_origin": lp.surrounds_origin,
                        }
                    )
                )
                fh.write("\n")


def _painted_grid(config: Configuration, R: float | None) -> np.ndarray:
    """Color grid of the sub-disc of radius R with blue s-boundary paint."""
    domain = config.domain
    if R is None or R == domain.radius:
        g = np.full(domain.index_grid.shape, ABSENT, dtype=np.uint8)
        m = domain.site_mask()
        g[m] = config.colors[domain.index_grid[m]]
        sb = domain.s_boundary
        g[sb[:, 1] - domain.j0, sb[:, 0] - domain.i0] = BLUE
        return g
    sub = disc_mask(domain, R)
    g = np.full(domain.index_grid.shape, ABSENT, dtype=np.uint8)
    g[sub] = config.colors[domain.index_grid[sub]]
    from .arms import _neighbor_dilate

    paint = _neighbor_dilate(sub)
    g[paint] = BLUE
    return g


def extract_loop_ensemble(
    config: Configuration, R: float | None = None
) -> LoopEnsemble:
    """All oriented cluster-boundary loops; deterministic in the input."""
    domain = config.domain
    grid = _painted_grid(config, R)
    raw = K.extract_loops(grid, domain.i0, domain.j0)
    loops = tuple(Loop(verts=v, winding=w, area2=a) for v, w, a in raw)
    return LoopEnsemble(
        domain=domain,
        config=config,
        R=float(R) if R is not None else domain.radius,
        loops=loops,
    )


@lru_cache(maxsize=256)
def _disc_membership_tester(domain: DiscreteDomain, radius_key: str):
    mask = disc_mask(domain, float(radius_key))
    i0, j0 = domain.i0, domain.j0
    nj, ni = mask.shape

    def site_in(cx: int, cy: int) -> bool:
        j = cy // 3
        i = (cx - j) >> 1
        gj, gi = j - j0, i - i0
        return 0 <= gj < nj and 0 <= gi < ni and bool(mask[gj, gi])

    return site_in


def _loop_disc_touch_flags(domain, loop: Loop, r: float):
    """(touches, has_vertex_on_or_inside) against the closed Disc_r region.

    A loop touches the region iff some vertex has an incident hexagon in
    Disc_r; on the hexagonal lattice this is equivalent to an edge of the
    loop bordering a Disc_r hexagon, i.e. to the curve meeting the closed
    region at all.
    """
    site_in = _disc_membership_tester(domain, repr(float(r)))
    for x, y in loop.verts:
        cls = (int(y) % 3) - 1
        for ox, oy in hx.HEXAGON_OFFSETS[cls]:
            if site_in(int(x) + ox, int(y) + oy):
                return True
    return False


def _loop_outer_touches(domain, loop: Loop, R: float):
    """True iff some loop vertex has an incident hexagon outside Disc_R."""
    site_in = _disc_membership_tester(domain, repr(float(R)))
    for x, y in loop.verts:
        cls = (int(y) % 3) - 1
        for ox, oy in hx.HEXAGON_OFFSETS[cls]:
            if not site_in(int(x) + ox, int(y) + oy):
                return True
    return False


def _vertex_touch_arrays(domain, loop: Loop, r: float, R: float):
    inner_in = _disc_membership_tester(domain, repr(float(r)))
    outer_in = _disc_membership_tester(domain, repr(float(R)))
    m = len(loop.verts)
    inner = np.zeros(m, dtype=bool)
    outer = np.zeros(m, dtype=bool)
    for k, (x, y) in enumerate(loop.verts):
        cls = (int(y) % 3) - 1
        for ox, oy in hx.HEXAGON_OFFSETS[cls]:
            cx, cy = int(x) + ox, int(y) + oy
            if inner_in(cx, cy):
                inner[k] = True
            if not outer_in(cx, cy):
                outer[k] = True
    return inner, outer


def _loop_vertex_flags(domain, lp: Loop, r: float, R: float):
    """Per-vertex flags against Disc_r and Disc_R: strictly inside the
    inner region, on the inner boundary curve, touching beyond Disc_R."""
    inner_in = _disc_membership_tester(domain, repr(float(r)))
    outer_in = _disc_membership_tester(domain, repr(float(R)))
    m = len(lp.verts)
    inner_side = np.zeros(m, dtype=bool)
    inner_touch = np.zeros(m, dtype=bool)
    outer_touch = np.zeros(m, dtype=bool)
    for k in range(m):
        x, y = int(lp.verts[k, 0]), int(lp.verts[k, 1])
        cls = (y % 3) - 1
        nin = 0
        out2 = False
        for ox, oy in hx.HEXAGON_OFFSETS[cls]:
            cx, cy = x + ox, y + oy
            if inner_in(cx, cy):
                nin += 1
            if not outer_in(cx, cy):
                out2 = True
        inner_side[k] = nin == 3
        inner_touch[k] = 0 < nin < 3
        outer_touch[k] = out2
    return inner_side, inner_touch, outer_touch


@dataclass(frozen=True, eq=False)
class CrossingCurve:
    """One interface curve crossing an annulus: its crossing arcs (oriented
    inner to outer) and every vertex of its annulus portion."""

    loop: Loop
    arcs: tuple  # vertex arrays, first vertex on the inner boundary
    annulus_verts: np.ndarray


def crossing_curves(config: Configuration, r: float, R: float):
    """Interface curves of the Disc_R sub-disc that cross A(r, R).

    A curve crosses when its cyclic touch sequence alternates between the
    inner boundary and the outer boundary; each alternation contributes one
    crossing arc.
    """
    ens = extract_loop_ensemble(config, R)
    domain = ens.domain
    out = []
    for lp in ens.loops:
        inner_side, inner_touch, outer_touch = _loop_vertex_flags(domain, lp, r, R)
        if not (inner_touch.any() and outer_touch.any()):
            continue
        touch_idx = np.nonzero(inner_touch | outer_touch)[0]
        arcs = []
        for t in range(len(touch_idx)):
            a = int(touch_idx[t])
            b = int(touch_idx[(t + 1) % len(touch_idx)])
            ta = 1 if inner_touch[a] else 2
            tb = 1 if inner_touch[b] else 2
            if ta == tb:
                continue
            if a < b:
                seg = lp.verts[a : b + 1]
            else:
                seg = np.concatenate([lp.verts[a:], lp.verts[: b + 1]])
            if ta == 2:
                seg = seg[::-1]
            arcs.append(np.ascontiguousarray(seg))
        if not arcs:
            continue
        out.append(
            CrossingCurve(
                loop=lp,
                arcs=tuple(arcs),
                annulus_verts=lp.verts[~inner_side],
            )
        )
    return out


def arc_flank_sites(config: Configuration, arc_verts: np.ndarray):
    """Blue and yellow flank site paths along an interface arc.

    The arc must run strictly inside the annulus except for its endpoint
    vertices, so every flank hexagon is a real colored site.
    """
    domain = config.domain
    grid = config.color_grid()
    bf, yf = [], []
    for k in range(len(arc_verts) - 1):
        x, y = int(arc_verts[k, 0]), int(arc_verts[k, 1])
        nx, ny = int(arc_verts[k + 1, 0]), int(arc_verts[k + 1, 1])
        cls = (y % 3) - 1
        slot = hx.NEIGHBOR_OFFSETS[cls].index((nx - x, ny - y))
        f1, f2 = hx.EDGE_FLANKS[cls][slot]
        for f in (f1, f2):
            ox, oy = hx.HEXAGON_OFFSETS[cls][f]
            sij = hx.site_of_center(x + ox, y + oy)
            c = grid[sij[1] - domain.j0, sij[0] - domain.i0]
            if c == ABSENT:
                raise AssertionError("arc flank fell outside the domain")
            tgt = bf if c == BLUE else yf
            if not tgt or tgt[-1] != sij:
                tgt.append(sij)
    return np.array(bf, dtype=np.int64), np.array(yf, dtype=np.int64)


def loop_arm_event(ensemble: LoopEnsemble, r: float, R: float, k: int) -> bool:
    """Loop characterization of the k-arm event on A(r, R), k in {1, 2, 4}.

    k=1: no counterclockwise loop surrounding the origin whose curve stays
    clear of the closed inner-disc region.  k=2: a counterclockwise loop
    meets both the inner region and the outer boundary.  k=4: two such
    loops, or one counterclockwise loop splitting at outer-boundary visits
    into at least two arcs that each meet the inner region.
    """
    if k not in (1, 2, 4):
        raise ValueError("k must be 1, 2 or 4")
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if R > ensemble.domain.radius:
        raise ValueError("R exceeds the domain radius")
    if R != ensemble.R:
        ensemble = extract_loop_ensemble(ensemble.config, R)
    domain = ensemble.domain

    if k == 1:
        for lp in ensemble.loops:
            if (
                lp.ccw
                and lp.surrounds_origin
                and not _loop_disc_touch_flags(domain, lp, r)
            ):
                return False
        return True

    if k == 2:
        for lp in ensemble.loops:
            if (
                lp.ccw
                and _loop_disc_touch_flags(domain, lp, r)
                and _loop_outer_touches(domain, lp, R)
            ):
                return True
        return False

    # k == 4
    n_cross = 0
    for lp in ensemble.loops:
        if not lp.ccw:
            continue
        inner, outer = _vertex_touch_arrays(domain, lp, r, R)
        if not outer.any() or not inner.any():
            continue
        n_cross += 1
        if n_cross >= 2:
            return True
        # One loop: arcs between consecutive outer visits, each meeting
        # the inner region, realize the gamma1/gamma2 decomposition.
        outs = np.nonzero(outer)[0]
        if len(outs) < 2:
            continue
        m = len(lp.verts)
        arcs_with_inner = 0
        for t in range(len(outs)):
            a = outs[t]
            b = outs[(t + 1) % len(outs)]
            if a < b:
                seg = inner[a : b + 1]
            else:
                seg = np.concatenate([inner[a:], inner[: b + 1]])
            if seg.any():
                arcs_with_inner += 1
                if arcs_with_inner >= 2:
                    return True
    return False
