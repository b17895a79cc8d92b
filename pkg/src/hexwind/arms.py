"""Arm events, interface-crossing counts, faces, and probability harnesses.

Discrete annuli follow the Jordan-set reading: A(r, R) is the site set
Disc_R minus Disc_r, where Disc_x collects the hexagons whose closure fits
in the closed disc of radius x (promoted to the origin hexagon when empty).
An arm "connects the boundary pieces" when it runs from a site adjacent to
Disc_r to a site adjacent to the complement of Disc_R, staying inside the
annulus.  These adjacency-based contacts make the color-side and loop-side
event characterizations match exactly, configuration by configuration.
"""

from __future__ import annotations

import math
import sys as _sys
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import hexgeom as hx
from . import _kernels as K
from .lattice import (
    BLUE,
    YELLOW,
    ABSENT,
    Configuration,
    DiscreteDomain,
    axial_component_labels,
    disc_site_mask,
)


class UnsupportedSequence(ValueError):
    pass


class InstanceTooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# Discrete discs and annulus systems


@lru_cache(maxsize=256)
def _disc_mask_cached(domain: DiscreteDomain, radius_key: str) -> np.ndarray:
    radius = float(radius_key)
    nj, ni = domain.index_grid.shape
    m = disc_site_mask(radius, domain.i0, domain.j0, nj, ni)
    if not m.any():
        # The paper's convention: the hexagon closest to the center stands in
        # for a disc too small to contain any whole hexagon.
        m = np.zeros_like(m)
        m[-domain.j0, -domain.i0] = True
    return m


def disc_mask(domain: DiscreteDomain, radius: float) -> np.ndarray:
    """Mask of sites whose closed hexagon lies in the closed disc."""
    return _disc_mask_cached(domain, repr(float(radius)))


def _neighbor_dilate(mask: np.ndarray) -> np.ndarray:
    """Sites adjacent (6-neighborhood) to the mask, excluding the mask."""
    out = np.zeros_like(mask)
    nj, ni = mask.shape
    for di, dj in hx.AXIAL_NEIGHBORS:
        src = mask[
            max(0, dj) : nj - max(0, -dj), max(0, di) : ni - max(0, -di)
        ]
        out[
            max(0, -dj) : nj - max(0, dj), max(0, -di) : ni - max(0, di)
        ] |= src
    return out & ~mask


@dataclass(frozen=True, eq=False)
class AnnulusSystem:
    """Cached discrete annulus A(r, R) inside a domain."""

    domain: DiscreteDomain
    r: float
    R: float
    inner_mask: np.ndarray  # Disc_r sites
    a_mask: np.ndarray  # Disc_R minus Disc_r
    zone_grid: np.ndarray  # 0 middle (A), 1 inner, 2 outer/absent
    inner_contact: np.ndarray  # A-sites adjacent to Disc_r
    outer_contact: np.ndarray  # A-sites adjacent to the Disc_R complement
    start_vertices: tuple  # inner-rim hexagon corners for strand walks


@lru_cache(maxsize=256)
def _annulus_system_cached(domain, r_key, R_key) -> AnnulusSystem:
    r, R = float(r_key), float(R_key)
    inner = disc_mask(domain, r)
    outerdisc = disc_mask(domain, R)
    if (inner & ~outerdisc).any():
        raise ValueError("inner disc exceeds outer disc")
    dom = domain.site_mask()
    if (outerdisc & ~dom).any():
        raise ValueError("annulus outer radius exceeds the domain")
    a_mask = outerdisc & ~inner
    zone = np.full(inner.shape, 2, dtype=np.uint8)
    zone[a_mask] = 0
    zone[inner] = 1

    inner_contact = _neighbor_dilate(inner) & a_mask
    outside = ~outerdisc
    outer_contact = _neighbor_dilate(outside) & a_mask

    # Hexagon corners of the inner rim, the seeds for interface-arc walks.
    rim = inner & _neighbor_dilate(a_mask | ~dom)
    rim_sites = np.argwhere(rim)
    seen = set()
    for gj, gi in rim_sites:
        i, j = int(gi) + domain.i0, int(gj) + domain.j0
        cx, cy = hx.center_scaled(i, j)
        for dx, dy in hx.HEX_CORNERS:
            seen.add((cx + dx, cy + dy))
    return AnnulusSystem(
        domain=domain,
        r=r,
        R=R,
        inner_mask=inner,
        a_mask=a_mask,
        zone_grid=zone,
        inner_contact=inner_contact,
        outer_contact=outer_contact,
        start_vertices=tuple(sorted(seen)),
    )


def annulus_system(domain: DiscreteDomain, r: float, R: float) -> AnnulusSystem:
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    return _annulus_system_cached(domain, repr(float(r)), repr(float(R)))


# ---------------------------------------------------------------------------
# Connectivity detectors


def _crossing_exists(cgrid: np.ndarray, sys_: AnnulusSystem, color: int) -> bool:
    m = sys_.a_mask & (cgrid == color)
    src = m & sys_.inner_contact
    dst = m & sys_.outer_contact
    if not src.any() or not dst.any():
        return False
    labels = axial_component_labels(m)
    return bool(np.isin(labels[src], labels[dst]).any())


def normalize_sigma(sigma) -> tuple:
    """Canonical color sequence (cyclic); raises on unsupported values."""
    if isinstance(sigma, str):
        seq = tuple(sigma.upper())
    else:
        seq = tuple(s.upper() for s in sigma)
    if not seq or any(s not in ("B", "Y") for s in seq):
        raise UnsupportedSequence(f"bad color sequence {sigma!r}")
    if all(s == seq[0] for s in seq):
        return seq
    rots = [seq[k:] + seq[:k] for k in range(len(seq))]
    if ("B", "Y") in rots:
        return ("B", "Y")
    if ("B", "Y", "B", "Y") in rots:
        return ("B", "Y", "B", "Y")
    raise UnsupportedSequence(f"unsupported color sequence {sigma!r}")


def detect_arms(config: Configuration, r: float, R: float, sigma) -> bool:
    """Disjoint monochromatic crossings of A(r, R) with colors ``sigma``.

    Monochromatic multi-arm cases use exact vertex-disjoint max-flow;
    the alternating cases reduce to per-color connectivity (B, Y) and to
    interface-crossing counting (B, Y, B, Y).  The reductions are validated
    against exhaustive oracles in the test suite, not assumed.
    """
    seq = normalize_sigma(sigma)
    sys_ = annulus_system(config.domain, r, R)
    cgrid = config.color_grid()
    if len(seq) == 1:
        return _crossing_exists(cgrid, sys_, BLUE if seq[0] == "B" else YELLOW)
    if all(s == seq[0] for s in seq):
        col = BLUE if seq[0] == "B" else YELLOW
        return max_disjoint_crossings(config, r, R, col) >= len(seq)
    if seq == ("B", "Y"):
        return _crossing_exists(cgrid, sys_, BLUE) and _crossing_exists(
            cgrid, sys_, YELLOW
        )
    # (B, Y, B, Y)
    return count_interface_crossings(config, r, R, max_count=4) >= 4


def count_interface_crossings(
    config: Configuration, r: float, R: float, max_count: int = -1
) -> int:
    """Number of interface strands crossing A(r, R); always even.

    A strand is a maximal bichromatic-edge arc whose interior stays in the
    annulus zone and whose ends touch the inner and outer zones.
    """
    sys_ = annulus_system(config.domain, r, R)
    cgrid = config.color_grid()
    n, _ = K.annulus_strands(
        cgrid,
        sys_.zone_grid,
        config.domain.i0,
        config.domain.j0,
        sys_.start_vertices,
        False,
        max_count,
    )
    return n


def crossing_strands(config: Configuration, r: float, R: float, max_count: int = -1):
    """Crossing strands with vertex and color-flank site arrays."""
    sys_ = annulus_system(config.domain, r, R)
    cgrid = config.color_grid()
    return K.annulus_strands(
        cgrid,
        sys_.zone_grid,
        config.domain.i0,
        config.domain.j0,
        sys_.start_vertices,
        True,
        max_count,
    )


# ---------------------------------------------------------------------------
# Vertex-disjoint max flow (Dinic on split nodes)


def _dinic_vertex_disjoint(n_nodes, adj_pairs, sources, sinks, cap_limit=None):
    """Max number of vertex-disjoint paths from sources to sinks.

    Nodes are split (in, out); every node, source and sink has capacity 1.
    ``adj_pairs`` is an iterable of undirected node pairs.
    """
    # Arc list representation: to[], cap[], head per node of 2n+2.
    S, T = 2 * n_nodes, 2 * n_nodes + 1
    graph: list[list[int]] = [[] for _ in range(2 * n_nodes + 2)]
    to: list[int] = []
    cap: list[int] = []

    def add(u, v, c):
        graph[u].append(len(to))
        to.append(v)
        cap.append(c)
        graph[v].append(len(to))
        to.append(u)
        cap.append(0)

    for v in range(n_nodes):
        add(2 * v, 2 * v + 1, 1)
    for u, v in adj_pairs:
        add(2 * u + 1, 2 * v, 1)
        add(2 * v + 1, 2 * u, 1)
    for s in sources:
        add(S, 2 * s, 1)
    for t in sinks:
        add(2 * t + 1, T, 1)

    flow = 0
    limit = cap_limit if cap_limit is not None else len(sources) + 1
    while flow < limit:
        level = {S: 0}
        q = deque([S])
        while q:
            u = q.popleft()
            for e in graph[u]:
                if cap[e] > 0 and to[e] not in level:
                    level[to[e]] = level[u] + 1
                    q.append(to[e])
        if T not in level:
            break
        it = [0] * (2 * n_nodes + 2)

        def dfs(u):
            if u == T:
                return True
            while it[u] < len(graph[u]):
                e = graph[u][it[u]]
                v = to[e]
                if cap[e] > 0 and level.get(v, -1) == level[u] + 1 and dfs(v):
                    cap[e] -= 1
                    cap[e ^ 1] += 1
                    return True
                it[u] += 1
            return False

        old = _sys.getrecursionlimit()
        _sys.setrecursionlimit(10000 + 2 * n_nodes)
        try:
            while flow < limit and dfs(S):
                flow += 1
        finally:
            _sys.setrecursionlimit(old)
    return flow


def _masked_graph(mask: np.ndarray):
    """Node ids and adjacency pairs of the True cells of an axial mask."""
    idx = np.full(mask.shape, -1, dtype=np.int64)
    n = int(mask.sum())
    idx[mask] = np.arange(n)
    pairs = []
    nj, ni = mask.shape
    for di, dj in hx.EDGE_FAMILY_STEPS:
        a = mask[max(0, -dj) : nj - max(0, dj), max(0, -di) : ni - max(0, di)]
        b = mask[max(0, dj) : nj - max(0, -dj), max(0, di) : ni - max(0, -di)]
        both = a & b
        ja, ia = np.nonzero(both)
        u = idx[ja + max(0, -dj), ia + max(0, -di)]
        v = idx[ja + max(0, dj), ia + max(0, di)]
        pairs.extend(zip(u.tolist(), v.tolist()))
    return idx, n, pairs


def max_disjoint_crossings(
    config: Configuration, r: float, R: float, color: int, cap: int | None = None
) -> int:
    """Exact max number of site-disjoint monochromatic crossings of A(r, R)."""
    sys_ = annulus_system(config.domain, r, R)
    cgrid = config.color_grid()
    m = sys_.a_mask & (cgrid == color)
    idx, n, pairs = _masked_graph(m)
    if n == 0:
        return 0
    sources = idx[m & sys_.inner_contact]
    sinks = idx[m & sys_.outer_contact]
    if len(sources) == 0 or len(sinks) == 0:
        return 0
    return _dinic_vertex_disjoint(n, pairs, sources.tolist(), sinks.tolist(), cap)


def max_disjoint_crossings_oracle(
    config: Configuration, r: float, R: float, mode: str
) -> int:
    """Exhaustive/flow oracle for disjoint annulus crossings.

    mode="blue"/"yellow": exact via vertex-disjoint max flow (documented up
    to ~1e3 annulus sites).  mode="alternating": exact count in {0, 2, 4} of
    the longest alternating arm sequence, by explicit search over disjoint
    blue-pair walls plus separation checks (documented up to ~24 sites).
    """
    sys_ = annulus_system(config.domain, r, R)
    n_sites = int(sys_.a_mask.sum())
    if mode in ("blue", "yellow"):
        if n_sites > 2000:
            raise InstanceTooLarge("flow oracle capped at 2000 annulus sites")
        return max_disjoint_crossings(
            config, r, R, BLUE if mode == "blue" else YELLOW
        )
    if mode != "alternating":
        raise ValueError("mode must be blue, yellow or alternating")
    if n_sites > 24:
        raise InstanceTooLarge("alternating oracle capped at 24 annulus sites")

    cgrid = config.color_grid()
    has_b = _crossing_exists(cgrid, sys_, BLUE)
    has_y = _crossing_exists(cgrid, sys_, YELLOW)
    if not (has_b and has_y):
        return 0
    if (
        max_disjoint_crossings(config, r, R, BLUE, cap=2) >= 2
        and max_disjoint_crossings(config, r, R, YELLOW, cap=2) >= 2
        and _alternating_four(config, sys_, cgrid)
    ):
        return 4
    return 2


def _enumerate_crossings(mask, idx_grid, sources, sinks, adj, limit=20000):
    """All simple crossing paths (as frozensets of node ids) via DFS."""
    out = []
    budget = [limit]

    def dfs(u, used, path):
        if budget[0] <= 0:
            raise InstanceTooLarge("path enumeration budget exhausted")
        budget[0] -= 1
        if u in sinks:
            out.append(frozenset(path))
            return
        for v in adj[u]:
            if v not in used:
                used.add(v)
                path.append(v)
                dfs(v, used, path)
                path.pop()
                used.remove(v)

    for s in sources:
        dfs(s, {s}, [s])
    return out


def _alternating_four(config, sys_, cgrid) -> bool:
    """Exists a site-disjoint B,Y,B,Y quadruple in counterclockwise order.

    Two disjoint blue crossings split the annulus; the order is alternating
    iff yellow crossings exist on both sides of the split, i.e. in
    components of A minus the blue pair that are separated from each other.
    """
    m_blue = sys_.a_mask & (cgrid == BLUE)
    idx, n, pairs = _masked_graph(m_blue)
    if n == 0:
        return False
    adj = [[] for _ in range(n)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    sources = set(idx[m_blue & sys_.inner_contact].tolist())
    sinks = set(idx[m_blue & sys_.outer_contact].tolist())
    if not sources or not sinks:
        return False
    crossings = _enumerate_crossings(m_blue, idx, sources, sinks, adj)
    if len(crossings) < 2:
        return False

    cells = np.argwhere(m_blue)
    node_cell = {int(idx[gj, gi]): (int(gj), int(gi)) for gj, gi in cells}

    a_cells = sys_.a_mask
    for p_i in range(len(crossings)):
        for p_j in range(p_i + 1, len(crossings)):
            p1, p2 = crossings[p_i], crossings[p_j]
            if p1 & p2:
                continue
            removed = np.zeros_like(a_cells)
            for nd in p1 | p2:
                gj, gi = node_cell[nd]
                removed[gj, gi] = True
            rest = a_cells & ~removed
            labels = axial_component_labels(rest)
            # Need yellow crossings in two mutually disconnected components.
            found = set()
            ylab_m = rest & (cgrid == YELLOW)
            ylabels = axial_component_labels(ylab_m)
            src = ylab_m & sys_.inner_contact
            dst = ylab_m & sys_.outer_contact
            good = np.isin(ylabels[src], ylabels[dst])
            for (gj, gi), ok in zip(np.argwhere(src), good):
                if ok:
                    found.add(int(labels[gj, gi]))
                if len(found) >= 2:
                    return True
    return False


# ---------------------------------------------------------------------------
# Event A oracle (two-arm characterization of the origin-hexagon visit)


def event_A_oracle(setup, config: Configuration) -> bool:
    """Blue arm to the right boundary arc and yellow arm to the left one.

    The arms start on the origin hexagon or one of its neighbors and end at
    sites carrying a boundary edge of the respective arc, matching the
    two-arm characterization of the exploration path visiting eta*H_0.
    """
    domain = config.domain
    cgrid = config.color_grid()
    ka = _cycle_pos(domain, setup.a)
    kb = _cycle_pos(domain, setup.b)
    m = domain.boundary_edge_count()
    inside = _boundary_inside_sites(domain)
    right_touch = np.zeros(domain.index_grid.shape, dtype=bool)
    left_touch = np.zeros_like(right_touch)
    k = ka
    while k != kb:
        i, j = inside[k]
        right_touch[j - domain.j0, i - domain.i0] = True
        k = (k + 1) % m
    while k != ka:
        i, j = inside[k]
        left_touch[j - domain.j0, i - domain.i0] = True
        k = (k + 1) % m

    def arm(color, touch):
        mask = cgrid == color
        if not mask[-domain.j0, -domain.i0]:
            # Start on a neighbor of the origin hexagon.
            seeds = []
            for di, dj in hx.AXIAL_NEIGHBORS:
                gj, gi = dj - domain.j0, di - domain.i0
                if mask[gj, gi]:
                    seeds.append((gj, gi))
            if not seeds:
                return False
        else:
            seeds = [(-domain.j0, -domain.i0)]
        labels = axial_component_labels(mask)
        seed_labels = {int(labels[gj, gi]) for gj, gi in seeds}
        tl = labels[touch & mask]
        return bool(np.isin(tl, list(seed_labels)).any())

    return arm(BLUE, right_touch) and arm(YELLOW, left_touch)


def _cycle_pos(domain, v):
    bv = domain.boundary_vertices
    hits = np.nonzero((bv[:, 0] == v[0]) & (bv[:, 1] == v[1]))[0]
    return int(hits[0])


@lru_cache(maxsize=32)
def _boundary_inside_sites(domain):
    """Domain-side site of each directed boundary edge."""
    out = []
    for k in range(domain.boundary_edge_count()):
        x1, y1 = domain.boundary_vertices[k]
        x2, y2 = domain.boundary_vertices[(k + 1) % domain.boundary_edge_count()]
        cls = hx.vclass(int(x1), int(y1))
        slot = hx.NEIGHBOR_OFFSETS[cls].index((int(x2 - x1), int(y2 - y1)))
        f1, f2 = hx.EDGE_FLANKS[cls][slot]
        site = None
        for f in (f1, f2):
            ox, oy = hx.HEXAGON_OFFSETS[cls][f]
            i, j = hx.site_of_center(int(x1) + ox, int(y1) + oy)
            if domain.contains(i, j):
                site = (i, j)
        assert site is not None
        out.append(site)
    return tuple(out)


# ---------------------------------------------------------------------------
# Good faces (event R) and faces-attached arm events


@dataclass(frozen=True, eq=False)
class Faces:
    """Two-arc circuit around Disc_R: a blue arc and a yellow arc.

    The arcs run between the inner endpoints of the two interface strands
    (x1 in the right cone, x2 in the left cone); their concatenation is a
    circuit whose interior contains Disc_R.
    """

    domain: DiscreteDomain
    R: float
    blue_arc: np.ndarray  # (m, 2) axial sites, x1 side to x2 side
    yellow_arc: np.ndarray  # (k, 2) axial sites, x2 side to x1 side
    x1: tuple  # scaled vertex coords on the inner boundary
    x2: tuple
    quality: float
    interior_mask: np.ndarray = field(repr=False)

    def circuit_sites(self) -> np.ndarray:
        return np.concatenate([self.blue_arc, self.yellow_arc], axis=0)


CONE_BOUNDS = {
    1: (-0.75 * math.pi, 0.75 * math.pi),
    2: (0.25 * math.pi, 1.75 * math.pi),
    3: (-0.25 * math.pi, 0.25 * math.pi),
    4: (0.75 * math.pi, 1.25 * math.pi),
}


def _in_cone(x: float, y: float, cone: int) -> bool:
    lo, hi = CONE_BOUNDS[cone]
    a = math.atan2(y, x)
    a = a - lo
    a -= 2 * math.pi * math.floor(a / (2 * math.pi))
    return 0.0 < a < (hi - lo)


def _verts_in_cone(verts: np.ndarray, cone: int) -> bool:
    return all(
        _in_cone(0.5 * x, y / (2.0 * hx.SQRT3), cone) for x, y in verts
    )


def _arc_endpoints_in_cone(arc: np.ndarray, cone: int) -> bool:
    for k in (0, -1):
        x, y = arc[k]
        if not _in_cone(0.5 * x, y / (2.0 * hx.SQRT3), cone):
            return False
    return True


def detect_good_faces(config: Configuration, R: float):
    """Good-faces event R on A(R, 2R).

    Exactly two interface strands cross the annulus (equivalently, exactly
    two disjoint alternating arms exist: the strands split the annulus into
    regions of alternating crossing color), the strands are contained in
    the wide cones around the positive and negative real axis, and each
    strand's endpoints on both boundaries lie in its narrow axis cone.
    Returns the induced faces around Disc_R or None.
    """
    count, strands = crossing_strands(config, R, 2.0 * R, max_count=3)
    if count != 2:
        return None
    s1, s2 = strands

    def fits(sa, sb):
        return (
            _verts_in_cone(sa["verts"], 1)
            and _arc_endpoints_in_cone(sa["verts"], 3)
            and _verts_in_cone(sb["verts"], 2)
            and _arc_endpoints_in_cone(sb["verts"], 4)
        )

    if fits(s1, s2):
        right, left = s1, s2
    elif fits(s2, s1):
        right, left = s2, s1
    else:
        return None
    return build_faces(config, R, right, left)


def build_faces(config: Configuration, R: float, right, left):
    """Faces circuit from the two crossing strands of A(R, 2R).

    The blue arc runs from the right strand's blue flank through the blue
    region to the left strand's blue flank; likewise the yellow arc through
    the yellow region.  With exactly two strands both regions are
    connected, so construction cannot fail.
    """
    domain = config.domain
    sys_ = annulus_system(domain, R, 2.0 * R)
    cgrid = config.color_grid()

    def bridge(flank_a, flank_b, color):
        mask = sys_.a_mask & (cgrid == color)
        start = flank_a[0]
        # BFS over same-colored annulus sites from the inner end of one
        # flank to the inner end of the other; stays inside one tube.
        prev = {tuple(start): None}
        q = deque([tuple(start)])
        goal = tuple(flank_b[0])
        while q:
            cur = q.popleft()
            if cur == goal:
                break
            i, j = cur
            for di, dj in hx.AXIAL_NEIGHBORS:
                t = (i + di, j + dj)
                gj, gi = t[1] - domain.j0, t[0] - domain.i0
                if (
                    0 <= gj < mask.shape[0]
                    and 0 <= gi < mask.shape[1]
                    and mask[gj, gi]
                    and t not in prev
                ):
                    prev[t] = cur
                    q.append(t)
        if goal not in prev:
            raise AssertionError("two-strand tube is not connected; walker bug")
        path = []
        cur = goal
        while cur is not None:
            path.append(cur)
            cur = prev[cur]
        path.reverse()
        return np.array(path, dtype=np.int64)

    blue_arc = bridge(right["blue"], left["blue"], BLUE)
    yellow_arc = bridge(left["yellow"], right["yellow"], YELLOW)

    x1 = tuple(int(t) for t in right["verts"][0])
    x2 = tuple(int(t) for t in left["verts"][0])
    dx = 0.5 * (x1[0] - x2[0])
    dy = (x1[1] - x2[1]) / (2.0 * hx.SQRT3)
    quality = math.hypot(dx, dy) / R

    interior = _interior_mask(domain, blue_arc, yellow_arc)
    return Faces(
        domain=domain,
        R=R,
        blue_arc=blue_arc,
        yellow_arc=yellow_arc,
        x1=x1,
        x2=x2,
        quality=quality,
        interior_mask=interior,
    )


def _interior_mask(domain, blue_arc, yellow_arc) -> np.ndarray:
    blocked = np.zeros(domain.index_grid.shape, dtype=bool)
    for arc in (blue_arc, yellow_arc):
        blocked[arc[:, 1] - domain.j0, arc[:, 0] - domain.i0] = True
    free = domain.site_mask() & ~blocked
    labels = axial_component_labels(free)
    org = labels[-domain.j0, -domain.i0]
    if org < 0:
        raise AssertionError("origin lies on the faces circuit")
    return labels == org


def detect_arms_to_faces(config: Configuration, faces: Faces, r: float) -> bool:
    """Event A_Theta(r, R): blue arm from the blue arc and yellow arm from
    the yellow arc, both to Disc_r, inside the faces."""
    if r > faces.R:
        raise ValueError("r must be <= the faces radius")
    if r == faces.R:
        return True
    domain = config.domain
    cgrid = config.color_grid()
    inner = disc_mask(domain, r)
    target = _neighbor_dilate(inner)

    def arm(arc, color):
        allowed = (faces.interior_mask & (cgrid == color)) | _arc_mask(domain, arc)
        labels = axial_component_labels(allowed)
        arc_labels = labels[arc[:, 1] - domain.j0, arc[:, 0] - domain.i0]
        tgt = allowed & target
        if not tgt.any():
            return False
        return bool(np.isin(labels[tgt], arc_labels).any())

    return arm(faces.blue_arc, BLUE) and arm(faces.yellow_arc, YELLOW)


def _arc_mask(domain, arc) -> np.ndarray:
    m = np.zeros(domain.index_grid.shape, dtype=bool)
    m[arc[:, 1] - domain.j0, arc[:, 0] - domain.i0] = True
    return m


# ---------------------------------------------------------------------------
# Sector crossings (thin-rectangle analog used by the crossing-tail check)


@lru_cache(maxsize=64)
def _sector_system(domain, r_key, R_key, half_angle_key):
    r, R, ha = float(r_key), float(R_key), float(half_angle_key)
    sys_ = annulus_system(domain, r, R)
    pos = domain.site_positions()
    ang = np.arctan2(pos[:, 1], pos[:, 0])
    sector_sites = np.abs(ang) < ha
    mask = np.zeros(domain.index_grid.shape, dtype=bool)
    ij = domain.sites_ij[sector_sites]
    mask[ij[:, 1] - domain.j0, ij[:, 0] - domain.i0] = True
    mask &= sys_.a_mask

    # Sites within one lattice unit of each bounding ray.
    def ray_touch(sign):
        ux, uy = math.cos(sign * ha), math.sin(sign * ha)
        px, py = pos[:, 0], pos[:, 1]
        t = np.maximum(px * ux + py * uy, 0.0)
        d = np.hypot(px - t * ux, py - t * uy)
        m = np.zeros(domain.index_grid.shape, dtype=bool)
        ij_ = domain.sites_ij[d < 1.0]
        m[ij_[:, 1] - domain.j0, ij_[:, 0] - domain.i0] = True
        return m & mask

    return mask, ray_touch(+1), ray_touch(-1)


def max_disjoint_sector_crossings(
    config: Configuration,
    r: float,
    R: float,
    color: int = BLUE,
    half_angle: float = math.pi / 10.0,
    cap: int | None = None,
) -> int:
    """Max site-disjoint monochromatic paths joining the two rays of the
    sector {|arg z| < half_angle} inside A(r, R)."""
    domain = config.domain
    mask, plus, minus = _sector_system(
        domain, repr(float(r)), repr(float(R)), repr(float(half_angle))
    )
    cgrid = config.color_grid()
    m = mask & (cgrid == color)
    idx, n, pairs = _masked_graph(m)
    if n == 0:
        return 0
    sources = idx[m & plus]
    sinks = idx[m & minus]
    if len(sources) == 0 or len(sinks) == 0:
        return 0
    return _dinic_vertex_disjoint(n, pairs, sources.tolist(), sinks.tolist(), cap)


# ---------------------------------------------------------------------------
# Probability estimation rows


@dataclass(frozen=True)
class ArmProbabilityRow:
    sigma: tuple
    r: float
    R: float
    R_lat: int
    n_trials: int
    n_hits: int
    p_hat: float
    ci_halfwidth: float
    seed: int


def wilson_halfwidth(k: int, n: int, z: float = 1.959963984540054) -> float:
    if n == 0:
        return 1.0
    p = k / n
    denom = 1.0 + z * z / n
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return half


def estimate_arm_probability(
    sigma, r: float, R: float, R_lat: int, n_trials: int, seed: int
) -> ArmProbabilityRow:
    """Monte Carlo estimate of P[A_sigma(r, R)] with a Wilson 95% interval.

    The degenerate annulus r == R has probability one by convention.
    """
    from .lattice import build_disc_domain, sample_configuration

    if n_trials <= 0:
        raise ValueError("n_trials must be positive")
    seq = normalize_sigma(sigma)
    if r == R:
        return ArmProbabilityRow(seq, r, R, R_lat, n_trials, n_trials, 1.0, 0.0, seed)
    domain = build_disc_domain(R_lat)
    hits = 0
    for t in range(n_trials):
        cfg = sample_configuration(domain, (seed, t))
        if detect_arms(cfg, r, R, seq):
            hits += 1
    return ArmProbabilityRow(
        seq,
        r,
        R,
        R_lat,
        n_trials,
        hits,
        hits / n_trials,
        wilson_halfwidth(hits, n_trials),
        seed,
    )
