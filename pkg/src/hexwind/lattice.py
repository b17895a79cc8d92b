"""Triangular-lattice disc domains, boundary structure, and fair coloring.

Everything is in lattice units (mesh = 1); callers working at mesh eta =
1/R_lat convert radii once at the API boundary.  Blue is encoded as 1,
yellow as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import hexgeom as hx
from .rng import trial_generator

BLUE = 1
YELLOW = 0
ABSENT = 2


class DomainError(ValueError):
    pass


def axial_component_labels(mask: np.ndarray) -> np.ndarray:
    """Connected-component labels of True cells under triangular adjacency.

    ``mask`` is indexed [j, i] (row-major axial order).  Returns an int array
    of the same shape with -1 outside the mask.
    """
    nj, ni = mask.shape
    idx = np.full(mask.shape, -1, dtype=np.int64)
    idx[mask] = np.arange(int(mask.sum()))
    rows, cols = [], []
    # Axial steps (di, dj): (1,0), (0,1), (1,-1) cover each adjacent pair once.
    for di, dj in hx.EDGE_FAMILY_STEPS:
        a = mask[max(0, -dj) : nj - max(0, dj), max(0, -di) : ni - max(0, di)]
        b = mask[max(0, dj) : nj - max(0, -dj), max(0, di) : ni - max(0, -di)]
        both = a & b
        ja, ia = np.nonzero(both)
        rows.append(idx[ja + max(0, -dj), ia + max(0, -di)])
        cols.append(idx[ja + max(0, dj), ia + max(0, di)])
    n = int(mask.sum())
    if n == 0:
        return idx
    r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    g = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    out = np.full(mask.shape, -1, dtype=np.int64)
    out[mask] = labels
    return out


def disc_site_mask(radius: float, i0: int, j0: int, nj: int, ni: int) -> np.ndarray:
    """Mask [j, i] of sites whose closed hexagon lies in the closed disc."""
    jj, ii = np.mgrid[0:nj, 0:ni]
    i = ii + i0
    j = jj + j0
    cx = 2 * i + j
    cy = 3 * j
    lim = 12.0 * radius * radius
    ok = np.ones(cx.shape, dtype=bool)
    for dx, dy in hx.HEX_CORNERS:
        x = cx + dx
        y = cy + dy
        ok &= (3 * x * x + y * y) <= lim
    return ok


@dataclass(frozen=True, eq=False)
class DiscreteDomain:
    """Jordan set of hexagons approximating a disc, with boundary structure.

    Attributes
    ----------
    radius : float
        Disc radius in lattice units (equals R_lat for the unit disc).
    sites_ij : (n, 2) int64 array
        Axial coordinates sorted row-major by (j, i).
    index_grid : 2-d int64 array
        ``index_grid[j - j0, i - i0]`` is the site index, or -1.
    boundary_vertices : (m, 2) int64 array
        Honeycomb vertices of the boundary cycle, counterclockwise (domain
        on the left); ``boundary_vertices[k] -> boundary_vertices[k+1]`` is
        the k-th directed boundary edge.
    boundary_outside_site : (m, 2) int64 array
        Axial coordinates of the s-boundary hexagon to the right of each
        directed boundary edge.
    e_vertex_cycle_pos : int64 array
        Positions k in the cycle such that vertex k is an e-vertex.
    s_boundary : (p, 2) int64 array
        The external site boundary as a circuit, in boundary-cycle order.
    """

    radius: float
    i0: int
    j0: int
    sites_ij: np.ndarray
    index_grid: np.ndarray
    boundary_vertices: np.ndarray
    boundary_outside_site: np.ndarray
    e_vertex_cycle_pos: np.ndarray
    s_boundary: np.ndarray
    _evset: frozenset = field(repr=False)

    @property
    def n_sites(self) -> int:
        return len(self.sites_ij)

    def contains(self, i: int, j: int) -> bool:
        gj, gi = j - self.j0, i - self.i0
        if gj < 0 or gi < 0 or gj >= self.index_grid.shape[0] or gi >= self.index_grid.shape[1]:
            return False
        return self.index_grid[gj, gi] >= 0

    def site_index(self, i: int, j: int) -> int:
        gj, gi = j - self.j0, i - self.i0
        k = int(self.index_grid[gj, gi])
        if k < 0:
            raise KeyError((i, j))
        return k

    def site_mask(self) -> np.ndarray:
        return self.index_grid >= 0

    def e_vertices(self) -> np.ndarray:
        return self.boundary_vertices[self.e_vertex_cycle_pos]

    def is_e_vertex(self, v) -> bool:
        return (int(v[0]), int(v[1])) in self._evset

    def boundary_edge_count(self) -> int:
        return len(self.boundary_vertices)

    def site_positions(self) -> np.ndarray:
        """Embedded site centers, lattice units, shape (n, 2)."""
        i = self.sites_ij[:, 0].astype(np.float64)
        j = self.sites_ij[:, 1].astype(np.float64)
        return np.stack([i + 0.5 * j, j * (hx.SQRT3 / 2.0)], axis=1)


def _boundary_cycle(mask: np.ndarray, i0: int, j0: int):
    """Directed boundary edges (domain on the left), assembled into a cycle."""
    nj, ni = mask.shape
    starts: dict[tuple[int, int], tuple] = {}
    n_edges = 0

    def in_dom(i, j):
        gj, gi = j - j0, i - i0
        return 0 <= gj < nj and 0 <= gi < ni and mask[gj, gi]

    js, is_ = np.nonzero(mask)
    for gj, gi in zip(js, is_):
        i, j = int(gi + i0), int(gj + j0)
        cx, cy = hx.center_scaled(i, j)
        for di, dj in hx.AXIAL_NEIGHBORS:
            if in_dom(i + di, j + dj):
                continue
            # Shared hex edge between (i,j) and the outside neighbor.
            if (di, dj) in hx.EDGE_FAMILY_STEPS:
                fam = hx.EDGE_FAMILY_STEPS.index((di, dj))
                bx, by = cx, cy
            else:
                fam = hx.EDGE_FAMILY_STEPS.index((-di, -dj))
                bx, by = hx.center_scaled(i + di, j + dj)
            (dx1, dy1), (dx2, dy2) = hx.EDGE_VERTS[fam]
            v1 = (bx + dx1, by + dy1)
            v2 = (bx + dx2, by + dy2)
            # Orient domain hexagon (center cx,cy) on the left.
            cr = (v2[0] - v1[0]) * (cy - v1[1]) - (v2[1] - v1[1]) * (cx - v1[0])
            if cr < 0:
                v1, v2 = v2, v1
            starts[v1] = (v2, (i + di, j + dj))
            n_edges += 1

    if not starts:
        raise DomainError("domain has no boundary")
    v_first = next(iter(starts))
    verts = [v_first]
    outside = []
    v = v_first
    for _ in range(n_edges):
        nxt, out_site = starts[v]
        outside.append(out_site)
        verts.append(nxt)
        v = nxt
        if v == v_first:
            break
    if v != v_first or len(outside) != n_edges:
        raise DomainError("boundary is not a single cycle; domain not Jordan")
    return np.array(verts[:-1], dtype=np.int64), np.array(outside, dtype=np.int64)


def _finalize_domain(mask: np.ndarray, i0: int, j0: int, radius: float) -> DiscreteDomain:
    js, is_ = np.nonzero(mask)
    order = np.lexsort((is_, js))
    sites = np.stack([is_[order] + i0, js[order] + j0], axis=1).astype(np.int64)
    index_grid = np.full(mask.shape, -1, dtype=np.int64)
    index_grid[sites[:, 1] - j0, sites[:, 0] - i0] = np.arange(len(sites))

    bverts, bout = _boundary_cycle(mask, i0, j0)

    # e-vertices: boundary vertices with exactly one incident domain hexagon.
    epos = []
    for k, (x, y) in enumerate(bverts):
        cls = hx.vclass(int(x), int(y))
        cnt = 0
        for hxo, hyo in hx.HEXAGON_OFFSETS[cls]:
            ii, jj = hx.site_of_center(int(x) + hxo, int(y) + hyo)
            gj, gi = jj - j0, ii - i0
            if 0 <= gj < mask.shape[0] and 0 <= gi < mask.shape[1] and mask[gj, gi]:
                cnt += 1
        if cnt == 1:
            epos.append(k)
    if len(epos) < 2:
        raise DomainError("degenerate domain: fewer than 2 e-vertices")

    sb = [tuple(bout[0])]
    for t in map(tuple, bout[1:]):
        if t != sb[-1]:
            sb.append(t)
    if len(sb) > 1 and sb[0] == sb[-1]:
        sb.pop()

    ev = bverts[np.array(epos, dtype=np.int64)]
    return DiscreteDomain(
        radius=radius,
        i0=i0,
        j0=j0,
        sites_ij=sites,
        index_grid=index_grid,
        boundary_vertices=bverts,
        boundary_outside_site=bout,
        e_vertex_cycle_pos=np.array(epos, dtype=np.int64),
        s_boundary=np.array(sb, dtype=np.int64),
        _evset=frozenset((int(x), int(y)) for x, y in ev),
    )


@lru_cache(maxsize=32)
def build_disc_domain(radius_sites: int) -> DiscreteDomain:
    """Largest Jordan set of hexagons inside the disc of the given radius.

    Membership is exact: a hexagon is kept iff all six corners satisfy
    3x^2 + y^2 <= 12 R^2 in scaled integer coordinates.  The result is
    restricted to the connected component of the origin and holes are
    filled by flood fill from outside the bounding box.
    """
    if radius_sites < 2:
        raise DomainError("radius_sites must be >= 2")
    R = int(radius_sites)
    # Site centers satisfy |c| <= R, so |i|, |j| <= ceil(2R/sqrt(3)) + 1.
    ext = int(math.ceil(2 * R / hx.SQRT3)) + 2
    i0 = j0 = -ext
    n = 2 * ext + 1
    mask = disc_site_mask(float(R), i0, j0, n, n)

    labels = axial_component_labels(mask)
    org = labels[-j0, -i0]
    if org < 0:
        raise DomainError("origin hexagon not inside the disc")
    mask = labels == org

    # Fill holes: complement components not touching the border are absorbed.
    comp = axial_component_labels(~mask)
    border_labels = np.unique(
        np.concatenate([comp[0, :], comp[-1, :], comp[:, 0], comp[:, -1]])
    )
    hole = (~mask) & ~np.isin(comp, border_labels)
    mask |= hole

    return _finalize_domain(mask, i0, j0, float(R))


def select_e_vertices(domain: DiscreteDomain, a: complex, b: complex) -> tuple[np.ndarray, np.ndarray]:
    """E-vertices of the domain boundary closest to continuum points a, b.

    ``a`` and ``b`` are points on (or near) the continuum boundary circle,
    given in units of the domain radius (so a=1 means the point at angle 0).
    Ties are broken clockwise of a's direction for a, counterclockwise for b.
    """
    if a == b:
        raise ValueError("a and b must be distinct")
    ev = domain.e_vertices()
    if len(ev) < 2:
        raise DomainError("degenerate domain: fewer than 2 e-vertices")
    pos = np.stack(
        [0.5 * ev[:, 0], ev[:, 1] / (2.0 * hx.SQRT3)], axis=1
    )

    def pick(target: complex, clockwise: bool) -> int:
        tx = target.real * domain.radius
        ty = target.imag * domain.radius
        d2 = (pos[:, 0] - tx) ** 2 + (pos[:, 1] - ty) ** 2
        best = d2.min()
        cand = np.nonzero(d2 <= best + 1e-9)[0]
        if len(cand) == 1:
            return int(cand[0])
        # Angular offset from the target direction, in (-2pi, 0] going
        # clockwise; first encountered clockwise = smallest |offset|.
        ta = math.atan2(ty, tx)
        ang = np.arctan2(pos[cand, 1], pos[cand, 0]) - ta
        ang = np.mod(ang, 2 * math.pi)
        if clockwise:
            # Angles just below the target come first going clockwise.
            key = np.mod(-ang, 2 * math.pi)
        else:
            key = ang
        return int(cand[np.argmin(key)])

    ia = pick(a, clockwise=True)
    ib = pick(b, clockwise=False)
    va, vb = ev[ia], ev[ib]
    if np.array_equal(va, vb):
        raise ValueError("a and b select the same e-vertex; refine the mesh")
    return va.copy(), vb.copy()


@dataclass(frozen=True, eq=False)
class Configuration:
    """A fair blue/yellow coloring of the domain sites."""

    domain: DiscreteDomain
    colors: np.ndarray  # uint8 per site, row-major (j, i) order
    seed: tuple

    def color_grid(self) -> np.ndarray:
        """Dense [j, i] grid: site colors, ABSENT elsewhere."""
        g = np.full(self.domain.index_grid.shape, ABSENT, dtype=np.uint8)
        m = self.domain.index_grid >= 0
        g[m] = self.colors[self.domain.index_grid[m]]
        return g


def sample_configuration(domain: DiscreteDomain, seed) -> Configuration:
    """I.i.d. fair colors; identical (domain, seed) is bit-identical."""
    key = seed if isinstance(seed, tuple) else (int(seed),)
    rng = trial_generator(*key)
    colors = rng.integers(0, 2, size=domain.n_sites, dtype=np.uint8)
    return Configuration(domain=domain, colors=colors, seed=key)


@dataclass(frozen=True, eq=False)
class AnnulusSites:
    """Sites whose hexagon meets the closed annulus, with contact flags."""

    domain: DiscreteDomain
    r: float
    R: float
    site_indices: np.ndarray
    inner_contact: np.ndarray  # bool, hexagon meets the closed inner disc
    outer_contact: np.ndarray  # bool, hexagon meets {|z| >= R}


def annulus_sites(domain: DiscreteDomain, r: float, R: float) -> AnnulusSites:
    """Geometric annulus window A^eta(r, R) clipped to the domain."""
    if not 0 <= r < R:
        raise ValueError("need 0 <= r < R")
    ij = domain.sites_ij
    n = len(ij)
    mind = np.empty(n)
    maxd = np.empty(n)
    for k in range(n):
        i, j = int(ij[k, 0]), int(ij[k, 1])
        mind[k] = hx.hexagon_min_dist_real(i, j)
        maxd[k] = math.sqrt(hx.hexagon_max_dist2x12(i, j) / 12.0)
    keep = (maxd >= r) & (mind <= R)
    idx = np.nonzero(keep)[0]
    return AnnulusSites(
        domain=domain,
        r=r,
        R=R,
        site_indices=idx,
        inner_contact=mind[idx] <= r,
        outer_contact=maxd[idx] >= R,
    )
