import math

import numpy as np
import pytest
from scipy import stats as sps

import hexwind.hexgeom as hx
from hexwind.lattice import (
    AnnulusSites,
    DomainError,
    annulus_sites,
    axial_component_labels,
    build_disc_domain,
    sample_configuration,
    select_e_vertices,
)


def brute_disc_membership(i, j, R):
    return all(
        3 * x * x + y * y <= 12 * R * R for x, y in hx.hexagon_corners_scaled(i, j)
    )


def test_r2_membership_matches_geometric_predicate():
    dom = build_disc_domain(2)
    got = {tuple(s) for s in dom.sites_ij.tolist()}
    expect = {
        (i, j)
        for i in range(-4, 5)
        for j in range(-4, 5)
        if brute_disc_membership(i, j, 2)
    }
    assert got == expect
    # Origin plus its full first ring fits inside radius 2.
    assert got == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}


def test_origin_always_included():
    for R in (2, 3, 8, 33):
        assert build_disc_domain(R).contains(0, 0)


def test_invalid_radius_rejected():
    with pytest.raises(DomainError):
        build_disc_domain(1)


def test_density_approaches_disc_area():
    dom = build_disc_domain(1000)
    # Hexagon area in lattice units is sqrt(3)/2.
    density = dom.n_sites * (math.sqrt(3.0) / 2.0) / (math.pi * 1000**2)
    assert 0.95 <= density <= 1.0


def test_neighbor_relation_symmetric_six_regular():
    dom = build_disc_domain(6)
    sites = {tuple(s) for s in dom.sites_ij.tolist()}
    for i, j in sites:
        nbrs = [(i + di, j + dj) for di, dj in hx.AXIAL_NEIGHBORS]
        for t in nbrs:
            if t in sites:
                back = [(t[0] + di, t[1] + dj) for di, dj in hx.AXIAL_NEIGHBORS]
                assert (i, j) in back
    interior = [s for s in sites if all(
        (s[0] + di, s[1] + dj) in sites for di, dj in hx.AXIAL_NEIGHBORS
    )]
    assert interior  # the disc has interior sites
    assert all(len(set((i + di, j + dj) for di, dj in hx.AXIAL_NEIGHBORS)) == 6
               for i, j in interior)


def test_simple_connectivity_flood_fill():
    dom = build_disc_domain(16)
    mask = dom.site_mask()
    comp = axial_component_labels(~mask)
    border = np.unique(np.concatenate(
        [comp[0, :], comp[-1, :], comp[:, 0], comp[:, -1]]
    ))
    # Complement within the bounding box is a single outside component.
    inside_holes = set(np.unique(comp[comp >= 0])) - set(border.tolist())
    assert not inside_holes


def test_boundary_cycle_closed_and_e_vertices():
    dom = build_disc_domain(8)
    bv = dom.boundary_vertices
    # Each consecutive pair is a honeycomb edge.
    for k in range(len(bv)):
        x1, y1 = bv[k]
        x2, y2 = bv[(k + 1) % len(bv)]
        cls = hx.vclass(int(x1), int(y1))
        assert (int(x2 - x1), int(y2 - y1)) in hx.NEIGHBOR_OFFSETS[cls]
    assert len(dom.e_vertex_cycle_pos) >= 2


def test_select_e_vertices_near_targets():
    dom = build_disc_domain(64)
    a, b = select_e_vertices(dom, 1 + 0j, -1 + 0j)
    ax, ay = 0.5 * a[0], a[1] / (2 * math.sqrt(3.0))
    bx, by = 0.5 * b[0], b[1] / (2 * math.sqrt(3.0))
    assert math.hypot(ax - 64.0, ay) <= 2.0
    assert math.hypot(bx + 64.0, by) <= 2.0
    # Exhaustive scan oracle: no e-vertex is closer.
    ev = dom.e_vertices()
    pos = np.stack([0.5 * ev[:, 0], ev[:, 1] / (2 * math.sqrt(3.0))], axis=1)
    d = np.hypot(pos[:, 0] - 64.0, pos[:, 1])
    assert math.hypot(ax - 64.0, ay) <= d.min() + 1e-9


def test_select_e_vertices_rejects_equal_points():
    dom = build_disc_domain(8)
    with pytest.raises(ValueError):
        select_e_vertices(dom, 1 + 0j, 1 + 0j)


def test_select_e_vertices_reflection_symmetry():
    dom = build_disc_domain(32)
    a, b = select_e_vertices(dom, 1j, -1j)
    ar, br = select_e_vertices(dom, -1j, 1j)
    # Reflecting targets across the real axis reflects the chosen vertices.
    assert (ar[0], ar[1]) == (a[0], -a[1]) or (ar[0], ar[1]) == (b[0], -b[1])


def test_sample_configuration_deterministic():
    dom = build_disc_domain(16)
    c1 = sample_configuration(dom, 42)
    c2 = sample_configuration(dom, 42)
    assert np.array_equal(c1.colors, c2.colors)
    c3 = sample_configuration(dom, 43)
    assert not np.array_equal(c1.colors, c3.colors)


def test_blue_fraction_concentration():
    dom = build_disc_domain(600)  # ~1.2e6 sites
    cfg = sample_configuration(dom, 7)
    frac = cfg.colors.mean()
    assert abs(frac - 0.5) < 0.002


def test_chi_square_uniformity_by_rows():
    dom = build_disc_domain(600)
    cfg = sample_configuration(dom, 11)
    rows = dom.sites_ij[:, 1] % 16
    counts = np.zeros(16)
    totals = np.zeros(16)
    for g in range(16):
        m = rows == g
        counts[g] = cfg.colors[m].sum()
        totals[g] = m.sum()
    chi2 = np.sum((counts - totals / 2) ** 2 / (totals / 4))
    p = sps.chi2.sf(chi2, df=16)
    assert p > 1e-6


def test_annulus_sites_full_disc_when_r_zero():
    dom = build_disc_domain(8)
    ann = annulus_sites(dom, 0.0, 5.0)
    pos = dom.site_positions()
    d = np.hypot(pos[:, 0], pos[:, 1])
    inner = set(np.nonzero(d <= 5.0 - 1.0)[0].tolist())
    assert inner <= set(ann.site_indices.tolist())


def test_annulus_sites_clipped_to_domain():
    dom = build_disc_domain(8)
    ann = annulus_sites(dom, 2.0, 50.0)
    assert len(ann.site_indices) <= dom.n_sites


def test_annulus_thin_ring_flags_match_geometry():
    dom = build_disc_domain(16)
    R = 10.0
    r = R - 0.5
    ann = annulus_sites(dom, r, R)
    for k, idx in enumerate(ann.site_indices):
        i, j = dom.sites_ij[idx]
        mind = hx.hexagon_min_dist_real(int(i), int(j))
        maxd = math.sqrt(hx.hexagon_max_dist2x12(int(i), int(j)) / 12.0)
        assert ann.inner_contact[k] == (mind <= r)
        assert ann.outer_contact[k] == (maxd >= R)
        assert maxd >= r and mind <= R
