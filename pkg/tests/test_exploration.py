import math

import numpy as np
import pytest

import hexwind.hexgeom as hx
from hexwind.exploration import (
    detect_event_A,
    hit_times,
    make_setup,
    trace_exploration,
    winding,
)
from hexwind.lattice import (
    BLUE,
    YELLOW,
    Configuration,
    build_disc_domain,
    sample_configuration,
    select_e_vertices,
)


def canonical_setup(R_lat):
    dom = build_disc_domain(R_lat)
    a, b = select_e_vertices(dom, 1 + 0j, -1 + 0j)
    return dom, make_setup(dom, a, b)


def mono(dom, color):
    return Configuration(
        domain=dom,
        colors=np.full(dom.n_sites, color, dtype=np.uint8),
        seed=(0,),
    )


def halfplane(dom):
    x = dom.sites_ij[:, 0] + 0.5 * dom.sites_ij[:, 1]
    return Configuration(domain=dom, colors=(x > 0).astype(np.uint8), seed=(0,))


def test_all_blue_hugs_left_boundary():
    dom, setup = canonical_setup(6)
    path = trace_exploration(setup, mono(dom, BLUE))
    assert tuple(path.verts[-1]) == setup.b
    # Every left hexagon along the walk is a painted s-boundary hexagon.
    grid = setup.trial_grid(mono(dom, BLUE))
    for k in range(len(path.verts) - 1):
        x, y = map(int, path.verts[k])
        nx, ny = map(int, path.verts[k + 1])
        cls = hx.vclass(x, y)
        slot = hx.NEIGHBOR_OFFSETS[cls].index((nx - x, ny - y))
        f1, f2 = hx.EDGE_FLANKS[cls][slot]
        left = None
        for f in (f1, f2):
            ox, oy = hx.HEXAGON_OFFSETS[cls][f]
            cr = (nx - x) * (y + oy - y) - (ny - y) * (x + ox - x)
            if cr > 0:
                left = hx.site_of_center(x + ox, y + oy)
        assert left is not None
        assert not dom.contains(*left)  # yellow side is always painted


def test_color_swap_reverses_path():
    dom, setup = canonical_setup(8)
    cfg = sample_configuration(dom, 5)
    swapped = Configuration(
        domain=dom, colors=(1 - cfg.colors).astype(np.uint8), seed=(1,)
    )
    setup_rev = make_setup(dom, setup.b, setup.a)
    p1 = trace_exploration(setup, cfg)
    p2 = trace_exploration(setup_rev, swapped)
    assert np.array_equal(p1.verts, p2.verts[::-1])


def test_reference_turn_by_color_walker():
    """Edge-for-edge agreement with an independent angle-based walker."""
    dom, setup = canonical_setup(4)

    def slow_walk(cfg):
        grid = setup.trial_grid(cfg)

        def color_of_center(c):
            i, j = hx.site_of_center(*c)
            return int(grid[j - dom.j0, i - dom.i0])

        prev = setup.prev_vertex
        cur = setup.a
        out = [cur]
        guard = 0
        while cur != setup.b:
            guard += 1
            assert guard < 10000
            cls = hx.vclass(*cur)
            hexes = [
                (cur[0] + ox, cur[1] + oy) for ox, oy in hx.HEXAGON_OFFSETS[cls]
            ]
            nbrs = [
                (cur[0] + ox, cur[1] + oy) for ox, oy in hx.NEIGHBOR_OFFSETS[cls]
            ]
            best = None
            for nxt in nbrs:
                if nxt == prev:
                    continue
                # Flanks of the candidate edge: hexagons adjacent to both.
                fl = [
                    h
                    for h in hexes
                    if 3 * (h[0] - nxt[0]) ** 2 + (h[1] - nxt[1]) ** 2 == 4
                ]
                assert len(fl) == 2
                c0 = color_of_center(fl[0])
                c1 = color_of_center(fl[1])
                if c0 == c1:
                    continue
                blue = fl[0] if c0 == 1 else fl[1]
                dx, dy = nxt[0] - cur[0], nxt[1] - cur[1]
                cr = dx * (blue[1] - cur[1]) - dy * (blue[0] - cur[0])
                if cr < 0:  # blue on the right of cur -> nxt
                    best = nxt
            assert best is not None
            prev, cur = cur, best
            out.append(cur)
        return np.array(out)

    for s in range(25):
        cfg = sample_configuration(dom, (9, s))
        fast = trace_exploration(setup, cfg)
        slow = slow_walk(cfg)
        assert np.array_equal(fast.verts, slow)


def test_winding_basics():
    dom, setup = canonical_setup(8)
    cfg = sample_configuration(dom, 3)
    p = trace_exploration(setup, cfg)
    assert winding(p, 4, 4) == 0.0
    n = len(p) - 1
    # Telescoping is exact in real arithmetic; floats leave one rounding.
    assert winding(p, 0, n) == pytest.approx(
        winding(p, 0, n // 2) + winding(p, n // 2, n), abs=1e-12
    )
    with pytest.raises(IndexError):
        winding(p, 0, len(p))


def test_full_hex_ring_winds_2pi():
    # A closed counterclockwise walk around the origin hexagon.
    corners = list(hx.HEX_CORNERS) + [hx.HEX_CORNERS[0]]
    total = 0.0
    for k in range(6):
        x1, y1 = corners[k]
        x2, y2 = corners[k + 1]
        p1 = (0.5 * x1, y1 / (2 * math.sqrt(3.0)))
        p2 = (0.5 * x2, y2 / (2 * math.sqrt(3.0)))
        total += math.atan2(
            p1[0] * p2[1] - p1[1] * p2[0], p1[0] * p2[0] + p1[1] * p2[1]
        )
    assert abs(total - 2 * math.pi) < 1e-12


def test_event_A_examples():
    dom, setup = canonical_setup(6)
    assert not detect_event_A(trace_exploration(setup, mono(dom, BLUE)))
    p = trace_exploration(setup, halfplane(dom))
    assert detect_event_A(p)


def test_event_A_matches_two_arm_oracle():
    from hexwind.arms import event_A_oracle

    dom, setup = canonical_setup(16)
    mismatches = 0
    for s in range(3000):
        cfg = sample_configuration(dom, (21, s))
        path = trace_exploration(setup, cfg, stop_at_h0=True)
        if detect_event_A(path) != event_A_oracle(setup, cfg):
            mismatches += 1
    assert mismatches == 0


def test_reflection_antisymmetry_exact():
    """Conjugating the configuration and swapping colors mirrors the path
    traced from the mirrored e-vertices; the winding negates exactly."""
    dom, setup = canonical_setup(8)
    ma = (setup.a[0], -setup.a[1])
    mb = (setup.b[0], -setup.b[1])
    setup_m = make_setup(dom, ma, mb)
    for s in range(20):
        cfg = sample_configuration(dom, (33, s))
        refl = np.empty_like(cfg.colors)
        for idx, (i, j) in enumerate(dom.sites_ij):
            ridx = dom.site_index(int(i + j), int(-j))
            refl[ridx] = 1 - cfg.colors[idx]
        cfg_r = Configuration(domain=dom, colors=refl, seed=(0,))
        p = trace_exploration(setup_m, cfg, stop_at_h0=True)
        q = trace_exploration(setup, cfg_r, stop_at_h0=True)
        assert np.array_equal(q.verts[:, 0], p.verts[:, 0])
        assert np.array_equal(q.verts[:, 1], -p.verts[:, 1])
        assert np.array_equal(q.cum_winding, -p.cum_winding)
        assert q.hit_h0_index == p.hit_h0_index


def test_no_repeated_directed_edges():
    dom, setup = canonical_setup(12)
    cfg = sample_configuration(dom, 77)
    p = trace_exploration(setup, cfg)
    edges = set()
    for k in range(len(p) - 1):
        e = (tuple(p.verts[k]), tuple(p.verts[k + 1]))
        assert e not in edges
        edges.add(e)


def test_hit_times_contract():
    dom, setup = canonical_setup(16)
    cfg = sample_configuration(dom, 9)
    p = trace_exploration(setup, cfg, stop_at_h0=True)
    radii = [16.0, 12.0, 8.0, 4.0, 2.0]
    ht = hit_times(p, radii, pairs=[(8.0, 4.0)])
    assert ht.tau[16.0] == 0  # starts on the boundary circle
    taus = [ht.tau[r] for r in radii]
    present = [t for t in taus if t is not None]
    assert present == sorted(present)  # nested discs: tau nondecreasing
    T = ht.last_before[(8.0, 4.0)]
    if ht.tau[4.0] is not None:
        assert T is not None and T <= ht.tau[4.0]
        d2 = p.dist2()
        assert d2[T] >= 64.0 - 1e-9
        assert np.all(d2[T + 1 : ht.tau[4.0]] < 64.0)


def test_hit_times_absent_radius():
    dom, setup = canonical_setup(8)
    p = trace_exploration(setup, mono(dom, BLUE))
    ht = hit_times(p, [1.0])
    assert ht.tau[1.0] is None


def test_path_export(tmp_path):
    dom, setup = canonical_setup(4)
    p = trace_exploration(setup, sample_configuration(dom, 1))
    f = tmp_path / "path.csv"
    p.to_csv(f)
    lines = f.read_text().splitlines()
    assert lines[0] == "index,x,y,cum_winding"
    assert len(lines) == len(p) + 1
