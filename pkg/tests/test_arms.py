import math

import numpy as np
import pytest

from hexwind import arms
from hexwind.lattice import (
    BLUE,
    YELLOW,
    Configuration,
    build_disc_domain,
    sample_configuration,
)


def mono(dom, color):
    return Configuration(
        domain=dom, colors=np.full(dom.n_sites, color, dtype=np.uint8), seed=(0,)
    )


def custom(dom, predicate):
    pos = dom.site_positions()
    colors = predicate(pos[:, 0], pos[:, 1]).astype(np.uint8)
    return Configuration(domain=dom, colors=colors, seed=(0,))


def test_sigma_normalization():
    assert arms.normalize_sigma("by") == ("B", "Y")
    assert arms.normalize_sigma(("Y", "B")) == ("B", "Y")
    assert arms.normalize_sigma("YBYB") == ("B", "Y", "B", "Y")
    assert arms.normalize_sigma("YYY") == ("Y", "Y", "Y")
    with pytest.raises(arms.UnsupportedSequence):
        arms.normalize_sigma("BYY")
    with pytest.raises(arms.UnsupportedSequence):
        arms.normalize_sigma("")


def test_all_blue_annulus():
    dom = build_disc_domain(8)
    cfg = mono(dom, BLUE)
    assert arms.detect_arms(cfg, 2.0, 6.0, ("B",))
    assert not arms.detect_arms(cfg, 2.0, 6.0, ("B", "Y"))
    assert not arms.detect_arms(cfg, 2.0, 6.0, ("Y",))


def test_four_sector_coloring_has_alternating_arms():
    dom = build_disc_domain(12)
    cfg = custom(dom, lambda x, y: (x * y > 0))
    assert arms.detect_arms(cfg, 3.0, 9.0, ("B", "Y", "B", "Y"))
    assert arms.detect_arms(cfg, 3.0, 9.0, ("B", "Y"))


def test_halfplane_two_crossings():
    dom = build_disc_domain(10)
    cfg = custom(dom, lambda x, y: x > 0)
    assert arms.count_interface_crossings(cfg, 3.0, 8.0) == 2
    assert arms.detect_arms(cfg, 3.0, 8.0, ("B", "Y"))
    assert not arms.detect_arms(cfg, 3.0, 8.0, ("B", "Y", "B", "Y"))


def test_crossings_always_even():
    dom = build_disc_domain(10)
    for s in range(300):
        cfg = sample_configuration(dom, (7, s))
        assert arms.count_interface_crossings(cfg, 3.0, 8.0) % 2 == 0


def test_event_inclusion_under_annulus_nesting():
    dom = build_disc_domain(16)
    for s in range(300):
        cfg = sample_configuration(dom, (9, s))
        big = arms.detect_arms(cfg, 2.0, 14.0, ("B", "Y"))
        if big:
            assert arms.detect_arms(cfg, 2.0, 6.0, ("B", "Y"))
            assert arms.detect_arms(cfg, 8.0, 14.0, ("B", "Y"))


def test_color_swap_duality():
    dom = build_disc_domain(12)
    n, h_b, h_y = 500, 0, 0
    for s in range(n):
        cfg = sample_configuration(dom, (15, s))
        swapped = Configuration(
            domain=dom, colors=(1 - cfg.colors).astype(np.uint8), seed=(0,)
        )
        b = arms.detect_arms(cfg, 3.0, 9.0, ("B",))
        y = arms.detect_arms(swapped, 3.0, 9.0, ("Y",))
        assert b == y  # exact pointwise duality
        h_b += b
        h_y += arms.detect_arms(cfg, 3.0, 9.0, ("Y",))
    # Statistical symmetry of the two colors under the fair measure.
    assert abs(h_b - h_y) < 5 * math.sqrt(n)


def test_monochromatic_multiarm_flow():
    dom = build_disc_domain(8)
    cfg = mono(dom, YELLOW)
    k = arms.max_disjoint_crossings(cfg, 2.0, 6.0, YELLOW)
    assert k >= 3
    assert arms.detect_arms(cfg, 2.0, 6.0, ("Y", "Y", "Y"))
    assert arms.max_disjoint_crossings(cfg, 2.0, 6.0, BLUE) == 0


def test_oracle_modes_and_guards():
    dom = build_disc_domain(3)
    cfg = mono(dom, YELLOW)
    assert arms.max_disjoint_crossings_oracle(cfg, 1.0, 3.0, "blue") == 0
    assert arms.max_disjoint_crossings_oracle(cfg, 1.0, 3.0, "yellow") >= 1
    assert arms.max_disjoint_crossings_oracle(cfg, 1.0, 3.0, "alternating") == 0
    big = build_disc_domain(64)
    with pytest.raises(arms.InstanceTooLarge):
        arms.max_disjoint_crossings_oracle(
            mono(big, BLUE), 4.0, 32.0, "alternating"
        )


def test_alternating_reduction_random_tiny():
    dom = build_disc_domain(3)
    for s in range(800):
        cfg = sample_configuration(dom, (17, s))
        n = arms.count_interface_crossings(cfg, 1.0, 3.0)
        orc = arms.max_disjoint_crossings_oracle(cfg, 1.0, 3.0, "alternating")
        assert (n >= 2) == (orc >= 2), s
        assert (n >= 4) == (orc >= 4), s
        assert arms.detect_arms(cfg, 1.0, 3.0, ("B", "Y")) == (orc >= 2)
        assert arms.detect_arms(cfg, 1.0, 3.0, "BYBY") == (orc >= 4)


def test_degenerate_annulus_probability_one():
    row = arms.estimate_arm_probability("BY", 4.0, 4.0, 16, 100, seed=1)
    assert row.p_hat == 1.0 and row.ci_halfwidth == 0.0


def test_estimate_arm_probability_monotone_in_R():
    r1 = arms.estimate_arm_probability("B", 2.0, 6.0, 16, 400, seed=3)
    r2 = arms.estimate_arm_probability("B", 2.0, 12.0, 16, 400, seed=3)
    assert r2.p_hat <= r1.p_hat  # same trials, nested events
    assert 0 <= r2.ci_halfwidth <= 1


def test_good_faces_deterministic_colorings():
    dom = build_disc_domain(32)
    # Blue lower half-plane: interfaces run along the real axis.
    cfg = custom(dom, lambda x, y: y < 0)
    f = arms.detect_good_faces(cfg, 16.0)
    assert f is not None
    assert f.quality > 1.5
    # Blue right half-plane: interfaces along the imaginary axis fail
    # the cone conditions.
    cfg2 = custom(dom, lambda x, y: x > 0)
    assert arms.detect_good_faces(cfg2, 16.0) is None
    # All blue: no crossings at all.
    assert arms.detect_good_faces(mono(dom, BLUE), 16.0) is None


def test_good_faces_invariants():
    dom = build_disc_domain(32)
    found = 0
    for s in range(4000):
        cfg = sample_configuration(dom, (5, s))
        f = arms.detect_good_faces(cfg, 16.0)
        if f is None:
            continue
        found += 1
        cg = cfg.color_grid()
        ba, ya = f.blue_arc, f.yellow_arc
        assert all(cg[j - dom.j0, i - dom.i0] == BLUE for i, j in ba.tolist())
        assert all(cg[j - dom.j0, i - dom.i0] == YELLOW for i, j in ya.tolist())
        # Circuit: consecutive sites adjacent, junctions adjacent.
        import hexwind.hexgeom as hx

        def adjacent(p, q):
            return (q[0] - p[0], q[1] - p[1]) in hx.AXIAL_NEIGHBORS

        for arc in (ba, ya):
            for k in range(len(arc) - 1):
                assert adjacent(arc[k], arc[k + 1])
        assert adjacent(ba[-1], ya[0]) and adjacent(ya[-1], ba[0])
        assert 0.0 <= f.quality <= 2.0
        # Interior contains the whole inner disc.
        inner = arms.disc_mask(dom, 16.0)
        assert not (inner & ~f.interior_mask).any()
    assert found >= 1


def test_arms_to_faces_basics():
    dom = build_disc_domain(32)
    f = None
    for s in range(4000):
        cfg = sample_configuration(dom, (5, s))
        f = arms.detect_good_faces(cfg, 16.0)
        if f is not None:
            break
    assert f is not None
    assert arms.detect_arms_to_faces(cfg, f, 16.0)  # degenerate r == R
    # All-blue interior: no yellow arm can exist.
    colors = cfg.colors.copy()
    colors[dom.index_grid[f.interior_mask]] = BLUE
    cfg_blue = Configuration(domain=dom, colors=colors, seed=(0,))
    assert not arms.detect_arms_to_faces(cfg_blue, f, 1.0)


def test_sector_crossings_halfplane():
    dom = build_disc_domain(16)
    cfg = custom(dom, lambda x, y: np.ones_like(x, dtype=bool))
    n = arms.max_disjoint_sector_crossings(cfg, 4.0, 12.0, color=BLUE)
    assert n >= 4  # all-blue sector carries many disjoint radial-ish paths
    cfg_y = mono(dom, YELLOW)
    assert arms.max_disjoint_sector_crossings(cfg_y, 4.0, 12.0, color=BLUE) == 0
