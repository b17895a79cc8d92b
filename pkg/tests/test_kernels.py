"""Backend agreement: the compiled core must match the pure-Python mirror
bit for bit on identical inputs."""

import numpy as np
import pytest

from hexwind._kernels import _pure

core = pytest.importorskip(
    "hexwind._kernels._core", reason="compiled extension not built"
)

from hexwind.arms import annulus_system
from hexwind.exploration import make_setup
from hexwind.lattice import build_disc_domain, sample_configuration, select_e_vertices
from hexwind.loops import _painted_grid


@pytest.fixture(scope="module")
def setup16():
    dom = build_disc_domain(16)
    a, b = select_e_vertices(dom, 1 + 0j, -1 + 0j)
    return dom, make_setup(dom, a, b)


def test_explore_bit_exact(setup16):
    dom, setup = setup16
    for s in range(25):
        cfg = sample_configuration(dom, (3, s))
        g = setup.trial_grid(cfg)
        args = (g, dom.i0, dom.j0, setup.prev_vertex, setup.a, setup.b)
        for stop_h0, radius in ((False, -1.0), (True, -1.0), (False, 12.0 * 12 * 4)):
            r1 = core.explore(*args, stop_h0, radius, 10**6)
            r2 = _pure.explore(*args, stop_h0, radius, 10**6)
            assert np.array_equal(r1[0], r2[0])
            assert np.array_equal(r1[1], r2[1])
            assert r1[2:] == r2[2:]


def test_loops_bit_exact(setup16):
    dom, _ = setup16
    for s in range(15):
        cfg = sample_configuration(dom, (5, s))
        g = _painted_grid(cfg, None)
        L1 = core.extract_loops(g, dom.i0, dom.j0)
        L2 = _pure.extract_loops(g, dom.i0, dom.j0)
        assert len(L1) == len(L2)
        for (v1, w1, a1), (v2, w2, a2) in zip(L1, L2):
            assert np.array_equal(v1, v2)
            assert w1 == w2 and a1 == a2


def test_strands_bit_exact(setup16):
    dom, _ = setup16
    sysA = annulus_system(dom, 4.0, 12.0)
    for s in range(15):
        cfg = sample_configuration(dom, (7, s))
        cg = cfg.color_grid()
        args = (cg, sysA.zone_grid, dom.i0, dom.j0, sysA.start_vertices)
        c1 = core.annulus_strands(*args, True, -1)
        c2 = _pure.annulus_strands(*args, True, -1)
        assert c1[0] == c2[0]
        for d1, d2 in zip(c1[1], c2[1]):
            assert np.array_equal(d1["verts"], d2["verts"])
            assert [tuple(t) for t in d1["blue"].tolist()] == [
                tuple(t) for t in d2["blue"].tolist()
            ]
            assert [tuple(t) for t in d1["yellow"].tolist()] == [
                tuple(t) for t in d2["yellow"].tolist()
            ]
        assert core.annulus_strands(*args, False, 2)[0] == _pure.annulus_strands(
            *args, False, 2
        )[0]


def test_sde_bit_exact():
    rng = np.random.default_rng(1)
    stops = np.array([1.0, 2.5, 4.0])
    for kappa in (2.0, 6.0):
        for trial in range(10):
            normals = rng.standard_normal(6000)
            o1 = core.sde_path(np.pi, 0.0, 0.0, 0.0, kappa, 1e-3, 0.1, stops, 0, normals)
            o2 = _pure.sde_path(np.pi, 0.0, 0.0, 0.0, kappa, 1e-3, 0.1, stops, 0, normals)
            assert o1[0] == o2[0] and o1[1] == o2[1] and o1[3] == o2[3]
            assert [tuple(r) for r in o1[2]] == [tuple(r) for r in o2[2]]
    normals = rng.standard_normal(9000)
    o1 = core.sde_path_record(np.pi / 2, 6.0, 1e-3, 0.1, 3.0, normals)
    o2 = _pure.sde_path_record(np.pi / 2, 6.0, 1e-3, 0.1, 3.0, normals)
    assert o1 == o2


def test_need_normals_resumption_matches():
    rng = np.random.default_rng(2)
    stops = np.array([6.0])
    state1 = (np.pi, 0.0, 0.0, 0.0, 0)
    recs1 = []
    rng1 = np.random.default_rng(7)
    while True:
        normals = rng1.standard_normal(500)
        state1, used, recs, status = core.sde_path(
            state1[0], state1[1], state1[2], state1[3], 6.0, 1e-3, 0.1, stops,
            state1[4], normals,
        )
        recs1.extend(recs)
        if status == "done":
            break
    state2 = (np.pi, 0.0, 0.0, 0.0, 0)
    recs2 = []
    rng2 = np.random.default_rng(7)
    while True:
        normals = rng2.standard_normal(500)
        state2, used, recs, status = _pure.sde_path(
            state2[0], state2[1], state2[2], state2[3], 6.0, 1e-3, 0.1, stops,
            state2[4], normals,
        )
        recs2.extend(recs)
        if status == "done":
            break
    assert [tuple(r) for r in recs1] == [tuple(r) for r in recs2]
