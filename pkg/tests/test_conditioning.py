import itertools
import math

import numpy as np
import pytest
from scipy import stats as sps

from hexwind import arms
from hexwind.conditioning import (
    BudgetExceeded,
    decorrelation_experiment,
    iic_approx_sample,
    sample_conditioned,
    sample_p_star,
    trace_faces_exploration,
)
from hexwind.lattice import (
    BLUE,
    Configuration,
    build_disc_domain,
    sample_configuration,
)


def test_certain_event_accepts_first_attempt():
    dom = build_disc_domain(4)
    # A_1(1, 4) is certain on an all-blue test double; with fair sampling it
    # is frequent, so check acceptance bookkeeping on a certain predicate
    # via a degenerate annulus instead.
    s = sample_conditioned(dom, "A_k", {"k": 1, "r": 1.0, "R": 4.0}, seed=5)
    assert s.attempts >= 1
    assert arms.detect_arms(s.config, 1.0, 4.0, ("B",))


def test_conditioned_samples_satisfy_event():
    dom = build_disc_domain(16)
    for t in range(5):
        s = sample_conditioned(dom, "A_k", {"k": 2, "r": 1.0, "R": 16.0}, seed=t)
        assert arms.detect_arms(s.config, 1.0, 16.0, ("B", "Y"))
        s2 = sample_conditioned(dom, "A", seed=t)
        from hexwind.conditioning import _canonical_setup
        from hexwind.exploration import detect_event_A, trace_exploration

        assert detect_event_A(
            trace_exploration(_canonical_setup(dom), s2.config, stop_at_h0=True)
        )


def test_budget_exceeded():
    dom = build_disc_domain(8)
    with pytest.raises(BudgetExceeded) as exc:
        # Four alternating arms to the boundary of an 8-disc are rare enough
        # that a budget of 2 is always exhausted.
        sample_conditioned(dom, "A_k", {"k": 4, "r": 1.0, "R": 8.0}, budget=2, seed=1)
    assert exc.value.attempts == 2


def test_rejection_exactness_tiny_domain():
    """Empirical conditional law versus exact enumeration, chi-square."""
    dom = build_disc_domain(2)  # 7 sites
    n_sites = dom.n_sites
    event = {"k": 1, "r": 1.0, "R": 2.0}

    def pred(colors):
        cfg = Configuration(domain=dom, colors=colors, seed=(0,))
        return arms.detect_arms(cfg, 1.0, 2.0, ("B",))

    good = []
    for bits in itertools.product((0, 1), repeat=n_sites):
        colors = np.array(bits, dtype=np.uint8)
        if pred(colors):
            good.append(tuple(bits))
    assert good
    index = {g: k for k, g in enumerate(good)}

    n_draw = 20000
    counts = np.zeros(len(good))
    for t in range(n_draw):
        s = sample_conditioned(dom, "A_k", event, seed=(99, t))
        counts[index[tuple(s.config.colors.tolist())]] += 1
    expected = n_draw / len(good)
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    p = sps.chi2.sf(chi2, df=len(good) - 1)
    assert p > 1e-6


def test_p_star_reproducible_and_independent_stages():
    s1 = sample_p_star(16, seed=123)
    s2 = sample_p_star(16, seed=123)
    assert np.array_equal(s1.config.colors, s2.config.colors)
    assert np.array_equal(s1.faces.blue_arc, s2.faces.blue_arc)
    assert s1.faces_attempts == s2.faces_attempts
    assert s1.interior_attempts == s2.interior_attempts
    # Outside-circuit sites flagged uncolored.
    outside = s1.domain.site_mask() & ~s1.colored_mask
    assert outside.any()
    # Faces satisfy the cone constraints on re-check.
    f = arms.detect_good_faces(
        Configuration(domain=s1.domain, colors=s1.config.colors, seed=(0,)),
        16.0,
    )
    # Interior resampling cannot break the faces themselves.
    assert f is not None or True  # the interfaces inside may change; the
    # contract is the stored faces satisfy A_theta:
    assert arms.detect_arms_to_faces(s1.config, s1.faces, 1.0)


def test_p_star_exploration_reaches_origin():
    for seed in (1, 2):
        ps = sample_p_star(16, seed=seed)
        path = trace_faces_exploration(ps)
        assert path.hit_h0_index >= 0


def test_iic_schedule_validation():
    with pytest.raises(ValueError):
        iic_approx_sample(1, 8.0, [64, 32], seed=1)
    with pytest.raises(ValueError):
        iic_approx_sample(1, 30.0, [32, 64], seed=1)


def test_iic_samples_satisfy_event():
    out = iic_approx_sample(1, 4.0, [16, 24], seed=7)
    for s, R in zip(out, (16, 24)):
        assert arms.detect_arms(s.config, 1.0, float(R), ("B",))


def test_decorrelation_same_law_near_zero():
    rep = decorrelation_experiment(
        1, 4.0, 8.0, 16.0, "crossings", n=150, seed=3, r_base=4.0
    )
    assert 0.0 <= rep.tv_estimate <= 1.0
    assert rep.tv_estimate <= 3.0 * rep.ci_halfwidth + 0.05


def test_decorrelation_range_and_report():
    rep = decorrelation_experiment(1, 2.0, 4.0, 16.0, "crossings", n=120, seed=4)
    assert 0.0 <= rep.tv_estimate <= 1.0
    assert rep.n_samples == 120
    assert rep.functional == "crossings"
