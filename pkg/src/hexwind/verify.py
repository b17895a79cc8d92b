"""Oracle equivalence verification: loop predicates versus direct arm
detection, and the interface-crossing reduction versus exhaustive search.

The exhaustive harness enumerates every coloring of a small disc whose
annulus has at most the requested number of sites and checks, per
configuration, that

* loop_arm_event(k) equals detect_arms for k = 1, 2, 4,
* detect_arms agrees with an independent depth-first crossing oracle,
* the interface-crossing reduction matches the alternating-arm oracle.
"""

from __future__ import annotations

from functools import partial

import numpy as np

from . import arms
from .lattice import BLUE, YELLOW, Configuration, build_disc_domain
from .loops import extract_loop_ensemble, loop_arm_event
from .parallel import map_trials

SIGMAS = {1: ("B",), 2: ("B", "Y"), 4: ("B", "Y", "B", "Y")}


def _dfs_crossing(domain, colors, sys_, color) -> bool:
    """Independent reachability oracle: a same-colored path of annulus
    sites from an inner-contact site to an outer-contact site."""
    grid_idx = domain.index_grid
    ok = np.zeros(grid_idx.shape, dtype=bool)
    m = grid_idx >= 0
    ok[m] = colors[grid_idx[m]] == color
    ok &= sys_.a_mask
    stack = [tuple(p) for p in np.argwhere(ok & sys_.inner_contact)]
    seen = set(stack)
    target = {tuple(p) for p in np.argwhere(ok & sys_.outer_contact)}
    from . import hexgeom as hx

    while stack:
        gj, gi = stack.pop()
        if (gj, gi) in target:
            return True
        for di, dj in hx.AXIAL_NEIGHBORS:
            t = (gj + dj, gi + di)
            if (
                0 <= t[0] < ok.shape[0]
                and 0 <= t[1] < ok.shape[1]
                and ok[t]
                and t not in seen
            ):
                seen.add(t)
                stack.append(t)
    return False


def _check_config(domain, sys_, r, R, colors) -> list:
    """All equivalence checks for one coloring; returns mismatch labels."""
    cfg = Configuration(domain=domain, colors=colors, seed=(0,))
    bad = []
    ens = extract_loop_ensemble(cfg, R)
    direct = {}
    for k, sigma in SIGMAS.items():
        d = arms.detect_arms(cfg, r, R, sigma)
        direct[k] = d
        l = loop_arm_event(ens, r, R, k)
        if d != l:
            bad.append(f"loop-vs-arms k={k}")
    b = _dfs_crossing(domain, colors, sys_, BLUE)
    y = _dfs_crossing(domain, colors, sys_, YELLOW)
    if direct[1] != b:
        bad.append("detect-vs-dfs B")
    if direct[2] != (b and y):
        bad.append("BY-vs-dfs")
    strands = arms.count_interface_crossings(cfg, r, R)
    if strands % 2:
        bad.append("odd strand count")
    alt = arms.max_disjoint_crossings_oracle(cfg, r, R, "alternating")
    if (strands >= 2) != (alt >= 2) or (strands >= 4) != (alt >= 4):
        bad.append(f"strands={strands} vs alternating oracle={alt}")
    if direct[4] != (alt >= 4):
        bad.append("BYBY-vs-oracle")
    return bad


def _exhaustive_block(R_lat, r, R, n_sites, lo_hi):
    lo, hi = lo_hi
    domain = build_disc_domain(R_lat)
    sys_ = arms.annulus_system(domain, r, R)
    mism = 0
    examples = []
    for code in range(lo, hi):
        colors = np.empty(n_sites, dtype=np.uint8)
        for b in range(n_sites):
            colors[b] = (code >> b) & 1
        bad = _check_config(domain, sys_, r, R, colors)
        if bad:
            mism += len(bad)
            if len(examples) < 5:
                examples.append({"code": code, "bad": bad})
    return mism, examples


def exhaustive_equivalence(
    max_sites: int = 20, threads: int | None = None, limit: int | None = None
) -> dict:
    """Enumerate all configurations of a disc whose annulus has at most
    ``max_sites`` sites and verify every equivalence; 0 mismatches expected.

    The canonical instance is the radius-3 disc with annulus A(1, 3):
    18 annulus sites plus the origin, 2^19 configurations.
    """
    R_lat, r, R = 3, 1.0, 3.0
    domain = build_disc_domain(R_lat)
    sys_ = arms.annulus_system(domain, r, R)
    n_annulus = int(sys_.a_mask.sum())
    if n_annulus > max_sites:
        raise ValueError(
            f"canonical annulus has {n_annulus} sites > max_sites={max_sites}"
        )
    n_sites = domain.n_sites
    total = 1 << n_sites
    if limit is not None:
        total = min(total, limit)
    block = 4096
    blocks = [(lo, min(lo + block, total)) for lo in range(0, total, block)]
    fn = partial(_exhaustive_block, R_lat, r, R, n_sites)
    results = map_trials(fn, blocks, threads=threads)
    mism = sum(m for m, _ in results)
    examples = [e for _, ex in results for e in ex][:5]
    return {
        "instance": {"R_lat": R_lat, "r": r, "R": R, "annulus_sites": n_annulus},
        "configurations": total,
        "mismatches": mism,
        "examples": examples,
    }


def _random_block(R_lat, r, R, seed, lo_hi):
    from .lattice import sample_configuration

    lo, hi = lo_hi
    domain = build_disc_domain(R_lat)
    mism = 0
    examples = []
    for t in range(lo, hi):
        cfg = sample_configuration(domain, (seed, t))
        ens = extract_loop_ensemble(cfg, R)
        for k, sigma in SIGMAS.items():
            d = arms.detect_arms(cfg, r, R, sigma)
            l = loop_arm_event(ens, r, R, k)
            if d != l:
                mism += 1
                if len(examples) < 5:
                    examples.append({"trial": t, "k": k})
    return mism, examples


def random_equivalence(
    R_lat: int = 16,
    trials: int = 100_000,
    seed: int = 0,
    r: float = 4.0,
    R: float = 12.0,
    threads: int | None = None,
) -> dict:
    """Loop-vs-arms equivalence on random configurations; 0 expected."""
    build_disc_domain(R_lat)
    block = 2048
    blocks = [(lo, min(lo + block, trials)) for lo in range(0, trials, block)]
    fn = partial(_random_block, R_lat, r, R, seed)
    results = map_trials(fn, blocks, threads=threads)
    mism = sum(m for m, _ in results)
    examples = [e for _, ex in results for e in ex][:5]
    return {
        "instance": {"R_lat": R_lat, "r": r, "R": R},
        "configurations": trials,
        "mismatches": mism,
        "examples": examples,
    }
