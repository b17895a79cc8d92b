"""Exact rejection sampling of conditioned percolation measures.

Conditioning is always by acceptance-rejection against the exact event
predicate, never by MCMC, so accepted samples carry the exact conditional
law.  Every attempt consumes its own Philox stream derived from
(master seed, stage tag, attempt index), which keeps two-stage samplers
reproducible and independent across stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import arms
from .exploration import detect_event_A, make_setup, trace_exploration
from .lattice import (
    BLUE,
    Configuration,
    DiscreteDomain,
    build_disc_domain,
    sample_configuration,
    select_e_vertices,
)
from .rng import trial_generator


class BudgetExceeded(RuntimeError):
    def __init__(self, event_tag: str, attempts: int):
        super().__init__(
            f"rejection budget exhausted after {attempts} attempts for {event_tag}"
        )
        self.event_tag = event_tag
        self.attempts = attempts


@dataclass(frozen=True, eq=False)
class ConditionedSample:
    config: Configuration
    event_tag: str
    attempts: int
    seed: tuple


def _event_predicate(domain: DiscreteDomain, event: str, params: dict) -> Callable:
    if event == "A":
        setup = _canonical_setup(domain)
        return lambda cfg: detect_event_A(
            trace_exploration(setup, cfg, stop_at_h0=True)
        )
    if event == "A_k":
        k = params["k"]
        sigma = {1: ("B",), 2: ("B", "Y"), 4: ("B", "Y", "B", "Y")}[k]
        r, R = params["r"], params["R"]
        return lambda cfg: arms.detect_arms(cfg, r, R, sigma)
    if event == "R":
        R = params["R"]
        return lambda cfg: arms.detect_good_faces(cfg, R) is not None
    if event == "A_theta":
        faces = params["faces"]
        r = params["r"]
        return lambda cfg: arms.detect_arms_to_faces(cfg, faces, r)
    raise ValueError(f"unknown event {event!r}")


@lru_cache(maxsize=32)
def _canonical_setup(domain: DiscreteDomain):
    a, b = select_e_vertices(domain, 1 + 0j, -1 + 0j)
    return make_setup(domain, a, b)


def _seed_tuple(seed):
    return seed if isinstance(seed, tuple) else (int(seed),)


def sample_conditioned(
    domain: DiscreteDomain,
    event: str,
    params: Optional[dict] = None,
    budget: int = 100_000,
    seed=0,
) -> ConditionedSample:
    """Sample P[. | event] by rejection; exact conditional law.

    ``event`` is one of "A" (exploration visits the origin hexagon),
    "A_k" (k-arm annulus event, params r, R, k), "R" (good faces on
    A(R, 2R), params R), "A_theta" (faces-attached arms, params faces, r).
    """
    pred = _event_predicate(domain, event, params or {})
    key = _seed_tuple(seed)
    for attempt in range(budget):
        skey = key + ("config", attempt)
        cfg = sample_configuration(domain, skey)
        if pred(cfg):
            return ConditionedSample(
                config=cfg, event_tag=event, attempts=attempt + 1, seed=skey
            )
    raise BudgetExceeded(event, budget)


@dataclass(frozen=True, eq=False)
class PStarSample:
    """Good faces plus an interior configuration, the two-sided law P*_R.

    Only sites strictly inside the faces circuit carry resampled colors;
    the circuit keeps the colors of the faces and everything outside the
    circuit is left unsampled (flagged by ``colored_mask``).
    """

    domain: DiscreteDomain
    faces: arms.Faces
    config: Configuration
    colored_mask: np.ndarray
    faces_attempts: int
    interior_attempts: int
    seed: int


def sample_p_star(R_lat: int, seed: int, budget: int = 100_000) -> PStarSample:
    """Two-stage sampler: faces from P[.|R], then interior from P[.|A_Theta].

    The two stages use independent streams; rerunning with the same seed
    reproduces both stages bit for bit.
    """
    if R_lat < 16:
        raise ValueError("R_lat must be >= 16")
    domain = build_disc_domain(2 * R_lat)
    faces = None
    f_attempts = 0
    for attempt in range(budget):
        cfg = sample_configuration(domain, (seed, "faces", attempt))
        faces = arms.detect_good_faces(cfg, float(R_lat))
        if faces is not None:
            f_attempts = attempt + 1
            base = cfg
            break
    if faces is None:
        raise BudgetExceeded("R", budget)

    interior = faces.interior_mask
    idx = domain.index_grid[interior]
    for attempt in range(budget):
        rng = trial_generator(seed, "interior", attempt)
        colors = base.colors.copy()
        colors[idx] = rng.integers(0, 2, size=len(idx), dtype=np.uint8)
        cfg = Configuration(domain=domain, colors=colors, seed=(seed, "interior", attempt))
        if arms.detect_arms_to_faces(cfg, faces, 1.0):
            circuit = arms._arc_mask(domain, faces.circuit_sites())
            return PStarSample(
                domain=domain,
                faces=faces,
                config=cfg,
                colored_mask=interior | circuit,
                faces_attempts=f_attempts,
                interior_attempts=attempt + 1,
                seed=seed,
            )
    raise BudgetExceeded("A_theta", budget)


def trace_faces_exploration(sample: PStarSample, stop_at_h0: bool = True):
    """Exploration path joining the faces endpoints, blue arc on its right.

    Walks the interface seeded at whichever faces endpoint orients the blue
    arc to the right, inside the faces interior; used for the winding of
    the two-sided path under P*_R.
    """
    from . import hexgeom as hx
    from . import _kernels as K
    from .exploration import ExplorationPath, TraceError
    from .lattice import ABSENT

    domain = sample.domain
    faces = sample.faces
    grid = np.full(domain.index_grid.shape, ABSENT, dtype=np.uint8)
    ba, ya = faces.blue_arc, faces.yellow_arc
    interior = faces.interior_mask
    grid[interior] = sample.config.colors[domain.index_grid[interior]]
    grid[ba[:, 1] - domain.j0, ba[:, 0] - domain.i0] = 1
    grid[ya[:, 1] - domain.j0, ya[:, 0] - domain.i0] = 0

    circuit = {tuple(t) for t in faces.circuit_sites().tolist()}

    def start_state(x):
        # Virtual incoming edge at endpoint x: the unique edge between two
        # circuit hexagons there (the strand's innermost edge); blue paint
        # must be on the right walking inward.
        cls = hx.vclass(*x)
        for k3 in range(3):
            f1, f2 = hx.EDGE_FLANKS[cls][k3]
            cols, sites, cents = [], [], []
            for f in (f1, f2):
                ox, oy = hx.HEXAGON_OFFSETS[cls][f]
                cx, cy = x[0] + ox, x[1] + oy
                sij = hx.site_of_center(cx, cy)
                sites.append(sij)
                cents.append((cx, cy))
                cols.append(
                    int(grid[sij[1] - domain.j0, sij[0] - domain.i0])
                )
            if all(s in circuit for s in sites) and sorted(cols) == [0, 1]:
                blue_c = cents[cols.index(1)]
                nx_, ny_ = hx.NEIGHBOR_OFFSETS[cls][k3]
                w = (x[0] + nx_, x[1] + ny_)
                dx, dy = x[0] - w[0], x[1] - w[1]
                cr = dx * (blue_c[1] - w[1]) - dy * (blue_c[0] - w[0])
                if cr < 0:
                    return w
        return None

    for x, other in ((faces.x1, faces.x2), (faces.x2, faces.x1)):
        w = start_state(x)
        if w is not None:
            verts, cw, hit, status = K.explore(
                grid,
                domain.i0,
                domain.j0,
                w,
                x,
                other,
                stop_at_h0,
                -1.0,
                6 * domain.n_sites + 64,
            )
            if status == K.STEP_LIMIT:
                raise TraceError("faces exploration exceeded step budget")
            return ExplorationPath(
                domain=domain,
                a=tuple(x),
                b=tuple(other),
                verts=verts,
                cum_winding=cw,
                hit_h0_index=int(hit),
                status=int(status),
            )
    raise TraceError("no oriented start found at the faces endpoints")


def iic_approx_sample(
    k: int,
    r_obs: float,
    R_schedule,
    seed: int,
    budget: int = 200_000,
    n_per_R: int = 1,
):
    """Samples of P[. | A_k(1, R)] for each R in an increasing schedule.

    Downstream code compares window statistics inside Disc_{r_obs} across
    the schedule to exhibit stabilization toward the k-arm IIC limit.
    """
    R_schedule = list(R_schedule)
    if any(
        R2 <= R1 for R1, R2 in zip(R_schedule, R_schedule[1:])
    ):
        raise ValueError("R_schedule must be increasing")
    if r_obs * 4 > min(R_schedule):
        raise ValueError("r_obs must be well inside the smallest R")
    out = []
    for R in R_schedule:
        domain = build_disc_domain(int(R))
        batch = []
        for t in range(n_per_R):
            batch.append(
                sample_conditioned(
                    domain,
                    "A_k",
                    {"k": k, "r": 1.0, "R": float(R)},
                    budget=budget,
                    seed=(seed, int(R), t),
                )
            )
        out.append(batch if n_per_R > 1 else batch[0])
    return out


@dataclass(frozen=True)
class DecorrelationReport:
    k: int
    r: float
    r_prime: float
    R: float
    functional: str
    tv_estimate: float
    ci_halfwidth: float
    n_samples: int
    seed: int


def _functional_value(cfg: Configuration, functional: str, r_prime: float, R: float):
    if functional == "crossings":
        n = arms.count_interface_crossings(cfg, r_prime, 2.0 * r_prime)
        return min(n, 6)
    if functional == "arm_indicator":
        k = 2
        return int(arms.detect_arms(cfg, r_prime, R / 2.0, ("B", "Y")))
    if functional == "winding_bucket":
        setup = _canonical_setup(cfg.domain)
        path = trace_exploration(setup, cfg, stop_radius=r_prime)
        theta = float(path.cum_winding[-1])
        b = int(math.floor(theta / (math.pi / 2.0)))
        return max(-8, min(8, b))
    raise ValueError(f"unknown functional {functional!r}")


def decorrelation_experiment(
    k: int,
    r: float,
    r_prime: float,
    R: float,
    functional: str,
    n: int,
    seed: int,
    budget: int = 200_000,
    n_boot: int = 200,
    r_base: float = 1.0,
) -> DecorrelationReport:
    """Total-variation distance between coarse pushforwards of the laws
    P[.|A_k(r_base,R)] and P[.|A_k(r,R)], for a functional measurable
    outside Disc_{r_prime}; binned-histogram L1/2 with a bootstrap CI."""
    if not (1.0 <= r_base <= r <= r_prime <= R):
        raise ValueError("need 1 <= r_base <= r <= r' <= R")
    domain = build_disc_domain(int(R))
    vals = ([], [])
    for side, r_in in ((0, float(r_base)), (1, float(r))):
        for t in range(n):
            s = sample_conditioned(
                domain,
                "A_k",
                {"k": k, "r": r_in, "R": float(R)},
                budget=budget,
                seed=(seed, side, t),
            )
            vals[side].append(_functional_value(s.config, functional, r_prime, R))
    a = np.asarray(vals[0])
    b = np.asarray(vals[1])
    lo = int(min(a.min(), b.min()))
    hi = int(max(a.max(), b.max()))
    bins = np.arange(lo, hi + 2)

    def tv(x, y):
        hx_, _ = np.histogram(x, bins=bins)
        hy_, _ = np.histogram(y, bins=bins)
        return 0.5 * np.abs(hx_ / len(x) - hy_ / len(y)).sum()

    t_hat = tv(a, b)
    rng = trial_generator(seed, "trial", 999_999)
    boots = []
    for _ in range(n_boot):
        ra = a[rng.integers(0, len(a), len(a))]
        rb = b[rng.integers(0, len(b), len(b))]
        boots.append(tv(ra, rb))
    ci = 1.96 * float(np.std(boots))
    return DecorrelationReport(
        k=k,
        r=float(r),
        r_prime=float(r_prime),
        R=float(R),
        functional=functional,
        tv_estimate=float(t_hat),
        ci_halfwidth=ci,
        n_samples=n,
        seed=seed,
    )
