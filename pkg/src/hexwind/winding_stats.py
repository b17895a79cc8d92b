"""Winding-number experiments: variance growth, CLT checks, two-arm
transfer, annulus decomposition, and crossing-count tails."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import stats as sps

from . import arms
from .exploration import hit_times, trace_exploration
from .conditioning import _canonical_setup
from .lattice import build_disc_domain, sample_configuration
from .parallel import map_trials, run_until_accepted


@dataclass(frozen=True, eq=False)
class WindingSampleSet:
    R_lat: int
    event_tag: str
    samples: np.ndarray
    seed: int
    n_trials_used: int
    extra: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        return len(self.samples) / max(self.n_trials_used, 1)


def jackknife_var_stderr(x: np.ndarray) -> float:
    """Jackknife standard error of the sample variance (ddof=1)."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 3:
        return float("inf")
    s1 = x.sum()
    s2 = (x * x).sum()
    mean_i = (s1 - x) / (n - 1)
    var_i = (s2 - x * x - (n - 1) * mean_i * mean_i) / (n - 2)
    vbar = var_i.mean()
    return math.sqrt((n - 1) / n * ((var_i - vbar) ** 2).sum())


@dataclass(frozen=True)
class VarianceRow:
    R_lat: int
    event_tag: str
    n: int
    mean: float
    var: float
    var_stderr: float
    ks_stat: float
    acceptance_rate: float


def _winding_trial_A(R_lat: int, seed: int, trial: int):
    domain = build_disc_domain(R_lat)
    setup = _canonical_setup(domain)
    cfg = sample_configuration(domain, (seed, trial))
    path = trace_exploration(setup, cfg, stop_at_h0=True)
    if path.hit_h0_index < 0:
        return False, None
    return True, float(path.cum_winding[path.hit_h0_index])


def estimate_winding_variance(
    R_lat_list,
    n_samples: int,
    event_tag: str = "A",
    seed: int = 0,
    threads: int | None = None,
):
    """Conditioned winding samples and summary rows per lattice radius.

    Event "A" conditions on the exploration visiting the origin hexagon;
    theta is the winding accumulated up to the first such visit.
    """
    if event_tag != "A":
        raise ValueError("estimate_winding_variance handles event 'A'; use "
                         "two_arm_winding for the two-arm measures")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    sets = []
    rows = []
    for R_lat in sorted(int(r) for r in R_lat_list):
        build_disc_domain(R_lat)  # prime the cache before forking
        fn = partial(_winding_trial_A, R_lat, seed)
        samples, used = run_until_accepted(fn, n_samples, seed, threads=threads)
        theta = np.asarray(samples)
        sset = WindingSampleSet(
            R_lat=R_lat,
            event_tag=event_tag,
            samples=theta,
            seed=seed,
            n_trials_used=used,
        )
        sets.append(sset)
        rows.append(summary_row(sset))
    return sets, rows


def summary_row(sset: WindingSampleSet) -> VarianceRow:
    theta = sset.samples
    ks = normality_test(theta)[0] if len(theta) >= 1000 else float("nan")
    return VarianceRow(
        R_lat=sset.R_lat,
        event_tag=sset.event_tag,
        n=len(theta),
        mean=float(theta.mean()),
        var=float(theta.var(ddof=1)),
        var_stderr=jackknife_var_stderr(theta),
        ks_stat=ks,
        acceptance_rate=sset.acceptance_rate,
    )


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    slope_stderr: float
    points: tuple


def fit_log_slope(rows) -> FitResult:
    """Weighted least squares of variance against log(R_lat).

    ``rows`` is an iterable of (R_lat, var, var_stderr); weights 1/stderr^2.
    """
    pts = [(float(r), float(v), float(se)) for r, v, se in rows]
    if len(pts) < 3:
        raise ValueError("need at least 3 scales for a slope")
    if len({p[0] for p in pts}) < 2:
        raise ValueError("degenerate input: all scales equal")
    x = np.log([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    se = np.array([p[2] for p in pts])
    w = 1.0 / np.maximum(se, 1e-30) ** 2
    W = w.sum()
    xb = (w * x).sum() / W
    yb = (w * y).sum() / W
    sxx = (w * (x - xb) ** 2).sum()
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    intercept = yb - slope * xb
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        slope_stderr=float(math.sqrt(1.0 / sxx)),
        points=tuple(pts),
    )


def normality_test(samples) -> tuple[float, float]:
    """KS distance of standardized samples to the standard normal."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) < 1000:
        raise ValueError("need at least 1e3 samples")
    sd = x.std(ddof=1)
    if sd == 0:
        return 0.5, 0.0  # point mass: KS distance to the normal is 1/2
    z = (x - x.mean()) / sd
    res = sps.kstest(z, "norm")
    return float(res.statistic), float(res.pvalue)


# ---------------------------------------------------------------------------
# Two-arm winding (the chosen blue arm under the 2-arm event)


def _polyline_winding(sites: np.ndarray) -> float:
    """Winding along site centers, skipping the origin site if present."""
    keep = ~np.all(sites == 0, axis=1)
    pts = sites[keep].astype(np.float64)
    x = pts[:, 0] + 0.5 * pts[:, 1]
    y = pts[:, 1] * (math.sqrt(3.0) / 2.0)
    cross = x[:-1] * y[1:] - y[:-1] * x[1:]
    dot = x[:-1] * x[1:] + y[:-1] * y[1:]
    return float(np.arctan2(cross, dot).sum())


def _two_arm_trial(R_lat: int, R_cond: float, seed: int, rule: str, trial: int):
    domain = build_disc_domain(int(R_cond))
    cfg = sample_configuration(domain, (seed, trial))
    if not arms.detect_arms(cfg, 1.0, float(R_cond), ("B", "Y")):
        return False, None
    count, strands = arms.crossing_strands(cfg, 1.0, float(R_lat))
    if count == 0:
        # The 2-arm event out to R_cond guarantees arms to R_lat <= R_cond.
        raise AssertionError("no strand to R_lat under the 2-arm event")
    chosen = None
    fallback = False
    if rule == "exploration-first":
        setup = _canonical_setup(domain)
        path = trace_exploration(setup, cfg)
        svsets = [
            {(int(x), int(y)) for x, y in s["verts"]} for s in strands
        ]
        for vx, vy in path.verts:
            key = (int(vx), int(vy))
            for si, sv in enumerate(svsets):
                if key in sv:
                    chosen = strands[si]
                    break
            if chosen is not None:
                break
        if chosen is None:
            fallback = True
    if chosen is None:
        # Deterministic rule: smallest angle of the inner endpoint vertex,
        # measured counterclockwise from the positive real axis.
        def angle(s):
            x, y = s["verts"][0]
            a = math.atan2(y / (2 * math.sqrt(3.0)), 0.5 * x)
            return a % (2 * math.pi)

        chosen = min(strands, key=angle)
    blue = chosen["blue"][::-1]  # outer -> inner
    theta = _polyline_winding(blue)
    return True, (theta, fallback)


def two_arm_winding(
    R_lat: int,
    n_samples: int,
    measure: str = "conditional",
    seed: int = 0,
    rule: str = "exploration-first",
    threads: int | None = None,
) -> WindingSampleSet:
    """Winding of the deterministically chosen blue arm under the 2-arm
    event (measure="conditional") or its IIC approximant conditioned out to
    twice the radius (measure="iic-approx")."""
    if measure == "conditional":
        R_cond = float(R_lat)
    elif measure == "iic-approx":
        R_cond = 2.0 * R_lat
    else:
        raise ValueError("measure must be 'conditional' or 'iic-approx'")
    build_disc_domain(int(R_cond))
    fn = partial(_two_arm_trial, R_lat, R_cond, seed, rule)
    payloads, used = run_until_accepted(fn, n_samples, seed, threads=threads)
    theta = np.asarray([p[0] for p in payloads])
    n_fallback = sum(1 for p in payloads if p[1])
    return WindingSampleSet(
        R_lat=R_lat,
        event_tag=f"A2:{measure}:{rule}",
        samples=theta,
        seed=seed,
        n_trials_used=used,
        extra={"rule_fallbacks": n_fallback},
    )


# ---------------------------------------------------------------------------
# Annulus decomposition and segment moments


def _segment_trial(R_lat: int, seed: int, radii: tuple, pairs: tuple, trial: int):
    domain = build_disc_domain(R_lat)
    setup = _canonical_setup(domain)
    cfg = sample_configuration(domain, (seed, trial))
    path = trace_exploration(setup, cfg, stop_at_h0=True)
    if path.hit_h0_index < 0:
        return False, None
    ht = hit_times(path, radii, pairs)
    cw = path.cum_winding
    out = {"theta": float(cw[path.hit_h0_index])}
    out["tau"] = {r: ht.tau[r] for r in radii}
    out["T"] = dict(ht.last_before)
    out["cw"] = cw
    return True, out


def annulus_decomposition_check(
    R_lat: int,
    epsilon: float,
    n_samples: int,
    seed: int,
    threads: int | None = None,
) -> dict:
    """Compare Var[theta] with the sum of per-annulus second moments over
    the geometric radii eps^j; reports the difference and the bound scale
    [log(1/eps)]^{-1/2} log(1/eta)."""
    if not (10.0 / R_lat < epsilon < 0.5):
        raise ValueError("need 10*eta < epsilon < 1/2")
    J = int(math.floor(math.log(R_lat) / math.log(1.0 / epsilon)))
    radii = tuple(R_lat * epsilon ** j for j in range(J + 2))
    pairs = tuple((radii[j], radii[j + 1]) for j in range(J + 1))
    fn = partial(_segment_trial, R_lat, seed, radii, pairs)
    payloads, used = run_until_accepted(fn, n_samples, seed, threads=threads)
    theta = np.asarray([p["theta"] for p in payloads])
    seg_m2 = []
    for j in range(J + 1):
        R_j, r_j1 = radii[j], radii[j + 1]
        vals = []
        for p in payloads:
            tj = p["T"][(R_j, r_j1)]
            tau = p["tau"][r_j1]
            if tj is None or tau is None:
                vals.append(0.0)
            else:
                vals.append(float(p["cw"][tau] - p["cw"][tj]))
        seg_m2.append(np.mean(np.square(vals)))
    var = float(theta.var(ddof=1))
    total = float(np.sum(seg_m2))
    return {
        "R_lat": R_lat,
        "epsilon": epsilon,
        "n": n_samples,
        "var": var,
        "sum_segment_m2": total,
        "difference": abs(var - total),
        "bound_scale": math.log(R_lat) / math.sqrt(math.log(1.0 / epsilon)),
        "per_annulus_m2": [float(v) for v in seg_m2],
        "per_annulus_norm": [
            float(v) / math.log(1.0 / epsilon) for v in seg_m2
        ],
        "trials_used": used,
    }


def segment_moment_check(
    R_lat: int,
    r: float,
    R: float,
    n_samples: int,
    seed: int,
    threads: int | None = None,
) -> dict:
    """Empirical moments of theta over gamma[T_{R,r}, tau_r] and the
    pre-segment gamma[tau_R, T_{R,r}]."""
    if not (1.0 <= r <= R / 2.0):
        raise ValueError("need eta <= r <= R/2 in lattice units")
    radii = (float(R), float(r))
    pairs = ((float(R), float(r)),)
    fn = partial(_segment_trial, R_lat, seed, radii, pairs)
    payloads, used = run_until_accepted(fn, n_samples, seed, threads=threads)
    main, pre = [], []
    for p in payloads:
        tau_R = p["tau"][float(R)]
        tau_r = p["tau"][float(r)]
        T_Rr = p["T"][(float(R), float(r))]
        if tau_r is None or T_Rr is None or tau_R is None:
            continue
        cw = p["cw"]
        main.append(float(cw[tau_r] - cw[T_Rr]))
        pre.append(float(cw[T_Rr] - cw[tau_R]))
    main = np.asarray(main)
    pre = np.asarray(pre)
    logratio = math.log(R / r)
    return {
        "R_lat": R_lat,
        "r": r,
        "R": R,
        "n": len(main),
        "abs_mean": float(np.abs(main).mean()),
        "m2": float((main**2).mean()),
        "m4": float((main**4).mean()),
        "m2_pre": float((pre**2).mean()),
        "mean": float(main.mean()),
        "m2_over_log": float((main**2).mean() / logratio),
        "m4_over_log4": float((main**4).mean() / logratio**4),
        "trials_used": used,
    }


# ---------------------------------------------------------------------------
# Crossing-count tails (sector rectangles)


def _sector_trial(R_lat: int, r: float, R: float, cap: int, seed: int, trial: int):
    domain = build_disc_domain(R_lat)
    cfg = sample_configuration(domain, (seed, trial))
    n = arms.max_disjoint_sector_crossings(cfg, r, R, cap=cap)
    return True, n


def crossings_tail(
    R_lat: int,
    r: float,
    R: float,
    m_grid,
    n_trials: int,
    seed: int,
    threads: int | None = None,
) -> dict:
    """Empirical P[>= m disjoint blue crossings of the sector rectangle]
    for m in m_grid, with a weighted log-linear fit of the tail."""
    m_grid = sorted(int(m) for m in m_grid)
    cap = max(m_grid)
    build_disc_domain(R_lat)
    fn = partial(_sector_trial, R_lat, r, R, cap, seed)
    results = map_trials(fn, range(n_trials), threads=threads)
    counts = np.asarray([p for _, p in results])
    rows = []
    for m in m_grid:
        k = int((counts >= m).sum())
        p = k / n_trials
        rows.append((m, k, p, arms.wilson_halfwidth(k, n_trials)))
    # Weighted fit of log p against m over rows with hits.
    xs = [m for m, k, p, _ in rows if k > 0]
    ys = [math.log(p) for m, k, p, _ in rows if k > 0]
    ws = [k for m, k, p, _ in rows if k > 0]  # ~1/relative-variance
    slope = stderr = float("nan")
    if len(xs) >= 2:
        x = np.array(xs, dtype=float)
        y = np.array(ys)
        w = np.array(ws, dtype=float)
        W = w.sum()
        xb = (w * x).sum() / W
        sxx = (w * (x - xb) ** 2).sum()
        slope = float((w * (x - xb) * (y - (w * y).sum() / W)).sum() / sxx)
        stderr = float(math.sqrt(1.0 / sxx))
    return {
        "R_lat": R_lat,
        "r": r,
        "R": R,
        "n_trials": n_trials,
        "rows": rows,
        "log_slope": slope,
        "log_slope_stderr": stderr,
        "log_ratio": math.log(R / r),
    }
