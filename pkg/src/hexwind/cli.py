"""Command-line front end: experiment configuration and result emission.

All commands accept --config FILE with flat key=value lines providing flag
defaults (explicit flags win), write their outputs plus a manifest JSON
into --outdir, and exit 0 on success, 2 on usage errors, 3 when a
rejection budget is exhausted, 4 on numeric integration failures.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, arms, conditioning, loops, sle, winding_stats as ws
from .conditioning import BudgetExceeded
from .lattice import BLUE, YELLOW, build_disc_domain, sample_configuration
from .manifest import ExperimentManifest, fmt, write_csv
from .parallel import default_threads, map_trials
from .sle import IntegrationError

EXIT_BUDGET = 3
EXIT_NUMERIC = 4


def _load_config(path):
    out = {}
    if not path:
        return out
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, v = line.partition("=")
        out[k.strip().replace("-", "_")] = v.strip()
    return out


class ConfigGroup(click.Group):
    """Group whose commands read --config key=value files for defaults."""

    def invoke(self, ctx):
        return super().invoke(ctx)


def _apply_config(ctx, params):
    cfg = _load_config(params.pop("config", None))
    for k, v in cfg.items():
        if k in params and ctx.get_parameter_source(k).name == "DEFAULT":
            params[k] = type(params[k])(v) if params[k] is not None else v
    return params


common = [
    click.option("--seed", default=42, show_default=True, help="Master seed."),
    click.option(
        "--threads",
        default=0,
        show_default="all cores (HEXWIND_THREADS)",
        help="Worker processes; 0 = default.",
    ),
    click.option("--outdir", default=".", show_default=True),
    click.option("--config", default=None, help="key=value defaults file."),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


def _finish(ctx, command, params, seed, threads, outdir, outputs):
    man = ExperimentManifest(
        command=command,
        params=params,
        seed=seed,
        threads=threads,
        outputs=tuple(str(o) for o in outputs),
    )
    man.write(Path(outdir) / f"{command}_manifest.json")
    return man


@click.group()
@click.version_option(version=__version__)
def main():
    """Percolation interface and winding-number experiments."""


def _threads(threads):
    return threads if threads > 0 else default_threads()


def _ints(s):
    try:
        return [int(x) for x in str(s).split(",")]
    except ValueError as exc:
        raise click.UsageError(f"expected comma-separated integers, got {s!r}") from exc


def _floats(s):
    try:
        return [float(x) for x in str(s).split(",")]
    except ValueError as exc:
        raise click.UsageError(f"expected comma-separated numbers, got {s!r}") from exc


@main.command("winding-scan")
@click.option("--radii", default="32,64,128,256,512", show_default=True)
@click.option("--samples", default=10000, show_default=True)
@with_common
@click.pass_context
def winding_scan(ctx, radii, samples, seed, threads, outdir, config):
    """Winding variance versus log(1/eta) under the origin-visit event."""
    params = _apply_config(ctx, dict(radii=radii, samples=samples))
    radii_l = _ints(params["radii"])
    samples = int(params["samples"])
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    sets, rows = ws.estimate_winding_variance(
        radii_l, samples, "A", seed, threads=threads
    )
    fit = ws.fit_log_slope([(r.R_lat, r.var, r.var_stderr) for r in rows])
    man = _finish(
        ctx, "winding-scan", params, seed, threads, outdir,
        ["winding_scan.csv", "winding_fit.json"],
    )
    write_csv(
        outdir / "winding_scan.csv",
        man,
        ["R_lat", "event", "n", "mean", "var", "var_stderr", "ks", "seed"],
        [
            (r.R_lat, r.event_tag, r.n, r.mean, r.var, r.var_stderr, r.ks_stat, seed)
            for r in rows
        ],
    )
    with open(outdir / "winding_fit.json", "w") as fh:
        json.dump(
            {
                "manifest": man.content_hash,
                "slope": fit.slope,
                "stderr": fit.slope_stderr,
                "intercept": fit.intercept,
                "points": [list(p) for p in fit.points],
            },
            fh,
            sort_keys=True,
            indent=2,
        )
    click.echo(f"slope = {fit.slope:.4f} +- {fit.slope_stderr:.4f}")


@main.command("two-arm-scan")
@click.option("--r-lat", default=256, show_default=True)
@click.option("--samples", default=10000, show_default=True)
@click.option(
    "--measure",
    type=click.Choice(["conditional", "iic-approx"]),
    default="conditional",
    show_default=True,
)
@click.option(
    "--rule",
    type=click.Choice(["exploration-first", "inner-angle"]),
    default="exploration-first",
    show_default=True,
)
@with_common
@click.pass_context
def two_arm_scan(ctx, r_lat, samples, measure, rule, seed, threads, outdir, config):
    """Winding of the chosen blue arm under the two-arm event."""
    params = _apply_config(
        ctx, dict(r_lat=r_lat, samples=samples, measure=measure, rule=rule)
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    sset = ws.two_arm_winding(
        int(params["r_lat"]),
        int(params["samples"]),
        params["measure"],
        seed,
        rule=params["rule"],
        threads=threads,
    )
    row = ws.summary_row(sset)
    man = _finish(ctx, "two-arm-scan", params, seed, threads, outdir, ["two_arm.csv"])
    write_csv(
        outdir / "two_arm.csv",
        man,
        ["R_lat", "event", "n", "mean", "var", "var_stderr", "ks", "seed"],
        [(row.R_lat, row.event_tag, row.n, row.mean, row.var, row.var_stderr,
          row.ks_stat, seed)],
    )
    click.echo(
        f"var = {row.var:.4f} +- {row.var_stderr:.4f}; "
        f"rule fallbacks = {sset.extra['rule_fallbacks']}"
    )


@main.command("sle-scan")
@click.option("--kappa", default=6.0, show_default=True)
@click.option("--horizons", default="10,20,40", show_default=True)
@click.option("--paths", default=100000, show_default=True)
@click.option("--dt-max", default=1e-3, show_default=True)
@with_common
@click.pass_context
def sle_scan(ctx, kappa, horizons, paths, dt_max, seed, threads, outdir, config):
    """Second-moment table of the driving-function winding estimator."""
    params = _apply_config(
        ctx, dict(kappa=kappa, horizons=horizons, paths=paths, dt_max=dt_max)
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t_list = _floats(params["horizons"])
    kappa = float(params["kappa"])
    n_paths = int(params["paths"])
    dt_max = float(params["dt_max"])

    u = _parallel_windings(kappa, t_list, n_paths, dt_max, seed, threads)
    rows = sle.second_moment_scan(kappa, t_list, n_paths, dt_max, seed, u_matrix=u)
    man = _finish(ctx, "sle-scan", params, seed, threads, outdir, ["sle_scan.csv"])
    write_csv(
        outdir / "sle_scan.csv",
        man,
        ["kappa", "T", "n", "mean", "m2", "m2_over_T", "stderr", "dt_max", "seed"],
        [
            (kappa, r.T, r.n, r.mean, r.second_moment, r.m2_over_T,
             r.stderr_m2_over_T, dt_max, seed)
            for r in rows
        ],
    )
    for r in rows:
        click.echo(f"T={r.T:g}: m2/T = {r.m2_over_T:.4f} +- {r.stderr_m2_over_T:.4f}")


def _sle_block(args):
    kappa, t_list, dt_max, seed, lo, hi = args
    _, u = sle.sample_windings(
        kappa, t_list, hi - lo, dt_max, seed, path_offset=lo
    )
    return u


def _parallel_windings(kappa, t_list, n_paths, dt_max, seed, threads, block=2000):
    blocks = [
        (kappa, tuple(sorted(t_list)), dt_max, seed, lo, min(lo + block, n_paths))
        for lo in range(0, n_paths, block)
    ]
    parts = map_trials(_sle_block, blocks, threads=threads)
    return np.concatenate(parts, axis=0)


@main.command("sle-tails")
@click.option("--kappa", default=6.0, show_default=True)
@click.option("--horizon", default=20.0, show_default=True)
@click.option("--paths", default=20000, show_default=True)
@click.option("--dt-max", default=1e-3, show_default=True)
@click.option("--s-grid", default="0,0.5,1,1.5,2,2.5,3,3.5", show_default=True)
@with_common
@click.pass_context
def sle_tails(ctx, kappa, horizon, paths, dt_max, s_grid, seed, threads, outdir, config):
    """Tail of |winding estimator + (sqrt(kappa)/2) W_T|."""
    params = _apply_config(
        ctx,
        dict(kappa=kappa, horizon=horizon, paths=paths, dt_max=dt_max, s_grid=s_grid),
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = _floats(params["s_grid"])
    rows = sle.tail_check(
        float(params["kappa"]),
        float(params["horizon"]),
        int(params["paths"]),
        grid,
        float(params["dt_max"]),
        seed,
    )
    man = _finish(ctx, "sle-tails", params, seed, threads, outdir, ["sle_tails.csv"])
    write_csv(
        outdir / "sle_tails.csv",
        man,
        ["kappa", "T", "s", "tail", "n", "seed"],
        [
            (params["kappa"], params["horizon"], s, p, params["paths"], seed)
            for s, p in rows
        ],
    )
    for s, p in rows:
        click.echo(f"s={s:g}: P = {p:.5f}")


def _arm_prob_trial(args):
    R_lat, events, seed, trial = args
    domain = build_disc_domain(R_lat)
    cfg = sample_configuration(domain, (seed, trial))
    return tuple(arms.detect_arms(cfg, r, R, sigma) for (sigma, r, R) in events)


@main.command("arm-prob")
@click.option("--sigma", default="BY", show_default=True)
@click.option("--r-lat", default=64, show_default=True)
@click.option("--quad", default="4,16,16,64", show_default=True,
              help="r1,r2,r3,r4 for the quasi-multiplicativity ratio.")
@click.option("--trials", default=100000, show_default=True)
@with_common
@click.pass_context
def arm_prob(ctx, sigma, r_lat, quad, trials, seed, threads, outdir, config):
    """Arm-probability rows and the quasi-multiplicativity ratio."""
    params = _apply_config(
        ctx, dict(sigma=sigma, r_lat=r_lat, quad=quad, trials=trials)
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        r1, r2, r3, r4 = _floats(params["quad"])
    except ValueError as exc:
        raise click.UsageError("quad needs exactly four radii") from exc
    R_lat = int(params["r_lat"])
    n = int(params["trials"])
    sig = arms.normalize_sigma(params["sigma"])
    events = [(sig, r1, r4), (sig, r1, r2), (sig, r3, r4)]
    build_disc_domain(R_lat)
    results = map_trials(
        _arm_prob_trial,
        [(R_lat, tuple(events), seed, t) for t in range(n)],
        threads=threads,
    )
    hits = np.sum(np.asarray(results, dtype=np.int64), axis=0)
    rows = []
    for (sg, r, R), k in zip(events, hits):
        rows.append(
            ("".join(sg), r, R, R_lat, n, int(k), k / n,
             arms.wilson_halfwidth(int(k), n), seed)
        )
    man = _finish(ctx, "arm-prob", params, seed, threads, outdir,
                  ["arm_prob.csv", "quasi_mult.json"])
    write_csv(
        outdir / "arm_prob.csv",
        man,
        ["sigma", "r", "R", "R_lat", "n_trials", "n_hits", "p_hat",
         "ci_halfwidth", "seed"],
        rows,
    )
    p14, p12, p34 = hits[0] / n, hits[1] / n, hits[2] / n
    ratio = p14 / (p12 * p34) if p12 * p34 > 0 else float("nan")
    with open(outdir / "quasi_mult.json", "w") as fh:
        json.dump(
            {"manifest": man.content_hash, "quad": [r1, r2, r3, r4],
             "p14": p14, "p12": p12, "p34": p34, "ratio": ratio},
            fh, sort_keys=True, indent=2,
        )
    click.echo(f"quasi-mult ratio = {ratio:.4f}")


@main.command("oracle-verify")
@click.option("--max-sites", default=20, show_default=True)
@click.option("--random-r-lat", default=16, show_default=True)
@click.option("--random-trials", default=100000, show_default=True)
@with_common
@click.pass_context
def oracle_verify(ctx, max_sites, random_r_lat, random_trials, seed, threads,
                  outdir, config):
    """Exhaustive and randomized loop-vs-arm equivalence verification."""
    params = _apply_config(
        ctx,
        dict(max_sites=max_sites, random_r_lat=random_r_lat,
             random_trials=random_trials),
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    from .verify import exhaustive_equivalence, random_equivalence

    rep1 = exhaustive_equivalence(int(params["max_sites"]), threads=threads)
    rep2 = random_equivalence(
        int(params["random_r_lat"]), int(params["random_trials"]), seed,
        threads=threads,
    )
    total = rep1["mismatches"] + rep2["mismatches"]
    man = _finish(ctx, "oracle-verify", params, seed, threads, outdir,
                  ["oracle_verify.json"])
    with open(outdir / "oracle_verify.json", "w") as fh:
        json.dump(
            {"manifest": man.content_hash, "exhaustive": rep1, "random": rep2},
            fh, sort_keys=True, indent=2,
        )
    click.echo(f"{total} mismatches")
    if total:
        raise SystemExit(1)


@main.command("decorrelation")
@click.option("--k", default=1, show_default=True)
@click.option("--r", default=4.0, show_default=True)
@click.option("--rprimes", default="8,16,32", show_default=True)
@click.option("--r-big", default=64.0, show_default=True)
@click.option("--functional", default="crossings", show_default=True,
              type=click.Choice(["crossings", "arm_indicator", "winding_bucket"]))
@click.option("--samples", default=400, show_default=True)
@with_common
@click.pass_context
def decorrelation(ctx, k, r, rprimes, r_big, functional, samples, seed, threads,
                  outdir, config):
    """TV estimates between conditioned laws through coarse functionals."""
    params = _apply_config(
        ctx,
        dict(k=k, r=r, rprimes=rprimes, r_big=r_big, functional=functional,
             samples=samples),
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    try:
        for rp in _floats(params["rprimes"]):
            rep = conditioning.decorrelation_experiment(
                int(params["k"]), float(params["r"]), rp, float(params["r_big"]),
                params["functional"], int(params["samples"]), seed,
            )
            rows.append(
                (rep.k, rep.r, rep.r_prime, rep.R, rep.functional,
                 rep.tv_estimate, rep.ci_halfwidth, rep.n_samples, seed)
            )
            click.echo(f"r'={rp:g}: tv = {rep.tv_estimate:.4f} +- {rep.ci_halfwidth:.4f}")
    except BudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        raise SystemExit(EXIT_BUDGET)
    man = _finish(ctx, "decorrelation", params, seed, threads, outdir,
                  ["decorrelation.csv"])
    write_csv(
        outdir / "decorrelation.csv",
        man,
        ["k", "r", "rprime", "R", "functional", "tv", "ci", "n", "seed"],
        rows,
    )


def _faces_trial(args):
    R_lat, seed, trial = args
    domain = build_disc_domain(2 * R_lat)
    cfg = sample_configuration(domain, (seed, trial))
    f = arms.detect_good_faces(cfg, float(R_lat))
    return (f is not None, f.quality if f is not None else 0.0)


@main.command("faces-rate")
@click.option("--radii", default="16,32,64,128", show_default=True)
@click.option("--trials", default=10000, show_default=True)
@with_common
@click.pass_context
def faces_rate(ctx, radii, trials, seed, threads, outdir, config):
    """Empirical probability of the good-faces event on A(R, 2R)."""
    params = _apply_config(ctx, dict(radii=radii, trials=trials))
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n = int(params["trials"])
    rows = []
    for R_lat in _ints(params["radii"]):
        build_disc_domain(2 * R_lat)
        res = map_trials(
            _faces_trial, [(R_lat, seed, t) for t in range(n)], threads=threads
        )
        hits = sum(1 for ok, _ in res if ok)
        rows.append((R_lat, n, hits, hits / n, arms.wilson_halfwidth(hits, n), seed))
        click.echo(f"R_lat={R_lat}: P(R) = {hits / n:.5f} ({hits}/{n})")
    man = _finish(ctx, "faces-rate", params, seed, threads, outdir, ["faces_rate.csv"])
    write_csv(
        outdir / "faces_rate.csv",
        man,
        ["R_lat", "n_trials", "n_hits", "p_hat", "ci_halfwidth", "seed"],
        rows,
    )


@main.command("decomposition")
@click.option("--r-lat", default=128, show_default=True)
@click.option("--epsilons", default="0.5,0.25,0.125", show_default=True)
@click.option("--samples", default=2000, show_default=True)
@with_common
@click.pass_context
def decomposition(ctx, r_lat, epsilons, samples, seed, threads, outdir, config):
    """Variance versus summed per-annulus second moments."""
    params = _apply_config(ctx, dict(r_lat=r_lat, epsilons=epsilons, samples=samples))
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for eps in _floats(params["epsilons"]):
        rep = ws.annulus_decomposition_check(
            int(params["r_lat"]), eps, int(params["samples"]), seed, threads=threads
        )
        rows.append(
            (rep["R_lat"], rep["epsilon"], rep["n"], rep["var"],
             rep["sum_segment_m2"], rep["difference"], rep["bound_scale"], seed)
        )
        click.echo(
            f"eps={eps:g}: |var - sum| = {rep['difference']:.4f} "
            f"(bound scale {rep['bound_scale']:.3f})"
        )
    man = _finish(ctx, "decomposition", params, seed, threads, outdir,
                  ["decomposition.csv"])
    write_csv(
        outdir / "decomposition.csv",
        man,
        ["R_lat", "epsilon", "n", "var", "sum_segment_m2", "difference",
         "bound_scale", "seed"],
        rows,
    )


@main.command("segment-moments")
@click.option("--r-lat", default=128, show_default=True)
@click.option("--pairs", default="8:64,4:32,2:16", show_default=True,
              help="Colon-separated r:R pairs, comma-separated list.")
@click.option("--samples", default=2000, show_default=True)
@with_common
@click.pass_context
def segment_moments(ctx, r_lat, pairs, samples, seed, threads, outdir, config):
    """Empirical winding moments over annulus path segments."""
    params = _apply_config(ctx, dict(r_lat=r_lat, pairs=pairs, samples=samples))
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for pair in str(params["pairs"]).split(","):
        r_s, R_s = pair.split(":")
        rep = ws.segment_moment_check(
            int(params["r_lat"]), float(r_s), float(R_s), int(params["samples"]),
            seed, threads=threads,
        )
        rows.append(
            (rep["R_lat"], rep["r"], rep["R"], rep["n"], rep["abs_mean"],
             rep["m2"], rep["m4"], rep["m2_pre"], rep["m2_over_log"],
             rep["m4_over_log4"], seed)
        )
        click.echo(
            f"r={r_s} R={R_s}: m2/log = {rep['m2_over_log']:.4f}, "
            f"pre-segment m2 = {rep['m2_pre']:.4f}"
        )
    man = _finish(ctx, "segment-moments", params, seed, threads, outdir,
                  ["segment_moments.csv"])
    write_csv(
        outdir / "segment_moments.csv",
        man,
        ["R_lat", "r", "R", "n", "abs_mean", "m2", "m4", "m2_pre",
         "m2_over_log", "m4_over_log4", "seed"],
        rows,
    )


@main.command("crossings-tail")
@click.option("--r-lat", default=64, show_default=True)
@click.option("--r", default=2.0, show_default=True)
@click.option("--r-out", default=32.0, show_default=True)
@click.option("--m-grid", default="1,2,3,4,5", show_default=True)
@click.option("--trials", default=20000, show_default=True)
@with_common
@click.pass_context
def crossings_tail_cmd(ctx, r_lat, r, r_out, m_grid, trials, seed, threads,
                       outdir, config):
    """Tail of the disjoint blue sector-crossing count."""
    params = _apply_config(
        ctx, dict(r_lat=r_lat, r=r, r_out=r_out, m_grid=m_grid, trials=trials)
    )
    threads = _threads(threads)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rep = ws.crossings_tail(
        int(params["r_lat"]), float(params["r"]), float(params["r_out"]),
        _ints(params["m_grid"]),
        int(params["trials"]), seed, threads=threads,
    )
    man = _finish(ctx, "crossings-tail", params, seed, threads, outdir,
                  ["crossings_tail.csv"])
    write_csv(
        outdir / "crossings_tail.csv",
        man,
        ["R_lat", "r", "R", "m", "n_trials", "n_hits", "p_hat", "ci", "seed"],
        [
            (rep["R_lat"], rep["r"], rep["R"], m, rep["n_trials"], k, p, ci, seed)
            for m, k, p, ci in rep["rows"]
        ],
    )
    click.echo(
        f"log-tail slope = {rep['log_slope']:.4f} +- {rep['log_slope_stderr']:.4f}"
    )


def run():
    try:
        main(standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(2)
    except BudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    except IntegrationError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    run()
