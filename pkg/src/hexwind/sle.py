"""Two-sided radial SLE driving SDE and optional Loewner trace solving.

The driving system, in the radial parametrization (g_t'(0) = e^t):

    dTheta_t = 2*cot(Theta_t/2) dt + sqrt(kappa) dW_t,   Theta_0 = alpha,
    -dU_t    =   cot(Theta_t/2) dt + sqrt(kappa) dW_t,

with one Brownian motion shared by both equations, which forces the exact
per-step identity  dU = -dTheta/2 - (sqrt(kappa)/2) dW.  Steps use a Heun
(predictor-corrector) drift so the noiseless flow matches the closed form
cos(Theta_t/2) = cos(alpha/2) e^{-t} to second order; proposals leaving
(0, 2pi) are rejected and retried with a halved step.

The winding estimator at radial time t is U_t - U_0.  The discarded
correction from the endpoint argument is bounded in probability, so second
moments normalized by log(1/eps) are unaffected in the limit; radial time
T stands in for log(1/eps) up to the Koebe factor log 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rng import trial_generator

TWO_PI = 2.0 * math.pi
DEFAULT_C_GUARD = 0.1
_CHUNK = 8192


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SdeTrajectory:
    """Recorded sample path of (Theta_t, U_t, W_t)."""

    kappa: float
    alpha: float
    times: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    w: np.ndarray
    dt_policy: str

    def winding_at(self, t: float) -> float:
        """U_t - U_0, the winding estimator at radial time t."""
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.u[k] - self.u[0])


def _validate(kappa, alpha, T, dt_max):
    if not 0 < kappa < 8:
        raise ValueError("kappa must be in (0, 8)")
    if not 0 < alpha < TWO_PI:
        raise ValueError("alpha must be in (0, 2*pi)")
    if T <= 0 or dt_max <= 0:
        raise ValueError("T and dt_max must be positive")


def integrate_two_sided_radial(
    kappa: float,
    alpha: float,
    T: float,
    dt_max: float,
    seed,
    c_guard: float = DEFAULT_C_GUARD,
    noiseless: bool = False,
) -> SdeTrajectory:
    """Integrate the driving SDE on [0, T], storing every accepted step."""
    _validate(kappa, alpha, T, dt_max)
    key = seed if isinstance(seed, tuple) else (int(seed),)
    draw = max(_CHUNK, int(1.5 * T / dt_max))
    while True:
        # One-shot integration; on normal exhaustion restart from the start
        # of the same stream with a doubled buffer (the prefix is identical,
        # so the result is deterministic in the seed).
        if noiseless:
            normals = np.zeros(draw)
        else:
            normals = trial_generator(*key, "path").standard_normal(draw)
        ts, th, us, ws, consumed, status = K.sde_path_record(
            float(alpha), kappa, dt_max, c_guard, float(T), normals
        )
        if status == "done":
            break
        if status == "step_collapse":
            raise IntegrationError(
                f"step collapsed below 1e-12 near t={ts[-1]:.6f}"
            )
        draw *= 2
    return SdeTrajectory(
        kappa=kappa,
        alpha=alpha,
        times=np.asarray(ts),
        theta=np.asarray(th),
        u=np.asarray(us),
        w=np.asarray(ws),
        dt_policy=f"heun dt=min({dt_max},{c_guard}*min(th,2pi-th)^2) halving",
    )


def winding_estimate(traj: SdeTrajectory, t: float) -> float:
    """Winding estimator U_t - U_0 at radial time t <= horizon."""
    if t > traj.times[-1] + 1e-12:
        raise ValueError("t exceeds the trajectory horizon")
    return traj.winding_at(t)


def sample_windings(
    kappa: float,
    t_stops,
    n_paths: int,
    dt_max: float,
    seed: int,
    alpha: float = math.pi,
    c_guard: float = DEFAULT_C_GUARD,
    path_offset: int = 0,
    collect_theta_w: bool = False,
):
    """U_T - U_0 (and optionally Theta_T, W_T) at each stop, per path.

    Paths are independent streams keyed by (seed, path index); values are
    independent of batching and thread count.
    """
    _validate(kappa, alpha, max(t_stops), dt_max)
    t_stops = np.asarray(sorted(float(t) for t in t_stops))
    out_u = np.empty((n_paths, len(t_stops)))
    out_th = np.empty((n_paths, len(t_stops))) if collect_theta_w else None
    out_w = np.empty((n_paths, len(t_stops))) if collect_theta_w else None
    for p in range(n_paths):
        rng = trial_generator(seed, path_offset + p, "path")
        state = (float(alpha), 0.0, 0.0, 0.0, 0)
        records = []
        while True:
            normals = rng.standard_normal(_CHUNK)
            state, consumed, recs, status = K.sde_path(
                state[0],
                state[1],
                state[2],
                state[3],
                kappa,
                dt_max,
                c_guard,
                t_stops,
                state[4],
                normals,
            )
            records.extend(recs)
            if status == "done":
                break
            if status == "step_collapse":
                raise IntegrationError(f"step collapse on path {p}")
        for k, (tt, th, u, w) in enumerate(records):
            out_u[p, k] = u
            if collect_theta_w:
                out_th[p, k] = th
                out_w[p, k] = w
    if collect_theta_w:
        return t_stops, out_u, out_th, out_w
    return t_stops, out_u


@dataclass(frozen=True)
class MomentRow:
    T: float
    n: int
    mean: float
    second_moment: float
    m2_over_T: float
    stderr_m2_over_T: float


def second_moment_scan(
    kappa: float,
    T_list,
    n_paths: int,
    dt_max: float,
    seed: int,
    u_matrix: np.ndarray | None = None,
) -> list[MomentRow]:
    """Second-moment table for the winding estimator; the m2/T column
    flattens at kappa/4."""
    T_list = sorted(float(t) for t in T_list)
    if u_matrix is None:
        _, u_matrix = sample_windings(kappa, T_list, n_paths, dt_max, seed)
    rows = []
    for k, T in enumerate(T_list):
        th = u_matrix[:, k]
        m2 = float(np.mean(th * th))
        se = float(np.std(th * th, ddof=1) / math.sqrt(len(th)))
        rows.append(
            MomentRow(
                T=T,
                n=len(th),
                mean=float(np.mean(th)),
                second_moment=m2,
                m2_over_T=m2 / T,
                stderr_m2_over_T=se / T,
            )
        )
    return rows


def tail_check(
    kappa: float,
    T: float,
    n_paths: int,
    s_grid,
    dt_max: float,
    seed: int,
):
    """Empirical tail of |theta_hat + (sqrt(kappa)/2) W_T|.

    By the driving identity this quantity equals |Theta_T - Theta_0|/2 < pi
    always, so the tail vanishes identically for s > pi; that exactness is
    the wiring check.  Returns rows (s, tail probability).
    """
    _, u, th, w = sample_windings(
        kappa, [T], n_paths, dt_max, seed, collect_theta_w=True
    )
    val = np.abs(u[:, 0] + 0.5 * math.sqrt(kappa) * w[:, 0])
    return [(float(s), float(np.mean(val > s))) for s in s_grid]


# ---------------------------------------------------------------------------
# Radial Loewner trace by reverse flow


@dataclass(frozen=True)
class TracePoint:
    t: float
    z: complex
    ok: bool


def _reverse_flow_point(times, us, t_idx, delta, substeps_per_dt=1):
    """gamma(t) ~ image of a point near the driving position under the
    time-reversed radial Loewner flow from time t down to 0."""
    # dz/ds = -z (e^{iU(t-s)} + z) / (e^{iU(t-s)} - z), z(0) = (1-delta) e^{iU(t)}
    z = (1.0 - delta) * np.exp(1j * us[t_idx])
    for k in range(t_idx, 0, -1):
        dt = times[k] - times[k - 1]
        u_here = us[k]

        def field(zz, u_val):
            e = np.exp(1j * u_val)
            d = e - zz
            if abs(d) < 1e-14:
                raise ZeroDivisionError
            return -zz * (e + zz) / d

        try:
            # RK2 midpoint with the driving value frozen on the substep.
            k1 = field(z, u_here)
            zm = z + 0.5 * dt * k1
            u_mid = 0.5 * (us[k] + us[k - 1])
            k2 = field(zm, u_mid)
            z = z + dt * k2
        except ZeroDivisionError:
            return None
        if abs(z) > 1.0:
            z = z / abs(z) * (1.0 - 1e-12)
    return z


def solve_loewner_trace(traj: SdeTrajectory, n_trace_points: int) -> list[TracePoint]:
    """Trace points by backward integration of the reverse radial flow.

    Cost grows quadratically with the horizon; intended for modest T.
    Failures near the driving singularity are flagged per point.
    """
    times = traj.times
    us = traj.u
    T = float(times[-1])
    out = []
    targets = np.linspace(0.0, T, n_trace_points)
    idxs = np.searchsorted(times, targets, side="right") - 1
    delta = max(1e-6, 2.0 * math.sqrt(max(np.diff(times).max(), 1e-12)))
    for t_target, t_idx in zip(targets, idxs):
        z = _reverse_flow_point(times, us, int(t_idx), delta)
        bad = z is None or not (
            math.isfinite(complex(z).real) and math.isfinite(complex(z).imag)
        )
        if bad:
            out.append(TracePoint(t=float(t_target), z=0j, ok=False))
        else:
            out.append(TracePoint(t=float(t_target), z=complex(z), ok=True))
    return out


def koebe_hitting_checks(trace: list[TracePoint], eps_grid, slack: float = 1.1):
    """Pathwise Koebe sandwich: eps <= e^{-tau_eps} <= 4 eps within slack.

    tau_eps is the first trace time with |gamma(t)| <= eps; returns rows
    (eps, tau_eps, ok) skipping eps values never hit.
    """
    rows = []
    pts = [p for p in trace if p.ok]
    for eps in eps_grid:
        tau = None
        for p in pts:
            if abs(p.z) <= eps:
                tau = p.t
                break
        if tau is None:
            continue
        val = math.exp(-tau)
        ok = (eps <= val * slack) and (val <= 4.0 * eps * slack)
        rows.append((float(eps), float(tau), bool(ok)))
    return rows
