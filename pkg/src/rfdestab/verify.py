"""Trajectory-level verification of decay envelopes and estimate implications.

Given simulated trajectories, these checks compare recorded output norms (or
energy values) against candidate envelopes: a pure decay envelope seeded by
the initial window size, an input-to-output form that adds a running
weighted-gain term, and the energy-level variant driven by a rate-flow
envelope.  All checks are grid-pointwise with explicit slacks and report the
worst offending sample; they are falsifiers over the supplied trajectory set,
not proofs.  Also here: the finite-difference comparison-principle check, the
periodic-shift reduction test, the input-to-disturbance embedding transform,
and an empirical envelope fitter.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .compfn import ComparisonFn, KlFn, fading_sup, kl_from_rate, periodic_wrap
from .history import HistorySegment, sup_norm
from .lyapunov import LyapunovFunctional
from .signals import PiecewiseSignal
from .simulator import (
    IntegrateOpts,
    RfdeSystem,
    Trajectory,
    integrate,
    output_norm,
)

__all__ = [
    "EnvelopeCheck",
    "verify_rgaos_envelope",
    "verify_ios_envelope",
    "verify_v_decay_estimate",
    "check_monotone_decay",
    "ComparisonImplicationReport",
    "check_comparison_implication",
    "PeriodicReductionReport",
    "check_periodic_reduction",
    "iosify_system",
    "fit_kl_envelope",
]


@dataclass
class EnvelopeCheck:
    """Result of an envelope comparison over a trajectory ensemble.

    ``slacks`` holds, per trajectory, the minimum of envelope minus observed
    value over the grid; the check passes exactly when every slack clears
    ``-tolerance``.  ``witness`` identifies the worst (trajectory index, time,
    observed, allowed).
    """

    verdict: str  # "pass" | "fail"
    slacks: list
    tolerance: float
    witness: tuple | None

    def __post_init__(self):
        ok = all(s >= -self.tolerance for s in self.slacks)
        if (self.verdict == "pass") != ok:
            raise ValueError("verdict inconsistent with slacks")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        wit = None
        if self.witness is not None:
            wit = {
                "trajectory": int(self.witness[0]),
                "t": float(self.witness[1]),
                "observed": float(self.witness[2]),
                "allowed": float(self.witness[3]),
            }
        return {
            "verdict": self.verdict,
            "slacks": [float(s) for s in self.slacks],
            "tolerance": self.tolerance,
            "witness": wit,
        }


def _finish_envelope(slacks, witness, tolerance) -> EnvelopeCheck:
    verdict = "pass" if all(s >= -tolerance for s in slacks) else "fail"
    return EnvelopeCheck(verdict=verdict, slacks=slacks, tolerance=tolerance, witness=witness)


def _observed_series(traj: Trajectory, observe: Callable | None) -> np.ndarray:
    if observe is not None:
        return np.asarray([float(observe(traj, k)) for k in range(traj.times.size)])
    return traj.output_norms()


def verify_rgaos_envelope(
    trajs: Sequence[Trajectory],
    sigma: KlFn,
    beta: ComparisonFn,
    observe: Callable | None = None,
    tolerance: float = 1e-9,
) -> EnvelopeCheck:
    """Check observed output norms against the pure decay envelope
    sigma(beta(t0) * initial window norm, elapsed) at every grid time.

    ``observe(traj, k)`` may override what is measured (defaults to the
    recorded output norm).  A trajectory that did not complete fails with its
    truncation point as witness.
    """
    slacks = []
    witness = None
    worst = math.inf
    for i, traj in enumerate(trajs):
        if traj.status != "completed":
            slacks.append(-math.inf)
            witness = (i, traj.t_event or traj.t0, math.inf, 0.0)
            continue
        s0 = float(beta(traj.t0)) * sup_norm(traj.initial)
        vals = _observed_series(traj, observe)
        env = sigma.eval_t_array(s0, traj.times - traj.t0)
        slack_arr = env - vals
        k = int(np.argmin(slack_arr))
        slacks.append(float(slack_arr[k]))
        if slack_arr[k] < worst:
            worst = float(slack_arr[k])
            witness = (i, float(traj.times[k]), float(vals[k]), float(env[k]))
    if all(s >= -tolerance for s in slacks):
        witness = None
    return _finish_envelope(slacks, witness, tolerance)


def _gain_running_sup(traj: Trajectory, gamma: ComparisonFn, delta: ComparisonFn) -> np.ndarray:
    """Running sup of gamma(delta(tau)|u(tau)|) along the grid.

    The input signal is piecewise constant and every switch inside the
    horizon is a grid node, so evaluating at nodes captures the sup exactly
    (for the left-closed pieces the node at the switch carries the incoming
    value through the previous node).
    """
    if traj.u is None:
        return np.zeros(traj.times.size)
    vals = np.empty(traj.times.size)
    for k, t in enumerate(traj.times):
        uv = traj.u.eval(t)
        vals[k] = float(gamma(float(delta(t)) * float(np.linalg.norm(uv))))
    return np.maximum.accumulate(vals)


def verify_ios_envelope(
    trajs: Sequence[Trajectory],
    sigma: KlFn,
    beta: ComparisonFn,
    gamma: ComparisonFn,
    delta: ComparisonFn,
    observe: Callable | None = None,
    tolerance: float = 1e-9,
) -> EnvelopeCheck:
    """Check output norms against max{decay envelope, running weighted gain}."""
    slacks = []
    witness = None
    worst = math.inf
    for i, traj in enumerate(trajs):
        if traj.status != "completed":
            slacks.append(-math.inf)
            witness = (i, traj.t_event or traj.t0, math.inf, 0.0)
            continue
        s0 = float(beta(traj.t0)) * sup_norm(traj.initial)
        vals = _observed_series(traj, observe)
        env = sigma.eval_t_array(s0, traj.times - traj.t0)
        env = np.maximum(env, _gain_running_sup(traj, gamma, delta))
        slack_arr = env - vals
        k = int(np.argmin(slack_arr))
        slacks.append(float(slack_arr[k]))
        if slack_arr[k] < worst:
            worst = float(slack_arr[k])
            witness = (i, float(traj.times[k]), float(vals[k]), float(env[k]))
    if all(s >= -tolerance for s in slacks):
        witness = None
    return _finish_envelope(slacks, witness, tolerance)


def verify_v_decay_estimate(
    sys: RfdeSystem,
    V: LyapunovFunctional,
    a: ComparisonFn,
    beta: ComparisonFn,
    zeta: ComparisonFn | None,
    delta: ComparisonFn | None,
    sigma: KlFn,
    trajs: Sequence[Trajectory],
    tolerance: float = 1e-9,
) -> EnvelopeCheck:
    """Check the energy estimate along solutions.

    V(t, window) must stay below max{sigma(a(beta(t0) * initial norm),
    elapsed), sup over input times tau of sigma(zeta(delta(tau)|u(tau)|),
    t - tau)}.  ``sigma`` must come from ``kl_from_rate`` so the second term
    can reuse the flow's evolution property.
    """
    slacks = []
    witness = None
    worst = math.inf
    for i, traj in enumerate(trajs):
        if traj.status != "completed":
            slacks.append(-math.inf)
            witness = (i, traj.t_event or traj.t0, math.inf, 0.0)
            continue
        s0 = float(a(float(beta(traj.t0)) * sup_norm(traj.initial)))
        env = sigma.eval_t_array(s0, traj.times - traj.t0)
        if traj.u is not None and zeta is not None and delta is not None:
            u_level = np.empty(traj.times.size)
            for k, t in enumerate(traj.times):
                uv = traj.u.eval(t)
                u_level[k] = float(zeta(float(delta(t)) * float(np.linalg.norm(uv))))
            env = np.maximum(env, fading_sup(sigma, u_level, traj.times))
        vals = np.array(
            [float(V.evaluator(t, traj.history(t))) for t in traj.times]
        )
        slack_arr = env - vals
        k = int(np.argmin(slack_arr))
        slacks.append(float(slack_arr[k]))
        if slack_arr[k] < worst:
            worst = float(slack_arr[k])
            witness = (i, float(traj.times[k]), float(vals[k]), float(env[k]))
    if all(s >= -tolerance for s in slacks):
        witness = None
    return _finish_envelope(slacks, witness, tolerance)


def _trailing_window_max(ts: np.ndarray, vals: np.ndarray, width: float) -> np.ndarray:
    """Running max of ``vals`` over the trailing time window ``[t - width, t]``."""
    out = np.empty(vals.size)
    dq: deque = deque()
    for k in range(vals.size):
        while dq and vals[dq[-1]] <= vals[k]:
            dq.pop()
        dq.append(k)
        while ts[dq[0]] < ts[k] - width - 1e-12:
            dq.popleft()
        out[k] = vals[dq[0]]
    return out


def check_monotone_decay(
    trajs: Sequence[Trajectory],
    values_fn: Callable,
    rel_slack: float = 1e-6,
    window_delay: float | None = None,
) -> EnvelopeCheck:
    """Check that a scalar reading never increases along each trajectory.

    ``values_fn(times, states)`` maps the node times and the state rows to a
    scalar series.  With ``window_delay`` set, each node's reading is replaced
    by the maximum of the series over the trailing window of that width (the
    initial segment's nodes are included so early windows are complete) before
    the monotonicity test.  A step from w0 to w1 violates when
    ``w1 > w0 + rel_slack * (1 + |w0|)``; per-trajectory slacks record the
    worst margin and the report's witness is the worst offending node.
    """
    slacks = []
    witness = None
    worst = math.inf
    for i, traj in enumerate(trajs):
        if traj.status != "completed":
            slacks.append(-math.inf)
            witness = (i, traj.t_event or traj.t0, math.inf, 0.0)
            continue
        if window_delay is not None:
            pre_t = traj.t0 + traj.initial.grid[:-1]
            ts = np.concatenate([pre_t, traj.times])
            states = np.vstack([traj.initial.values[:-1], traj.states])
            series = _trailing_window_max(
                ts, np.asarray(values_fn(ts, states), dtype=float), window_delay
            )[pre_t.size:]
        else:
            series = np.asarray(values_fn(traj.times, traj.states), dtype=float)
        if series.size < 2:
            slacks.append(math.inf)
            continue
        allowance = rel_slack * (1.0 + np.abs(series[:-1]))
        slack_arr = series[:-1] + allowance - series[1:]
        k = int(np.argmin(slack_arr))
        slacks.append(float(slack_arr[k]))
        if slack_arr[k] < worst:
            worst = float(slack_arr[k])
            witness = (
                i,
                float(traj.times[k + 1]),
                float(series[k + 1]),
                float(series[k] + allowance[k]),
            )
    if all(s >= 0.0 for s in slacks):
        witness = None
    return _finish_envelope(slacks, witness, 0.0)


# -- scalar comparison principle -------------------------------------------------

@dataclass
class ComparisonImplicationReport:
    verdict: str  # "pass" | "hypothesis fails" | "conclusion fails"
    hypothesis_ok: bool
    hypothesis_witness: tuple | None   # (t, y, dy, required)
    conclusion_ok: bool | None
    conclusion_worst_slack: float | None

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "hypothesis_ok": self.hypothesis_ok,
            "hypothesis_witness": None
            if self.hypothesis_witness is None
            else [float(v) for v in self.hypothesis_witness],
            "conclusion_ok": self.conclusion_ok,
            "conclusion_worst_slack": self.conclusion_worst_slack,
        }


def check_comparison_implication(
    times: np.ndarray,
    y: np.ndarray,
    u: np.ndarray,
    rho: ComparisonFn,
    exceptions: Sequence[float] = (),
    tolerance: float = 1e-6,
) -> ComparisonImplicationReport:
    """Finite-difference check of the scalar comparison principle.

    Hypothesis: at every grid time where y(t) >= u(t) (inclusive), the
    numerical slope of y must be <= -rho(y(t)) + tolerance.  Times listed in
    ``exceptions`` (a declared measure-zero set) are skipped.  When the
    hypothesis holds, the induced bound
    y(t) <= max{sigma(y(t0), t - t0), sup_s sigma(u(s), t - s)} with sigma the
    rate flow of rho is then verified on the same grid.
    """
    times = np.asarray(times, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if times.ndim != 1 or times.size < 3:
        raise ValueError("need at least three grid times")
    if y.shape != times.shape or u.shape != times.shape:
        raise ValueError("series shapes must match the time grid")
    dt = np.diff(times)
    if dt.max() > 1e-3 + 1e-12:
        raise ValueError("grid too coarse for finite-difference slopes (need <= 1e-3)")
    dy = np.gradient(y, times, edge_order=2)
    exc = np.asarray(sorted(exceptions), dtype=float)
    half = 0.5 * float(dt.min())

    hyp_ok = True
    hyp_wit = None
    for k, t in enumerate(times):
        if exc.size:
            j = int(np.searchsorted(exc, t))
            near = []
            if j < exc.size:
                near.append(abs(exc[j] - t))
            if j > 0:
                near.append(abs(t - exc[j - 1]))
            if near and min(near) <= half:
                continue
        if y[k] >= u[k]:
            required = -float(rho(y[k]))
            if dy[k] > required + tolerance * (1.0 + abs(dy[k])):
                hyp_ok = False
                hyp_wit = (float(t), float(y[k]), float(dy[k]), required)
                break
    if not hyp_ok:
        return ComparisonImplicationReport(
            verdict="hypothesis fails",
            hypothesis_ok=False,
            hypothesis_witness=hyp_wit,
            conclusion_ok=None,
            conclusion_worst_slack=None,
        )

    sigma = kl_from_rate(rho)
    env = np.maximum(
        sigma.eval_t_array(float(y[0]), times - times[0]),
        fading_sup(sigma, u, times),
    )
    slack = env - y
    worst = float(slack.min())
    ok = worst >= -tolerance * (1.0 + float(np.abs(y).max()))
    return ComparisonImplicationReport(
        verdict="pass" if ok else "conclusion fails",
        hypothesis_ok=True,
        hypothesis_witness=None,
        conclusion_ok=ok,
        conclusion_worst_slack=worst,
    )


# -- periodic reduction ------------------------------------------------------------

@dataclass
class PeriodicReductionReport:
    passed: bool
    worst_error: float
    worst_time: float
    periods_shifted: int

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_error": self.worst_error,
            "worst_time": self.worst_time,
            "periods_shifted": self.periods_shifted,
        }


def check_periodic_reduction(
    sys: RfdeSystem,
    t0: float,
    x0: HistorySegment,
    d: PiecewiseSignal | None,
    u: PiecewiseSignal | None,
    horizon: float,
    opts: IntegrateOpts | None = None,
    tolerance: float = 1e-8,
) -> PeriodicReductionReport:
    """Compare a run from t0 with the run restarted a whole number of periods
    earlier under forward-shifted signals; for a genuinely periodic system
    the node states must agree to integrator tolerance 1e-8 * (1 + |x|)."""
    if sys.period_T is None:
        raise ValueError("system declares no period")
    k, _ = periodic_wrap(t0, sys.period_T)
    shift = k * sys.period_T
    opts = opts or IntegrateOpts(record_output=False)
    traj_a = integrate(sys, t0, x0, u, d, t0 + horizon, opts)
    traj_b = integrate(
        sys,
        t0 - shift,
        x0,
        None if u is None else u.shifted(shift),
        None if d is None else d.shifted(shift),
        t0 - shift + horizon,
        opts,
    )
    n_nodes = min(traj_a.times.size, traj_b.times.size)
    worst = 0.0
    worst_t = t0
    passed = traj_a.status == traj_b.status
    for idx in range(n_nodes):
        err = float(np.linalg.norm(traj_a.states[idx] - traj_b.states[idx]))
        scale = 1.0 + float(np.linalg.norm(traj_a.states[idx]))
        if err / scale > worst:
            worst = err / scale
            worst_t = float(traj_a.times[idx])
        if err > tolerance * scale:
            passed = False
    return PeriodicReductionReport(
        passed=passed, worst_error=worst, worst_time=worst_t, periods_shifted=k
    )


# -- input-to-disturbance embedding -------------------------------------------------

def iosify_system(
    sys: RfdeSystem,
    theta: ComparisonFn,
    mode: str,
    phi_weight: ComparisonFn | None = None,
) -> RfdeSystem:
    """Close the input loop with a synthetic bounded disturbance.

    The returned system has no input channel; its disturbance vector is the
    original one prefixed with a unit-ball block dprime of the input's
    dimension, and the input applied internally is
    theta(window sup norm) / phi_weight(t) * dprime  (state_scaled) or
    theta(|output|) * dprime  (output_scaled).  Since theta vanishes at zero,
    the zero solution is preserved.  dprime samples are drawn from the unit
    box and radially clamped onto the unit ball.
    """
    if sys.u_box is None:
        raise ValueError("system declares no input channel to embed")
    if mode not in ("state_scaled", "output_scaled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "state_scaled" and phi_weight is None:
        raise ValueError("state_scaled mode requires phi_weight")
    m = sys.input_dim
    base_dyn = sys.dynamics
    base_out = sys.output

    def synth_input(t: float, seg: HistorySegment, dprime: np.ndarray) -> np.ndarray:
        nd = float(np.linalg.norm(dprime))
        if nd > 1.0:
            dprime = dprime / nd
        if mode == "state_scaled":
            gain = float(theta(sup_norm(seg))) / float(phi_weight(t))
        else:
            gain = float(theta(output_norm(base_out(t, seg))))
        return gain * dprime

    def dynamics(t, seg, u, dd):
        dd = np.asarray(dd, dtype=float)
        u_syn = synth_input(t, seg, dd[:m])
        return base_dyn(t, seg, u_syn, dd[m:])

    unit = np.column_stack([-np.ones(m), np.ones(m)])
    new_dbox = np.vstack([unit, sys.d_box]) if sys.d_box.size else unit
    return RfdeSystem(
        delay_r=sys.delay_r,
        dim_n=sys.dim_n,
        dynamics=dynamics,
        output=base_out,
        d_box=new_dbox,
        u_box=None,
        period_T=sys.period_T,
        finite_dim_output_h=sys.finite_dim_output_h,
        output_sandwich=sys.output_sandwich,
        name=sys.name + "+embedded-input",
        params=dict(sys.params, embedding_mode=mode),
    )


# -- empirical envelope fitting ------------------------------------------------------

def fit_kl_envelope(
    trajs: Sequence[Trajectory],
    beta: ComparisonFn,
    bins: int = 8,
    inflate: float = 1.05,
    observe: Callable | None = None,
) -> KlFn:
    """Fit a tabulated two-argument decay envelope from an ensemble.

    Trajectories are labeled s = beta(t0) * initial window norm and grouped
    into quantile bins by s; per bin the nonincreasing majorant (suffix max)
    of the observed output norm over elapsed time is tabulated on the union
    of member grids; bins are then swept so the table is nondecreasing in s,
    and the whole table is inflated by 5%.  Queries step up to the nearest
    bin edge in s (with a linear pinch to zero below the lowest edge, so the
    value vanishes at s = 0) and interpolate linearly in elapsed time,
    clamping beyond the data.
    """
    trajs = [tr for tr in trajs if tr.status == "completed"]
    if not trajs:
        raise ValueError("empty ensemble")
    labels = np.array([float(beta(tr.t0)) * sup_norm(tr.initial) for tr in trajs])
    order = np.argsort(labels)
    bins = max(1, min(bins, len(trajs)))
    groups = np.array_split(order, bins)
    groups = [g for g in groups if g.size]
    edges = []
    tables = []
    for g in groups:
        edges.append(float(labels[g].max()))
        grid = np.unique(np.concatenate([trajs[i].times - trajs[i].t0 for i in g]))
        acc = np.zeros(grid.size)
        for i in g:
            tr = trajs[i]
            vals = _observed_series(tr, observe)
            suffix = np.maximum.accumulate(vals[::-1])[::-1]
            elapsed = tr.times - tr.t0
            interp = np.interp(grid, elapsed, suffix, left=suffix[0], right=suffix[-1])
            # exact at the member's own grid points; linear between
            acc = np.maximum(acc, interp)
        tables.append((grid, acc))
    # enforce: nondecreasing in s across bins (cumulative max on a merged grid)
    merged = np.unique(np.concatenate([g for g, _ in tables]))
    rows = []
    running = np.zeros(merged.size)
    for grid, acc in tables:
        row = np.interp(merged, grid, acc, left=acc[0], right=acc[-1])
        running = np.maximum(running, row)
        rows.append(running.copy())
    rows = [r * inflate for r in rows]
    edges_arr = np.asarray(edges)
    table = np.vstack(rows)
    t_grid = merged

    def evaluate(s: float, t: float) -> float:
        s = float(s)
        t = float(t)
        if s <= 0.0:
            return 0.0
        j = int(np.searchsorted(edges_arr, s, side="left"))
        scale = 1.0
        if j >= edges_arr.size:
            j = edges_arr.size - 1
            scale = s / edges_arr[-1]  # extrapolate radially above the data
        row = table[j]
        if t <= t_grid[0]:
            val = row[0]
        elif t >= t_grid[-1]:
            val = row[-1]
        else:
            val = float(np.interp(t, t_grid, row))
        if j == 0 and s < edges_arr[0]:
            val *= s / edges_arr[0]  # pinch to zero at s = 0
        return float(val * scale)

    return KlFn(fn=evaluate, name="fitted-envelope", is_rate_flow=False)
