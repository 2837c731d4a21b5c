"""Dini derivatives of energy functions and sampling-based falsification.

Two kinds of energy functions appear: window functionals V(t, x_window) and
pointwise functions V(t, x(t)).  Their forward upper Dini derivatives along
the dynamics are estimated with a shrinking-step quotient ladder (analytic
expressions take precedence when supplied), and decay inequalities of the
form  derivative + rate(V) <= 0  — optionally guarded by an input-size or a
window-dominates-point condition — are stress-tested on random ensembles of
times, windows, inputs, and disturbances.  The falsifiers never prove an
inequality; they either exhibit a concrete violating sample or report that
none was found at the stated tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .compfn import ComparisonFn
from .history import (
    HistorySegment,
    clip_to_ball,
    extend,
    history_distance,
    sample_history,
    sup_norm,
)
from .simulator import IntegrateOpts, RfdeSystem, integrate, output_norm

__all__ = [
    "LyapunovFunctional",
    "RazumikhinFunction",
    "DiniOpts",
    "dini_functional",
    "dini_pointwise",
    "SamplerSpec",
    "FalsificationReport",
    "check_almost_lipschitz",
    "AlmostLipschitzReport",
    "check_lyapunov_decay",
    "check_lyapunov_ios",
    "check_razumikhin",
    "converse_functional_uq",
]


@dataclass(frozen=True)
class LyapunovFunctional:
    """Nonnegative window functional V(t, x_window).

    ``analytic_dini(t, window, v)``, when given, returns the exact forward
    Dini derivative for the window sliding ahead with terminal slope v and is
    used instead of the numeric ladder.
    """

    evaluator: Callable[[float, HistorySegment], float]
    analytic_dini: Callable | None = None
    name: str = "V"
    params: dict = field(default_factory=dict)

    def __call__(self, t: float, seg: HistorySegment) -> float:
        return float(self.evaluator(t, seg))


@dataclass(frozen=True)
class RazumikhinFunction:
    """Nonnegative pointwise function V(t, x) defined for t >= -r.

    ``evaluator_many(ts, X)``, when given, evaluates rows of X at paired
    times in one call and speeds up window-sup guards.
    """

    evaluator: Callable[[float, np.ndarray], float]
    analytic_dini: Callable | None = None
    evaluator_many: Callable | None = None
    name: str = "V"
    params: dict = field(default_factory=dict)

    def __call__(self, t: float, x: np.ndarray) -> float:
        return float(self.evaluator(t, np.asarray(x, dtype=float)))

    def along(self, ts: np.ndarray, X: np.ndarray) -> np.ndarray:
        if self.evaluator_many is not None:
            return np.asarray(self.evaluator_many(ts, X), dtype=float)
        return np.array([float(self.evaluator(t, x)) for t, x in zip(ts, X)])


@dataclass(frozen=True)
class DiniOpts:
    h_ladder: tuple = (1e-2, 1e-3, 1e-4)
    probes: int = 8
    use_analytic: bool = True


_PROBE_CACHE: dict = {}


def _probe_directions(n: int, count: int) -> np.ndarray:
    key = (n, count)
    if key not in _PROBE_CACHE:
        rng = np.random.default_rng(20240901)
        dirs = rng.normal(size=(count, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        _PROBE_CACHE[key] = dirs
    return _PROBE_CACHE[key]


def _ladder(opts: DiniOpts, delay: float | None = None) -> tuple:
    hs = tuple(sorted(set(float(h) for h in opts.h_ladder), reverse=True))
    if not hs or hs[-1] <= 0:
        raise ValueError("h_ladder must contain positive steps")
    if delay is not None:
        hs = tuple(h for h in hs if h < delay)
        if not hs:
            raise ValueError("every ladder step is at least the window length")
    return hs


def _extrapolate(hs, qs) -> float:
    """Limit of the quotient ladder at step 0, with a consistency gate.

    Quotients of regular functions approach the derivative linearly (plus
    higher order) in the step, so polynomial extrapolation through the last
    rungs removes the bias.  When successive differences do not shrink the
    way a smooth ladder would, extrapolation is untrusted and the raw
    smallest-step quotient is returned instead (a conservative estimate).
    """
    if len(qs) == 1:
        return float(qs[0])
    if len(qs) >= 3:
        h0, h1, h2 = hs[-3], hs[-2], hs[-1]
        q0, q1, q2 = qs[-3], qs[-2], qs[-1]
        d1 = q1 - q0
        d2 = q2 - q1
        expected = abs((h2 - h1) / (h1 - h0))
        if abs(d2) <= 3.0 * expected * abs(d1) + 1e-9 * (1.0 + abs(q2)):
            return float(
                q0 * h1 * h2 / ((h0 - h1) * (h0 - h2))
                + q1 * h0 * h2 / ((h1 - h0) * (h1 - h2))
                + q2 * h0 * h1 / ((h2 - h0) * (h2 - h1))
            )
        return float(q2)
    h1, h2 = hs[-2], hs[-1]
    q1, q2 = qs[-2], qs[-1]
    return float(q2 + (q2 - q1) * h2 / (h1 - h2))


def dini_functional(
    V: LyapunovFunctional,
    t: float,
    x: HistorySegment,
    v: np.ndarray,
    opts: DiniOpts | None = None,
) -> float:
    """Forward upper Dini derivative of a window functional.

    The window slides ahead by h with terminal slope v; quotients
    [V(t+h, slid window + h*y) - V(t, x)]/h are taken over a shrinking
    h-ladder with y = 0 and 8 sphere probes of radius h, and the largest
    quotient at the smallest step is returned.  An analytic expression, when
    attached, wins.
    """
    opts = opts or DiniOpts()
    if V.analytic_dini is not None and opts.use_analytic:
        out = float(V.analytic_dini(t, x, np.asarray(v, dtype=float)))
        if not math.isfinite(out):
            raise ValueError("analytic derivative returned a non-finite value")
        return out
    v = np.asarray(v, dtype=float)
    base = float(V.evaluator(t, x))
    if not math.isfinite(base):
        raise ValueError("functional evaluated to a non-finite value")
    hs = _ladder(opts, x.delay)
    dirs = _probe_directions(x.dim, opts.probes) if opts.probes else np.zeros((0, x.dim))
    qs = []
    for h in hs:
        slid = extend(x, v, h)
        vals = [float(V.evaluator(t + h, slid))]
        for dvec in dirs:
            vals.append(float(V.evaluator(t + h, slid.add_constant((h * h) * dvec))))
        arr = np.asarray(vals)
        if not np.isfinite(arr).all():
            raise ValueError("functional evaluated to a non-finite value")
        qs.append(float((arr.max() - base) / h))
    return _extrapolate(hs, qs)


def dini_pointwise(
    Vr: RazumikhinFunction,
    t: float,
    x: np.ndarray,
    v: np.ndarray,
    opts: DiniOpts | None = None,
) -> float:
    """Forward upper Dini derivative of a pointwise function along v."""
    opts = opts or DiniOpts()
    if Vr.analytic_dini is not None and opts.use_analytic:
        out = float(Vr.analytic_dini(t, np.asarray(x, dtype=float), np.asarray(v, dtype=float)))
        if not math.isfinite(out):
            raise ValueError("analytic derivative returned a non-finite value")
        return out
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    base = float(Vr.evaluator(t, x))
    if not math.isfinite(base):
        raise ValueError("function evaluated to a non-finite value")
    hs = _ladder(opts)
    qs = []
    for h in hs:
        val = float(Vr.evaluator(t + h, x + h * v))
        if not math.isfinite(val):
            raise ValueError("function evaluated to a non-finite value")
        qs.append((val - base) / h)
    return _extrapolate(hs, qs)


# -- sampling ---------------------------------------------------------------------

@dataclass(frozen=True)
class SamplerSpec:
    """Ensemble description for the falsifiers."""

    t_lo: float = 0.0
    t_hi: float = 5.0
    norm_bound: float = 2.0
    samples: int = 1000
    seed: int = 0
    max_knots: int = 4
    slope_cap: float | None = None


@dataclass
class FalsificationReport:
    verdict: str  # no_counterexample | counterexample | inconclusive
    samples_tested: int
    worst_residual: float
    witness: dict | None
    tolerance: float
    seed: int
    guard_skipped: int = 0
    eval_failures: int = 0

    def __post_init__(self):
        if self.verdict == "counterexample":
            if self.witness is None or not (self.worst_residual > self.tolerance):
                raise ValueError("counterexample verdict requires a beyond-tolerance witness")

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "samples": self.samples_tested,
            "worst_residual": self.worst_residual,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def _witness_dict(t: float, seg: HistorySegment, u, d, residual: float) -> dict:
    return {
        "t": float(t),
        "history": seg.to_json_dict(),
        "u": None if u is None else [float(a) for a in np.atleast_1d(u)],
        "d": None if d is None else [float(a) for a in np.atleast_1d(d)],
        "residual": float(residual),
    }


def _default_tol(has_analytic: bool, tolerance: float | None) -> tuple:
    if tolerance is not None:
        return float(tolerance), float(tolerance)
    return (1e-9, 1e-9) if has_analytic else (1e-6, 1e-6)


def _uniform_box(rng: np.random.Generator, box: np.ndarray | None) -> np.ndarray:
    if box is None or box.shape[0] == 0:
        return np.zeros(0)
    return rng.uniform(box[:, 0], box[:, 1])


def _falsify(
    sys: RfdeSystem,
    spec: SamplerSpec,
    tol_abs: float,
    tol_rel: float,
    draw_u: bool,
    guard: Callable | None,
    residual_fn: Callable,
) -> FalsificationReport:
    """Shared sampling loop.

    ``guard(t, seg, u)`` filters samples (None means unguarded);
    ``residual_fn(t, seg, u, d)`` returns (residual, derivative_scale).
    """
    rng = np.random.default_rng(spec.seed)
    worst = -math.inf
    worst_wit = None
    found = False
    skipped = 0
    failures = 0
    tested = 0
    for _ in range(spec.samples):
        t = float(rng.uniform(spec.t_lo, spec.t_hi))
        seg = sample_history(
            rng, sys.delay_r, sys.dim_n, spec.norm_bound, spec.max_knots, spec.slope_cap
        )
        u = _uniform_box(rng, sys.u_box) if draw_u else sys.zero_input()
        d = _uniform_box(rng, sys.d_box)
        try:
            if guard is not None and not guard(t, seg, u):
                skipped += 1
                continue
            residual, scale = residual_fn(t, seg, u, d)
        except (ValueError, FloatingPointError, ZeroDivisionError, OverflowError):
            failures += 1
            continue
        tested += 1
        if residual > worst:
            worst = residual
            worst_wit = (t, seg, u, d, residual)
        if residual > tol_abs + tol_rel * abs(scale):
            found = True
    if found:
        verdict = "counterexample"
    elif failures > max(1, spec.samples // 10) or tested == 0:
        verdict = "inconclusive"
    else:
        verdict = "no_counterexample"
    witness = None
    if worst_wit is not None and found:
        witness = _witness_dict(*worst_wit)
    return FalsificationReport(
        verdict=verdict,
        samples_tested=tested,
        worst_residual=worst if tested else 0.0,
        witness=witness,
        tolerance=tol_abs,
        seed=spec.seed,
        guard_skipped=skipped,
        eval_failures=failures,
    )


def check_lyapunov_decay(
    sys: RfdeSystem,
    V: LyapunovFunctional,
    rho: ComparisonFn,
    spec: SamplerSpec,
    tolerance: float | None = None,
    dini_opts: DiniOpts | None = None,
) -> FalsificationReport:
    """Falsify derivative(V) + rho(V) <= 0 along the dynamics with zero input."""
    tol_abs, tol_rel = _default_tol(V.analytic_dini is not None, tolerance)

    def residual_fn(t, seg, u, d):
        v = np.asarray(sys.dynamics(t, seg, u, d), dtype=float)
        val = float(V.evaluator(t, seg))
        dv = dini_functional(V, t, seg, v, dini_opts)
        return dv + float(rho(val)), dv

    return _falsify(sys, spec, tol_abs, tol_rel, False, None, residual_fn)


def check_lyapunov_ios(
    sys: RfdeSystem,
    V: LyapunovFunctional,
    zeta: ComparisonFn,
    delta: ComparisonFn,
    rho: ComparisonFn,
    spec: SamplerSpec,
    tolerance: float | None = None,
    dini_opts: DiniOpts | None = None,
) -> FalsificationReport:
    """Falsify the guarded decay: whenever zeta(delta(t)|u|) <= V(t, window),
    derivative(V) + rho(V) must be <= 0.  Guard-failing samples are skipped
    and counted."""
    if sys.u_box is None:
        raise ValueError("system declares no input channel")
    tol_abs, tol_rel = _default_tol(V.analytic_dini is not None, tolerance)

    def guard(t, seg, u):
        return float(zeta(float(delta(t)) * float(np.linalg.norm(u)))) <= float(
            V.evaluator(t, seg)
        )

    def residual_fn(t, seg, u, d):
        v = np.asarray(sys.dynamics(t, seg, u, d), dtype=float)
        val = float(V.evaluator(t, seg))
        dv = dini_functional(V, t, seg, v, dini_opts)
        return dv + float(rho(val)), dv

    return _falsify(sys, spec, tol_abs, tol_rel, True, guard, residual_fn)


def check_razumikhin(
    sys: RfdeSystem,
    Vr: RazumikhinFunction,
    a: ComparisonFn,
    rho,
    spec: SamplerSpec,
    zeta: ComparisonFn | None = None,
    delta: ComparisonFn | None = None,
    tolerance: float | None = None,
    dini_opts: DiniOpts | None = None,
) -> FalsificationReport:
    """Falsify the window-dominated decay condition for a pointwise function.

    Guard: a(sup over the window grid of Vr(t+theta, x(theta))) <= Vr(t, x(0)),
    and, when (zeta, delta) are given and the system has an input,
    zeta(delta(t)|u|) <= Vr(t, x(0)).  On guard-passing samples the residual
    derivative + rate(t, Vr(t, x(0))) must stay below tolerance.  ``rho`` is
    either a comparison function of V or a callable (t, V) for time-varying
    rates.
    """
    s_grid = np.logspace(-6, 3, 50)
    gains = np.array([float(a(s)) for s in s_grid])
    if not np.all(gains < s_grid):
        k = int(np.argmax(gains >= s_grid))
        raise ValueError(
            f"guard gain must satisfy a(s) < s; violated at s={s_grid[k]!r} with a(s)={gains[k]!r}"
        )
    if isinstance(rho, ComparisonFn):
        rate = lambda t, val: float(rho(val))
    else:
        rate = lambda t, val: float(rho(t, val))
    tol_abs, tol_rel = _default_tol(Vr.analytic_dini is not None, tolerance)
    draw_u = sys.u_box is not None and zeta is not None

    def guard(t, seg, u):
        v0 = float(Vr.evaluator(t, seg.values[-1]))
        window_vals = Vr.along(t + seg.grid, seg.values)
        if not np.isfinite(window_vals).all():
            raise ValueError("window evaluation produced non-finite values")
        if float(a(float(window_vals.max()))) > v0:
            return False
        if draw_u and float(zeta(float(delta(t)) * float(np.linalg.norm(u)))) > v0:
            return False
        return True

    def residual_fn(t, seg, u, d):
        x0 = seg.values[-1]
        v = np.asarray(sys.dynamics(t, seg, u, d), dtype=float)
        v0 = float(Vr.evaluator(t, x0))
        dv = dini_pointwise(Vr, t, x0, v, dini_opts)
        return dv + rate(t, v0), dv

    return _falsify(sys, spec, tol_abs, tol_rel, draw_u, guard, residual_fn)


# -- regularity probe -------------------------------------------------------------

@dataclass
class AlmostLipschitzReport:
    m_estimate: float        # state-difference quotient bound M(R)
    p_estimate: float        # window-slide quotient bound P(R)
    slope_cap: float         # slope class G(R) used for the slide probes
    m_suspicion: bool        # quotients grew as pair distance shrank
    p_suspicion: bool        # quotients grew as the slide step shrank
    samples: int

    def to_json_dict(self) -> dict:
        return {
            "m_estimate": self.m_estimate,
            "p_estimate": self.p_estimate,
            "slope_cap": self.slope_cap,
            "m_suspicion": self.m_suspicion,
            "p_suspicion": self.p_suspicion,
            "samples": self.samples,
        }


def check_almost_lipschitz(
    V: LyapunovFunctional,
    delay: float,
    dim: int,
    norm_bound: float,
    t_hi: float = 5.0,
    sample_count: int = 1000,
    rng: np.random.Generator | None = None,
    slope_cap: float | None = None,
    h_ladder: tuple = (1e-2, 1e-3, 1e-4),
) -> AlmostLipschitzReport:
    """Estimate the two regularity moduli of a window functional on a ball.

    The first modulus bounds |V(t,y) - V(t,x)| by a multiple of the window
    distance at fixed t; the second bounds the change under a forward window
    slide with bounded terminal slope by a multiple of the step.  Quotients
    are sampled on random piecewise-linear windows (mixing independent and
    nearby pairs) and the maxima are reported together with a growth flag
    raised when refinement keeps increasing the quotients (suspected
    unboundedness).
    """
    rng = rng or np.random.default_rng(0)
    if slope_cap is None:
        slope_cap = 8.0 * norm_bound / delay
    hs = sorted((h for h in h_ladder if h < delay), reverse=True)
    if not hs:
        raise ValueError("no ladder step is below the window length")
    m_pairs = []  # (distance, quotient)
    p_rows = []   # quotients per ladder rung
    for i in range(sample_count):
        t = float(rng.uniform(0.0, t_hi))
        x = sample_history(rng, delay, dim, norm_bound)
        if i % 2:
            direction = rng.normal(size=dim)
            direction /= max(float(np.linalg.norm(direction)), 1e-12)
            eps = norm_bound * 10.0 ** rng.uniform(-4.0, -0.3)
            y = clip_to_ball(x.add_constant(eps * direction), norm_bound)
        else:
            y = sample_history(rng, delay, dim, norm_bound)
        dist = history_distance(x, y)
        if dist > 1e-13:
            q = abs(float(V.evaluator(t, y)) - float(V.evaluator(t, x))) / dist
            m_pairs.append((dist, q))
        v = rng.normal(size=dim)
        nv = float(np.linalg.norm(v))
        if nv > 1e-12:
            v = v / nv * float(rng.uniform(0.0, slope_cap))
        base = float(V.evaluator(t, x))
        row = []
        for h in hs:
            row.append(abs(float(V.evaluator(t + h, extend(x, v, h))) - base) / h)
        p_rows.append(row)

    m_est = max((q for _, q in m_pairs), default=0.0)
    p_arr = np.asarray(p_rows) if p_rows else np.zeros((0, len(hs)))
    p_est = float(p_arr[:, -1].max()) if p_arr.size else 0.0

    m_susp = False
    if len(m_pairs) >= 20:
        dists = np.array([d for d, _ in m_pairs])
        qs = np.array([q for _, q in m_pairs])
        close = qs[dists <= np.quantile(dists, 0.1)]
        far = qs[dists >= np.quantile(dists, 0.5)]
        if close.size and far.size and close.max() > 2.0 * max(far.max(), 1e-12):
            m_susp = True
    p_susp = False
    if p_arr.size and len(hs) >= 2:
        if p_arr[:, -1].max() > 2.0 * max(p_arr[:, 0].max(), 1e-12):
            p_susp = True
    return AlmostLipschitzReport(
        m_estimate=m_est,
        p_estimate=p_est,
        slope_cap=float(slope_cap),
        m_suspicion=m_susp,
        p_suspicion=p_susp,
        samples=sample_count,
    )


# -- truncated converse construction ----------------------------------------------

def converse_functional_uq(
    sys: RfdeSystem,
    q: int,
    a1: ComparisonFn,
    a2: ComparisonFn,
    beta: ComparisonFn,
    disturbance_ensemble,
    t: float,
    x: HistorySegment,
    opts: IntegrateOpts | None = None,
) -> float:
    """Truncated-horizon converse energy built from output excursions.

    Each ensemble disturbance is integrated from (t, x) over the horizon
    T = max{0, (1/2) log(1 + q * a2(beta(R) R))} with R = max{t, window sup};
    the value is the largest exp(tau - t)-weighted clamp
    max{0, a1(|output(tau)|) - 1/q} over ensemble and time grid.  The tau = t
    term makes the result exact-sandwich from below.  Ensemble trajectories
    must complete; blow-up raises.
    """
    if q <= 0:
        raise ValueError("q must be a positive integer")
    opts = opts or IntegrateOpts(step_req=1e-2)
    R = max(float(t), sup_norm(x))
    arg = 1.0 + q * float(a2(float(beta(R)) * R))
    horizon = max(0.0, 0.5 * math.log(arg))
    base_term = max(0.0, float(a1(output_norm(sys.output(t, x)))) - 1.0 / q)
    best = base_term
    if horizon > 0.0:
        for dsig in disturbance_ensemble:
            traj = integrate(sys, t, x, None, dsig, t + horizon, opts)
            if traj.status != "completed":
                raise RuntimeError(
                    f"ensemble trajectory left the bounded regime at t={traj.t_event!r}; "
                    "the region is not robustly forward complete"
                )
            for k, tau in enumerate(traj.times):
                y = traj.outputs[k]
                term = max(0.0, float(a1(output_norm(y))) - 1.0 / q) * math.exp(tau - t)
                if term > best:
                    best = term
    if best < base_term:
        raise AssertionError("lower sandwich violated")
    return float(best)
