"""Method-of-steps integration for uncertain time-varying delay systems.

The integrator marches a classical 4-stage Runge-Kutta scheme whose step is
clamped to divide the delay exactly and whose grid is split at every signal
switch time, so the only discontinuities the scheme ever crosses sit on grid
nodes.  The accumulated solution keeps node derivatives and is interpolated
with the standard cubic-Hermite continuous extension; stage evaluations see
piecewise-linear history snapshots whose knots include the window endpoints
and every integration node, so discrete-delay reads hit exact knots and the
scheme keeps its full order.

Trajectories report their fate in a status field (completed / blew_up /
step_failure) instead of raising: divergence is a legitimate, observable
outcome for the experiments this package runs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .history import HistorySegment, clip_to_ball, history_distance, sample_history, sup_norm
from .signals import PiecewiseSignal, SignalSpec, sample_signal

__all__ = [
    "RfdeSystem",
    "IntegrateOpts",
    "Trajectory",
    "integrate",
    "output_norm",
    "output_distance",
    "RegionSpec",
    "LipschitzModuli",
    "estimate_lipschitz_moduli",
    "ContinuityReport",
    "check_continuity_bound",
    "RfcReport",
    "check_rfc",
    "trajectory_to_csv",
]

_EMPTY = np.zeros(0)
_EXP_CAP = 709.0  # largest safe argument for math.exp


@dataclass(frozen=True)
class RfdeSystem:
    """A delay system x'(t) = f(t, x_window, u(t), d(t)) with output map.

    ``dynamics`` receives the absolute time, the history snapshot on
    [-delay_r, 0], the current input point, and the current disturbance
    point, and returns the state derivative.  ``output`` maps (t, window) to
    either a vector or a HistorySegment (for window-valued outputs).
    ``finite_dim_output_h``, when present, is a pointwise map (t, x(t)) whose
    sup over the window reproduces the output norm up to the declared
    sandwich gains.
    """

    delay_r: float
    dim_n: int
    dynamics: Callable
    output: Callable
    d_box: np.ndarray
    u_box: np.ndarray | None = None
    period_T: float | None = None
    finite_dim_output_h: Callable | None = None
    output_sandwich: tuple | None = None
    name: str = "system"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "d_box", np.asarray(self.d_box, dtype=float))
        if self.u_box is not None:
            object.__setattr__(self, "u_box", np.asarray(self.u_box, dtype=float))
        if self.delay_r <= 0:
            raise ValueError("delay_r must be positive")

    @property
    def input_dim(self) -> int:
        return 0 if self.u_box is None else self.u_box.shape[0]

    def zero_input(self) -> np.ndarray:
        return np.zeros(self.input_dim)


def output_norm(y) -> float:
    """Norm of an output sample: Euclidean for vectors, sup for windows."""
    if isinstance(y, HistorySegment):
        return sup_norm(y)
    return float(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float))))


def output_distance(ya, yb) -> float:
    if isinstance(ya, HistorySegment) or isinstance(yb, HistorySegment):
        return history_distance(ya, yb)
    a = np.atleast_1d(np.asarray(ya, dtype=float))
    b = np.atleast_1d(np.asarray(yb, dtype=float))
    return float(np.linalg.norm(a - b))


@dataclass
class IntegrateOpts:
    step_req: float = 1e-3
    blowup_norm: float = 1e9
    record_output: bool = True


class _Dense:
    """Growing knot/value/slope store with cubic-Hermite evaluation."""

    def __init__(self, t0: float, x0: HistorySegment, capacity: int):
        k0 = x0.grid.size
        n = x0.dim
        self.n = n
        self.K = np.empty(capacity)
        self.V = np.empty((capacity, n))
        self.DIN = np.zeros((capacity, n))   # slope arriving at the knot
        self.DOUT = np.zeros((capacity, n))  # slope leaving the knot
        self.K[:k0] = t0 + x0.grid
        self.V[:k0] = x0.values
        slopes = np.diff(x0.values, axis=0) / np.diff(x0.grid)[:, None]
        self.DOUT[: k0 - 1] = slopes
        self.DIN[1:k0] = slopes
        self.DIN[0] = slopes[0]
        self.count = k0
        self.delay = x0.delay

    def append(self, t: float, x: np.ndarray, din: np.ndarray):
        c = self.count
        self.K[c] = t
        self.V[c] = x
        self.DIN[c] = din
        self.count = c + 1

    def _basis(self, s):
        s2 = s * s
        s3 = s2 * s
        return 2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2

    def eval_one(self, t: float) -> np.ndarray:
        c = self.count
        j = int(np.searchsorted(self.K[:c], t, side="right")) - 1
        if j < 0:
            j = 0
        if j >= c - 1:
            j = c - 2
        ta, tb = self.K[j], self.K[j + 1]
        if t == ta:
            return self.V[j]
        if t == tb:
            return self.V[j + 1]
        dt = tb - ta
        h00, h10, h01, h11 = self._basis((t - ta) / dt)
        return (
            h00 * self.V[j]
            + (h10 * dt) * self.DOUT[j]
            + h01 * self.V[j + 1]
            + (h11 * dt) * self.DIN[j + 1]
        )

    def eval_vec(self, ts: np.ndarray) -> np.ndarray:
        c = self.count
        ts = np.asarray(ts, dtype=float)
        j = np.clip(np.searchsorted(self.K[:c], ts, side="right") - 1, 0, c - 2)
        ta = self.K[j]
        dt = self.K[j + 1] - ta
        s = (ts - ta) / dt
        h00, h10, h01, h11 = self._basis(s)
        out = (
            h00[:, None] * self.V[j]
            + (h10 * dt)[:, None] * self.DOUT[j]
            + h01[:, None] * self.V[j + 1]
            + (h11 * dt)[:, None] * self.DIN[j + 1]
        )
        at_knot = s == 0.0
        if np.any(at_knot):
            out[at_knot] = self.V[j[at_knot]]
        at_top = s == 1.0
        if np.any(at_top):
            out[at_top] = self.V[j[at_top] + 1]
        return out

    def window_segment(self, tau: float, prov: np.ndarray | None = None) -> HistorySegment:
        """History snapshot on [tau - delay, tau].

        Inner knots are the stored knots; the left endpoint is interpolated
        when it falls between knots; ``prov`` appends a provisional state for
        stage times beyond the last accepted node (the linear piece between
        the last node and the stage is exactly the forward extension used by
        the stage formulas).
        """
        r = self.delay
        c = self.count
        lo = tau - r
        K = self.K
        i0 = int(np.searchsorted(K[:c], lo, side="right"))
        head_row = i0 - 1 if i0 > 0 and K[i0 - 1] == lo else None
        # a knot just above lo can still land on offset -r after subtraction;
        # fold it into the head so the offset grid stays strictly increasing
        while i0 < c and K[i0] - tau <= -r:
            head_row = i0
            i0 += 1
        inner = c - i0
        extra = 1 if prov is not None else 0
        if prov is not None:
            while inner and K[i0 + inner - 1] - tau >= 0.0:
                inner -= 1  # the provisional row supersedes a knot at offset 0
        size = 1 + inner + extra
        grid = np.empty(size)
        vals = np.empty((size, self.n))
        grid[0] = -r
        if head_row is not None:
            vals[0] = self.V[head_row]
        else:
            vals[0] = self.eval_one(lo)
        if inner:
            grid[1 : 1 + inner] = K[i0 : i0 + inner] - tau
            vals[1 : 1 + inner] = self.V[i0 : i0 + inner]
        if prov is not None:
            grid[-1] = 0.0
            vals[-1] = prov
        else:
            grid[-1] = 0.0  # tau is the last stored knot
        grid.flags.writeable = False
        vals.flags.writeable = False
        return HistorySegment._trusted(r, grid, vals)


@dataclass
class Trajectory:
    """Integration result with dense accessors.

    ``times``/``states`` cover the accepted nodes from t0 on; the initial
    window and the cubic-Hermite slope data stay available through
    :meth:`history` and :meth:`state`, which reproduce the supplied initial
    segment exactly at its grid points.
    """

    system: RfdeSystem
    t0: float
    times: np.ndarray
    states: np.ndarray
    initial: HistorySegment
    u: PiecewiseSignal | None
    d: PiecewiseSignal | None
    status: str
    t_event: float | None
    outputs: list | None
    _dense: _Dense

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def state(self, t: float) -> np.ndarray:
        if t < self.t0 - 1e-12 or t > self.t_end + 1e-12:
            raise ValueError(f"time {t!r} outside [{self.t0!r}, {self.t_end!r}]")
        return np.array(self._dense.eval_one(min(max(t, self.t0), self.t_end)))

    def state_many(self, ts: np.ndarray) -> np.ndarray:
        return self._dense.eval_vec(np.asarray(ts, dtype=float))

    def history(self, t: float) -> HistorySegment:
        """Window snapshot at ``t``; exact at stored knots."""
        if t < self.t0 - 1e-12 or t > self.t_end + 1e-12:
            raise ValueError(f"time {t!r} outside [{self.t0!r}, {self.t_end!r}]")
        t = min(max(t, self.t0), self.t_end)
        dense = self._dense
        r = dense.delay
        K = dense.K[: dense.count]
        lo, hi = t - r, t
        i0 = int(np.searchsorted(K, lo, side="right"))
        i1 = int(np.searchsorted(K, hi, side="left"))
        idx = np.arange(i0, i1)
        # subtracting t can round an interior knot onto an endpoint offset (or
        # collapse two neighbours); filter in offset space to keep the grid
        # strictly increasing
        off = K[idx] - t
        keep = (off > -r) & (off < 0.0)
        off, idx = off[keep], idx[keep]
        if off.size:
            tie = np.concatenate([[True], np.diff(off) > 0.0])
            off, idx = off[tie], idx[tie]
        grid = np.concatenate([[-r], off, [0.0]])
        # interior knots carry their stored rows; only the endpoints need the
        # dense interpolant
        vals = np.empty((grid.size, dense.V.shape[1]))
        vals[0] = dense.eval_one(lo)
        vals[1:-1] = dense.V[idx]
        vals[-1] = dense.eval_one(hi)
        return HistorySegment(r, grid, vals)

    def window_norms(self) -> np.ndarray:
        """sup of |x| over the trailing window at every node time."""
        dense = self._dense
        K = dense.K[: dense.count]
        norms = np.linalg.norm(dense.V[: dense.count], axis=1)
        out = np.empty(self.times.size)
        r = dense.delay
        dq: deque = deque()
        node_idx = np.searchsorted(K, self.times, side="left")
        ptr = 0
        for k, t in enumerate(self.times):
            hi = node_idx[k]
            while ptr <= hi:
                while dq and norms[dq[-1]] <= norms[ptr]:
                    dq.pop()
                dq.append(ptr)
                ptr += 1
            while dq and K[dq[0]] < t - r - 1e-12:
                dq.popleft()
            out[k] = norms[dq[0]]
        return out

    def output_norms(self) -> np.ndarray:
        if self.outputs is None:
            raise ValueError("outputs were not recorded for this trajectory")
        return np.array([output_norm(y) for y in self.outputs])


def _grid_for(t0: float, t_end: float, h: float, switches: np.ndarray) -> np.ndarray:
    n_steps = int(math.floor((t_end - t0) / h + 1e-9))
    base = t0 + h * np.arange(n_steps + 1)
    base = base[(base >= t0) & (base <= t_end)]
    switches = switches[(switches > t0) & (switches < t_end)]
    special = np.unique(np.concatenate([[t0, t_end], switches]))
    # keep endpoint and switch times bitwise exact; drop base nodes that
    # would create a vanishing step next to them
    eps = 1e-9 * h
    pos = np.searchsorted(special, base)
    d_right = np.where(pos < special.size, special[np.minimum(pos, special.size - 1)] - base, np.inf)
    d_left = np.where(pos > 0, base - special[np.maximum(pos - 1, 0)], np.inf)
    base = base[np.minimum(np.abs(d_right), np.abs(d_left)) >= eps]
    return np.union1d(special, base)


def integrate(
    system: RfdeSystem,
    t0: float,
    x0: HistorySegment,
    u: PiecewiseSignal | None,
    d: PiecewiseSignal | None,
    t_end: float,
    opts: IntegrateOpts | None = None,
) -> Trajectory:
    """March the delay system from (t0, x0) to t_end under the given signals.

    The requested step is clamped to delay_r / ceil(delay_r / step_req) so a
    whole number of steps spans the delay; signal switch times inside the
    horizon are inserted as grid nodes.  Blow-up (window norm above
    opts.blowup_norm) and non-finite dynamics truncate the run and are
    reported through the status field.
    """
    opts = opts or IntegrateOpts()
    r = system.delay_r
    n = system.dim_n
    if abs(x0.delay - r) > 1e-12:
        raise ValueError("initial segment window does not match the system delay")
    if x0.dim != n:
        raise ValueError("initial segment dimension does not match the system")
    if t_end <= t0:
        raise ValueError("t_end must exceed t0")
    if opts.step_req <= 0:
        raise ValueError("step_req must be positive")

    m_sub = max(1, int(math.ceil(r / opts.step_req - 1e-12)))
    h = r / m_sub

    switches = []
    for sig in (u, d):
        if sig is not None:
            switches.append(sig.switches_in(t0, t_end))
    sw = np.concatenate(switches) if switches else np.empty(0)
    tgrid = _grid_for(t0, t_end, h, sw)

    dense = _Dense(t0, x0, x0.grid.size + tgrid.size)
    zero_u = np.zeros(system.input_dim)
    zero_d = np.zeros(system.d_box.shape[0])
    u_at = (lambda t: u.eval(t)) if u is not None else (lambda t: zero_u)
    d_at = (lambda t: d.eval(t)) if d is not None else (lambda t: zero_d)
    f = system.dynamics

    status = "completed"
    t_event = None
    node_times = [t0]
    seg0 = dense.window_segment(t0)
    uk = u_at(t0)
    dk = d_at(t0)
    k1 = np.asarray(f(t0, seg0, uk, dk), dtype=float)
    dense.DOUT[dense.count - 1] = k1
    outputs = [system.output(t0, seg0)] if opts.record_output else None

    for j in range(tgrid.size - 1):
        ta = tgrid[j]
        tb = tgrid[j + 1]
        hk = tb - ta
        xk = dense.V[dense.count - 1]
        k1 = dense.DOUT[dense.count - 1]

        tm = ta + 0.5 * hk
        k2 = np.asarray(f(tm, dense.window_segment(tm, xk + (0.5 * hk) * k1), uk, dk), dtype=float)
        k3 = np.asarray(f(tm, dense.window_segment(tm, xk + (0.5 * hk) * k2), uk, dk), dtype=float)
        k4 = np.asarray(f(tb, dense.window_segment(tb, xk + hk * k3), uk, dk), dtype=float)
        x_next = xk + (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if not (
            np.isfinite(x_next).all()
            and np.isfinite(k2).all()
            and np.isfinite(k3).all()
            and np.isfinite(k4).all()
        ):
            status = "step_failure"
            t_event = float(tb)
            break

        dense.append(tb, x_next, k4)
        seg_b = dense.window_segment(tb)
        f_end = np.asarray(f(tb, seg_b, uk, dk), dtype=float)
        if not np.isfinite(f_end).all():
            status = "step_failure"
            t_event = float(tb)
            node_times.append(float(tb))
            break
        dense.DIN[dense.count - 1] = f_end

        node_times.append(float(tb))
        if opts.record_output:
            outputs.append(system.output(tb, seg_b))

        if j + 1 < tgrid.size - 1:
            ub = u_at(tb)
            db = d_at(tb)
            if np.array_equal(ub, uk) and np.array_equal(db, dk):
                k1_next = f_end
            else:
                k1_next = np.asarray(f(tb, seg_b, ub, db), dtype=float)
            uk = ub
            dk = db
            dense.DOUT[dense.count - 1] = k1_next
        else:
            dense.DOUT[dense.count - 1] = f_end

        if float(np.linalg.norm(x_next)) > opts.blowup_norm:
            status = "blew_up"
            t_event = float(tb)
            break

    times = np.asarray(node_times)
    k0 = x0.grid.size
    states = dense.V[k0 - 1 : dense.count].copy()
    return Trajectory(
        system=system,
        t0=t0,
        times=times,
        states=states,
        initial=x0,
        u=u,
        d=d,
        status=status,
        t_event=t_event,
        outputs=outputs,
        _dense=dense,
    )


# -- empirical Lipschitz moduli -------------------------------------------------

@dataclass(frozen=True)
class RegionSpec:
    t_lo: float
    t_hi: float
    norm_bound: float


@dataclass
class LipschitzModuli:
    one_sided_state: float      # one-sided modulus of the dynamics in the state
    output_rate: float          # joint (time, state) modulus of the output map
    input_rate: float           # modulus of the dynamics in the input
    region: RegionSpec
    samples: int
    low_confidence: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "one_sided_state": self.one_sided_state,
            "output_rate": self.output_rate,
            "input_rate": self.input_rate,
            "region": [self.region.t_lo, self.region.t_hi, self.region.norm_bound],
            "samples": self.samples,
            "low_confidence": list(self.low_confidence),
        }


def _uniform_box(rng: np.random.Generator, box: np.ndarray) -> np.ndarray:
    if box.shape[0] == 0:
        return _EMPTY
    return rng.uniform(box[:, 0], box[:, 1])


def estimate_lipschitz_moduli(
    system: RfdeSystem,
    region: RegionSpec,
    samples: int = 400,
    rng: np.random.Generator | None = None,
    inflate: float = 1.5,
) -> LipschitzModuli:
    """Empirical moduli from maximal sampled quotients, inflated by 1.5.

    Pairs mix independent draws with nearby constant-offset pairs so both the
    large-separation and the differential regimes are probed.  Channels with
    no valid quotient (no input, zero distances) come back as zero and are
    flagged low-confidence.
    """
    rng = rng or np.random.default_rng(0)
    r = system.delay_r
    n = system.dim_n
    q_state = []
    q_out = []
    q_in = []
    for i in range(samples):
        t = rng.uniform(region.t_lo, region.t_hi)
        tau = rng.uniform(region.t_lo, region.t_hi)
        x = sample_history(rng, r, n, region.norm_bound)
        if i % 2:
            direction = rng.normal(size=n)
            direction /= max(np.linalg.norm(direction), 1e-12)
            eps = region.norm_bound * 10.0 ** rng.uniform(-3.0, -0.3)
            y = clip_to_ball(x.add_constant(eps * direction), region.norm_bound)
        else:
            y = sample_history(rng, r, n, region.norm_bound)
        dpt = _uniform_box(rng, system.d_box)
        upt = _uniform_box(rng, system.u_box) if system.u_box is not None else _EMPTY
        vpt = _uniform_box(rng, system.u_box) if system.u_box is not None else _EMPTY

        dist = history_distance(x, y)
        fx = np.asarray(system.dynamics(t, x, upt, dpt), dtype=float)
        if dist > 1e-12:
            fy = np.asarray(system.dynamics(t, y, upt, dpt), dtype=float)
            num = float(np.dot(x.values[-1] - y.values[-1], fx - fy))
            q_state.append(num / dist**2)
        hx = system.output(t, x)
        hy = system.output(tau, y)
        den = abs(t - tau) + dist
        if den > 1e-12:
            q_out.append(output_distance(hx, hy) / den)
        if system.u_box is not None:
            du = float(np.linalg.norm(upt - vpt))
            if du > 1e-12:
                fv = np.asarray(system.dynamics(t, x, vpt, dpt), dtype=float)
                q_in.append(float(np.linalg.norm(fx - fv)) / du)

    low = []
    if not q_state:
        low.append("one_sided_state")
    if not q_out:
        low.append("output_rate")
    if not q_in:
        low.append("input_rate")
    return LipschitzModuli(
        one_sided_state=inflate * max(0.0, max(q_state, default=0.0)),
        output_rate=inflate * max(q_out, default=0.0),
        input_rate=inflate * max(q_in, default=0.0),
        region=region,
        samples=samples,
        low_confidence=tuple(low),
    )


# -- dependence on the initial window -------------------------------------------

@dataclass
class ContinuityReport:
    passed: bool
    worst_ratio: float
    worst_time: float
    initial_distance: float
    bound_overflowed: bool

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_ratio": self.worst_ratio,
            "worst_time": self.worst_time,
            "initial_distance": self.initial_distance,
            "bound_overflowed": self.bound_overflowed,
        }


def check_continuity_bound(
    system: RfdeSystem,
    t0: float,
    x0: HistorySegment,
    y0: HistorySegment,
    u: PiecewiseSignal | None,
    d: PiecewiseSignal | None,
    t_end: float,
    moduli: LipschitzModuli,
    opts: IntegrateOpts | None = None,
    rel_tol: float = 1e-9,
) -> ContinuityReport:
    """Exponential-in-time bound on the window distance of two runs.

    Both initial segments evolve under the same signals; at every node the
    window distance must stay below the initial distance amplified by
    exp(L * elapsed) with L the estimated one-sided modulus.  Equality holds
    at t0, so the check allows a relative slack.
    """
    opts = opts or IntegrateOpts(record_output=False)
    ta = integrate(system, t0, x0, u, d, t_end, opts)
    tb = integrate(system, t0, y0, u, d, t_end, opts)
    if ta.status != "completed" or tb.status != "completed":
        return ContinuityReport(False, math.inf, ta.t_event or tb.t_event or t0, 0.0, False)
    if ta.times.size != tb.times.size or not np.array_equal(ta.times, tb.times):
        raise RuntimeError("paired runs produced different grids")

    knots = np.union1d(ta._dense.K[: ta._dense.count], tb._dense.K[: tb._dense.count])
    diff = ta._dense.eval_vec(knots) - tb._dense.eval_vec(knots)
    dn = np.linalg.norm(diff, axis=1)

    r = system.delay_r
    L = moduli.one_sided_state
    d0 = None
    worst_ratio = 0.0
    worst_time = t0
    passed = True
    overflow = False
    dq: deque = deque()
    ptr = 0
    node_idx = np.searchsorted(knots, ta.times, side="right") - 1
    for k, t in enumerate(ta.times):
        hi = node_idx[k]
        while ptr <= hi:
            while dq and dn[dq[-1]] <= dn[ptr]:
                dq.pop()
            dq.append(ptr)
            ptr += 1
        while dq and knots[dq[0]] < t - r - 1e-12:
            dq.popleft()
        lhs = dn[dq[0]]
        if d0 is None:
            d0 = lhs  # window distance at t0 is the initial distance
        arg = L * (t - t0)
        if arg > _EXP_CAP:
            overflow = True
            bound = math.inf
        else:
            bound = d0 * math.exp(arg)
        if bound == 0.0:
            ratio = 0.0 if lhs <= 1e-12 else math.inf
        elif math.isinf(bound):
            ratio = 0.0
        else:
            ratio = lhs / bound
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst_time = float(t)
        if lhs > bound * (1.0 + rel_tol) + 1e-12:
            passed = False
    return ContinuityReport(passed, worst_ratio, worst_time, float(d0), overflow)


# -- robust forward completeness ---------------------------------------------

@dataclass
class RfcReport:
    verdict: str                 # "no_counterexample" | "blow_up_witness"
    sup_norm_observed: float
    witness_index: int | None
    witness_time: float | None
    trajectories: int

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sup_norm_observed": self.sup_norm_observed,
            "witness_index": self.witness_index,
            "witness_time": self.witness_time,
            "trajectories": self.trajectories,
        }


def check_rfc(
    system: RfdeSystem,
    s: float,
    T: float,
    n_traj: int,
    rng: np.random.Generator | None = None,
    opts: IntegrateOpts | None = None,
    mean_dwell: float = 1.0,
) -> RfcReport:
    """Ensemble boundedness experiment over start times and signals.

    Draws initial windows with norm at most s, start times in [0, T], and
    signals over the horizon (inputs clipped to the ball of radius s); the
    first 2n ensemble members are the deterministic constant extremes
    +/- s along each axis started at t0 = 0, so the ball boundary is always
    probed.  The report carries the largest window norm seen and the first
    blow-up witness, if any.
    """
    rng = rng or np.random.default_rng(0)
    opts = opts or IntegrateOpts(record_output=False)
    r = system.delay_r
    n = system.dim_n
    worst = 0.0
    for i in range(n_traj):
        if i < 2 * n:
            t0 = 0.0
            corner = np.zeros(n)
            corner[i // 2] = s if i % 2 == 0 else -s
            x0 = HistorySegment.constant(r, corner)
        else:
            t0 = float(rng.uniform(0.0, T))
            x0 = sample_history(rng, r, n, s)
        horizon = t0 + T
        d_sig = sample_signal(
            SignalSpec(system.d_box, horizon + 1.0, mean_dwell, int(rng.integers(2**32))),
        )
        u_sig = None
        if system.u_box is not None:
            ubox = np.column_stack(
                [np.maximum(system.u_box[:, 0], -s), np.minimum(system.u_box[:, 1], s)]
            )
            ubox[ubox[:, 0] > ubox[:, 1]] = 0.0
            u_sig = sample_signal(
                SignalSpec(ubox, horizon + 1.0, mean_dwell, int(rng.integers(2**32))),
            )
        traj = integrate(system, t0, x0, u_sig, d_sig, horizon, opts)
        if traj.status != "completed":
            return RfcReport("blow_up_witness", float("inf"), i, traj.t_event, i + 1)
        norms = np.linalg.norm(traj._dense.V[: traj._dense.count], axis=1)
        worst = max(worst, float(norms.max()))
    return RfcReport("no_counterexample", worst, None, None, n_traj)


# -- serialization ---------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV text: t, state columns, state norm, output columns or norm."""
    n = traj.states.shape[1]
    header = ["t"] + [f"x_{i+1}" for i in range(n)] + ["|x|"]
    rows = []
    out_vec = None
    if traj.outputs is not None and traj.outputs:
        if isinstance(traj.outputs[0], HistorySegment):
            header.append("out_norm")
            out_vec = False
        else:
            p = np.atleast_1d(np.asarray(traj.outputs[0])).size
            header.extend(f"out_{i+1}" for i in range(p))
            out_vec = True
    lines = [",".join(header)]
    for k, t in enumerate(traj.times):
        row = [repr(float(t))]
        row.extend(repr(float(v)) for v in traj.states[k])
        row.append(repr(float(np.linalg.norm(traj.states[k]))))
        if out_vec is not None:
            y = traj.outputs[k]
            if out_vec:
                row.extend(repr(float(v)) for v in np.atleast_1d(np.asarray(y)))
            else:
                row.append(repr(output_norm(y)))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
