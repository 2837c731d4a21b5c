"""Numerically differentiate an energy functional and hunt for counterexamples.

Capability tour on the bundled quartic-energy benchmark ("example-4.8"):
  * evaluate the forward derivative of a window functional along the field,
    both from its hand-derived closed form and from the step-halving ladder,
  * sweep randomized (time, window, input, disturbance) samples against the
    guarded decay inequality  dV + rho(V) <= 0  whenever the input guard
    holds — the shipped weighted guard survives the sweep,
  * weaken the guard on purpose and watch the sweep return a concrete
    counterexample witness.

Run:  python3 demos/falsify_decay_inequalities.py
"""

import numpy as np

from rfdestab import (
    DiniOpts,
    build_example,
    dini_functional,
    sample_history,
)


def main() -> None:
    bundle = build_example("example-4.8")
    sys_ = bundle.system
    V = bundle.functional

    # one functional-derivative evaluation, closed form vs numeric ladder
    rng = np.random.default_rng(7)
    t = 0.8
    seg = sample_history(rng, sys_.delay_r, sys_.dim_n, 2.0)
    u = np.array([0.4])
    d = np.array([-0.6])
    v = np.asarray(sys_.dynamics(t, seg, u, d), dtype=float)
    dv_analytic = dini_functional(V, t, seg, v)
    dv_numeric = dini_functional(V, t, seg, v, DiniOpts(use_analytic=False))
    print(f"derivative of the energy along the field at t={t}:")
    print(f"  closed form    {dv_analytic: .9f}")
    print(f"  numeric ladder {dv_numeric: .9f}   "
          f"(gap {abs(dv_analytic - dv_numeric):.2e})")

    # the shipped certificate: guarded decay survives a randomized sweep
    report = bundle.certificate("weighted-input-decay").runner(samples=4000)
    print(f"weighted guard sweep: {report.verdict} "
          f"({report.samples_tested} tested, {report.guard_skipped} skipped "
          f"by the guard, worst residual {report.worst_residual:.3e})")

    # drop the exponential weight from the guard and the sweep finds a witness
    broken = bundle.certificate("unweighted-guard-fails").runner(samples=4000)
    print(f"unweighted guard sweep: {broken.verdict}")
    w = broken.witness
    window_sup = np.abs(np.asarray(w["history"]["values"])).max()
    print(f"  witness: t={w['t']:.4f}, |window|={window_sup:.4f}, "
          f"u={w['u'][0]:+.4f}, d={w['d'][0]:+.4f}, "
          f"residual={w['residual']:.4e} > 0")

    # bounded signals, unbounded response: the system really is only
    # input-to-output stable in the weighted sense
    div = bundle.certificate("bounded-input-divergence").runner()
    print(f"unit input + unit disturbance: output crosses "
          f"{div.details['threshold']:g} at t={div.details['crossing_time']:.3f}")


if __name__ == "__main__":
    main()
