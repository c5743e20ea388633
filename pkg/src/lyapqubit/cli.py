"""Command-line interface: simulate, sweep, design, verify.

Exit codes: 0 success, 1 configuration or validation error, 2 truncated
simulation, 3 verification failure. All file output is byte-deterministic
for identical inputs and seed, and written atomically (write then rename).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import numpy as np

from .control import exact_steering_strength
from .engine import Policy, SimConfig, Trajectory, run, run_oracle
from .extended import reachable_by_single_control
from .propagator import controlled_unitary, evolve, oracle_integrate
from .scenario import Scenario, ScenarioError, parse_scenario
from .states import (
    BlochAngles,
    PureState,
    SystemParams,
    fidelity,
    from_bloch,
    switching_function,
)
from .sweeps import (
    SweepGrid,
    fidelity_vs_strength,
    phase_alignment_table,
    sweep_first_segment,
    sweep_ssc_fidelity,
)

CSV_HEADER = "t,re_a,im_a,re_b,im_b,V,dVdt,f,segment_kind"


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj: Trajectory) -> str:
    lines = [CSV_HEADER]
    for s in traj.samples:
        lines.append(
            ",".join(
                (
                    _fmt(s.t),
                    _fmt(s.state.a.real),
                    _fmt(s.state.a.imag),
                    _fmt(s.state.b.real),
                    _fmt(s.state.b.imag),
                    _fmt(s.v),
                    _fmt(s.dvdt),
                    _fmt(s.f),
                    s.kind,
                )
            )
        )
    return "\n".join(lines) + "\n"


def table_csv(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    arrays = [np.asarray(columns[n]).ravel() for n in names]
    lines = [",".join(names)]
    for row in zip(*arrays):
        lines.append(",".join(_fmt(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def _grid_long_columns(grid: SweepGrid, name: str, table: np.ndarray) -> dict[str, np.ndarray]:
    gg, pp = np.meshgrid(grid.gamma_axis, grid.phi_axis, indexing="ij")
    return {"gamma": gg.ravel(), "phi": pp.ravel(), name: np.asarray(table).ravel()}


def cmd_simulate(args) -> int:
    if not args.output:
        print("simulate: --output is required", file=sys.stderr)
        return 1
    try:
        scenario = parse_scenario(args.scenario)
        config = scenario.sim_config()
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    traj = run(config)
    _write_atomic(args.output, trajectory_csv(traj))
    if not args.quiet:
        status = "converged" if traj.converged else "truncated"
        print(
            f"terminal_fidelity={_fmt(traj.terminal_fidelity)} "
            f"switch_count={traj.switch_count} segments={len(traj.segments)} "
            f"regime={traj.final_regime.value} time={_fmt(traj.total_time)} "
            f"status={status}"
        )
    return 0 if traj.converged else 2


def cmd_sweep(args) -> int:
    if not args.output:
        print("sweep: --output is required", file=sys.stderr)
        return 1
    try:
        scenario = parse_scenario(args.scenario)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if scenario.sweep is None:
        print("sweep: scenario has no [sweep] section", file=sys.stderr)
        return 1
    spec = scenario.sweep
    outdir = args.output
    os.makedirs(outdir, exist_ok=True)
    written: list[str] = []
    try:
        if spec.kind == "first_segment":
            grid = SweepGrid(spec.gamma_axis, spec.phi_axis, spec.s_values[:1], scenario.params.omega)
            result = sweep_first_segment(grid)
            for name in ("ratio_a", "ratio_b", "tau"):
                path = os.path.join(outdir, f"first_segment_{name}.csv")
                _write_atomic(path, table_csv(_grid_long_columns(grid, name, result.tables[name])))
                written.append(path)
        elif spec.kind == "ssc_fidelity":
            for s in spec.s_values:
                grid = SweepGrid(spec.gamma_axis, spec.phi_axis, (s,), scenario.params.omega)
                result = sweep_ssc_fidelity(grid, s, dt_free=scenario.dt_free)
                for name in ("fidelity", "n_max"):
                    path = os.path.join(outdir, f"ssc_{name}_s{s:g}.csv")
                    _write_atomic(path, table_csv(_grid_long_columns(grid, name, result.tables[name])))
                    written.append(path)
        elif spec.kind == "fidelity_vs_strength":
            if scenario.initial is None:
                print("sweep: fidelity_vs_strength needs an [initial] section", file=sys.stderr)
                return 1
            result = fidelity_vs_strength(
                spec.s_values, scenario.initial, scenario.params.omega, dt_free=scenario.dt_free
            )
            path = os.path.join(outdir, "fidelity_vs_strength.csv")
            _write_atomic(
                path,
                table_csv(
                    {
                        "s": np.asarray(result.grid.s_values),
                        "fidelity": result.tables["fidelity"],
                        "bound": result.tables["bound"],
                    }
                ),
            )
            written.append(path)
        else:  # phase_alignment
            result = phase_alignment_table(spec.gamma_axis, scenario.params)
            path = os.path.join(outdir, "phase_alignment.csv")
            _write_atomic(
                path,
                table_csv(
                    {
                        "gamma": np.asarray(result.grid.gamma_axis),
                        "phi_star": result.tables["phi_star"],
                        "tau_prime": result.tables["tau_prime"],
                        "wait_time": result.tables["wait_time"],
                        "ratio_b": result.tables["ratio_b"],
                        "cos2_phi_star": result.tables["cos2_phi_star"],
                    }
                ),
            )
            written.append(path)
    except ValueError as exc:
        print(f"sweep: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        for path in written:
            print(path)
    return 0


def cmd_design(args) -> int:
    gamma0 = args.gamma0 * math.pi
    try:
        strength = exact_steering_strength(gamma0, args.omega, args.n)
    except ValueError as exc:
        print(f"design: {exc}", file=sys.stderr)
        return 1
    config = SimConfig(
        params=SystemParams(args.omega, strength),
        initial=BlochAngles(gamma0, 0.0),
        policy=Policy.STANDARD,
        dt_free=1e-6 / args.omega,
        eps_target=1e-9,
        max_switches=args.n + 10,
    )
    traj = run(config)
    ok = traj.converged and traj.terminal_fidelity >= 1.0 - 1e-9
    if not args.quiet:
        print(f"designed_strength={_fmt(strength)}")
        print(f"steps={args.n}")
        print(f"achieved_fidelity={_fmt(traj.terminal_fidelity)}")
        print(f"switch_count={traj.switch_count}")
        print(f"verification={'pass' if ok else 'fail'}")
    return 0 if ok else 3


def _verify_propagator(rng: np.random.Generator, count: int, params: SystemParams):
    h = 1e-4 * (2.0 * math.pi / params.omega)
    max_dev = 0.0
    worst = None
    for _ in range(count):
        gamma = rng.uniform(0.01, math.pi - 0.01)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        f = rng.uniform(-params.s_max, params.s_max)
        t = rng.uniform(0.0, 10.0 / params.omega)
        state = from_bloch(BlochAngles(gamma, phi))
        analytic = evolve(state, controlled_unitary(params, f, t))
        reference = oracle_integrate(state, params, f, t, h=min(h, t) if t > 0.0 else h)
        dev = max(abs(analytic.a - reference.a), abs(analytic.b - reference.b))
        if dev > max_dev:
            max_dev = dev
            worst = (gamma, phi, f, t)
    return max_dev, worst


def _verify_policies(rng: np.random.Generator, runs: int, params: SystemParams):
    worst = {
        "v_increase": 0.0,
        "norm_drift": 0.0,
        "min_extended_fidelity": 1.0,
        "case": None,
    }
    for _ in range(runs):
        gamma = rng.uniform(0.05, math.pi - 0.05)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        initial = BlochAngles(gamma, phi)
        std = run(
            SimConfig(params=params, initial=initial, policy=Policy.STANDARD, max_switches=200)
        )
        vs = [s.v for s in std.samples]
        v_inc = max((b - a for a, b in zip(vs, vs[1:])), default=0.0)
        drift = max(
            abs(abs(s.state.a) ** 2 + abs(s.state.b) ** 2 - 1.0) for s in std.samples
        )
        ext = run(SimConfig(params=params, initial=initial, policy=Policy.EXTENDED))
        if v_inc > worst["v_increase"]:
            worst["v_increase"] = v_inc
            worst["case"] = (gamma, phi)
        worst["norm_drift"] = max(worst["norm_drift"], drift)
        worst["min_extended_fidelity"] = min(worst["min_extended_fidelity"], ext.terminal_fidelity)
    return worst


def cmd_verify(args) -> int:
    if args.count < 1:
        print("verify: --count must be at least 1", file=sys.stderr)
        return 1
    params = SystemParams(1.0, 0.1)
    rng = np.random.default_rng(args.seed)
    max_dev, worst_case = _verify_propagator(rng, args.count, params)
    prop_ok = max_dev < 1e-8
    runs = max(5, min(50, args.count // 20))
    policy = _verify_policies(rng, runs, params)
    law_ok = policy["v_increase"] <= 1e-10 and policy["norm_drift"] <= 1e-12
    ext_ok = policy["min_extended_fidelity"] >= 1.0 - 1e-6
    ok = prop_ok and law_ok and ext_ok
    if not args.quiet or not ok:
        print(
            f"propagator suite: cases={args.count} max_amp_dev={max_dev:.6e} "
            f"tol=1e-08 status={'pass' if prop_ok else 'fail'}"
        )
        print(
            f"standard policy suite: runs={runs} max_v_increase={policy['v_increase']:.6e} "
            f"max_norm_drift={policy['norm_drift']:.6e} status={'pass' if law_ok else 'fail'}"
        )
        print(
            f"extended policy suite: runs={runs} "
            f"min_terminal_fidelity={policy['min_extended_fidelity']:.15g} "
            f"status={'pass' if ext_ok else 'fail'}"
        )
        print(f"overall: {'pass' if ok else 'fail'}")
    if not ok:
        if worst_case is not None and not prop_ok:
            gamma, phi, f, t = worst_case
            print(
                f"failing propagator case: gamma={gamma!r} phi={phi!r} f={f!r} t={t!r}",
                file=sys.stderr,
            )
        if policy["case"] is not None and not law_ok:
            print(f"failing policy case: (gamma, phi)={policy['case']!r}", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="output file (simulate) or directory (sweep)")
    common.add_argument("--seed", type=int, default=20240901, help="seed for randomized checks")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")

    parser = argparse.ArgumentParser(
        prog="lyapqubit",
        description="Bang-bang Lyapunov control of a driven two-level system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[common], help="run one scenario, write a CSV trajectory")
    p_sim.add_argument("scenario", help="scenario file")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", parents=[common], help="run a sweep scenario, write CSV tables")
    p_sweep.add_argument("scenario", help="scenario file with a [sweep] section")
    p_sweep.set_defaults(func=cmd_sweep)

    p_design = sub.add_parser(
        "design", parents=[common], help="field strength for exact n-step steering"
    )
    p_design.add_argument("gamma0", type=float, help="initial polar angle, in units of pi")
    p_design.add_argument("omega", type=float, help="level spacing")
    p_design.add_argument("n", type=int, help="number of control steps")
    p_design.set_defaults(func=cmd_design)

    p_verify = sub.add_parser(
        "verify", parents=[common], help="randomized propagator and policy checks"
    )
    p_verify.add_argument("--count", type=int, default=1000, help="number of propagator cases")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
