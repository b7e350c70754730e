"""Command-line front end.

Subcommands: build-model, design, simulate, verify, steady-state,
compare-pi.  Every command is deterministic: identical inputs produce
byte-identical JSON/CSV outputs.  Exit codes: 0 success, 1 verification
failure, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, design, model, sim, steady_state
from .errors import (
    HexRegError,
    InfeasibleError,
    MissingObserverStateError,
    NonFiniteError,
    NotHurwitzError,
    NotObservableError,
    ReferenceUnreachableError,
    SchedulesDifferError,
    SingularMatrixError,
    ZeroDCGainError,
)
from .serde import dump_json, dumps_json

__all__ = ["main"]

_KELVIN_OFFSET = 273.15

_USAGE_ERRORS = (
    ValueError,
    OSError,
    KeyError,
    ReferenceUnreachableError,
    MissingObserverStateError,
    SchedulesDifferError,
)
_NUMERICAL_ERRORS = (
    NonFiniteError,
    InfeasibleError,
    SingularMatrixError,
    NotHurwitzError,
    ZeroDCGainError,
    NotObservableError,
)


def _emit(data: dict, out: str | None) -> None:
    if out:
        dump_json(out, data)
    else:
        _sys.stdout.write(dumps_json(data))


def _to_kelvin(value: float, units: str) -> float:
    return value + (_KELVIN_OFFSET if units == "C" else 0.0)


def _resolve_uss(sys_, args) -> float:
    if args.uss is not None:
        return float(args.uss)
    if args.ref is not None:
        eq = steady_state.invert_reference(sys_, _to_kelvin(args.ref, args.units))
        return eq.u_ss
    raise ValueError("one of --ref or --uss is required")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_build_model(args) -> int:
    params = model.HexParams.from_json(args.params)
    sys_ = model.build_hex(params)
    if args.sensors is not None:
        if args.sensors < 1:
            raise ValueError(f"--sensors must be >= 1, got {args.sensors}")
        D = model.block_average_sensors(sys_.n_states, args.sensors)
        sys_ = model.BilinearSystem(
            A=sys_.A, B=sys_.B, b=sys_.b, E=sys_.E, C=sys_.C, D=D,
            u_min=sys_.u_min, u_max=sys_.u_max,
        )
    model.save_system(args.out, sys_, params)
    print(f"wrote {sys_.n_states}-state system ({sys_.n_outputs} outputs) to {args.out}")
    return 0


def _cmd_design(args) -> int:
    sys_, params = model.load_system(args.system)
    if args.law == "pi":
        raise ValueError(
            "the pi baseline has no design artifacts; reuse any designed set"
        )
    u_ss = _resolve_uss(sys_, args)
    eq = steady_state.equilibrium_at(sys_, u_ss)
    if args.law == "integral_only":
        if args.kp is not None:
            raise ValueError("--kp does not apply to the integral-only law")
        art = design.integral_only_design(
            sys_, eq, k_i=args.ki, hex_params=params, margin_grid=args.grid
        )
    else:
        k_p = args.kp if args.kp is not None else 1e-6
        k_i = args.ki if args.ki is not None else 2.6e-5
        art = design.forwarding_design(sys_, eq, k_p, k_i)
        if args.law == "output_feedback":
            art.observer = design.observer_design(sys_, grid_points=args.grid)
    design.save_artifacts(args.out, art)
    extra = ""
    if art.ki_star is not None:
        extra = f", ki_star={art.ki_star:.6g}"
    if art.observer is not None:
        extra = f", lmi_residual={art.observer.lmi_residual:.3e}"
    print(f"wrote {args.law} artifacts (u_ss={art.u_ss:.6g}{extra}) to {args.out}")
    return 0


def _run_one(system_path: str, artifact_path: str, scenario_path: str,
             out_dir: str, dt: float | None, law: str | None) -> str:
    sys_, _ = model.load_system(system_path)
    art = design.load_artifacts(artifact_path)
    with open(scenario_path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"scenario file {scenario_path} must contain a JSON object")
    if dt is not None:
        data["dt"] = dt
    if law is not None:
        data["law"] = law
    scn = sim.scenario_from_dict(data, sys_, art)
    res = sim.run(scn)
    stem = Path(scenario_path).stem
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    sim.write_csv(res, csv_path)
    dump_json(out / f"{stem}.metrics.json", sim.run_metrics(scn, res))
    return str(csv_path)


def _cmd_simulate(args) -> int:
    jobs = max(1, args.jobs)
    if jobs > 1 and len(args.scenario) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_one, args.system, args.artifacts, s,
                            args.out, args.dt, args.law)
                for s in args.scenario
            ]
            paths = [f.result() for f in futures]
    else:
        paths = [
            _run_one(args.system, args.artifacts, s, args.out, args.dt, args.law)
            for s in args.scenario
        ]
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_verify(args) -> int:
    sys_, params = model.load_system(args.system)
    P = nu = eps = None
    if args.a3:
        if params is not None:
            P = design.hex_analytic_P(params)
        else:
            P = design.solve_lyapunov(
                sys_.frozen(0.5 * (sys_.u_min + sys_.u_max)), np.eye(sys_.n_states)
            )
        margin = design.lyapunov_decay_margin(sys_, P, grid=args.grid)
        if margin <= 0.0:
            raise InfeasibleError(
                f"decay margin {margin:.3e} <= 0; no LMI constants to test",
                best_residual=-margin,
            )
        eps = 0.5 * margin
        mu = design.input_coupling_bound(sys_)
        nu = float(np.linalg.norm(P, 2) / mu) if mu > 0.0 else 1.0
    rep = analysis.assumption_report(
        sys_, P=P, nu=nu, eps=eps, u_grid=args.grid, v_grid=2 * args.grid + 1
    )
    payload = rep.to_dict()
    payload["all_hold"] = rep.all_hold(require_a3=args.a3)
    _emit(payload, args.out)
    return 0 if payload["all_hold"] else 1


def _cmd_steady_state(args) -> int:
    sys_, _ = model.load_system(args.system)
    if args.u is not None and args.ref is not None:
        raise ValueError("--u and --ref are mutually exclusive")
    if args.u is not None:
        eq = steady_state.equilibrium_at(sys_, args.u)
        payload = {
            "u_ss": eq.u_ss,
            "x_ss": eq.x_ss.tolist(),
            "y_ss": eq.y_ss,
        }
    elif args.ref is not None:
        r = _to_kelvin(args.ref, args.units)
        eq = steady_state.invert_reference(sys_, r, grid_points=args.grid)
        payload = {
            "reference": r,
            "u_ss": eq.u_ss,
            "x_ss": eq.x_ss.tolist(),
            "y_ss": eq.y_ss,
        }
    else:
        reach = steady_state.reachable_set(sys_, grid_points=args.grid)
        payload = {
            "r_min": reach.r_min,
            "r_max": reach.r_max,
            "u_at_min": reach.u_at_min,
            "u_at_max": reach.u_at_max,
        }
    _emit(payload, args.out)
    return 0


def _cmd_compare_pi(args) -> int:
    sys_, _ = model.load_system(args.system)
    art = design.load_artifacts(args.artifacts)
    scn_ours = sim.load_scenario(args.scenario_ours, sys_, art)
    scn_pi = sim.load_scenario(args.scenario_pi, sys_, art)
    report = sim.compare_pi(scn_ours, scn_pi)
    _emit(report, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexreg",
        description="Saturated bilinear regulation: model building, design, "
        "verification, and closed-loop simulation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-model", help="assemble a system file from "
                        "heat-exchanger parameters")
    p.add_argument("params", help="parameter JSON file")
    p.add_argument("--out", required=True, help="output system JSON path")
    p.add_argument("--sensors", type=int, default=None,
                   help="replace D with this many block-averaging sensor rows")
    p.set_defaults(func=_cmd_build_model)

    p = subs.add_parser("design", help="synthesize control-law artifacts")
    p.add_argument("system", help="system JSON file")
    p.add_argument("--law", required=True,
                   choices=["forwarding", "output_feedback", "integral_only"],
                   help="control law to design for")
    p.add_argument("--ref", type=float, default=None,
                   help="target reference (see --units)")
    p.add_argument("--uss", type=float, default=None,
                   help="steady input, as an alternative to --ref")
    p.add_argument("--units", choices=["K", "C"], default="K",
                   help="units of --ref (default K)")
    p.add_argument("--kp", type=float, default=None,
                   help="proportional-path gain (default 1e-6)")
    p.add_argument("--ki", type=float, default=None,
                   help="integral gain (default 2.6e-5; integral-only: ki_star/2)")
    p.add_argument("--grid", type=int, default=64,
                   help="input-grid resolution for certification sweeps")
    p.add_argument("--out", required=True, help="output artifact JSON path")
    p.set_defaults(func=_cmd_design)

    p = subs.add_parser("simulate", help="run closed-loop scenarios")
    p.add_argument("system", help="system JSON file")
    p.add_argument("artifacts", help="design artifact JSON file")
    p.add_argument("scenario", nargs="+", help="scenario JSON file(s)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=None,
                   help="override the scenario integration step")
    p.add_argument("--law", default=None,
                   choices=["forwarding", "output_feedback", "integral_only", "pi"],
                   help="override the scenario law")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for batch runs (default 1)")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("verify", help="grid-check the standing assumptions")
    p.add_argument("system", help="system JSON file")
    p.add_argument("--grid", type=int, default=64,
                   help="input-grid resolution (deviation grid is 2*grid+1)")
    p.add_argument("--a3", action="store_true",
                   help="also check the robust-decay LMI and shifted DC gains")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_verify)

    p = subs.add_parser("steady-state", help="equilibria and the reachable set")
    p.add_argument("system", help="system JSON file")
    p.add_argument("--u", type=float, default=None, help="constant input to solve at")
    p.add_argument("--ref", type=float, default=None,
                   help="reference to invert (see --units)")
    p.add_argument("--units", choices=["K", "C"], default="K",
                   help="units of --ref (default K)")
    p.add_argument("--grid", type=int, default=256, help="search grid resolution")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_steady_state)

    p = subs.add_parser("compare-pi", help="run a proposed-law scenario against "
                        "the PI baseline on the same schedule")
    p.add_argument("system", help="system JSON file")
    p.add_argument("artifacts", help="design artifact JSON file")
    p.add_argument("scenario_ours", help="scenario JSON for the proposed law")
    p.add_argument("scenario_pi", help="scenario JSON with law=pi and PI gains")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.set_defaults(func=_cmd_compare_pi)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: parse failure at line {exc.lineno} column {exc.colno}: "
              f"{exc.msg}", file=_sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 3
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
