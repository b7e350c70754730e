"""Deterministic closed-loop simulation over scripted scenarios.

A scenario bundles the plant, the design artifacts, the control law, and the
piecewise-constant reference / output-disturbance schedules.  `run` advances
plant, observer, and integrator together with one fixed-step RK4 pass (the
compiled kernel), then attaches the applicable Lyapunov monitor series.
Identical inputs give bit-identical outputs.

Temperatures may be scripted in kelvin or Celsius; everything is converted
to kelvin at load time.  Disturbances are offsets, so they carry across
either unit unchanged.  The steady-state anchor (u_ss, x_ss) of the
artifacts stays fixed for the whole run; reference steps are absorbed by the
integral action rather than by re-solving the feedforward, so the input
moves only through the feedback path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import build_monitor_context, max_monotone_violation, trajectory_monitors
from .controllers import FORWARDING, INTEGRAL_ONLY, LAW_CODES, OUTPUT_FEEDBACK, PI
from .design import DesignArtifacts
from .errors import (
    MissingObserverStateError,
    NonFiniteError,
    ReferenceUnreachableError,
    SchedulesDifferError,
)
from .kernels import closed_loop_rk4, stack_operator
from .model import BilinearSystem
from .steady_state import invert_reference, reachable_set

__all__ = [
    "SimResult",
    "SimScenario",
    "compare_pi",
    "load_scenario",
    "run",
    "run_metrics",
    "scenario_from_dict",
    "write_csv",
]

_KELVIN_OFFSET = 273.15
_SCENARIO_KEYS = {
    "units",
    "law",
    "t_end",
    "dt",
    "reference_schedule",
    "output_disturbance",
    "x0",
    "x_hat0",
    "kp_pi",
    "ki_pi",
}


@dataclass
class SimScenario:
    """A fully resolved run description; all temperatures in kelvin."""

    sys: BilinearSystem
    artifacts: DesignArtifacts
    law: str
    t_end: float
    dt: float
    ref_t: np.ndarray
    ref_v: np.ndarray
    dist_t: np.ndarray
    dist_v: np.ndarray
    x0: np.ndarray
    x_hat0: np.ndarray
    kp_pi: float = 0.0
    ki_pi: float = 0.0

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class SimResult:
    """Sampled closed-loop series; one row per integration step boundary."""

    times: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray | None
    u_raw: np.ndarray
    u_sat: np.ndarray
    e: np.ndarray
    y: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)


def _as_schedule(raw, name: str, offset: float) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(raw, list):
        raise ValueError(f"{name} must be a list of [time, value] pairs")
    times = []
    vals = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValueError(f"{name} entries must be [time, value] pairs, got {item!r}")
        times.append(float(item[0]))
        vals.append(float(item[1]) + offset)
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(vals, dtype=np.float64)
    if t.size and np.any(np.diff(t) <= 0.0):
        raise ValueError(f"{name} times must be strictly increasing")
    return t, v


def scenario_from_dict(
    data: dict, sys: BilinearSystem, artifacts: DesignArtifacts
) -> SimScenario:
    """Build a scenario from parsed JSON, converting units and validating.

    Checks: known keys only; kelvin or Celsius units; strictly increasing
    schedules starting at t = 0 and contained in [0, t_end]; t_end an exact
    multiple of dt; every reference inside the reachable set.  x0 defaults
    to the open-loop equilibrium of the first reference, x_hat0 to x0.
    """
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    for key in ("units", "law", "t_end", "dt", "reference_schedule"):
        if key not in data:
            raise ValueError(f"scenario is missing required field {key!r}")

    units = data["units"]
    if units not in ("K", "C"):
        raise ValueError(f'units must be "K" or "C", got {units!r}')
    offset = _KELVIN_OFFSET if units == "C" else 0.0

    law = data["law"]
    if law not in LAW_CODES:
        raise ValueError(f"unknown law {law!r}; expected one of {sorted(LAW_CODES)}")

    t_end = float(data["t_end"])
    dt = float(data["dt"])
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError(f"dt and t_end must be positive, got dt={dt!r} t_end={t_end!r}")
    n_steps = round(t_end / dt)
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end!r} is not an integer multiple of dt={dt!r}")

    ref_t, ref_v = _as_schedule(data["reference_schedule"], "reference_schedule", offset)
    if ref_t.size == 0:
        raise ValueError("reference_schedule must contain at least one entry")
    if ref_t[0] != 0.0:
        raise ValueError("reference_schedule must start at t = 0")
    # disturbances are offsets, not absolute temperatures: no unit shift
    dist_t, dist_v = _as_schedule(
        data.get("output_disturbance", []), "output_disturbance", 0.0
    )
    for name, t in (("reference_schedule", ref_t), ("output_disturbance", dist_t)):
        if t.size and (t[0] < 0.0 or t[-1] > t_end):
            raise ValueError(f"{name} times must lie within [0, t_end]")

    reach = reachable_set(sys)
    for r in ref_v:
        if not reach.contains(float(r), tol=1e-9 * (1.0 + abs(float(r)))):
            raise ReferenceUnreachableError(float(r), reach.r_min, reach.r_max)

    if data.get("x0") is not None:
        x0 = np.asarray(data["x0"], dtype=np.float64) + offset
        if x0.shape != (sys.n_states,):
            raise ValueError(f"x0 must have {sys.n_states} entries, got {x0.shape}")
    else:
        x0 = invert_reference(sys, float(ref_v[0])).x_ss.copy()
    if data.get("x_hat0") is not None:
        x_hat0 = np.asarray(data["x_hat0"], dtype=np.float64) + offset
        if x_hat0.shape != (sys.n_states,):
            raise ValueError(
                f"x_hat0 must have {sys.n_states} entries, got {x_hat0.shape}"
            )
    else:
        x_hat0 = x0.copy()

    kp_pi = float(data.get("kp_pi", 0.0))
    ki_pi = float(data.get("ki_pi", 0.0))
    if law != PI and ("kp_pi" in data or "ki_pi" in data):
        raise ValueError("kp_pi/ki_pi are only valid with the pi law")
    if law == PI and "ki_pi" not in data:
        raise ValueError("the pi law requires ki_pi in the scenario")
    if law == OUTPUT_FEEDBACK and artifacts.observer is None:
        raise MissingObserverStateError(
            "output-feedback scenarios need observer artifacts"
        )

    return SimScenario(
        sys=sys,
        artifacts=artifacts,
        law=law,
        t_end=t_end,
        dt=dt,
        ref_t=ref_t,
        ref_v=ref_v,
        dist_t=dist_t,
        dist_v=dist_v,
        x0=x0,
        x_hat0=x_hat0,
        kp_pi=kp_pi,
        ki_pi=ki_pi,
    )


def load_scenario(
    path: str | Path, sys: BilinearSystem, artifacts: DesignArtifacts
) -> SimScenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"scenario file {path} must contain a JSON object")
    return scenario_from_dict(data, sys, artifacts)


def run(scn: SimScenario) -> SimResult:
    """Integrate the closed loop and attach monitor series."""
    sys = scn.sys
    art = scn.artifacts
    n = sys.n_states
    p = sys.n_outputs
    G = stack_operator(sys.A, sys.B, art.P, art.M, sys.C, sys.D)
    if scn.law == OUTPUT_FEEDBACK:
        L = np.ascontiguousarray(art.observer.L)
    else:
        L = np.zeros((n, p))
    g_ss = sys.B @ art.x_ss + sys.b
    x0 = np.ascontiguousarray(scn.x0, dtype=np.float64)
    # The stacked state always carries an estimate slot; laws without an
    # observer start it at the plant state so it stays finite and ignored.
    x_hat0 = x0 if scn.x_hat0 is None else np.ascontiguousarray(scn.x_hat0, dtype=np.float64)
    X, XH, Z, U_raw, U_sat, Err, Y, bad_step = closed_loop_rk4(
        G,
        sys.b,
        sys.E,
        sys.u_min,
        sys.u_max,
        LAW_CODES[scn.law],
        art.u_ss,
        g_ss,
        sys.B @ art.x_ss,
        art.P @ art.x_ss,
        float(art.M @ art.x_ss),
        art.k_p,
        art.k_i,
        art.sign_dc,
        0.0 if scn.kp_pi is None else float(scn.kp_pi),
        0.0 if scn.ki_pi is None else float(scn.ki_pi),
        L,
        x0,
        x_hat0,
        0.0,
        scn.dt,
        scn.n_steps,
        scn.ref_t,
        scn.ref_v,
        scn.dist_t,
        scn.dist_v,
    )
    if bad_step >= 0:
        raise NonFiniteError(step=int(bad_step), t=float(bad_step * scn.dt))

    times = np.arange(scn.n_steps + 1) * scn.dt
    monitors: dict[str, np.ndarray] = {}
    if scn.law != PI:
        ctx = build_monitor_context(sys, art, scn.law)
        V, U, W = trajectory_monitors(ctx, X, XH, Z)
        monitors["V"] = V
        if scn.law == OUTPUT_FEEDBACK:
            monitors["U"] = U
        if scn.law in (OUTPUT_FEEDBACK, INTEGRAL_ONLY):
            monitors["W"] = W
    return SimResult(
        times=times,
        x=X,
        x_hat=XH if scn.law == OUTPUT_FEEDBACK else None,
        u_raw=U_raw,
        u_sat=U_sat,
        e=Err,
        y=Y,
        monitors=monitors,
    )


# ---------------------------------------------------------------------------
# outputs


def write_csv(res: SimResult, path: str | Path) -> None:
    """Time series as CSV with 17-significant-digit floats.

    Column order: t, states, estimates (when present), u_raw, u_sat, e,
    measured outputs, then whichever monitors the law produced.
    """
    n = res.x.shape[1]
    p = res.y.shape[1]
    cols: list[tuple[str, np.ndarray]] = [("t", res.times)]
    cols += [(f"x_{i + 1}", res.x[:, i]) for i in range(n)]
    if res.x_hat is not None:
        cols += [(f"xhat_{i + 1}", res.x_hat[:, i]) for i in range(n)]
    cols += [("u_raw", res.u_raw), ("u_sat", res.u_sat), ("e", res.e)]
    cols += [(f"y_{i + 1}", res.y[:, i]) for i in range(p)]
    for name in ("V", "U", "W"):
        if name in res.monitors:
            cols.append((name, res.monitors[name]))
    header = ",".join(name for name, _ in cols)
    data = [col for _, col in cols]
    T = res.times.shape[0]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for k in range(T):
            fh.write(",".join("%.17g" % col[k] for col in data) + "\n")


def _segment_bounds(scn: SimScenario, res: SimResult) -> list[tuple[int, int, float]]:
    """(start_index, end_index, reference) per constant-reference segment."""
    T = res.times.shape[0]
    edges = [int(round(t / scn.dt)) for t in scn.ref_t]
    edges.append(T - 1)
    out = []
    for i in range(len(scn.ref_t)):
        out.append((edges[i], edges[i + 1], float(scn.ref_v[i])))
    return out


def _settle_time(
    times: np.ndarray, err: np.ndarray, lo: int, hi: int, band: float
) -> float | None:
    """Earliest time in [lo, hi] after which |e| stays within the band."""
    seg = np.abs(err[lo : hi + 1])
    bad = np.nonzero(seg > band)[0]
    if bad.size == 0:
        return float(times[lo])
    last = lo + int(bad[-1]) + 1
    if last > hi:
        return None
    return float(times[last])


def run_metrics(scn: SimScenario, res: SimResult) -> dict:
    """Scalar summary of a run: input excursion, errors, settling, monitors.

    Settling uses a band of 2% of each reference step's size (floored at
    0.01 K to keep the first, stepless segment meaningful).  The saturation
    duty cycle counts samples whose raw input lies strictly outside the
    admissible interval.
    """
    sys = scn.sys
    outside = (res.u_raw < sys.u_min - 1e-12) | (res.u_raw > sys.u_max + 1e-12)
    segments = _segment_bounds(scn, res)
    settling = []
    prev_r = float(scn.sys.C @ res.x[0])
    for lo, hi, r in segments:
        band = max(0.02 * abs(r - prev_r), 0.01)
        settling.append(_settle_time(res.times, res.e, lo, hi, band))
        prev_r = r
    last_lo = segments[-1][0]
    post = np.abs(res.e[last_lo:])
    metrics = {
        "law": scn.law,
        "dt": scn.dt,
        "t_end": scn.t_end,
        "u_ss": scn.artifacts.u_ss,
        "final_abs_error": float(abs(res.e[-1])),
        "max_abs_error": float(np.max(np.abs(res.e))),
        "iae": float(np.sum(np.abs(res.e)) * scn.dt),
        "max_u_raw": float(np.max(res.u_raw)),
        "min_u_raw": float(np.min(res.u_raw)),
        "sat_duty": float(np.mean(outside)),
        "settling_times": settling,
        "post_last_step": {
            "sat_duty": float(np.mean(outside[last_lo:])),
            "time_abs_error_gt_0p1": float(np.sum(post > 0.1) * scn.dt),
        },
    }
    for name, series in res.monitors.items():
        metrics[f"monitor_{name}"] = {
            "max": float(np.max(series)),
            "final": float(series[-1]),
            "max_increase": max_monotone_violation(series),
        }
    return metrics


def compare_pi(scn_ours: SimScenario, scn_pi: SimScenario) -> dict:
    """Run the proposed law and the PI baseline on one scenario and report both.

    The two scenarios must agree on the plant, both schedules, the grid
    (dt, t_end), and the initial state; only the law and its gains differ.
    """
    a, b = scn_ours, scn_pi
    same_sys = (
        np.array_equal(a.sys.A, b.sys.A)
        and np.array_equal(a.sys.B, b.sys.B)
        and np.array_equal(a.sys.b, b.sys.b)
        and np.array_equal(a.sys.E, b.sys.E)
        and np.array_equal(a.sys.C, b.sys.C)
        and (a.sys.u_min, a.sys.u_max) == (b.sys.u_min, b.sys.u_max)
    )
    if not same_sys:
        raise SchedulesDifferError("the two scenarios use different plants")
    for attr in ("ref_t", "ref_v", "dist_t", "dist_v", "x0"):
        if not np.array_equal(getattr(a, attr), getattr(b, attr)):
            raise SchedulesDifferError(f"scenario field {attr} differs")
    if (a.t_end, a.dt) != (b.t_end, b.dt):
        raise SchedulesDifferError("t_end/dt differ between the scenarios")

    out = {}
    for tag, scn in (("ours", a), ("pi", b)):
        res = run(scn)
        m = run_metrics(scn, res)
        out[tag] = {
            "law": scn.law,
            "settling_times": m["settling_times"],
            "max_abs_u_raw": max(abs(m["max_u_raw"]), abs(m["min_u_raw"])),
            "sat_duty": m["sat_duty"],
            "iae": m["iae"],
            "post_last_step": m["post_last_step"],
        }
    return out
