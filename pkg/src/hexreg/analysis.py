"""Certificate checks and proof-level monitors.

Everything here re-derives quantities from first principles so tests and the
verify subcommand can cross-examine design artifacts: grid checks of the
standing assumptions, Lyapunov monitor evaluation along trajectories, and the
linearized stability analysis of the integral-only loop.  Negative findings
are reported as data; only malformed inputs raise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .controllers import FORWARDING, INTEGRAL_ONLY, OUTPUT_FEEDBACK, PI
from .design import DesignArtifacts, input_coupling_bound, lyapunov_decay_margin
from .errors import (
    MissingObserverStateError,
    NotHurwitzError,
    SingularMatrixError,
    ZeroDCGainError,
)
from .model import BilinearSystem
from .steady_state import pi_map

__all__ = [
    "AssumptionReport",
    "LMIRecord",
    "MonitorContext",
    "assumption_report",
    "build_monitor_context",
    "check_assumption1",
    "check_assumption3",
    "integral_gain_stability_limit",
    "linearization_matrix",
    "lyapunov_decay_margin",
    "lyapunov_monitors",
    "max_monotone_violation",
    "observer_monitor_constants",
    "saturation_gap",
    "spectral_abscissa",
    "trajectory_monitors",
]

_COND_LIMIT = 1e14
_A3A_TOL = 1e-9  # slack on the largest LMI eigenvalue before declaring infeasible


def saturation_gap(s, b, u_lo: float, u_hi: float):
    """s * (sat(b - s) - b), which is <= 0 whenever b lies in [u_lo, u_hi].

    Scalar or elementwise on arrays.  The sign of this product is what makes
    the saturated integrator terms in the closed-loop energy estimates
    dissipative, so tests sample it densely.
    """
    s = np.asarray(s, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = s * (np.clip(b - s, u_lo, u_hi) - b)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# assumption reports


@dataclass
class LMIRecord:
    """Constants the robust-decay LMI was checked with."""

    nu: float
    eps: float
    mu: float
    u_range: tuple[float, float]
    v_range: tuple[float, float]


@dataclass
class AssumptionReport:
    """Grid-check verdicts; fields are None when that check was not run.

    hurwitz_margin is the max over the input grid of the largest real
    eigenvalue part of the frozen matrix (negative means the whole family is
    Hurwitz).  dc_gain_min_abs is the min of |C F_u^-1 g_u| over the same
    grid.  The a3a fields cover the robust-decay LMI at the supplied
    (P, nu, eps); the a3b fields cover |C (F_u + B v)^-1 g_u| over the
    product grid.  Grid points where the shifted frozen matrix is
    numerically singular are counted, excluded from the minima, and spoil
    sign constancy.
    """

    hurwitz_margin: float | None = None
    dc_gain_min_abs: float | None = None
    dc_sign_constant: bool | None = None
    a3a_feasible: bool | None = None
    a3a_worst_residual: float | None = None
    a3b_min_abs: float | None = None
    a3b_sign_constant: bool | None = None
    a3b_singular_points: int = 0
    grid_sizes: dict = field(default_factory=dict)
    lmi: LMIRecord | None = None

    def is_consistent(self) -> bool:
        """Booleans must agree with the signed margins they summarize."""
        if self.a3a_feasible is not None:
            if self.a3a_feasible != (self.a3a_worst_residual <= _A3A_TOL):
                return False
        return True

    def all_hold(self, require_a3: bool = False) -> bool:
        """True when every check that ran came back clean.

        The frozen-family checks (Hurwitz margin, nonvanishing DC gain) must
        pass whenever present.  The robust-decay results only gate the
        verdict when require_a3 is set, since that assumption is strictly
        stronger and can fail on plants the base design still covers.
        """
        if self.hurwitz_margin is not None and not self.hurwitz_margin < 0.0:
            return False
        if self.dc_gain_min_abs is not None:
            if not self.dc_gain_min_abs > 0.0 or not np.isfinite(self.dc_gain_min_abs):
                return False
        if self.dc_sign_constant is not None and not self.dc_sign_constant:
            return False
        if require_a3:
            if self.a3a_feasible is not None and not self.a3a_feasible:
                return False
            if self.a3b_min_abs is not None:
                if not self.a3b_min_abs > 0.0 or self.a3b_singular_points > 0:
                    return False
            if self.a3b_sign_constant is not None and not self.a3b_sign_constant:
                return False
        return True

    def to_dict(self) -> dict:
        out = {
            "hurwitz_margin": self.hurwitz_margin,
            "dc_gain_min_abs": self.dc_gain_min_abs,
            "dc_sign_constant": self.dc_sign_constant,
            "a3a_feasible": self.a3a_feasible,
            "a3a_worst_residual": self.a3a_worst_residual,
            "a3b_min_abs": self.a3b_min_abs,
            "a3b_sign_constant": self.a3b_sign_constant,
            "a3b_singular_points": self.a3b_singular_points,
            "grid_sizes": dict(self.grid_sizes),
        }
        if self.lmi is not None:
            out["lmi"] = {
                "nu": self.lmi.nu,
                "eps": self.lmi.eps,
                "mu": self.lmi.mu,
                "u_range": list(self.lmi.u_range),
                "v_range": list(self.lmi.v_range),
            }
        else:
            out["lmi"] = None
        return out


def _dc_gain_at(sys: BilinearSystem, u: float) -> float:
    x_eq = pi_map(sys, u)
    g_u = sys.B @ x_eq + sys.b
    F = sys.frozen(u)
    return float(sys.C @ np.linalg.solve(F, g_u))


def check_assumption1(sys: BilinearSystem, grid: int = 64) -> AssumptionReport:
    """Eigenvalue and DC-gain sweep of the frozen family over the input range.

    Reports the worst (largest) real eigenvalue part, the smallest |DC gain|,
    and whether the DC gain kept one sign.  A singular frozen matrix at a
    grid point shows up as a NaN-free report with sign constancy revoked.
    """
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid!r}")
    u_grid = np.linspace(sys.u_min, sys.u_max, grid)
    worst = -np.inf
    gains = np.full(grid, np.nan)
    singular = 0
    for i, u in enumerate(u_grid):
        F = sys.frozen(float(u))
        worst = max(worst, float(np.max(np.linalg.eigvals(F).real)))
        try:
            gains[i] = _dc_gain_at(sys, float(u))
        except SingularMatrixError:
            singular += 1
    finite = gains[np.isfinite(gains)]
    if finite.size:
        min_abs = float(np.min(np.abs(finite)))
        sign_const = bool(np.all(finite > 0.0) or np.all(finite < 0.0))
    else:
        min_abs = float("nan")
        sign_const = False
    if singular:
        sign_const = False
    return AssumptionReport(
        hurwitz_margin=worst,
        dc_gain_min_abs=min_abs,
        dc_sign_constant=sign_const,
        grid_sizes={"u": int(grid)},
    )


def check_assumption3(
    sys: BilinearSystem,
    P: np.ndarray,
    nu: float,
    eps: float,
    grid: tuple[int, int] = (64, 129),
    v_range: tuple[float, float] | None = None,
    restrict_admissible: bool = False,
) -> AssumptionReport:
    """Robust-decay LMI and shifted-DC-gain sweep.

    Part (a): largest eigenvalue of
    [[P F_u + F_u^T P + (nu mu^2 + 2 eps) I, P], [P, -nu I]] over the input
    grid, with mu = |B| max(|u_min|, |u_max|).  Part (b): |C (F_u + B v)^-1
    g_u| over the product grid; the default deviation range is the full
    difference interval [u_min - u_max, u_max - u_min].  With
    restrict_admissible, pairs whose effective input u + v leaves the
    admissible interval are skipped, which confines the sweep to shifts the
    saturated loop can actually produce.
    """
    P = np.asarray(P, dtype=np.float64)
    n = sys.n_states
    if P.shape != (n, n):
        raise ValueError(f"P must be {n}x{n}, got {P.shape}")
    if np.linalg.eigvalsh(0.5 * (P + P.T))[0] <= 0.0:
        raise ValueError("P must be positive definite")
    if nu <= 0.0 or eps <= 0.0:
        raise ValueError("nu and eps must be positive")
    n_u, n_v = int(grid[0]), int(grid[1])
    if n_u < 2 or n_v < 2:
        raise ValueError(f"grid sizes must be >= 2, got {grid!r}")
    if v_range is None:
        v_range = (sys.u_min - sys.u_max, sys.u_max - sys.u_min)
    mu = input_coupling_bound(sys)
    u_grid = np.linspace(sys.u_min, sys.u_max, n_u)
    v_grid = np.linspace(v_range[0], v_range[1], n_v)

    shift = (nu * mu**2 + 2.0 * eps) * np.eye(n)
    worst = -np.inf
    block = np.zeros((2 * n, 2 * n))
    block[:n, n:] = P
    block[n:, :n] = P
    block[n:, n:] = -nu * np.eye(n)
    for u in u_grid:
        F = sys.frozen(float(u))
        block[:n, :n] = P @ F + F.T @ P + shift
        worst = max(worst, float(np.linalg.eigvalsh(block)[-1]))

    min_abs = np.inf
    singular = 0
    pos = neg = 0
    for u in u_grid:
        F = sys.frozen(float(u))
        x_eq = pi_map(sys, float(u))
        g_u = sys.B @ x_eq + sys.b
        for v in v_grid:
            if restrict_admissible:
                ueff = float(u) + float(v)
                if ueff < sys.u_min - 1e-12 or ueff > sys.u_max + 1e-12:
                    continue
            Fv = F + sys.B * float(v)
            cond = np.linalg.cond(Fv)
            if not np.isfinite(cond) or cond > _COND_LIMIT:
                singular += 1
                continue
            val = float(sys.C @ np.linalg.solve(Fv, g_u))
            min_abs = min(min_abs, abs(val))
            if val > 0.0:
                pos += 1
            elif val < 0.0:
                neg += 1
    sign_const = (pos == 0 or neg == 0) and singular == 0 and (pos + neg) > 0

    return AssumptionReport(
        a3a_feasible=bool(worst <= _A3A_TOL),
        a3a_worst_residual=worst,
        a3b_min_abs=float(min_abs) if np.isfinite(min_abs) else float("nan"),
        a3b_sign_constant=bool(sign_const),
        a3b_singular_points=int(singular),
        grid_sizes={"u": n_u, "v": n_v},
        lmi=LMIRecord(
            nu=float(nu),
            eps=float(eps),
            mu=float(mu),
            u_range=(sys.u_min, sys.u_max),
            v_range=(float(v_range[0]), float(v_range[1])),
        ),
    )


def assumption_report(
    sys: BilinearSystem,
    P: np.ndarray | None = None,
    nu: float | None = None,
    eps: float | None = None,
    u_grid: int = 64,
    v_grid: int = 129,
    v_range: tuple[float, float] | None = None,
    restrict_admissible: bool = False,
) -> AssumptionReport:
    """Run the base checks, plus the robust-decay checks when P is given."""
    rep = check_assumption1(sys, grid=u_grid)
    if P is None:
        return rep
    if nu is None or eps is None:
        raise ValueError("nu and eps are required alongside P")
    frag = check_assumption3(
        sys,
        P,
        nu,
        eps,
        grid=(u_grid, v_grid),
        v_range=v_range,
        restrict_admissible=restrict_admissible,
    )
    rep.a3a_feasible = frag.a3a_feasible
    rep.a3a_worst_residual = frag.a3a_worst_residual
    rep.a3b_min_abs = frag.a3b_min_abs
    rep.a3b_sign_constant = frag.a3b_sign_constant
    rep.a3b_singular_points = frag.a3b_singular_points
    rep.grid_sizes.update(frag.grid_sizes)
    rep.lmi = frag.lmi
    return rep


# ---------------------------------------------------------------------------
# Lyapunov monitors


def observer_monitor_constants(
    sys: BilinearSystem, artifacts: DesignArtifacts
) -> tuple[float, float]:
    """Constants (a, c) for the combined output-feedback monitor sqrt(V) + c sqrt(U).

    The estimation error enters the controller's energy rate through the
    linear map J eps with rows [k_p P L D; k_i (C - M L D)].  Its gain from
    the Euclidean norm of eps into the V-metric is
    a = sqrt(lmax(J J^T, Sigma)) with Sigma = blkdiag(k_p P, k_i), an exact
    generalized-eigenvalue computation rather than a sampled bound.  Any
    c > a sqrt(lmax(Q)) / eps then makes the sum decrease; we return twice
    that threshold.
    """
    if artifacts.observer is None:
        raise MissingObserverStateError(
            "observer_monitor_constants requires observer artifacts"
        )
    obs = artifacts.observer
    n = sys.n_states
    LD = obs.L @ sys.D
    J = np.vstack([
        artifacts.k_p * (artifacts.P @ LD),
        (artifacts.k_i * (sys.C - artifacts.M @ LD))[None, :],
    ])
    Sigma = np.zeros((n + 1, n + 1))
    Sigma[:n, :n] = artifacts.k_p * artifacts.P
    Sigma[n, n] = artifacts.k_i
    top = scipy.linalg.eigh(J @ J.T, Sigma, eigvals_only=True)[-1]
    a = float(np.sqrt(max(top, 0.0)))
    q_max = float(np.linalg.eigvalsh(obs.Q)[-1])
    c = 2.0 * a * np.sqrt(q_max) / obs.eps
    return a, float(c)


@dataclass
class MonitorContext:
    """Precomputed pieces for evaluating (V, U, W) along a trajectory."""

    law: str
    x_ss: np.ndarray
    u_ss: float
    P: np.ndarray
    M: np.ndarray
    k_p: float
    k_i: float
    sign_dc: float
    u_min: float
    u_max: float
    Q: np.ndarray | None = None
    c_of: float = 0.0
    gamma: float = 0.0
    F_ss: np.ndarray | None = None
    B: np.ndarray | None = None
    g_ss: np.ndarray | None = None


def build_monitor_context(
    sys: BilinearSystem, artifacts: DesignArtifacts, law: str
) -> MonitorContext:
    ctx = MonitorContext(
        law=law,
        x_ss=artifacts.x_ss,
        u_ss=artifacts.u_ss,
        P=artifacts.P,
        M=artifacts.M,
        k_p=artifacts.k_p,
        k_i=artifacts.k_i,
        sign_dc=artifacts.sign_dc,
        u_min=sys.u_min,
        u_max=sys.u_max,
    )
    if law == OUTPUT_FEEDBACK:
        if artifacts.observer is None:
            raise MissingObserverStateError(
                "output-feedback monitors require observer artifacts"
            )
        ctx.Q = artifacts.observer.Q
        _, ctx.c_of = observer_monitor_constants(sys, artifacts)
    elif law == INTEGRAL_ONLY:
        if artifacts.pi_bar is None:
            raise ValueError("integral-only monitors require pi_bar in the artifacts")
        p_max = float(np.linalg.eigvalsh(artifacts.P)[-1])
        ctx.gamma = 2.0 * artifacts.k_i * artifacts.pi_bar * np.sqrt(p_max)
        ctx.F_ss = sys.frozen(artifacts.u_ss)
        ctx.B = sys.B
        ctx.g_ss = sys.B @ artifacts.x_ss + sys.b
    return ctx


def _quad(P: np.ndarray, d: np.ndarray) -> float:
    return float(max(d @ P @ d, 0.0))


def _integral_only_V(ctx: MonitorContext, x: np.ndarray, z: float) -> float:
    v = float(np.clip(ctx.u_ss + ctx.sign_dc * ctx.k_i * z, ctx.u_min, ctx.u_max))
    v -= ctx.u_ss
    piv = -np.linalg.solve(ctx.F_ss + ctx.B * v, ctx.g_ss) * v
    d = (x - ctx.x_ss) - piv
    return _quad(ctx.P, d)


def monitor_point(
    ctx: MonitorContext, x: np.ndarray, x_hat: np.ndarray | None, z: float
) -> tuple[float, float, float]:
    """(V, U, W) at one closed-loop sample; inapplicable monitors are zero."""
    if ctx.law == PI:
        return 0.0, 0.0, 0.0
    if ctx.law == INTEGRAL_ONLY:
        V = _integral_only_V(ctx, x, z)
        return V, 0.0, float(np.sqrt(V) + ctx.gamma * abs(z))
    xc = x if ctx.law == FORWARDING else x_hat
    if xc is None:
        raise MissingObserverStateError("x_hat is required for output-feedback monitors")
    xt = xc - ctx.x_ss
    zt = z - float(ctx.M @ xt)
    V = ctx.k_p * _quad(ctx.P, xt) + ctx.k_i * zt * zt
    if ctx.law == FORWARDING:
        return V, 0.0, 0.0
    eps_vec = x_hat - x
    U = _quad(ctx.Q, eps_vec)
    W = float(np.sqrt(V) + ctx.c_of * np.sqrt(U))
    return V, U, W


def lyapunov_monitors(
    sys: BilinearSystem,
    artifacts: DesignArtifacts,
    law: str,
    x: np.ndarray,
    x_hat: np.ndarray | None,
    z: float,
) -> tuple[float, float, float]:
    """One-shot (V, U, W); build a MonitorContext instead for whole runs."""
    ctx = build_monitor_context(sys, artifacts, law)
    return monitor_point(ctx, np.asarray(x, dtype=np.float64),
                         None if x_hat is None else np.asarray(x_hat, dtype=np.float64),
                         float(z))


def trajectory_monitors(
    ctx: MonitorContext,
    X: np.ndarray,
    XH: np.ndarray,
    Z: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (V, U, W) series over stacked samples (rows of X, XH)."""
    T = X.shape[0]
    V = np.zeros(T)
    U = np.zeros(T)
    W = np.zeros(T)
    if ctx.law == PI:
        return V, U, W
    if ctx.law == INTEGRAL_ONLY:
        for k in range(T):
            V[k] = _integral_only_V(ctx, X[k], float(Z[k]))
        W = np.sqrt(V) + ctx.gamma * np.abs(Z)
        return V, U, W
    Xc = X if ctx.law == FORWARDING else XH
    XT = Xc - ctx.x_ss
    ZT = Z - XT @ ctx.M
    V = ctx.k_p * np.maximum(np.einsum("ij,jk,ik->i", XT, ctx.P, XT), 0.0)
    V += ctx.k_i * ZT * ZT
    if ctx.law == FORWARDING:
        return V, U, W
    E = XH - X
    U = np.maximum(np.einsum("ij,jk,ik->i", E, ctx.Q, E), 0.0)
    W = np.sqrt(V) + ctx.c_of * np.sqrt(U)
    return V, U, W


def max_monotone_violation(vals: np.ndarray) -> float:
    """Largest per-step relative increase of a series meant to decrease.

    Returns max over steps of (vals[k+1] - vals[k]) / (1 + vals[k]); a series
    is non-increasing within tolerance tol when this is <= tol.  Empty and
    single-sample series return 0.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if vals.size < 2:
        return 0.0
    rel = (vals[1:] - vals[:-1]) / (1.0 + vals[:-1])
    return float(np.max(rel))


# ---------------------------------------------------------------------------
# integral-only linearization


def linearization_matrix(
    sys: BilinearSystem, artifacts: DesignArtifacts, k_i: float
) -> np.ndarray:
    """Closed-loop matrix of the integral-only loop, linearized at the target.

    Written in the shifted coordinates xi = x_err + s k_i F^-1 g z with
    s the DC-gain sign, which exposes the two-time-scale structure:

        [[F + s k_i (F^-1 g) C,  -k_i^2 h F^-1 g],
         [C,                     -k_i |h|       ]]

    with h = C F^-1 g.  At k_i = 0 this is block triangular with spectrum
    eig(F) union {0}; the integrator pole detaches at rate -k_i |h|.
    """
    if k_i < 0.0:
        raise ValueError(f"k_i must be nonnegative, got {k_i!r}")
    n = sys.n_states
    F = sys.frozen(artifacts.u_ss)
    g = sys.B @ artifacts.x_ss + sys.b
    Fg = np.linalg.solve(F, g)
    h = float(sys.C @ Fg)
    scale = float(np.linalg.norm(sys.C) * np.linalg.norm(Fg))
    if abs(h) <= 1e-12 * (1.0 + scale):
        raise ZeroDCGainError(f"DC path C F^-1 g = {h!r} is numerically zero")
    s = 1.0 if h > 0.0 else -1.0
    A_cl = np.zeros((n + 1, n + 1))
    A_cl[:n, :n] = F + s * k_i * np.outer(Fg, sys.C)
    A_cl[:n, n] = -(k_i**2) * h * Fg
    A_cl[n, :n] = sys.C
    A_cl[n, n] = -k_i * abs(h)
    return A_cl


def spectral_abscissa(M: np.ndarray) -> float:
    """Largest real part over the eigenvalues of a square matrix."""
    return float(np.max(np.linalg.eigvals(np.asarray(M, dtype=np.float64)).real))


def integral_gain_stability_limit(
    sys: BilinearSystem,
    artifacts: DesignArtifacts,
    start: float | None = None,
    cap: float = 1e9,
    rtol: float = 1e-9,
) -> float:
    """Smallest integral gain at which the linearized loop stops being Hurwitz.

    Doubles the gain from a stable starting point until the spectral
    abscissa crosses zero, then bisects the bracket to relative width rtol.
    Returns inf if no crossing is found below cap.  The certified bound
    ki_star must sit at or below this empirical limit.
    """
    k0 = start if start is not None else (artifacts.ki_star or 1e-6)
    if k0 <= 0.0:
        raise ValueError(f"start must be positive, got {k0!r}")

    def unstable(k: float) -> bool:
        return spectral_abscissa(linearization_matrix(sys, artifacts, k)) >= 0.0

    lo = k0
    while unstable(lo):
        lo /= 2.0
        if lo < 1e-15:
            raise NotHurwitzError(
                "linearized loop unstable down to vanishing integral gain"
            )
    hi = lo * 2.0
    while not unstable(hi):
        lo = hi
        hi *= 2.0
        if hi > cap:
            return float("inf")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
