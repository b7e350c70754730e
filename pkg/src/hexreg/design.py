"""Controller and observer synthesis.

Produces the certificate data the control laws run from: the Lyapunov pair
(P, Upsilon) and output shaping row M for the forwarding law, the observer
gain L with its LMI certificate (Q, Y, nu, eps), the DC-path sign for the
integral-only law, and the certified integral gain bound ki_star.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    InfeasibleError,
    NotHurwitzError,
    NotObservableError,
    SingularMatrixError,
    ZeroDCGainError,
)
from .model import BilinearSystem, HexParams
from .steady_state import Equilibrium

__all__ = [
    "DesignArtifacts",
    "ObserverDesign",
    "solve_lyapunov",
    "hex_analytic_P",
    "sign_dc_gain",
    "forwarding_design",
    "observer_design",
    "gain_rank_obstruction",
    "observability_matrix",
    "check_observability",
    "input_coupling_bound",
    "pi_shift_sup",
    "integral_gain_bound",
    "integral_only_design",
    "lyapunov_decay_margin",
    "artifacts_to_dict",
    "artifacts_from_dict",
    "load_artifacts",
    "save_artifacts",
]

_LMI_DECLARE = -1e-9  # certificate threshold on the largest eigenvalue
_LMI_FLOOR = 1e-6  # projection floor delta for Q, nu, eps
_LMI_ITERS = 5000


@dataclass
class ObserverDesign:
    """Luenberger gain plus the LMI certificate that produced it."""

    L: np.ndarray
    Q: np.ndarray
    Y: np.ndarray
    nu: float
    eps: float
    mu: float
    lmi_residual: float


@dataclass
class DesignArtifacts:
    """Everything a control law needs at run time.

    ``P``/``Upsilon`` always satisfy F_ss^T P + P F_ss = -2 Upsilon and
    ``M`` always satisfies M F_ss = C, regardless of which law the artifact
    set was built for.  ``sign_dc`` is the sign of C F_ss^{-1} g_ss.
    Integral-only artifacts add the certified bound ``ki_star``, the
    supremum ``pi_bar`` behind it, and the decay rate ``eps_frozen`` used.
    """

    u_ss: float
    x_ss: np.ndarray
    P: np.ndarray
    Upsilon: np.ndarray
    M: np.ndarray
    k_p: float
    k_i: float
    sign_dc: float
    observer: ObserverDesign | None = None
    ki_star: float | None = None
    pi_bar: float | None = None
    eps_frozen: float | None = None

    @property
    def g_ss(self) -> np.ndarray:
        raise AttributeError("g_ss depends on the system; use controllers.input_gain")


def solve_lyapunov(F: np.ndarray, Upsilon: np.ndarray) -> np.ndarray:
    """Solve F^T P + P F = -2 Upsilon for symmetric positive definite P.

    Requires F Hurwitz and Upsilon symmetric positive definite.
    """
    F = np.asarray(F, dtype=np.float64)
    Upsilon = np.asarray(Upsilon, dtype=np.float64)
    if np.max(np.real(np.linalg.eigvals(F))) >= 0.0:
        raise NotHurwitzError("F has an eigenvalue with Re >= 0")
    if np.linalg.norm(Upsilon - Upsilon.T, np.inf) > 1e-12 * (1 + np.linalg.norm(Upsilon, np.inf)):
        raise ValueError("Upsilon must be symmetric")
    if np.min(np.linalg.eigvalsh(Upsilon)) <= 0.0:
        raise ValueError("Upsilon must be positive definite")
    P = sla.solve_continuous_lyapunov(F.T, -2.0 * Upsilon)
    P = 0.5 * (P + P.T)
    return P


def hex_analytic_P(p: HexParams) -> np.ndarray:
    """Closed-form Lyapunov weight for the heat-exchanger family.

    P = diag(I_n, (V_cold / V_hot) I_n).  The volume ratio equalizes the
    two off-diagonal exchange blocks of P F_u + F_u^T P, leaving a matrix
    whose strict negativity follows from the convection stencils; it holds
    for every admissible frozen input.
    """
    n = p.n_cells
    P = np.eye(2 * n)
    P[n:, n:] *= p.V_cold / p.V_hot
    return P


def _dc_path(sys: BilinearSystem, eq: Equilibrium) -> float:
    """C F_ss^{-1} g_ss for the design equilibrium."""
    F = sys.frozen(eq.u_ss)
    g = sys.B @ eq.x_ss + sys.b
    return float(sys.C @ np.linalg.solve(F, g))


def sign_dc_gain(sys: BilinearSystem, eq: Equilibrium) -> float:
    """Sign of the frozen DC path C F_ss^{-1} g_ss (+1.0 or -1.0).

    The steady output slope is d(C pi)/du = -C F^{-1} g, so this value is
    the negated sign of the physical DC gain.  Raises when the path is
    numerically zero, since then no integral action reaches the output.
    """
    h = _dc_path(sys, eq)
    F = sys.frozen(eq.u_ss)
    g = sys.B @ eq.x_ss + sys.b
    scale = np.linalg.norm(np.linalg.solve(F, g)) * np.linalg.norm(sys.C)
    if abs(h) <= 1e-12 * (1.0 + scale):
        raise ZeroDCGainError(f"C F^-1 g = {h:.3e} at u_ss = {eq.u_ss!r}")
    return float(np.sign(h))


def forwarding_design(
    sys: BilinearSystem,
    eq: Equilibrium,
    k_p: float,
    k_i: float,
    Upsilon: np.ndarray | None = None,
) -> DesignArtifacts:
    """Lyapunov pair and output row for the forwarding law.

    Solves F_ss^T P + P F_ss = -2 Upsilon (Upsilon defaults to identity)
    and M F_ss = C.  Any k_p, k_i > 0 are admissible; the gains only shape
    the transient.
    """
    if k_p <= 0.0 or k_i <= 0.0:
        raise ValueError(f"gains must be positive, got k_p={k_p!r} k_i={k_i!r}")
    n = sys.n_states
    if Upsilon is None:
        Upsilon = np.eye(n)
    Upsilon = np.asarray(Upsilon, dtype=np.float64)
    F = sys.frozen(eq.u_ss)
    P = solve_lyapunov(F, Upsilon)
    M = _solve_output_row(F, sys.C)
    sign = sign_dc_gain(sys, eq)
    return DesignArtifacts(
        u_ss=eq.u_ss, x_ss=eq.x_ss.copy(), P=P, Upsilon=Upsilon, M=M,
        k_p=float(k_p), k_i=float(k_i), sign_dc=sign,
    )


def _solve_output_row(F: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Row M with M F = C, refined once."""
    M = np.linalg.solve(F.T, C)
    M = M - np.linalg.solve(F.T, F.T @ M - C)
    return M


def observability_matrix(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    blocks = [D]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def check_observability(A: np.ndarray, D: np.ndarray) -> None:
    n = A.shape[0]
    O = observability_matrix(A, D)
    rank = np.linalg.matrix_rank(O)
    if rank < n:
        raise NotObservableError(f"observability rank {rank} < {n}")


def input_coupling_bound(sys: BilinearSystem) -> float:
    """mu = ||B||_2 * max(|u_min|, |u_max|), the worst bilinear drive."""
    return float(np.linalg.norm(sys.B, 2) * max(abs(sys.u_min), abs(sys.u_max)))


def _observer_lmi(A, D, mu, Q, Y, nu, eps) -> np.ndarray:
    n = A.shape[0]
    top = Q @ A + A.T @ Q - Y @ D - D.T @ Y.T + (nu * mu * mu + 2.0 * eps) * np.eye(n)
    return np.block([[top, Q], [Q, -nu * np.eye(n)]])


def _project(Q, nu, eps):
    Q = 0.5 * (Q + Q.T)
    w, V = np.linalg.eigh(Q)
    w = np.maximum(w, _LMI_FLOOR)
    Q = (V * w) @ V.T
    return Q, max(nu, _LMI_FLOOR), max(eps, _LMI_FLOOR)


def _placement_gain(A: np.ndarray, D: np.ndarray, shift: float) -> np.ndarray:
    """Deterministic output-injection gain moving every eigenvalue left.

    Targets Re(lambda_i(A)) - shift with duplicates spread slightly so the
    placement problem stays well posed.  Assignment goes through the
    Sylvester equation A^T X - X Lam = D^T G with a fixed output-cycling
    pattern G; then (A - L D)^T has eigenvector matrix X at the targets
    for L = X^{-T} G^T.  Falls back to the zero gain if the solve degenerates,
    since callers only need a starting point.
    """
    n = A.shape[0]
    p = D.shape[0]
    targets = np.sort(np.real(np.linalg.eigvals(A))) - shift
    spread = 1e-3 * max(1.0, shift)
    targets = targets - spread * (1.0 + np.arange(n))
    G = np.zeros((p, n))
    G[np.arange(n) % p, np.arange(n)] = 1.0
    try:
        X = sla.solve_sylvester(A.T, -np.diag(targets), D.T @ G)
        L = np.linalg.solve(X.T, G.T)
    except np.linalg.LinAlgError:
        return np.zeros((n, p))
    if not np.all(np.isfinite(L)):
        return np.zeros((n, p))
    return np.ascontiguousarray(L)


def _subgradient_descent(A, D, mu, Q, Y, nu, eps, iters):
    """Projected subgradient on the largest LMI eigenvalue.

    The block matrix is affine in (Q, Y, nu, eps); the outer product of its
    top eigenvector gives a subgradient of the largest-eigenvalue objective.
    Diminishing steps c / sqrt(k); the first strictly negative residual wins
    (the problem is homogeneous, so any strictly feasible point can be
    rescaled to clear the declaration threshold).
    """
    n = A.shape[0]
    best = (np.inf, Q.copy(), Y.copy(), nu, eps)
    scale = max(1.0, np.linalg.norm(Q), np.linalg.norm(Y))
    step0 = 0.2 * scale
    for k in range(1, iters + 1):
        lam_max, vec = _top_eig(_observer_lmi(A, D, mu, Q, Y, nu, eps))
        if lam_max < best[0]:
            best = (lam_max, Q.copy(), Y.copy(), nu, eps)
        if lam_max < -1e-12:
            return best
        v1, v2 = vec[:n], vec[n:]
        Av1 = A @ v1
        Dv1 = D @ v1
        gQ = np.outer(v1, Av1) + np.outer(Av1, v1) + np.outer(v1, v2) + np.outer(v2, v1)
        gY = -2.0 * np.outer(v1, Dv1)
        gnu = mu * mu * float(v1 @ v1) - float(v2 @ v2)
        geps = 2.0 * float(v1 @ v1)
        gnorm = np.sqrt(
            np.sum(gQ * gQ) + np.sum(gY * gY) + gnu * gnu + geps * geps
        )
        if gnorm == 0.0:
            break
        alpha = step0 / (np.sqrt(k) * gnorm)
        Q = Q - alpha * gQ
        Y = Y - alpha * gY
        nu = nu - alpha * gnu
        eps = eps - alpha * geps
        Q, nu, eps = _project(Q, nu, eps)
    return best


def _top_eig(Mblk: np.ndarray) -> tuple[float, np.ndarray]:
    w, V = np.linalg.eigh(Mblk)
    return float(w[-1]), V[:, -1]


def _constructive_candidate(A, D, mu, shift):
    """Feasible point from placement plus a Lyapunov-shaped Q.

    With L fixed, Q solving (A - L D)^T Q + Q (A - L D) = -I is feasible
    whenever 2 mu ||Q|| < 1: picking nu = ||Q|| / mu makes the Schur form
    Q Ao + Ao^T Q + Q^2/nu + nu mu^2 I at most (2 mu ||Q|| - 1) I.
    """
    L = _placement_gain(A, D, shift)
    Ao = A - L @ D
    Q = sla.solve_continuous_lyapunov(Ao.T, -np.eye(A.shape[0]))
    Q = 0.5 * (Q + Q.T)
    if np.min(np.linalg.eigvalsh(Q)) <= 0.0:
        return None
    qnorm = float(np.linalg.norm(Q, 2))
    margin = 1.0 - 2.0 * mu * qnorm
    if margin <= 1e-3:
        return None
    nu = qnorm / mu if mu > 0.0 else max(1.0, qnorm)
    eps = 0.45 * margin
    Y = Q @ L
    return Q, Y, nu, eps


def gain_rank_obstruction(sys: BilinearSystem) -> float | None:
    """Singular-value witness proving the observer LMI infeasible, or None.

    The Schur form of a feasible certificate forces |(A - LD)v| > mu for
    every unit v, i.e. sigma_min(A - LD) > mu.  But LD has rank at most p,
    and a rank-p update cannot raise the smallest singular value above
    sigma_{n-p}(A) (Weyl interlacing).  So sigma_{n-p}(A) <= mu rules out
    every gain at once.  Returns that singular value when it certifies
    infeasibility; None when the test is silent (including p >= n).
    """
    A, D = sys.A, sys.D
    n = A.shape[0]
    p = D.shape[0]
    if p >= n:
        return None
    mu = input_coupling_bound(sys)
    sv = np.linalg.svd(A, compute_uv=False)
    witness = float(sv[n - p - 1])
    return witness if witness <= mu else None


def observer_design(sys: BilinearSystem, grid_points: int = 64) -> ObserverDesign:
    """Find L = Q^{-1} Y certifying the saturated-input observer LMI.

    [[QA + A^T Q - YD - D^T Y^T + (nu mu^2 + 2 eps) I,  Q],
     [Q,                                             -nu I]]  <= 0

    with mu = ||B||_2 max(|u_min|, |u_max|).  The certificate makes the
    estimation error contract for every admissible saturated input, so the
    grid size only matters for reporting.  The rank obstruction test runs
    first: when it fires, no gain can ever satisfy the inequality and the
    search is skipped.  Otherwise: projected subgradient from the
    pole-placement seed; if the budget runs out, a deterministic ladder of
    faster placements provides the start instead.
    """
    A, D = sys.A, sys.D
    check_observability(A, D)
    mu = input_coupling_bound(sys)
    n = A.shape[0]

    witness = gain_rank_obstruction(sys)
    if witness is not None:
        p = D.shape[0]
        start = _top_eig(_observer_lmi(A, D, mu, np.eye(n), np.zeros((n, p)),
                                       max(1.0, 1.0 / mu) if mu > 0.0 else 1.0,
                                       _LMI_FLOOR))[0]
        raise InfeasibleError(
            "observer LMI infeasible for every gain: feasibility needs "
            f"sigma_min(A - LD) > mu = {mu:.6g}, but rank-{p} output "
            f"injection is capped by sigma_{n - p}(A) = {witness:.6g}",
            best_residual=start,
        )

    Q0 = np.eye(n)
    Y0 = _placement_gain(A, D, 1.0)  # Y = Q0 L with Q0 = I
    nu0 = max(1.0, 1.0 / mu) if mu > 0.0 else 1.0
    eps0 = 0.1
    best = _subgradient_descent(A, D, mu, Q0, Y0, nu0, eps0, _LMI_ITERS)

    if best[0] >= -1e-12:
        for shift in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
            cand = _constructive_candidate(A, D, mu, shift)
            if cand is None:
                continue
            Qc, Yc, nuc, epsc = cand
            lam = _top_eig(_observer_lmi(A, D, mu, Qc, Yc, nuc, epsc))[0]
            if lam < best[0]:
                best = (lam, Qc, Yc, nuc, epsc)
            if lam < -1e-12:
                break

    lam_best, Q, Y, nu, eps = best
    if lam_best >= -1e-12:
        raise InfeasibleError("observer LMI search exhausted", best_residual=lam_best)

    # Homogeneous rescale so the certificate clears the threshold cleanly.
    c = max(1.0, 4.0 * abs(_LMI_DECLARE) / abs(lam_best))
    Q, Y, nu, eps = c * Q, c * Y, c * nu, c * eps
    residual = _top_eig(_observer_lmi(A, D, mu, Q, Y, nu, eps))[0]
    if residual >= _LMI_DECLARE:
        raise InfeasibleError("observer LMI rescale lost the margin", best_residual=residual)

    L = np.linalg.solve(Q, Y)
    return ObserverDesign(L=L, Q=Q, Y=Y, nu=float(nu), eps=float(eps), mu=mu,
                          lmi_residual=float(residual))


def pi_shift_sup(
    sys: BilinearSystem,
    eq: Equilibrium,
    v_range: tuple[float, float] | None = None,
    grid_points: int = 512,
) -> float:
    """Supremum of |[(F + Bv)^{-1} B v - I](F + Bv)^{-1} g| over the input
    deviation range.

    The deviation v = sat(u) - u_ss lives in [u_min - u_ss, u_max - u_ss],
    the default range; F + B v is then a frozen matrix at an admissible
    input and stays invertible whenever the frozen family is Hurwitz.
    Grid sweep plus golden-section refinement around the peak.
    """
    if v_range is None:
        v_range = (sys.u_min - eq.u_ss, sys.u_max - eq.u_ss)
    lo, hi = float(v_range[0]), float(v_range[1])
    if hi < lo:
        raise ValueError(f"empty deviation range [{lo}, {hi}]")
    F = sys.frozen(eq.u_ss)
    g = sys.B @ eq.x_ss + sys.b

    def magnitude(v: float) -> float:
        Fv = F + sys.B * v
        cond = np.linalg.cond(Fv)
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularMatrixError(
                f"F + B v numerically singular at v = {v!r}", cond=float(cond)
            )
        y1 = np.linalg.solve(Fv, g)
        y2 = v * np.linalg.solve(Fv, sys.B @ y1) - y1
        return float(np.linalg.norm(y2))

    if hi == lo:
        return magnitude(lo)
    grid = np.linspace(lo, hi, grid_points)
    vals = np.array([magnitude(v) for v in grid])
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid_points - 1)]
    from .steady_state import _golden_section_max

    _, peak = _golden_section_max(magnitude, a, b, 1e-10 * (1.0 + hi - lo))
    return float(max(peak, vals[i]))


def integral_gain_bound(
    sys: BilinearSystem,
    eq: Equilibrium,
    P: np.ndarray,
    eps: float,
    v_range: tuple[float, float] | None = None,
    grid_points: int = 512,
) -> tuple[float, float]:
    """Certified integral gain bound ki_star = eps / (3 c0 pi_bar sqrt(pl pu)).

    c0 = |C|, pi_bar = pi_shift_sup over the deviation range, and pl, pu are
    the extreme eigenvalues of P.  eps must be a decay rate certified for P
    over the frozen family (P F_u + F_u^T P <= -2 eps I on the admissible
    grid).  Returns (ki_star, pi_bar).
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    P = np.asarray(P, dtype=np.float64)
    evals = np.linalg.eigvalsh(P)
    if evals[0] <= 0.0:
        raise ValueError("P must be positive definite")
    c0 = float(np.linalg.norm(sys.C))
    pi_bar = pi_shift_sup(sys, eq, v_range=v_range, grid_points=grid_points)
    if pi_bar <= 0.0:
        raise ZeroDCGainError("pi_shift_sup vanished; no input authority at u_ss")
    ki_star = eps / (3.0 * c0 * pi_bar * np.sqrt(evals[0] * evals[-1]))
    return float(ki_star), float(pi_bar)


def lyapunov_decay_margin(
    sys: BilinearSystem, P: np.ndarray, grid: int = 64
) -> float:
    """Largest eps with P F_u + F_u^T P <= -2 eps I across the input grid.

    Computed as the min over the grid of the smallest eigenvalue of
    -(P F_u + F_u^T P) / 2.  Positive means P certifies uniform decay for
    the whole frozen family at this resolution.
    """
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid!r}")
    P = np.asarray(P, dtype=np.float64)
    margin = np.inf
    for u in np.linspace(sys.u_min, sys.u_max, grid):
        F = sys.frozen(float(u))
        S = P @ F + F.T @ P
        margin = min(margin, float(-np.linalg.eigvalsh(S)[-1] / 2.0))
    return margin


def integral_only_design(
    sys: BilinearSystem,
    eq: Equilibrium,
    P: np.ndarray | None = None,
    k_i: float | None = None,
    hex_params: HexParams | None = None,
    v_range: tuple[float, float] | None = None,
    grid_points: int = 512,
    margin_grid: int = 64,
) -> DesignArtifacts:
    """Artifacts for the pure-integral law with its certified gain bound.

    P defaults to the closed-form heat-exchanger weight when hex_params are
    given, else to the Lyapunov solution at the design input with identity
    right-hand side.  The decay rate certified for P over the input grid
    feeds the bound ki_star; k_i defaults to half that bound.  Upsilon is
    back-filled as -(P F_ss + F_ss^T P) / 2 so the stored pair satisfies
    the same identity every artifact set carries.
    """
    if P is None:
        if hex_params is not None:
            P = hex_analytic_P(hex_params)
        else:
            P = solve_lyapunov(sys.frozen(eq.u_ss), np.eye(sys.n_states))
    P = np.asarray(P, dtype=np.float64)
    eps = lyapunov_decay_margin(sys, P, grid=margin_grid)
    if eps <= 0.0:
        raise InfeasibleError(
            f"P fails to certify uniform decay (margin {eps:.3e})",
            best_residual=-eps,
        )
    ki_star, pi_bar = integral_gain_bound(
        sys, eq, P, eps, v_range=v_range, grid_points=grid_points
    )
    if k_i is None:
        k_i = 0.5 * ki_star
    if k_i <= 0.0:
        raise ValueError(f"k_i must be positive, got {k_i!r}")
    F = sys.frozen(eq.u_ss)
    Upsilon = -0.5 * (P @ F + F.T @ P)
    M = _solve_output_row(F, sys.C)
    sign = sign_dc_gain(sys, eq)
    return DesignArtifacts(
        u_ss=eq.u_ss,
        x_ss=eq.x_ss.copy(),
        P=P,
        Upsilon=Upsilon,
        M=M,
        k_p=0.0,
        k_i=float(k_i),
        sign_dc=sign,
        ki_star=ki_star,
        pi_bar=pi_bar,
        eps_frozen=eps,
    )


# ---------------------------------------------------------------------------
# serialization


def artifacts_to_dict(art: DesignArtifacts) -> dict:
    out = {
        "u_ss": art.u_ss,
        "x_ss": art.x_ss.tolist(),
        "P": art.P.tolist(),
        "Upsilon": art.Upsilon.tolist(),
        "M": art.M.tolist(),
        "k_p": art.k_p,
        "k_i": art.k_i,
        "sign_dc": art.sign_dc,
        "ki_star": art.ki_star,
        "pi_bar": art.pi_bar,
        "eps_frozen": art.eps_frozen,
    }
    if art.observer is not None:
        obs = art.observer
        out["observer"] = {
            "L": obs.L.tolist(),
            "Q": obs.Q.tolist(),
            "Y": obs.Y.tolist(),
            "nu": obs.nu,
            "eps": obs.eps,
            "mu": obs.mu,
            "lmi_residual": obs.lmi_residual,
        }
    else:
        out["observer"] = None
    return out


def artifacts_from_dict(data: dict) -> DesignArtifacts:
    required = {"u_ss", "x_ss", "P", "Upsilon", "M", "k_p", "k_i", "sign_dc"}
    missing = required - set(data)
    if missing:
        raise ValueError(f"missing artifact fields: {sorted(missing)}")
    observer = None
    if data.get("observer") is not None:
        obs = data["observer"]
        observer = ObserverDesign(
            L=np.array(obs["L"], dtype=np.float64),
            Q=np.array(obs["Q"], dtype=np.float64),
            Y=np.array(obs["Y"], dtype=np.float64),
            nu=float(obs["nu"]),
            eps=float(obs["eps"]),
            mu=float(obs["mu"]),
            lmi_residual=float(obs["lmi_residual"]),
        )
    return DesignArtifacts(
        u_ss=float(data["u_ss"]),
        x_ss=np.array(data["x_ss"], dtype=np.float64),
        P=np.array(data["P"], dtype=np.float64),
        Upsilon=np.array(data["Upsilon"], dtype=np.float64),
        M=np.array(data["M"], dtype=np.float64),
        k_p=float(data["k_p"]),
        k_i=float(data["k_i"]),
        sign_dc=float(data["sign_dc"]),
        observer=observer,
        ki_star=None if data.get("ki_star") is None else float(data["ki_star"]),
        pi_bar=None if data.get("pi_bar") is None else float(data["pi_bar"]),
        eps_frozen=None if data.get("eps_frozen") is None else float(data["eps_frozen"]),
    )


def load_artifacts(path: str) -> DesignArtifacts:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return artifacts_from_dict(data)


def save_artifacts(path: str, art: DesignArtifacts) -> None:
    from .serde import dump_json

    dump_json(path, artifacts_to_dict(art))
