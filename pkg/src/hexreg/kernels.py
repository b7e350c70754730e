"""Hot-loop integration kernel: fixed-step RK4 over the stacked closed loop.

One source function drives both execution paths.  By default it is compiled
with numba's @njit; setting the environment variable HEXREG_DISABLE_NUMBA=1
(or numba failing to import) selects the plain numpy path instead.  The
function body sticks to slice arithmetic and np.dot so the same code object
runs fast under the compiler and acceptably as plain numpy.

Stacked state s = [x (n), x_hat (n), z].  The x_hat block only moves for
the output-feedback law; other laws carry it with zero derivative.  All
matrix reads go through one stacked operator G = [A; B; P; M; C; D] so each
stage costs at most two matrix-vector products per state vector.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["USING_NUMBA", "closed_loop_rk4", "closed_loop_rk4_numpy", "stack_operator"]

_DISABLE = os.environ.get("HEXREG_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

USING_NUMBA = False
if not _DISABLE:
    try:
        import numba

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USING_NUMBA = False


def stack_operator(A, B, P, M, C, D) -> np.ndarray:
    """Row-stack [A; B; P; M; C; D] so G @ x yields every product at once."""
    return np.ascontiguousarray(np.vstack([A, B, P, M[None, :], C[None, :], D]))


def closed_loop_rk4_numpy(
    G,            # (3n + 2 + p, n) stacked operator
    bvec, Evec,   # (n,)
    u_lo, u_hi,
    law,          # 0 forwarding, 1 output feedback, 2 integral only, 3 pi
    u_ss, g_ss,   # scalar, (n,)
    Bxss, Pxss,   # (n,) precomputed B @ x_ss, P @ x_ss
    Mxss,         # scalar M @ x_ss
    kp, ki, sign_dc, kp_pi, ki_pi,
    L,            # (n, p)
    x0, xhat0, z0,
    dt, n_steps,
    ref_t, ref_v,
    dist_t, dist_v,
):
    n = bvec.shape[0]
    p = L.shape[1]
    row_b = n
    row_p = 2 * n
    row_m = 3 * n
    row_c = 3 * n + 1
    row_d = 3 * n + 2
    nref = ref_t.shape[0]
    ndist = dist_t.shape[0]
    Mrow = G[row_m]

    X = np.empty((n_steps + 1, n))
    XH = np.empty((n_steps + 1, n))
    Z = np.empty(n_steps + 1)
    U_raw = np.empty(n_steps + 1)
    U_sat = np.empty(n_steps + 1)
    Err = np.empty(n_steps + 1)
    Y = np.empty((n_steps + 1, p))

    s = np.empty(2 * n + 1)
    s[0:n] = x0
    s[n : 2 * n] = xhat0
    s[2 * n] = z0

    st = np.empty(2 * n + 1)
    kcur = np.empty(2 * n + 1)
    kprev = np.zeros(2 * n + 1)
    acc = np.empty(2 * n + 1)

    a1 = 0.5
    a2 = 0.5
    a3 = 1.0
    b0 = 1.0 / 6.0
    b1 = 1.0 / 3.0
    b2 = 1.0 / 3.0
    b3 = 1.0 / 6.0

    bad_step = -1
    for step in range(n_steps + 1):
        t = step * dt
        last = step == n_steps
        acc[:] = 0.0
        for j in range(4):
            if j == 0:
                st[:] = s
                tj = t
            else:
                if j == 1:
                    aj = a1
                elif j == 2:
                    aj = a2
                else:
                    aj = a3
                tj = t + aj * dt
                st[:] = s
                st += (aj * dt) * kprev
            x = st[0:n]
            xh = st[n : 2 * n]
            z = st[2 * n]
            gx = G @ x

            r = ref_v[0]
            for i in range(nref):
                if ref_t[i] <= tj:
                    r = ref_v[i]
                else:
                    break
            d = 0.0
            for i in range(ndist):
                if dist_t[i] <= tj:
                    d = dist_v[i]
                else:
                    break
            e = gx[row_c] - r + d

            if law == 1:
                gxh = G @ xh
                gctl = gxh
            else:
                gxh = gx
                gctl = gx

            if law == 0 or law == 1:
                w = gctl[row_b : row_b + n] - Bxss + g_ss
                acc_p = np.dot(gctl[row_p : row_p + n] - Pxss, w)
                mw = np.dot(Mrow, w)
                mxt = gctl[row_m] - Mxss
                phi = -kp * acc_p + ki * (z - mxt) * mw
            elif law == 2:
                phi = sign_dc * ki * z
            else:
                phi = -(kp_pi * e + ki_pi * z)

            u_raw = u_ss + phi
            us = u_raw
            if us < u_lo:
                us = u_lo
            elif us > u_hi:
                us = u_hi

            kcur[0:n] = gx[0:n] + (gx[row_b : row_b + n] + bvec) * us + Evec
            if law == 1:
                innov = gx[row_d : row_d + p] - gxh[row_d : row_d + p]
                kcur[n : 2 * n] = (
                    gxh[0:n] + (gxh[row_b : row_b + n] + bvec) * us + Evec + L @ innov
                )
            else:
                kcur[n : 2 * n] = 0.0
            kcur[2 * n] = e

            if j == 0:
                X[step] = x
                XH[step] = xh
                Z[step] = z
                U_raw[step] = u_raw
                U_sat[step] = us
                Err[step] = e
                Y[step] = gx[row_d : row_d + p]
                if last:
                    break
            if j == 0:
                acc += b0 * kcur
            elif j == 1:
                acc += b1 * kcur
            elif j == 2:
                acc += b2 * kcur
            else:
                acc += b3 * kcur
            kprev[:] = kcur
        if last:
            break
        s += dt * acc
        ok = True
        for i in range(2 * n + 1):
            if not np.isfinite(s[i]):
                ok = False
        if not ok:
            bad_step = step + 1
            break

    return X, XH, Z, U_raw, U_sat, Err, Y, bad_step


if USING_NUMBA:
    closed_loop_rk4 = numba.njit(cache=True, fastmath=False)(closed_loop_rk4_numpy)
else:
    closed_loop_rk4 = closed_loop_rk4_numpy
