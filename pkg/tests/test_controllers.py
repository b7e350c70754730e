"""Control-law reference functions against independently coded formulas."""

import numpy as np
import pytest

import hexreg
from hexreg import controllers


def make_runtime(art, law=hexreg.FORWARDING, z=0.0, x_hat=None, **kw):
    return hexreg.ControllerRuntime(law=law, artifacts=art, z=z,
                                    x_hat=x_hat, **kw)


def test_law_codes_stable():
    # the kernel dispatches on these integers; they are part of the
    # artifact/CSV compatibility surface and must not be renumbered
    assert controllers.LAW_CODES == {
        "forwarding": 0, "output_feedback": 1, "integral_only": 2, "pi": 3,
    }


def test_runtime_rejects_unknown_law(fwd_art):
    with pytest.raises(ValueError):
        hexreg.ControllerRuntime(law="bang_bang", artifacts=fwd_art)


def test_runtime_output_feedback_needs_observer(fwd_art):
    with pytest.raises(hexreg.MissingObserverStateError):
        hexreg.ControllerRuntime(law=hexreg.OUTPUT_FEEDBACK,
                                 artifacts=fwd_art, x_hat=fwd_art.x_ss)


def test_forwarding_phi_zero_at_equilibrium(hexsys, fwd_art):
    rt = make_runtime(fwd_art)
    assert hexreg.forwarding_phi(rt, hexsys, fwd_art.x_ss) == 0.0


def test_forwarding_phi_pure_integral_offset(hexsys, fwd_art):
    # with x at the anchor the quadratic term drops and only the
    # integrator couples through M g_ss
    rt = make_runtime(fwd_art, z=2.5)
    g_ss = controllers.input_gain(hexsys, fwd_art)
    expected = fwd_art.k_i * 2.5 * float(fwd_art.M @ g_ss)
    assert hexreg.forwarding_phi(rt, hexsys, fwd_art.x_ss) == pytest.approx(
        expected, rel=1e-12)


def test_forwarding_phi_double_implementation(hexsys, fwd_art):
    """Term-by-term re-expansion with independent numpy code."""
    rng = np.random.default_rng(42)
    g_ss = hexsys.B @ fwd_art.x_ss + hexsys.b
    rt = make_runtime(fwd_art)
    for _ in range(50):
        x = fwd_art.x_ss + rng.normal(0.0, 5.0, 16)
        rt.z = float(rng.normal(0.0, 3.0))
        xt = x - fwd_art.x_ss
        w = hexsys.B @ xt + g_ss
        quad = -fwd_art.k_p * float(xt @ fwd_art.P @ w)
        integ = fwd_art.k_i * (rt.z - float(fwd_art.M @ xt)) * float(fwd_art.M @ w)
        got = hexreg.forwarding_phi(rt, hexsys, x)
        assert got == pytest.approx(quad + integ, rel=1e-12, abs=1e-15)


def test_output_feedback_phi_matches_on_exact_estimate(
        synthetic_observable, synthetic_observer):
    sys = synthetic_observable
    eq = hexreg.equilibrium_at(sys, 0.0)
    art = hexreg.forwarding_design(sys, eq, k_p=0.7, k_i=0.3)
    art.observer = synthetic_observer
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = eq.x_ss + rng.normal(0.0, 1.0, 3)
        z = float(rng.normal())
        rt_of = make_runtime(art, law=hexreg.OUTPUT_FEEDBACK, z=z, x_hat=x)
        rt_fw = make_runtime(art, z=z)
        assert hexreg.output_feedback_phi(rt_of, sys) == pytest.approx(
            hexreg.forwarding_phi(rt_fw, sys, x), rel=1e-14)


def test_output_feedback_phi_zero_at_anchor(synthetic_observable,
                                            synthetic_observer):
    sys = synthetic_observable
    eq = hexreg.equilibrium_at(sys, 0.0)
    art = hexreg.forwarding_design(sys, eq, k_p=0.7, k_i=0.3)
    art.observer = synthetic_observer
    rt = make_runtime(art, law=hexreg.OUTPUT_FEEDBACK, z=0.0,
                      x_hat=eq.x_ss.copy())
    assert hexreg.output_feedback_phi(rt, sys) == 0.0


def test_observer_step_zero_innovation(synthetic_observable,
                                       synthetic_observer):
    """When y = D x_hat the correction vanishes and the estimate follows
    the plant model."""
    sys = synthetic_observable
    eq = hexreg.equilibrium_at(sys, 0.0)
    art = hexreg.forwarding_design(sys, eq, k_p=0.7, k_i=0.3)
    art.observer = synthetic_observer
    rng = np.random.default_rng(3)
    xh = eq.x_ss + rng.normal(0.0, 1.0, 3)
    rt = make_runtime(art, law=hexreg.OUTPUT_FEEDBACK, x_hat=xh)
    rhs = controllers.observer_step_rhs(rt, sys, sys.D @ xh, 0.05)
    assert np.allclose(rhs, hexreg.dynamics(sys, xh, 0.05), atol=1e-12)


def test_observer_error_dynamics_identity(synthetic_observable,
                                          synthetic_observer):
    """xhat_dot - x_dot collapses to (A + sat(u) B - L D)(xhat - x)."""
    sys = synthetic_observable
    obs = synthetic_observer
    eq = hexreg.equilibrium_at(sys, 0.0)
    art = hexreg.forwarding_design(sys, eq, k_p=0.7, k_i=0.3)
    art.observer = obs
    rng = np.random.default_rng(9)
    for u in (-0.1, 0.0, 0.07):
        x = rng.normal(0.0, 2.0, 3)
        xh = x + rng.normal(0.0, 1.0, 3)
        rt = make_runtime(art, law=hexreg.OUTPUT_FEEDBACK, x_hat=xh)
        rhs_hat = controllers.observer_step_rhs(rt, sys, sys.D @ x, u)
        rhs_x = hexreg.dynamics(sys, x, u)
        us = np.clip(u, sys.u_min, sys.u_max)
        A_err = sys.A + us * sys.B - obs.L @ sys.D
        assert np.max(np.abs((rhs_hat - rhs_x) - A_err @ (xh - x))) <= 1e-10


def test_integral_only_phi_zero(io_art):
    rt = make_runtime(io_art, law=hexreg.INTEGRAL_ONLY, z=0.0)
    assert hexreg.integral_only_phi(rt) == 0.0


def test_integral_only_phi_formula(io_art):
    rt = make_runtime(io_art, law=hexreg.INTEGRAL_ONLY, z=2.0)
    # phi = sign_dc * k_i * z; on this plant sign_dc = +1, which drives u
    # upward when the output runs high (the steady output slope in u is
    # negative, so that is the contracting direction)
    assert hexreg.integral_only_phi(rt) == pytest.approx(
        io_art.sign_dc * io_art.k_i * 2.0, rel=1e-15)


def test_integral_only_phi_warns_above_bound(io_art):
    from dataclasses import replace

    hot = replace(io_art, k_i=2.0 * io_art.ki_star)
    rt = make_runtime(hot, law=hexreg.INTEGRAL_ONLY, z=1.0)
    with pytest.warns(hexreg.GainAboveBoundWarning):
        hexreg.integral_only_phi(rt)


def test_pi_phi(fwd_art):
    rt = make_runtime(fwd_art, law=hexreg.PI, kp_pi=-0.01, ki_pi=-0.001)
    assert hexreg.pi_phi(rt, 0.0) == 0.0
    rt.z = 3.0
    # phi = -(kp e + ki z)
    assert hexreg.pi_phi(rt, 0.5) == pytest.approx(
        -(-0.01 * 0.5 + -0.001 * 3.0), rel=1e-15)


def test_integrator_rhs():
    assert controllers.integrator_rhs(0.0) == 0.0
    assert controllers.integrator_rhs(1.5) == 1.5
