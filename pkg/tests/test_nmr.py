"""Spin operators, thermal state, temporal averaging and the gate sequence."""

import numpy as np
import pytest

from pseudobound import core, nmr, states
from conftest import A_OPT, KAPPA_H

PARAMS = states.StateParams.symmetric(A_OPT)


def test_spin_operator_basics():
    iz1 = nmr.spin_operator(1, "z")
    assert np.trace(iz1) == 0
    np.testing.assert_allclose(np.diag(iz1).real,
                               [0.5] * 4 + [-0.5] * 4, atol=1e-15)
    for q in (1, 2, 3):
        for axis in "xyz":
            vals = np.linalg.eigvalsh(nmr.spin_operator(q, axis))
            np.testing.assert_allclose(np.sort(vals), [-0.5] * 4 + [0.5] * 4,
                                       atol=1e-15)
    comm = (nmr.spin_operator(1, "x") @ nmr.spin_operator(1, "y")
            - nmr.spin_operator(1, "y") @ nmr.spin_operator(1, "x"))
    np.testing.assert_allclose(comm, 1j * nmr.spin_operator(1, "z"), atol=1e-15)
    with pytest.raises(ValueError):
        nmr.spin_operator(4, "z")
    with pytest.raises(ValueError):
        nmr.spin_operator(1, "w")


def test_equilibrium_state():
    sys = nmr.DEFAULT_SYSTEM
    kappas = nmr.boltzmann_factors(sys, 12.0, 290.0)
    assert kappas[1] == pytest.approx(8.4e-5, rel=0.02)
    assert kappas[0] / kappas[1] == pytest.approx(0.2516, abs=1e-4)
    rho = nmr.equilibrium_state(sys, 12.0, 290.0)
    assert np.max(np.abs(rho.matrix - np.diag(np.diag(rho.matrix)))) == 0.0
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)
    hot = nmr.equilibrium_state(sys, 12.0, 1e12)
    assert np.max(np.abs(hot.matrix - np.eye(8) / 8)) < 1e-12
    with pytest.raises(ValueError):
        nmr.equilibrium_state(sys, -1.0, 290.0)


def test_initial_states_structure():
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, KAPPA_H)
    assert len(five) == 5
    for rho in five:
        m = rho.matrix
        assert np.max(np.abs(m - np.diag(np.diag(m)))) == 0.0
        assert np.trace(m).real == pytest.approx(1.0, abs=1e-15)
        assert rho.eigenvalues()[0] >= 0.0
    # pairwise distinct
    for i in range(5):
        for j in range(i + 1, 5):
            assert np.max(np.abs(five[i].matrix - five[j].matrix)) > 1e-7
    # the two-spin order of the second input: deviations +-kappa/16
    dev2 = np.diag(five[1].matrix).real - 1 / 8
    np.testing.assert_allclose(
        np.abs(dev2), KAPPA_H / 16, rtol=1e-9)
    np.testing.assert_allclose(
        np.sign(dev2), [-1, -1, 1, 1, 1, 1, -1, -1], atol=0)
    with pytest.raises(ValueError):
        nmr.initial_states(nmr.DEFAULT_SYSTEM, 2e-3)
    with pytest.raises(ValueError):
        nmr.initial_states(nmr.DEFAULT_SYSTEM, 0.0)


def test_target_diagonal_coefficients():
    # closed forms implied by the diagonal structure of the seed, evaluated
    # independently of the conjugation code path
    a = A_OPT
    denom = a * (3 * a + 2) + 3
    d_a = 2 * ((a - 2) * a - 1) / denom
    d_b = -2 * (a - 1) ** 2 / denom
    d_e = 48 / denom - 8
    expansion = nmr.target_diagonal(PARAMS, 2.3e-5)
    assert expansion.single_spin[0] == pytest.approx(d_a, abs=1e-9)
    assert expansion.single_spin[1] == pytest.approx(d_b, abs=1e-9)
    assert expansion.single_spin[2] == pytest.approx(d_b, abs=1e-9)
    assert expansion.two_spin[0] == pytest.approx(2 * d_a, abs=1e-9)
    assert expansion.two_spin[1] == pytest.approx(2 * d_a, abs=1e-9)
    assert expansion.two_spin[2] == pytest.approx(2 * d_b, abs=1e-9)
    assert expansion.three_spin == pytest.approx(d_e, abs=1e-9)
    # the two-digit working-point values
    assert d_a == pytest.approx(-0.78, abs=0.01)
    assert d_b == pytest.approx(-0.21, abs=0.01)
    assert d_e == pytest.approx(3.85, abs=0.01)


def test_target_diagonal_guards():
    with pytest.raises(ValueError, match="symmetric"):
        nmr.target_diagonal(states.StateParams(0.3, 0.3, 0.4), 1e-5)
    with pytest.raises(ValueError):
        nmr.target_diagonal(PARAMS, 0.0)


def test_target_diagonal_scaling_linearity():
    base = nmr.target_diagonal(PARAMS, 1e-5).deviation()
    scaled = nmr.target_diagonal(PARAMS, 3e-5).deviation()
    np.testing.assert_allclose(scaled, 3 * base, atol=1e-18)


def test_single_spin_ratio():
    r = nmr.single_spin_ratio(A_OPT)
    assert r == pytest.approx(0.27, abs=0.005)
    assert r == pytest.approx(0.2720348, abs=1e-6)


def test_matched_fraction():
    p = nmr.matched_fraction(PARAMS, KAPPA_H)
    assert KAPPA_H / p == pytest.approx(3.61, abs=0.01)


def test_weight_solver_exact_single_target():
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, KAPPA_H)
    target = nmr.expand_diagonal_state(five[2], KAPPA_H)
    sol = nmr.solve_temporal_weights(five, target)
    np.testing.assert_allclose(sol.weights, [0, 0, 1, 0, 0], atol=1e-9)
    assert sol.residual <= 1e-12
    assert sol.achieved_p == pytest.approx(KAPPA_H, rel=1e-9)


def test_weight_solver_reaches_seed_exactly():
    p = nmr.matched_fraction(PARAMS, KAPPA_H)
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, KAPPA_H)
    sol = nmr.solve_temporal_weights(five, nmr.target_diagonal(PARAMS, p))
    assert sol.residual <= 1e-10
    assert np.all(sol.weights >= 0)
    assert np.sum(sol.weights) == pytest.approx(1.0, abs=1e-12)
    assert sol.achieved_p == pytest.approx(p, rel=1e-9)
    # the two-digit reference weights, once renormalized to an actual simplex
    reference = np.array([0.36, 0.27, 0.29, 0.08, 0.27])
    np.testing.assert_allclose(sol.weights, reference / reference.sum(),
                               atol=0.01)


def test_weight_solver_reports_infeasible_target():
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, KAPPA_H)
    # a GHZ-corner-free diagonal state the five spin orders cannot reach
    odd = np.eye(8, dtype=complex) / 8.0
    odd[0, 0] += 5e-5
    odd[1, 1] -= 5e-5
    sol = nmr.solve_temporal_weights(
        five, nmr.expand_diagonal_state(odd, KAPPA_H))
    assert sol.residual > 1e-6 * KAPPA_H


def test_preparation_unitary():
    u = nmr.preparation_unitary()
    np.testing.assert_allclose(u @ u.conj().T, np.eye(8), atol=1e-14)
    ghz = states.ghz(+1)
    e100 = np.zeros(8); e100[4] = 1.0
    np.testing.assert_allclose(u @ e100, ghz, atol=1e-15)


def test_preparation_factorization():
    v_sel, v_cnot = nmr.factor_preparation()
    u = nmr.preparation_unitary()
    np.testing.assert_allclose(v_cnot @ v_sel, u, atol=1e-14)
    for v in (v_sel, v_cnot):
        np.testing.assert_allclose(v @ v.conj().T, np.eye(8), atol=1e-14)
    # the selective rotation only touches the (|000>, |100>) plane
    e000 = np.zeros(8); e000[0] = 1.0
    e100 = np.zeros(8); e100[4] = 1.0
    np.testing.assert_allclose(v_sel @ e100, (e000 + e100) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(v_sel @ e000, (e000 - e100) / np.sqrt(2), atol=1e-15)
    for k in (1, 2, 3, 5, 6, 7):
        e = np.zeros(8); e[k] = 1.0
        np.testing.assert_allclose(v_sel @ e, e, atol=1e-15)
    # the remainder only permutes populations
    mods = np.abs(v_cnot)
    assert np.all(np.isclose(mods, 0, atol=1e-14) | np.isclose(mods, 1, atol=1e-14))


def test_preparation_weld():
    # the single assertion tying the seed, the five inputs, the weights and
    # the gate sequence together
    p = nmr.matched_fraction(PARAMS, KAPPA_H)
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, KAPPA_H)
    sol = nmr.solve_temporal_weights(five, nmr.target_diagonal(PARAMS, p))
    rho_d = nmr.mix_states(five, sol.weights)
    u = nmr.preparation_unitary()
    prepared = u @ rho_d.matrix @ u.conj().T
    expected = states.pseudo_state(states.bound_entangled_state(PARAMS),
                                   sol.achieved_p).rho.matrix
    assert np.max(np.abs(prepared - expected)) <= 1e-12


def test_prepare_pseudo_state_any_scale():
    for p in (1e-5, 5e-4):
        ps = nmr.prepare_pseudo_state(PARAMS, p)
        expected = states.pseudo_state(states.bound_entangled_state(PARAMS), p)
        assert np.max(np.abs(ps.rho.matrix - expected.rho.matrix)) <= 1e-12


def test_conjugation_preserves_spectrum(rng):
    u = nmr.preparation_unitary()
    for _ in range(10):
        rho = core.random_density_operator(rng)
        before = np.linalg.eigvalsh(rho.matrix)
        after = np.linalg.eigvalsh(u @ rho.matrix @ u.conj().T)
        np.testing.assert_allclose(after, before, atol=1e-12)


def test_depolarize(rho_opt):
    np.testing.assert_array_equal(nmr.depolarize(rho_opt, 0.0).matrix,
                                  rho_opt.matrix)
    np.testing.assert_allclose(nmr.depolarize(rho_opt, 1.0).matrix,
                               np.eye(8) / 8, atol=1e-16)
    with pytest.raises(ValueError):
        nmr.depolarize(rho_opt, 1.5)


def test_depolarization_level_for_target_distance(rho_opt):
    # bisection on the monotone map lambda -> trace distance
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if core.trace_distance(rho_opt, nmr.depolarize(rho_opt, mid)) < 0.09:
            lo = mid
        else:
            hi = mid
    assert 0.0 < lo < 1.0
    assert core.trace_distance(rho_opt, nmr.depolarize(rho_opt, lo)) == \
        pytest.approx(0.09, abs=1e-6)


def test_calibrate_depolarization(rho_opt):
    lam = nmr.calibrate_depolarization(rho_opt, 0.98)
    assert core.uhlmann_fidelity(rho_opt, nmr.depolarize(rho_opt, lam)) == \
        pytest.approx(0.98, abs=1e-6)
