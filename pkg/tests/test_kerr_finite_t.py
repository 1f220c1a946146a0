import math

import numpy as np
import pytest

from fockprop.fock import coherent_state, creation, density_from_ket
from fockprop.kerr_finite_t import (
    KerrFiniteTParams,
    exp_gR_jplus_apply,
    propagate_kerr_finite_t,
    r_functions,
)
from fockprop.kerr_zero_t import KerrZeroTParams, propagate_kerr_zero_t
from fockprop.oracle import crop, embed, expm_evolve
from fockprop.superop import build_liouvillian, kerr_finite_t_generator, raising_sandwich

from helpers import hermiticity_error, maxabs, min_eigenvalue, seeded_density


PARAMS = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.05)


def test_trace_preserving_defaults():
    assert PARAMS.gamma0 == PARAMS.gamma_minus + PARAMS.gamma_plus
    assert PARAMS.c_gamma == -2.0 * PARAMS.gamma_plus


def test_off_convention_warns():
    with pytest.warns(UserWarning, match="trace-preserving"):
        KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.05, gamma0=0.2)
    with pytest.warns(UserWarning, match="trace-preserving"):
        KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.05, c_gamma=0.0)


def test_heating_warns():
    with pytest.warns(UserWarning, match="heating"):
        KerrFiniteTParams(chi=1.0, gamma_minus=0.05, gamma_plus=0.1)


def test_rate_validation_and_nbar():
    with pytest.raises(ValueError):
        KerrFiniteTParams(chi=1.0, gamma_minus=-0.1, gamma_plus=0.05)
    with pytest.raises(ValueError):
        KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=-0.05)
    assert PARAMS.nbar() == 1.0
    with pytest.warns(UserWarning):
        hot = KerrFiniteTParams(chi=1.0, gamma_minus=0.05, gamma_plus=0.1)
    with pytest.raises(ValueError):
        hot.nbar()


def test_factor_coefficients_at_zero_index_difference():
    r = r_functions(PARAMS, 0)
    assert r.beta == pytest.approx(5.0, abs=1e-13)
    assert r.alpha == pytest.approx(1.0 / 3.0, abs=1e-13)
    assert r.bigF == pytest.approx(0.1, abs=1e-13)
    assert r.delta == pytest.approx(-10.0, abs=1e-12)


def test_factor_coefficient_identities():
    # beta solves the quadratic; the other three are tied to it by the
    # two identities below, for every index difference
    g0, chi = PARAMS.gamma0, PARAMS.chi
    mu = 4.0 * PARAMS.gamma_minus * PARAMS.gamma_plus
    for k in range(-10, 11):
        r = r_functions(PARAMS, k)
        z = g0 + 1j * chi * k
        assert abs(mu * r.beta**2 - 2.0 * z * r.beta + 1.0) < 1e-12
        d = g0 * r.alpha + 1j * chi * k
        assert abs(d * d - (z * z - mu)) < 1e-12
        assert abs(r.delta + 1.0 / (2.0 * d)) < 1e-12
        assert abs(r.bigF - mu * r.beta) < 1e-14


def test_factor_coefficients_cold_limit():
    cold = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=1e-12)
    for k in (0, 3):
        z = cold.gamma0 + 1j * cold.chi * k
        assert abs(r_functions(cold, k).beta - 1.0 / (2.0 * z)) < 1e-9


def test_degenerate_discriminant_is_nudged():
    with pytest.warns(UserWarning, match="heating"):
        params = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.1)
    # z^2 = 4 gm gp exactly at k = 0, so delta diverges without the nudge
    with pytest.warns(UserWarning, match="degenerate"):
        r = r_functions(params, 0)
    assert np.isfinite([r.beta, r.alpha, r.bigF, r.delta]).all()


def test_zero_gamma0_rejected():
    with pytest.warns(UserWarning, match="trace-preserving"):
        params = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.05, gamma0=0.0)
    with pytest.raises(ValueError):
        r_functions(params, 0)


def test_literal_path_is_identity_at_time_zero():
    # the first two factors must cancel the last dressing pair exactly
    dim = 10
    for i in range(5):
        rho0 = seeded_density(dim, 17, i)
        out = propagate_kerr_finite_t(rho0, 0.0, PARAMS, method="literal")
        assert maxabs(out - rho0) < 1e-10


def test_cold_limit_dispatches_to_zero_temperature():
    params = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=0.0)
    rho0 = seeded_density(12, 18)
    got = propagate_kerr_finite_t(rho0, 0.8, params)
    ref = propagate_kerr_zero_t(rho0, 0.8, KerrZeroTParams(chi=1.0, gamma_minus=0.1))
    assert maxabs(got - ref) == 0.0


def test_continuity_in_the_cold_limit():
    dim = 15
    ket, _ = coherent_state(dim, 1.5)
    rho0 = density_from_ket(ket)
    warm = KerrFiniteTParams(chi=1.0, gamma_minus=0.1, gamma_plus=1e-8)
    got = propagate_kerr_finite_t(rho0, 1.0, warm)
    ref = propagate_kerr_zero_t(rho0, 1.0, KerrZeroTParams(chi=1.0, gamma_minus=0.1))
    assert maxabs(got - ref) < 1e-6


def test_resummed_matches_wide_window_exponential():
    # evolve the same small state on a much wider window with both the
    # closed form and the dense exponential; at that width the upward
    # leakage past the edge is far below the tolerance
    dim, wide = 10, 24
    L = build_liouvillian(kerr_finite_t_generator(
        wide, PARAMS.chi, PARAMS.gamma_minus, PARAMS.gamma_plus,
        PARAMS.gamma0, PARAMS.c_gamma,
    ))
    for i in range(2):
        big = embed(seeded_density(dim, 19, i), wide)
        got = propagate_kerr_finite_t(big, 0.5, PARAMS)
        ref = expm_evolve(L, big, 0.5)
        assert maxabs(crop(got, dim) - crop(ref, dim)) < 1e-9


def test_semigroup_property():
    ket, _ = coherent_state(15, 1.0)
    rho0 = density_from_ket(ket)
    one = propagate_kerr_finite_t(rho0, 0.5, PARAMS)
    two = propagate_kerr_finite_t(propagate_kerr_finite_t(rho0, 0.25, PARAMS), 0.25, PARAMS)
    assert maxabs(one - two) < 1e-8


def test_physicality_of_evolved_coherent_state():
    ket, _ = coherent_state(15, 1.0)
    rho = density_from_ket(ket)
    for t in (0.25, 1.0):
        out = propagate_kerr_finite_t(rho, t, PARAMS)
        # the trace slack is upward leakage past the window top, about
        # 1.3e-9 by t = 1 at this width
        assert abs(np.trace(out) - 1.0) < 1e-8
        assert hermiticity_error(out) < 1e-11
        assert min_eigenvalue(out) > -1e-9


def test_thermal_state_is_stationary():
    dim = 40
    ratio = PARAMS.nbar() / (PARAMS.nbar() + 1.0)
    weights = ratio ** np.arange(dim)
    thermal = np.diag(weights / weights.sum()).astype(complex)

    L = build_liouvillian(kerr_finite_t_generator(
        dim, PARAMS.chi, PARAMS.gamma_minus, PARAMS.gamma_plus,
        PARAMS.gamma0, PARAMS.c_gamma,
    ))
    rate = (L.entries @ thermal.flatten(order="F")).reshape((dim, dim), order="F")
    assert maxabs(rate) < 1e-10

    out = propagate_kerr_finite_t(thermal, 1.0, PARAMS)
    assert maxabs(out - thermal) < 1e-8


def test_literal_path_converges_to_resummed_with_window():
    # the literal factor order amplifies the top of the window, so the two
    # paths only agree in the wide-window limit around a confined state
    small = seeded_density(3, 20)
    devs = []
    for n in (8, 16, 24):
        big = embed(small, n)
        devs.append(maxabs(
            propagate_kerr_finite_t(big, 0.3, PARAMS, method="literal")
            - propagate_kerr_finite_t(big, 0.3, PARAMS, method="resummed")
        ))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] / devs[0] < 0.05


def test_unknown_method_rejected():
    mixed = np.eye(4, dtype=complex) / 4.0
    with pytest.raises(ValueError):
        propagate_kerr_finite_t(mixed, 0.1, PARAMS, method="magic")
    with pytest.raises(ValueError):
        propagate_kerr_finite_t(mixed, -0.1, PARAMS)


def test_raising_series_against_brute_force():
    dim = 8
    gp = 0.25
    c = 0.2 - 0.15j
    rho = seeded_density(dim, 21)
    got = exp_gR_jplus_apply(lambda k: np.full(k.shape, c), rho, gp)

    adag = creation(dim)
    ref = np.zeros_like(rho)
    raise_j = np.eye(dim, dtype=complex)
    for j in range(dim):
        ref += (c * 2.0 * gp) ** j / math.factorial(j) * (raise_j @ rho @ raise_j.conj().T)
        raise_j = adag @ raise_j
    assert maxabs(got - ref) < 1e-12


def test_raising_series_against_dense_exponential():
    dim = 8
    gp = 0.25
    rho = seeded_density(dim, 22)
    got = exp_gR_jplus_apply(lambda k: np.full(k.shape, 0.3 + 0.0j), rho, gp)
    L = build_liouvillian(raising_sandwich(dim, 2.0 * gp))
    ref = expm_evolve(L, rho, 0.3)
    assert maxabs(got - ref) < 1e-12
