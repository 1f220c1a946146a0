import math

import numpy as np
import pytest

from fockprop.fock import annihilation, coherent_state, density_from_ket, fidelity_pure, observables
from fockprop.kerr_zero_t import (
    KerrZeroTParams,
    TAYLOR_SWITCH,
    exp_diag_apply,
    exp_fR_jminus_apply,
    propagate_kerr_zero_t,
)
from fockprop.kerr_zero_t import _decay_weight
from fockprop.oracle import expm_evolve
from fockprop.superop import build_liouvillian, kerr_zero_t_generator, lowering_sandwich

from helpers import hermiticity_error, maxabs, min_eigenvalue, seeded_density, vacuum_density


PARAMS = KerrZeroTParams(chi=1.0, gamma_minus=0.1)


def test_param_validation():
    with pytest.raises(ValueError):
        KerrZeroTParams(chi=1.0, gamma_minus=-0.1)
    KerrZeroTParams(chi=-2.0, gamma_minus=0.0)


def test_input_validation():
    with pytest.raises(ValueError):
        propagate_kerr_zero_t(vacuum_density(4), -0.1, PARAMS)
    with pytest.raises(ValueError):
        propagate_kerr_zero_t(np.zeros((3, 4)), 0.1, PARAMS)


def test_matches_dense_exponential_on_the_window():
    # nothing in this flow moves probability upward, so truncating the
    # generator and truncating the solution agree to rounding
    dim = 15
    L = build_liouvillian(kerr_zero_t_generator(dim, PARAMS.chi, PARAMS.gamma_minus))
    for i in range(10):
        rho0 = seeded_density(dim, 3, i)
        got = propagate_kerr_zero_t(rho0, 0.7, PARAMS)
        ref = expm_evolve(L, rho0, 0.7)
        assert maxabs(got - ref) < 1e-12


def test_semigroup_property():
    ket, _ = coherent_state(20, 1.5)
    rho0 = density_from_ket(ket)
    one = propagate_kerr_zero_t(rho0, 0.7, PARAMS)
    two = propagate_kerr_zero_t(propagate_kerr_zero_t(rho0, 0.3, PARAMS), 0.4, PARAMS)
    assert maxabs(one - two) < 1e-10


def test_physicality_of_evolved_coherent_state():
    ket, _ = coherent_state(20, 2.0)
    rho = density_from_ket(ket)
    for t in (0.1, 0.5, 1.0):
        out = propagate_kerr_zero_t(rho, t, PARAMS)
        assert abs(np.trace(out) - 1.0) < 1e-12
        assert hermiticity_error(out) < 1e-13
        assert min_eigenvalue(out) > -1e-12


def test_decay_weight_branches():
    # straddle the series switch and compare to a higher-order expansion;
    # at |z t| near the switch both sides must agree to the square of it
    t = 1.0
    for mag in (1e-9, 1e-7, 0.5e-6, 0.99e-6, 1.01e-6, 1e-5):
        z = mag * (0.6 + 0.8j)
        chi = z.imag
        got = _decay_weight(np.array([1]), t, chi, z.real)[0]
        zt = z * t
        ref = t * (1.0 - zt + (2.0 / 3.0) * zt**2 - (1.0 / 3.0) * zt**3)
        assert abs(got - ref) / abs(ref) < 1e-9
    # z = 0 exactly: the weight is plain t, with no division blowup
    w0 = _decay_weight(np.array([0]), 2.5, 1.0, 0.0)[0]
    assert w0 == pytest.approx(2.5, abs=0.0)
    assert np.isfinite(_decay_weight(np.arange(-3, 4), 0.0, 1.0, 0.0)).all()


def test_decay_weight_closed_form_region():
    z = 0.1 + 2.0j
    t = 0.8
    got = _decay_weight(np.array([2]), t, 1.0, 0.1)[0]
    ref = (1.0 - np.exp(-2.0 * z * t)) / (2.0 * z)
    assert abs(got - ref) < 1e-15
    assert abs(z * t) > TAYLOR_SWITCH


def test_mean_occupation_decays_exponentially():
    dim = 30
    ket, _ = coherent_state(dim, 2.0)
    rho = density_from_ket(ket)
    for t in (0.0, 0.3, 1.0, 2.0):
        out = propagate_kerr_zero_t(rho, t, PARAMS)
        want = 4.0 * math.exp(-2.0 * PARAMS.gamma_minus * t)
        assert abs(observables(out)["mean_n"] - want) < 1e-12


def test_lossless_revival_at_full_period():
    params = KerrZeroTParams(chi=1.0, gamma_minus=0.0)
    ket, _ = coherent_state(25, 1.8)
    rho = density_from_ket(ket)
    out = propagate_kerr_zero_t(rho, math.pi / params.chi, params)
    assert maxabs(out - rho) < 1e-12


def test_lossless_two_component_superposition_at_half_period():
    # at a quarter of the phase period the pure Kerr flow turns a coherent
    # state into an equal superposition of two opposite-phase copies; check
    # against an independently built target with the per-level phase applied
    # straight to the ket
    dim = 25
    params = KerrZeroTParams(chi=1.0, gamma_minus=0.0)
    ket, _ = coherent_state(dim, 1.5)
    rho = density_from_ket(ket)
    t = math.pi / (2.0 * params.chi)
    out = propagate_kerr_zero_t(rho, t, params)
    n = np.arange(dim)
    target = np.exp(-0.5j * math.pi * n * (n - 1)) * ket
    assert fidelity_pure(target, out) > 1.0 - 1e-10


def test_vacuum_is_stationary():
    rho = vacuum_density(8)
    out = propagate_kerr_zero_t(rho, 3.7, PARAMS)
    assert maxabs(out - rho) == 0.0


def test_lowering_series_against_brute_force():
    dim = 8
    gm = 0.35
    c = 0.3 + 0.1j
    rho = seeded_density(dim, 4)
    got = exp_fR_jminus_apply(lambda k: np.full(k.shape, c), rho, gm)

    a = annihilation(dim)
    ref = np.zeros_like(rho)
    lower_j = np.eye(dim, dtype=complex)
    for j in range(dim):
        ref += (c * 2.0 * gm) ** j / math.factorial(j) * (lower_j @ rho @ lower_j.conj().T)
        lower_j = a @ lower_j
    assert maxabs(got - ref) < 1e-12


def test_lowering_series_against_dense_exponential():
    dim = 8
    gm = 0.35
    rho = seeded_density(dim, 5)
    got = exp_fR_jminus_apply(lambda k: np.full(k.shape, 0.4 + 0.0j), rho, gm)
    L = build_liouvillian(lowering_sandwich(dim, 2.0 * gm))
    ref = expm_evolve(L, rho, 0.4)
    assert maxabs(got - ref) < 1e-12


def test_elementwise_exponential_pattern():
    rho = np.ones((3, 3), dtype=complex)
    out = exp_diag_apply(lambda k, s: k + 1j * s, rho)
    n = np.arange(3)
    want = np.exp((n[:, None] - n[None, :]) + 1j * (n[:, None] + n[None, :]))
    assert maxabs(out - want) < 1e-14
