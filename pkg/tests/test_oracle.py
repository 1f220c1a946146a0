import math

import numpy as np
import pytest
import scipy.linalg

from fockprop.oracle import (
    IntegratorConfig,
    STEP_NORM_CAP,
    converged_window_reference,
    crop,
    embed,
    expm_dense,
    expm_evolve,
    recommended_steps,
    rk4_evolve,
)
from fockprop.superop import build_liouvillian, kerr_zero_t_generator

from helpers import maxabs, seeded_density, vacuum_density


def test_expm_dense_against_scipy():
    rng = np.random.default_rng(42)
    for scale in (0.1, 1.0, 10.0):
        a = scale * (rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30)))
        ours = expm_dense(a)
        ref = scipy.linalg.expm(a)
        assert maxabs(ours - ref) < 1e-9 * max(1.0, maxabs(ref))


def test_expm_dense_trivial_cases():
    assert maxabs(expm_dense(np.zeros((3, 3))) - np.eye(3)) == 0.0
    nil = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert maxabs(expm_dense(nil) - np.array([[1.0, 1.0], [0.0, 1.0]])) < 1e-15


def test_expm_evolve_shape_check():
    L = build_liouvillian(kerr_zero_t_generator(4, 1.0, 0.1))
    with pytest.raises(ValueError):
        expm_evolve(L, np.eye(5, dtype=complex), 0.1)


def test_rk4_matches_expm_at_recommended_steps():
    dim = 10
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    rho0 = seeded_density(dim, 20)
    ref = expm_evolve(L, rho0, 0.6)
    out, err = rk4_evolve(L, rho0, 0.6)
    assert maxabs(out - ref) < 1e-10
    assert err is not None and err < 1e-9


def test_rk4_error_estimate_optional():
    dim = 6
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    rho0 = seeded_density(dim, 21)
    cfg = IntegratorConfig(steps=200, richardson=False)
    _, err = rk4_evolve(L, rho0, 0.5, cfg)
    assert err is None


def test_rk4_fourth_order_convergence():
    dim = 8
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    rho0 = seeded_density(dim, 22)
    t = 0.4
    ref = expm_evolve(L, rho0, t)
    errs = []
    for steps in (400, 800):
        out, _ = rk4_evolve(L, rho0, t, IntegratorConfig(steps=steps, richardson=False))
        errs.append(maxabs(out - ref))
    slope = math.log2(errs[0] / errs[1])
    assert abs(slope - 4.0) < 0.3


def test_rk4_input_validation():
    dim = 4
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    rho0 = vacuum_density(dim)
    with pytest.raises(ValueError):
        rk4_evolve(L, rho0, -0.1)
    with pytest.raises(ValueError):
        rk4_evolve(L, np.eye(5, dtype=complex), 0.1)
    out, err = rk4_evolve(L, rho0, 0.0)
    assert maxabs(out - rho0) == 0.0 and err == 0.0


def test_rk4_warns_on_fat_steps():
    dim = 8
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    rho0 = seeded_density(dim, 23)
    with pytest.warns(UserWarning, match="step norm"):
        rk4_evolve(L, rho0, 1.0, IntegratorConfig(steps=2, richardson=False))


def test_recommended_steps_behaviour():
    dim = 10
    L = build_liouvillian(kerr_zero_t_generator(dim, 1.0, 0.1))
    tight = recommended_steps(L, 1.0, accuracy=1e-12)
    loose = recommended_steps(L, 1.0, accuracy=1e-6)
    assert tight % 2 == 0 and loose % 2 == 0
    assert tight > loose >= 2
    # the cap keeps the step length sane even for very loose targets
    x = maxabs(L.entries) * 1.0
    assert x / recommended_steps(L, 1.0, accuracy=1.0) <= STEP_NORM_CAP * 1.001


def test_embed_and_crop():
    rho = seeded_density(4, 24)
    big = embed(rho, 7)
    assert big.shape == (7, 7)
    assert maxabs(big[4:, :]) == 0.0 and maxabs(big[:, 4:]) == 0.0
    assert maxabs(crop(big, 4) - rho) == 0.0
    with pytest.raises(ValueError):
        embed(rho, 3)


def test_converged_reference_is_exact_for_downward_only_flow():
    # without a raising feed nothing ever leaves the window upward, so
    # widening it cannot change the cropped result
    dim = 10
    rho0 = seeded_density(dim, 25)

    def build(n):
        return build_liouvillian(kerr_zero_t_generator(n, 1.0, 0.1))

    ref, conv = converged_window_reference(build, rho0, 0.5, pad=6, check=4, method="expm")
    assert conv < 1e-12
    same = expm_evolve(build(dim), rho0, 0.5)
    assert maxabs(ref - same) < 1e-12


def test_converged_reference_methods_agree():
    dim = 8
    rho0 = seeded_density(dim, 26)

    def build(n):
        return build_liouvillian(kerr_zero_t_generator(n, 1.0, 0.1))

    r1, _ = converged_window_reference(build, rho0, 0.3, pad=4, check=4, method="expm")
    r2, _ = converged_window_reference(build, rho0, 0.3, pad=4, check=4, method="rk4")
    assert maxabs(r1 - r2) < 1e-9
    with pytest.raises(ValueError):
        converged_window_reference(build, rho0, 0.3, method="simpson")
