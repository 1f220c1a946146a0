"""Small shared utilities for the test suite."""

import numpy as np

from fockprop.superop import random_density


def maxabs(x):
    return float(np.max(np.abs(x)))


def vacuum_density(dim):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def seeded_density(dim, *key):
    """Reproducible random density; key parts feed the rng seed sequence."""
    return random_density(dim, np.random.default_rng(list(key)))


def hermiticity_error(rho):
    return maxabs(rho - rho.conj().T)


def min_eigenvalue(rho):
    herm = 0.5 * (rho + rho.conj().T)
    return float(np.linalg.eigvalsh(herm).min())


def trace_distance(a, b):
    sv = np.linalg.svd(np.asarray(a) - np.asarray(b), compute_uv=False)
    return 0.5 * float(sv.sum())
