"""Shared helpers for the test suite: random states and the independent
direct-expansion oracle the pipeline is checked against."""

import numpy as np

from qquench import BasisGrid, make_state


def random_state(grid: BasisGrid, rng, avoid_nodes: bool = False):
    """A random complex unit vector on the grid."""
    while True:
        z = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        norm = np.linalg.norm(z)
        if norm < 1e-9:
            continue
        if avoid_nodes and np.min(np.abs(z)) / norm < 1e-3:
            continue
        return make_state(grid, z)


def branch_valid_state(grid: BasisGrid, rng, margin: float = 0.45):
    """A random state satisfying Re[w_u] <= margin for the uniform selector.

    Rejection sampling, blending toward the uniform state (whose w_u are all
    exactly 1/N) when pure rejection keeps failing.
    """
    n = grid.size
    uniform = np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    for blend in np.linspace(0.0, 0.9, 10):
        for _ in range(50):
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            z = z / np.linalg.norm(z)
            z = (1.0 - blend) * z + blend * uniform
            z = z / np.linalg.norm(z)
            total = z.sum()
            if abs(total) < 1e-6:
                continue
            w = z / total
            if np.max(w.real) <= margin and np.min(np.abs(z)) > 1e-6:
                return make_state(grid, z)
    raise RuntimeError("rejection sampling failed to find a branch-valid state")


def quench_matrix(n: int, bin_index: int, theta: float) -> np.ndarray:
    """The quench operator written out as an explicit dense matrix."""
    op = np.eye(n, dtype=np.complex128)
    op[bin_index, bin_index] = np.exp(1j * theta)
    return op


def oracle_probabilities(psi, overlaps, thetas):
    """Direct-expansion projection probabilities, no shared code with scan.

    Returns (P0, Pr[bin, depth]) by building each quench operator as a
    dense matrix, applying it, and projecting onto the selector.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    overlaps = np.asarray(overlaps, dtype=np.complex128)
    n = psi.size
    p0 = abs(overlaps @ psi) ** 2
    pr = np.empty((n, len(thetas)))
    for u in range(n):
        for d, theta in enumerate(thetas):
            quenched = quench_matrix(n, u, theta) @ psi
            pr[u, d] = abs(overlaps @ quenched) ** 2
    return p0, pr


def scaled_amplitudes(psi, overlaps):
    """w_u = psi_u <b0|a_u> / <b0|psi>, the quantity the inversion targets."""
    psi = np.asarray(psi, dtype=np.complex128)
    overlaps = np.asarray(overlaps, dtype=np.complex128)
    return psi * overlaps / (overlaps @ psi)
