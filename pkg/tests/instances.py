"""Random instance builders shared by the way-model and acceptance tests."""

import numpy as np

from waylab.explorer import random_hermitian, random_unitary
from waylab.way_model import SystemObservable, build_way_model


def hermitian_basis(dim):
    """Real basis of the Hermitian ``dim x dim`` matrices (orthonormal in Frobenius norm)."""
    basis = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j], e[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(e)
    return basis


def invariant_additive_space(model):
    """Brute-force basis of all pairs ``(H1, H2)`` whose additive sum holds Range U invariant.

    Solves the linear constraint ``(I - R)(H1 (x) I + I (x) H2) R = 0`` as a null
    space over the real coordinates of both Hermitian factors.
    """
    n_s, n_a = model.dims
    r = model.range_projector
    comp = np.eye(r.shape[0]) - r
    pairs = [(b, np.zeros((n_a, n_a))) for b in hermitian_basis(n_s)]
    pairs += [(np.zeros((n_s, n_s)), b) for b in hermitian_basis(n_a)]
    columns = []
    for h1, h2 in pairs:
        h = np.kron(h1, np.eye(n_a)) + np.kron(np.eye(n_s), h2)
        block = comp @ h @ r
        columns.append(np.concatenate([block.real.ravel(), block.imag.ravel()]))
    _, sing, vh = np.linalg.svd(np.stack(columns, axis=1))
    rank = int(np.sum(sing > 1e-10 * sing[0]))
    null = vh[rank:]
    return pairs, null


def random_invariant_additive(model, rng, scale=1.0):
    pairs, null = invariant_additive_space(model)
    coeffs = rng.standard_normal(null.shape[0]) @ null * scale
    h1 = sum(c * p[0] for c, p in zip(coeffs, pairs))
    h2 = sum(c * p[1] for c, p in zip(coeffs, pairs))
    return h1, h2


def random_system(dim, rng, degenerate=False):
    """Observable with integer eigenvalues (gaps >= 1) in a random eigenbasis."""
    if degenerate:
        # At least two levels unless dim == 2, where degenerate means scalar.
        n_levels = int(rng.integers(min(2, dim - 1), dim))
        levels = rng.choice(np.arange(-5, 6), size=n_levels, replace=False)
        eigen = np.concatenate([levels, rng.choice(levels, size=dim - n_levels)])
    else:
        eigen = rng.choice(np.arange(-5, 6), size=dim, replace=False)
    w = random_unitary(dim, rng)
    return SystemObservable.from_operator(w @ np.diag(eigen.astype(float)) @ w.conj().T)


def off_block_part(h, projectors):
    """The part of ``h`` that couples different spectral subspaces."""
    return h - sum(q @ h @ q for q in projectors)


def random_intertwining_model(system, rng, conserving):
    """Model with ``H_SA = U H_S U^dag + (I - R) K (I - R)``, so U intertwines exactly.

    When ``conserving`` is false and ``S`` has more than one eigenspace,
    ``H_S`` gets an inter-eigenspace coupling of magnitude log-uniform in
    [1e-3, 1], far from any 1e-8 threshold.
    """
    model = build_way_model(system)
    g = random_hermitian(system.dim, rng)
    qs = system.projectors
    h_s = sum(q @ g @ q for q in qs)
    if not conserving and len(qs) > 1:
        coupling = off_block_part(random_hermitian(system.dim, rng), qs)
        coupling *= 10 ** rng.uniform(-3, 0) / np.linalg.norm(coupling)
        h_s = h_s + coupling
    r = model.range_projector
    comp = np.eye(r.shape[0]) - r
    h_sa = model.u @ h_s @ model.u.conj().T + comp @ random_hermitian(r.shape[0], rng) @ comp
    return model.with_hamiltonians(h_sa=h_sa)


def random_traditional_inputs(dim, rng):
    """Nondegenerate system, ``H1`` diagonal in its eigenbasis, ``H2 = a I`` and a unit ``xi``."""
    system = random_system(dim, rng)
    phi = system.basis
    h1 = phi @ np.diag(rng.standard_normal(dim)) @ phi.conj().T
    a = float(rng.standard_normal())
    xi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    xi /= np.linalg.norm(xi)
    return system, xi, h1, a * np.eye(dim), a


def perturbation_fixing(xi, rng):
    """Unit-norm Hermitian ``G`` with ``G xi = 0``, so ``xi`` stays an eigenvector of ``H2 + eps G``."""
    dim = xi.shape[0]
    p = np.eye(dim) - np.outer(xi, xi.conj())
    g = p @ random_hermitian(dim, rng) @ p
    return g / np.linalg.norm(g)
