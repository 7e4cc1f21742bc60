"""Seeded random instances shared across the test modules."""

import numpy as np

from tracecrit import CqEnsemble, DensityOperator, Povm, ProbDist, validate_density
from tracecrit.ensembles import bit_strings


def random_density(rng, dim: int) -> DensityOperator:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return validate_density(m / np.trace(m).real)


def random_pure_vector(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_probdist(rng, labels) -> ProbDist:
    labels = tuple(labels)
    w = rng.random(len(labels)) + 1e-6
    return ProbDist(labels, tuple(w / w.sum()))


def random_ensemble(rng, n_bits: int, dim: int, uniform_prior: bool = True) -> CqEnsemble:
    keys = bit_strings(n_bits)
    prior = ProbDist.uniform(keys) if uniform_prior else random_probdist(rng, keys)
    probes = {k: random_density(rng, dim) for k in keys}
    return CqEnsemble(n_bits, prior, probes)


def random_povm(rng, dim: int, n_outcomes: int) -> Povm:
    raws = []
    for _ in range(n_outcomes):
        b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raws.append(b @ b.conj().T)
    total = np.sum(raws, axis=0)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(vals**-0.5) @ vecs.conj().T
    elements = []
    for i, raw in enumerate(raws):
        op = inv_sqrt @ raw @ inv_sqrt
        elements.append((f"o{i}", 0.5 * (op + op.conj().T)))
    return Povm(tuple(elements))
