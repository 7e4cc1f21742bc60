"""Dense complex linear algebra for small Hilbert spaces.

All operations work on plain numpy arrays (row-major, complex128) and
return fresh values; inputs are never mutated.  Dimensions stay small
(<= ~64), so dense Hermitian eigendecomposition is the workhorse and no
sparse or iterative machinery is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, BadTrace, DimMismatch, NotHermitian, NotPsd

#: Tolerance for Hermitian-symmetry checks.
HERM_TOL = 1e-9
#: Tolerance for unit-trace checks.
TRACE_TOL = 1e-9
#: Tolerance for unit-norm checks on state vectors.
NORM_TOL = 1e-9
#: Eigenvalues in [-PSD_TOL, 0) are treated as exact zeros.
PSD_TOL = 1e-9
#: Magnitude below which a vector component does not fix the eigenvector phase.
_PHASE_TOL = 1e-12


def _as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _require_square_hermitian(a, tol: float = HERM_TOL) -> np.ndarray:
    a = _as_complex(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    gap = float(np.max(np.abs(a - a.conj().T)))
    if gap > tol:
        raise NotHermitian(
            f"matrix deviates from its adjoint by {gap:.3e} (tolerance {tol:.1e})"
        )
    return a


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite operator with unit trace.

    Construction validates all three invariants and freezes the matrix,
    so instances can be shared freely between threads.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _require_square_hermitian(self.matrix)
        low = float(np.linalg.eigvalsh(m)[0])
        if low < -PSD_TOL:
            raise NotPsd(
                f"smallest eigenvalue {low:.3e} is below -{PSD_TOL:.1e}"
            )
        tr = float(m.trace().real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise BadTrace(f"trace is {tr!r}, off unit by {abs(tr - 1.0):.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in descending order, with tolerated negatives clamped to 0."""
        vals = np.linalg.eigvalsh(self.matrix)[::-1].copy()
        vals[(vals < 0.0) & (vals >= -PSD_TOL)] = 0.0
        return vals


@dataclass(frozen=True)
class PureState:
    """Unit vector in a small Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = _as_complex(self.amplitudes).reshape(-1)
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > NORM_TOL:
            raise BadParams(f"state vector norm is {nrm!r}, not 1 within {NORM_TOL:.1e}")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> DensityOperator:
        v = self.amplitudes
        return DensityOperator(np.outer(v, v.conj()))


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two matrices; dimensions multiply."""
    return np.kron(_as_complex(a), _as_complex(b))


def hermitian_eigen(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order with matching orthonormal eigenvectors.

    The global phase of each eigenvector column is fixed so that its first
    component of non-negligible magnitude is real and positive.  Measurement
    bases built from eigenvectors are therefore reproducible run to run.

    Raises NotHermitian when the input fails the symmetry check.
    """
    m = _require_square_hermitian(h)
    vals, vecs = np.linalg.eigh(m)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = int(np.argmax(np.abs(col) > _PHASE_TOL))
        pivot = col[idx]
        if abs(pivot) > _PHASE_TOL:
            vecs[:, j] = col * (pivot.conj() / abs(pivot))
    return vals, vecs


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix.

    The general (singular-value) trace norm is out of scope; every use in
    this toolkit is a difference of Hermitian operators.
    """
    m = _require_square_hermitian(a)
    return math.fsum(abs(float(v)) for v in np.linalg.eigvalsh(m))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Half the trace norm of rho - sigma; a metric with values in [0, 1]."""
    if rho.dim != sigma.dim:
        raise DimMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")
    diff = rho.matrix - sigma.matrix
    # canonicalize the overall sign so both argument orders hit the
    # eigensolver with bit-identical input (symmetry holds exactly)
    flat = diff.ravel()
    nonzero = np.flatnonzero(flat)
    if nonzero.size:
        lead = flat[nonzero[0]]
        if lead.real < 0.0 or (lead.real == 0.0 and lead.imag < 0.0):
            diff = -diff
    val = 0.5 * trace_norm(diff)
    return min(max(val, 0.0), 1.0)


def partial_trace(rho: DensityOperator, dims: tuple[int, int], keep: int) -> DensityOperator:
    """Trace out one factor of a bipartite state.

    ``dims`` gives the two factor dimensions and ``keep`` selects which
    factor (0 or 1) survives.  The product of ``dims`` must equal the
    operator dimension.
    """
    d0, d1 = int(dims[0]), int(dims[1])
    if d0 * d1 != rho.dim:
        raise DimMismatch(f"factor dims {d0}x{d1} do not multiply to {rho.dim}")
    if keep not in (0, 1):
        raise BadParams(f"keep must be 0 or 1, got {keep!r}")
    blocks = rho.matrix.reshape(d0, d1, d0, d1)
    if keep == 0:
        out = np.einsum("ijkj->ik", blocks)
    else:
        out = np.einsum("ijil->jl", blocks)
    return DensityOperator(out)


def validate_density(m) -> DensityOperator:
    """Check Hermiticity, positivity and unit trace, returning a typed operator.

    Raises NotHermitian, NotPsd or BadTrace naming the violated invariant
    and its magnitude.
    """
    return DensityOperator(_as_complex(m))
