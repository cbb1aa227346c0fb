"""Dense complex matrix kernel shared by the physics modules.

Conventions fixed here and relied on everywhere else:

* ``vec`` stacks columns, so ``vec(A X B) = kron(B.T, A) @ vec(X)``.
* Matrix functions of Hermitian PSD matrices act on the range only;
  eigenvalues at or below ``SUPPORT_CUTOFF`` are treated as exact zeros.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import (
    DegeneratePairing,
    DimensionMismatch,
    NegativeEigenvalue,
    NoConvergence,
    NotHermitian,
)

# Eigenvalues <= this (absolute, dimensionless) count as kernel for ln/sqrt.
# Pure states carry exact zeros perturbed by roundoff; genuinely small
# populations at the integration tolerances used stay well above this.
SUPPORT_CUTOFF = 1e-12

# Eigenvalues of a general matrix closer than this are grouped and
# biorthogonalized blockwise.
DEGENERACY_TOL = 1e-9

# Condition-number cap for blockwise biorthogonalization.
PAIRING_COND_MAX = 1e10


class HermEig(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, columns


class GenEig(NamedTuple):
    eigenvalues: np.ndarray  # complex, descending by real part
    right_vectors: np.ndarray  # columns
    left_vectors: np.ndarray  # columns; left_i^H @ right_j = delta_ij


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` (array-like or an object with a ``matrix`` field) to complex ndarray."""
    m = getattr(a, "matrix", a)
    return np.asarray(m, dtype=complex)


def hermitize(a) -> np.ndarray:
    a = as_matrix(a)
    return 0.5 * (a + a.conj().T)


def _require_square(a, who):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{who}: expected a square matrix, got shape {a.shape}")


def herm_eig(a, *, rtol: float = 1e-9) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = as_matrix(a)
    _require_square(a, "herm_eig")
    scale = np.linalg.norm(a)
    dev = np.linalg.norm(a - a.conj().T)
    if dev > rtol * max(scale, 1e-300):
        raise NotHermitian(f"herm_eig: |A - A^H| = {dev:.3e} exceeds {rtol:g}*|A|")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"herm_eig: {exc}") from exc
    return HermEig(w, v)


def gen_eig(a, *, degeneracy_tol: float = DEGENERACY_TOL) -> GenEig:
    """General eigendecomposition with biorthonormalized left/right pairs.

    Eigenvalues are sorted by descending real part (descending imaginary
    part breaks ties).  Near-degenerate eigenvalues (closer than
    ``degeneracy_tol``) are grouped and the left vectors of each group are
    adjusted by solving the small overlap system, so that
    ``left_i^H @ right_j = delta_ij`` across the whole spectrum.
    """
    a = as_matrix(a)
    _require_square(a, "gen_eig")
    try:
        w, vl, vr = sla.eig(a, left=True, right=True)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"gen_eig: {exc}") from exc
    order = np.lexsort((-w.imag, -w.real))
    w = w[order]
    vl = vl[:, order].copy()
    vr = vr[:, order].copy()

    # group eigenvalues that are closer than degeneracy_tol (consecutive in
    # the sorted order; conjugate pairs are not grouped since their distance
    # is 2|Im|)
    n = len(w)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(w[stop] - w[stop - 1]) <= degeneracy_tol:
            stop += 1
        g = slice(start, stop)
        overlap = vl[:, g].conj().T @ vr[:, g]
        sv = np.linalg.svd(overlap, compute_uv=False)
        # columns are unit norm, so a healthy overlap block has singular
        # values well away from zero; a defective pair collapses them
        cond = np.inf if sv.min() == 0.0 else sv.max() / sv.min()
        if sv.min() < 1e-12 or cond > PAIRING_COND_MAX:
            raise DegeneratePairing(
                f"gen_eig: biorthogonal normalization ill-conditioned "
                f"(cond = {cond:.3e}, smallest overlap {sv.min():.3e}) "
                f"for eigenvalue group {w[g]}",
                condition=cond,
            )
        vl[:, g] = vl[:, g] @ np.linalg.inv(overlap).conj().T
        start = stop
    return GenEig(w, vr, vl)


def func_on_support(a, f: Callable[[np.ndarray], np.ndarray], cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Apply a scalar function to a Hermitian PSD matrix on its range.

    Eigenvalues above ``cutoff`` are mapped through ``f``; the rest map to 0.
    """
    w, v = herm_eig(a)
    if w.min() < -1e-9:
        raise NegativeEigenvalue(f"func_on_support: min eigenvalue {w.min():.3e} < -1e-9")
    mask = w > cutoff
    fw = np.zeros_like(w)
    if mask.any():
        fw[mask] = f(w[mask])
    return (v * fw) @ v.conj().T


def support_projector(a, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Orthogonal projector onto the range of a Hermitian PSD matrix."""
    return func_on_support(a, np.ones_like, cutoff)


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(a) -> np.ndarray:
    """Column-stacking vectorization."""
    a = as_matrix(a)
    return a.reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.size != d * d:
        raise DimensionMismatch(f"unvec: {v.size} entries cannot fill a {d}x{d} matrix")
    return v.reshape((d, d), order="F")


def comm(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"comm: shapes {a.shape} and {b.shape} differ")
    return a @ b - b @ a


def acomm(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"acomm: shapes {a.shape} and {b.shape} differ")
    return a @ b + b @ a
