"""Dense spectrum oracles used to cross-check the guaranteed bounds.

These routines densify, reduce the preconditioned problem to a standard one
through a Cholesky congruence ``L^-1 (.) L^-T``, and call LAPACK-backed dense
eigensolvers.  They are deliberately a separate computational route from the
patch-bound code (which runs on its own small-matrix Jacobi solver), and they
refuse matrices above a desk-scale size cap.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    NotPositiveDefiniteError,
    NumericalFailureError,
    SpectrumSizeError,
)

SYM_CAP = 1500
"""Largest order accepted by the symmetric-definite oracle."""

GEN_CAP = 1000
"""Largest order accepted by the general (complex) and skew oracles."""

_SKEW_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Sorted dense spectrum: ascending for real symmetric problems,
    lexicographic by (real, imaginary) for complex ones."""

    values: np.ndarray

    @property
    def kappa(self):
        """Extreme-eigenvalue ratio (condition number for s.p.d. problems)."""
        lo = self.values[0]
        hi = self.values[-1]
        if np.iscomplexobj(self.values):
            raise ValueError("kappa is defined for real spectra only")
        return float(hi / lo)


def _to_dense(mat, cap, what):
    csr = getattr(mat, "csr", mat)
    dense = np.asarray(csr.toarray() if hasattr(csr, "toarray") else csr, dtype=float)
    n = dense.shape[0]
    if dense.ndim != 2 or dense.shape[1] != n:
        raise ValueError(f"{what}: expected a square matrix, got {dense.shape}")
    if n == 0:
        raise ValueError(f"{what}: empty matrix has no spectrum")
    if n > cap:
        raise SpectrumSizeError(
            f"{what}: order {n} exceeds the dense oracle cap {cap}"
        )
    return dense


def _whitened(dense, p_mat, cap, what):
    """``L^-1 dense L^-T`` for the Cholesky factor of the preconditioner."""
    if p_mat is None:
        return dense
    p_dense = _to_dense(p_mat, cap, what + " (preconditioner)")
    try:
        lower = scipy.linalg.cholesky(p_dense, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{what}: preconditioner {exc}") from None
    half = scipy.linalg.solve_triangular(lower, dense, lower=True, check_finite=False)
    return scipy.linalg.solve_triangular(
        lower, half.T, lower=True, check_finite=False
    ).T


def sym_def_spectrum(a_mat, p_mat=None, cap=SYM_CAP):
    """All eigenvalues of ``P^-1 A`` for symmetric A and s.p.d. P, ascending.

    ``p_mat=None`` gives the plain spectrum of A.
    """
    dense = _to_dense(a_mat, cap, "symmetric oracle")
    scale = max(np.abs(dense).max(), 1e-300)
    if np.abs(dense - dense.T).max() > 1e-10 * scale:
        raise ValueError("symmetric oracle: matrix is not symmetric")
    w = _whitened(dense, p_mat, cap, "symmetric oracle")
    try:
        values = np.linalg.eigvalsh(0.5 * (w + w.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalFailureError(f"symmetric eigensolve failed: {exc}") from None
    return Spectrum(values=np.sort(values))


def gen_spectrum(m_mat, p_mat=None, cap=GEN_CAP):
    """All complex eigenvalues of ``P^-1 M`` (general M, s.p.d. P), sorted
    lexicographically by (real, imaginary) part."""
    dense = _to_dense(m_mat, cap, "general oracle")
    w = _whitened(dense, p_mat, cap, "general oracle")
    try:
        values = scipy.linalg.eigvals(w, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(f"QR eigensolve failed: {exc}") from None
    order = np.lexsort((values.imag, values.real))
    return Spectrum(values=values[order])


def skew_extreme(b_mat, p_mat=None, cap=GEN_CAP):
    """Largest imaginary part (in magnitude) of the spectrum of ``P^-1 B``
    for skew-symmetric B: the spectral norm of ``L^-1 B L^-T``."""
    dense = _to_dense(b_mat, cap, "skew oracle")
    scale = max(np.abs(dense).max(), 1e-300)
    if np.abs(dense + dense.T).max() > _SKEW_TOL * scale:
        raise ValueError("skew oracle: matrix is not skew-symmetric")
    w = _whitened(dense, p_mat, cap, "skew oracle")
    try:
        return float(np.linalg.svd(w, compute_uv=False)[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError(f"SVD failed: {exc}") from None
