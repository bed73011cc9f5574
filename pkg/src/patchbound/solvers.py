"""Sparse Cholesky preconditioner application and Krylov solvers.

All solvers start from x0 = 0 and each stops on the natural quantity of its
own recurrence: (preconditioned) CG on the inner product ``r . P^-1 r``,
(preconditioned) GMRES on the norm it actually minimizes -- the residual of
the preconditioned system.  For plain runs both rules reduce to plain
residual measures, and every report additionally records the history of
unpreconditioned residual 2-norms so counts stay comparable across methods.
The preconditioner is applied through a banded Cholesky factorization after a
reverse Cuthill-McKee bandwidth-reducing reordering.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import NotPositiveDefiniteError


@dataclass
class SolveReport:
    """Convergence record of one solver run.

    ``residual_history[k]`` is the unpreconditioned residual 2-norm after k
    iterations (entry 0 is the initial residual).  Preconditioned GMRES also
    fills ``preconditioned_history`` with the norms it minimizes (monotone by
    construction, unlike the unpreconditioned ones under left
    preconditioning).  ``error_interval`` is the guaranteed two-sided
    enclosure of the final energy-norm error when the solver was given
    eigenvalue bounds.  ``iterates`` holds every iterate when requested.
    """

    iterations: int
    residual_history: np.ndarray
    converged: bool
    error_interval: tuple | None = None
    iterates: list | None = field(default=None, repr=False)
    preconditioned_history: np.ndarray | None = None


@dataclass(frozen=True)
class CholeskyFactor:
    """Banded Cholesky factorization of a permuted s.p.d. matrix.

    Solves ``P x = b`` via ``x[perm] = (L L^T)^-1 b[perm]`` where the banded
    lower factor L corresponds to ``P[perm, perm]``.
    """

    order: int
    perm: np.ndarray
    band_lower: np.ndarray  # LAPACK lower banded storage of L

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        x = np.empty_like(rhs)
        x[self.perm] = scipy.linalg.cho_solve_banded(
            (self.band_lower, True), rhs[self.perm], check_finite=False
        )
        return x

    def factor_dense(self):
        """The lower factor as a dense matrix (testing helper; the permuted
        matrix equals ``L @ L.T``)."""
        n = self.order
        bw = self.band_lower.shape[0] - 1
        lower = np.zeros((n, n))
        for d in range(bw + 1):
            diag = self.band_lower[d, : n - d]
            lower[np.arange(d, n), np.arange(n - d)] = diag
        return lower


def chol(p_mat):
    """Factor a symmetric positive definite sparse matrix.

    Applies a reverse Cuthill-McKee ordering, stores the reordered matrix in
    banded form and runs the banded Cholesky factorization.  Raises
    NotPositiveDefiniteError on a non-positive pivot.
    """
    csr = getattr(p_mat, "csr", p_mat).tocsr()
    n = csr.shape[0]
    perm = np.asarray(reverse_cuthill_mckee(csr, symmetric_mode=True), dtype=np.int64)
    permuted = csr[perm, :][:, perm].tocoo()

    rows, cols, vals = permuted.row, permuted.col, permuted.data
    keep = rows >= cols  # lower triangle
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    bandwidth = int((rows - cols).max()) if rows.size else 0
    band = np.zeros((bandwidth + 1, n))
    np.add.at(band, (rows - cols, cols), vals)

    try:
        factor = scipy.linalg.cholesky_banded(band, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"banded Cholesky failed: {exc}") from None
    if not np.isfinite(factor).all():
        raise NotPositiveDefiniteError("banded Cholesky produced non-finite entries")
    return CholeskyFactor(order=n, perm=perm, band_lower=factor)


def _as_csr(mat):
    return getattr(mat, "csr", mat)


def cg(a_mat, rhs, tol_reduction=1e-6, maxit=None, keep_iterates=False):
    """Conjugate gradients from x0 = 0.

    Stops when ``||f - A x_k||^2 <= tol_reduction * ||f||^2``.

    Returns
    -------
    (numpy.ndarray, SolveReport)
    """
    return pcg(a_mat, None, rhs, tol_reduction, maxit, keep_iterates=keep_iterates)


def pcg(
    a_mat,
    factor,
    rhs,
    tol_reduction=1e-6,
    maxit=None,
    energy_bounds=None,
    keep_iterates=False,
):
    """Preconditioned conjugate gradients from x0 = 0 (``factor=None`` runs
    plain CG).

    The stopping test monitors the residual inner product ``(r, P^-1 r)``
    that the recurrence tracks anyway and stops once it has dropped by
    ``tol_reduction`` relative to its starting value (for plain CG this is
    the squared residual norm).  The reported history stores residual
    2-norms.

    ``energy_bounds=(c1, c2)`` are guaranteed extreme eigenvalue bounds of
    the preconditioned matrix; when given, the report carries the final
    energy-norm error enclosure computed from the final residual.
    """
    a = _as_csr(a_mat)
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    if maxit is None:
        maxit = n

    x = np.zeros(n)
    r = rhs.copy()
    norm0 = float(np.linalg.norm(r))
    history = [norm0]
    iterates = [] if keep_iterates else None
    if norm0 == 0.0:
        return x, SolveReport(0, np.array(history), True, iterates=iterates)

    z = factor.solve(r) if factor is not None else r
    rz = float(r @ z)
    target = tol_reduction * rz
    p = z.copy()
    converged = False
    it = 0
    while it < maxit:
        ap = a @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        it += 1
        history.append(float(np.linalg.norm(r)))
        if keep_iterates:
            iterates.append(x.copy())
        z = factor.solve(r) if factor is not None else r
        rz_new = float(r @ z)
        if rz_new <= target:
            converged = True
            break
        p = z + (rz_new / rz) * p
        rz = rz_new

    report = SolveReport(it, np.array(history), converged, iterates=iterates)
    if energy_bounds is not None and factor is not None:
        report.error_interval = energy_error_interval(r, factor, *energy_bounds)
    return x, report


def gmres(m_mat, rhs, rel_tol=1e-8, maxit=None, keep_iterates=False):
    """Full GMRES (no restarts) from x0 = 0; stops when
    ``||f - M x_k|| <= rel_tol * ||f||``."""
    return pgmres(m_mat, None, rhs, rel_tol, maxit, keep_iterates=keep_iterates)


def pgmres(m_mat, factor, rhs, rel_tol=1e-8, maxit=None, keep_iterates=False):
    """Left-preconditioned full GMRES from x0 = 0 (``factor=None`` runs the
    plain method).

    The Arnoldi recurrence runs on the preconditioned operator and the
    stopping test uses the relative residual of that preconditioned system --
    the quantity the method minimizes, whose reduction is monotone.  The
    reported ``residual_history`` still records unpreconditioned 2-norms so
    counts stay comparable with the plain method (for which both residuals
    coincide).
    """
    m = _as_csr(m_mat)
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    if maxit is None:
        maxit = n

    def apply_op(v):
        w = m @ v
        return factor.solve(w) if factor is not None else w

    norm0 = float(np.linalg.norm(rhs))
    history = [norm0]
    iterates = [] if keep_iterates else None
    if norm0 == 0.0:
        return np.zeros(n), SolveReport(0, np.array(history), True, iterates=iterates)

    r0 = factor.solve(rhs) if factor is not None else rhs
    beta = float(np.linalg.norm(r0))
    prec_history = [beta] if factor is not None else None
    target = rel_tol * beta
    basis = [r0 / beta]
    h_cols = []  # triangularized Hessenberg columns
    givens = []
    g = [beta]  # rotated rhs of the least-squares problem

    def current_solution(k):
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            s = g[i] - sum(h_cols[j][i] * y[j] for j in range(i + 1, k))
            y[i] = s / h_cols[i][i]
        x = np.zeros(n)
        for j in range(k):
            x += y[j] * basis[j]
        return x

    x = np.zeros(n)
    converged = False
    it = 0
    for j in range(maxit):
        w = apply_op(basis[j])
        col = np.zeros(j + 2)
        for i in range(j + 1):
            col[i] = float(w @ basis[i])
            w -= col[i] * basis[i]
        col[j + 1] = float(np.linalg.norm(w))

        for i, (cs, sn) in enumerate(givens):
            tmp = cs * col[i] + sn * col[i + 1]
            col[i + 1] = -sn * col[i] + cs * col[i + 1]
            col[i] = tmp
        denom = math.hypot(col[j], col[j + 1])
        cs, sn = (1.0, 0.0) if denom == 0.0 else (col[j] / denom, col[j + 1] / denom)
        givens.append((cs, sn))
        col[j] = denom
        col[j + 1] = 0.0
        h_cols.append(col[: j + 1])
        g.append(-sn * g[j])
        g[j] = cs * g[j]

        it = j + 1
        x = current_solution(it)
        r = rhs - m @ x
        history.append(float(np.linalg.norm(r)))
        if factor is not None:
            rn = float(np.linalg.norm(factor.solve(r)))
            prec_history.append(rn)
        else:
            rn = history[-1]
        if keep_iterates:
            iterates.append(x.copy())
        if rn <= target:
            converged = True
            break
        if col[j] == 0.0 or float(np.linalg.norm(w)) == 0.0:
            break  # breakdown: Krylov space exhausted
        basis.append(w / float(np.linalg.norm(w)))

    return x, SolveReport(
        it,
        np.array(history),
        converged,
        iterates=iterates,
        preconditioned_history=None if prec_history is None else np.array(prec_history),
    )


def energy_error_interval(residual, factor, c1, c2):
    """Guaranteed enclosure of the energy-norm error from the residual.

    With guaranteed extreme eigenvalue bounds ``0 < c1 <= lambda(P^-1 A) <=
    c2``, the energy error of an iterate with residual r satisfies
    ``r^T P^-1 r / c2 <= ||e||_A^2 <= r^T P^-1 r / c1``; the square roots of
    those two quantities are returned as (lower, upper).
    """
    if not (0.0 < c1 <= c2):
        raise ValueError(f"need 0 < c1 <= c2, got ({c1:g}, {c2:g})")
    weighted = float(residual @ factor.solve(residual))
    weighted = max(weighted, 0.0)
    return math.sqrt(weighted / c2), math.sqrt(weighted / c1)
