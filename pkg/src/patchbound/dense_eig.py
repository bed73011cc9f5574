"""Dense eigenvalue tools for the small local blocks (order <= 8).

Everything here is self-contained: a cyclic Jacobi eigensolver for symmetric
matrices, an eigenvalue-based kernel/complement split, and generalized
eigenvalue extremes restricted to the complement of the preconditioner
block's kernel.  These are the kernels of the guaranteed-bound computation,
deliberately independent of the LAPACK-backed spectrum oracles used to
cross-check them.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelMismatchError, NumericalDegeneracyError, NumericalFailureError

KTOL_DEFAULT = 1e-10
"""Relative threshold separating kernel from complement eigenvalues."""

_MAX_ORDER = 8
_SYM_TOL = 1e-12
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class KernelSplit:
    """Orthonormal eigenbasis of a symmetric positive semidefinite block,
    split at ``ktol * lambda_max`` into kernel and complement columns."""

    kernel: np.ndarray
    complement: np.ndarray
    eigenvalues: np.ndarray

    @property
    def rank(self):
        return self.complement.shape[1]


@dataclass(frozen=True)
class PatchEigs:
    """Extreme generalized eigenvalues of one local block pair.

    ``lam_im_max`` is populated only for skew blocks (largest imaginary part
    in magnitude); it is None for symmetric pairs.
    """

    lam_min: float
    lam_max: float
    lam_im_max: float | None = None


def sym_eig(m):
    """All eigenvalues and eigenvectors of a small symmetric matrix.

    Cyclic Jacobi rotations; converges quadratically and keeps the residual
    ``||M v - lambda v||`` below ``1e-12 ||M||`` for the orders used here.

    Parameters
    ----------
    m : array_like
        Symmetric matrix of order <= 8 (checked to 1e-12 relative).

    Returns
    -------
    (numpy.ndarray, numpy.ndarray)
        Ascending eigenvalues and the matching orthonormal eigenvector
        columns.
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n or n == 0:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n > _MAX_ORDER:
        raise ValueError(f"order {n} exceeds the small-block solver cap {_MAX_ORDER}")
    scale = float(np.abs(a).max())
    v = np.eye(n)
    if scale == 0.0:
        return np.zeros(n), v
    if float(np.abs(a - a.T).max()) > _SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)

    target = 1e-14 * float(np.linalg.norm(a, "fro"))
    for _ in range(_MAX_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(np.tril(a, -1) ** 2)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                col_p = v[:, p].copy()
                col_q = v[:, q].copy()
                v[:, p] = c * col_p - s * col_q
                v[:, q] = s * col_p + c * col_q
    else:  # pragma: no cover - quadratic convergence makes this unreachable
        raise NumericalFailureError("Jacobi sweep cap reached without convergence")

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def kernel_split(p_block, ktol=KTOL_DEFAULT):
    """Split R^n into kernel and complement of a symmetric p.s.d. block.

    Eigenvalues at or below ``ktol * lambda_max`` count as kernel.  Raises
    ValueError if the block is indefinite beyond ``1e-12`` relative.
    """
    w, v = sym_eig(p_block)
    scale = float(np.abs(w).max())
    if scale > 0.0 and w[0] < -1e-12 * scale:
        raise ValueError(
            f"block is indefinite (lambda_min={w[0]:.3e}, lambda_max={w[-1]:.3e})"
        )
    threshold = ktol * max(w[-1], 0.0)
    in_kernel = w <= threshold
    return KernelSplit(
        kernel=v[:, in_kernel], complement=v[:, ~in_kernel], eigenvalues=w
    )


def _cholesky_small(m):
    """Lower Cholesky factor of a small s.p.d. matrix; raises on bad pivots."""
    n = m.shape[0]
    lower = np.zeros((n, n))
    for j in range(n):
        d = m[j, j] - lower[j, :j] @ lower[j, :j]
        if d <= 0.0 or not math.isfinite(d):
            raise NumericalDegeneracyError(
                f"non-positive pivot {d:.3e} at column {j} of a projected block"
            )
        lower[j, j] = math.sqrt(d)
        for i in range(j + 1, n):
            lower[i, j] = (m[i, j] - lower[i, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def _forward_solve(lower, rhs):
    """Solve ``lower @ x = rhs`` for a lower-triangular factor (columns of rhs)."""
    x = np.array(rhs, dtype=float)
    for i in range(lower.shape[0]):
        x[i] -= lower[i, :i] @ x[:i]
        x[i] /= lower[i, i]
    return x


def _whiten(block, split):
    """Project onto the complement and map by ``L^-1 (.) L^-T`` where
    ``L L^T`` factors the projected preconditioner block."""
    basis = split.complement
    projected = basis.T @ block @ basis
    return projected


def _check_kernel_inclusion(block, split, ktol, label):
    if split.kernel.shape[1] == 0:
        return
    scale = float(np.linalg.norm(block, "fro"))
    leak = float(np.linalg.norm(block @ split.kernel, "fro"))
    if leak > ktol * max(scale, 1e-300):
        raise KernelMismatchError(
            f"kernel of the reference block is not annihilated by the {label} "
            f"block (leak {leak:.3e} vs {ktol:.1e} * {scale:.3e})"
        )


def gen_eig_restricted(a_block, p_block, ktol=KTOL_DEFAULT, split=None):
    """Extreme eigenvalues of ``A v = lambda P v`` restricted to the
    complement of ``Ker(P)``.

    Requires ``Ker(P)`` to be contained in ``Ker(A)`` (checked as
    ``||A K||_F <= ktol ||A||_F`` for the kernel basis K); otherwise the
    restricted eigenvalues would not bound anything and a
    KernelMismatchError is raised.

    Returns
    -------
    PatchEigs
    """
    a_block = np.asarray(a_block, dtype=float)
    if split is None:
        split = kernel_split(p_block, ktol)
    if split.rank == 0:
        raise NumericalDegeneracyError("reference block vanishes; no complement left")
    _check_kernel_inclusion(a_block, split, ktol, "operator")

    a_proj = _whiten(a_block, split)
    p_proj = _whiten(np.asarray(p_block, dtype=float), split)
    lower = _cholesky_small(p_proj)
    half = _forward_solve(lower, a_proj)
    whitened = _forward_solve(lower, half.T).T
    w, _ = sym_eig(0.5 * (whitened + whitened.T))
    return PatchEigs(lam_min=float(w[0]), lam_max=float(w[-1]))


def skew_gen_im_max(b_block, p_block, ktol=KTOL_DEFAULT, split=None):
    """Largest imaginary part (in magnitude) of ``B v = lambda P v``
    restricted to the complement of ``Ker(P)``, for skew-symmetric B.

    Computed as the spectral norm of the whitened block
    ``W = L^-1 (C^T B C) L^-T``, via the square root of the largest
    eigenvalue of ``-W @ W``.
    """
    b_block = np.asarray(b_block, dtype=float)
    scale = float(np.abs(b_block).max())
    if scale > 0.0 and float(np.abs(b_block + b_block.T).max()) > _SYM_TOL * scale:
        raise ValueError("block is not skew-symmetric")
    if split is None:
        split = kernel_split(p_block, ktol)
    if split.rank == 0:
        raise NumericalDegeneracyError("reference block vanishes; no complement left")
    _check_kernel_inclusion(b_block, split, ktol, "skew")

    b_proj = _whiten(b_block, split)
    p_proj = _whiten(np.asarray(p_block, dtype=float), split)
    lower = _cholesky_small(p_proj)
    half = _forward_solve(lower, b_proj)
    whitened = _forward_solve(lower, half.T).T
    squared = -whitened @ whitened
    w, _ = sym_eig(0.5 * (squared + squared.T))
    return math.sqrt(max(float(w[-1]), 0.0))
