"""Sparse assembly of local contributions and guaranteed spectral bounds for
the preconditioned operator.

The bound computation never touches the assembled matrices: while the local
blocks are scattered into sparse storage, each operator/preconditioner block
pair additionally yields its extreme generalized eigenvalues restricted to
the complement of the preconditioner block's kernel.  Tracking, per degree of
freedom, the smallest and largest of those patch extremes and sorting the two
resulting vectors gives guaranteed two-sided bounds for every eigenvalue of
the preconditioned matrix (symmetric case), or a guaranteed rectangle
enclosing the complex spectrum (non-symmetric case).
"""

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .dense_eig import (
    KTOL_DEFAULT,
    PatchEigs,
    gen_eig_restricted,
    kernel_split,
    skew_gen_im_max,
)
from .errors import KernelMismatchError
from .local_integrals import element_matrices, sipg_edge_matrices
from .mesh import dof_map


@dataclass(frozen=True)
class SparseSym:
    """Symmetric sparse matrix in compressed-row storage."""

    order: int
    csr: sp.csr_matrix

    def matvec(self, x):
        return self.csr @ x

    def to_dense(self):
        return self.csr.toarray()

    def symmetry_error(self):
        """Relative magnitude of the skew part (0 for exactly symmetric)."""
        scale = max(abs(self.csr).max(), 1e-300)
        return (abs(self.csr - self.csr.T)).max() / scale


@dataclass(frozen=True)
class SparseGen:
    """General (e.g. skew-symmetric or non-symmetric) sparse matrix in
    compressed-row storage."""

    order: int
    csr: sp.csr_matrix

    def matvec(self, x):
        return self.csr @ x

    def to_dense(self):
        return self.csr.toarray()

    def skew_error(self):
        """Relative magnitude of the symmetric part (0 for exactly skew)."""
        scale = max(abs(self.csr).max(), 1e-300)
        return (abs(self.csr + self.csr.T)).max() / scale


@dataclass(frozen=True)
class BoundsVectors:
    """Per-eigenvalue bounds for a symmetric preconditioned matrix.

    ``gamma_min`` and ``gamma_max`` are the sorted (ascending) bound vectors:
    the j-th eigenvalue of ``P^-1 A`` lies in
    ``[gamma_min[j], gamma_max[j]]``.  ``raw_min``/``raw_max`` keep the
    unsorted per-dof values from the patch sweep (the union of the per-dof
    intervals also encloses the spectrum).
    """

    gamma_min: np.ndarray
    gamma_max: np.ndarray
    raw_min: np.ndarray
    raw_max: np.ndarray

    @property
    def ratio(self):
        """Guaranteed condition-number bound ``gamma_max[-1]/gamma_min[0]``."""
        return float(self.gamma_max[-1] / self.gamma_min[0])


@dataclass(frozen=True)
class NonSymBounds:
    """Guaranteed rectangle for the complex spectrum of ``P^-1 (A + B)``:
    real parts in ``[alpha_min, alpha_max]``, imaginary parts in
    ``[-beta_max, beta_max]``."""

    alpha_min: float
    alpha_max: float
    beta_max: float


def assemble(contribs, n_dof, result="auto"):
    """Scatter-add local contributions into one sparse matrix.

    Duplicate (row, col) entries are summed in ascending contribution order
    (stable sort + sequential reduction), so the result equals a naive dense
    accumulation bit for bit and is reproducible.

    Parameters
    ----------
    contribs : sequence of LocalContribution
    n_dof : int
    result : str
        ``"sym"`` -> SparseSym, ``"gen"`` -> SparseGen, ``"auto"`` -> SparseSym
        exactly when every contribution is marked symmetric.
    """
    rows, cols, vals = [], [], []
    kinds = set()
    for c in contribs:
        m = c.dofs.size
        if m == 0:
            continue
        kinds.add(c.kind)
        rows.append(np.repeat(c.dofs, m))
        cols.append(np.tile(c.dofs, m))
        vals.append(np.asarray(c.block, dtype=float).ravel())

    if rows:
        r = np.concatenate(rows)
        c_ = np.concatenate(cols)
        v = np.concatenate(vals)
        order = np.lexsort((c_, r))  # stable: ties keep contribution order
        r, c_, v = r[order], c_[order], v[order]
        fresh = np.empty(r.size, dtype=bool)
        fresh[0] = True
        fresh[1:] = (r[1:] != r[:-1]) | (c_[1:] != c_[:-1])
        starts = np.flatnonzero(fresh)
        # np.add.at accumulates strictly in order of appearance, so each
        # entry sums its duplicates left to right in contribution order
        # (np.add.reduceat would not: its inner loop reassociates)
        data = np.zeros(starts.size)
        np.add.at(data, np.cumsum(fresh) - 1, v)
        urows, ucols = r[starts], c_[starts]
        indptr = np.zeros(n_dof + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(urows, minlength=n_dof))
        csr = sp.csr_matrix((data, ucols, indptr), shape=(n_dof, n_dof))
    else:
        csr = sp.csr_matrix((n_dof, n_dof))

    if result == "auto":
        result = "sym" if kinds <= {"symmetric"} else "gen"
    if result == "sym":
        return SparseSym(order=n_dof, csr=csr)
    if result == "gen":
        return SparseGen(order=n_dof, csr=csr)
    raise ValueError(f"unknown result kind {result!r}")


def _patch_eigs_with_index(op_block, ref_block, ktol, index, label):
    try:
        return gen_eig_restricted(op_block, ref_block, ktol=ktol)
    except KernelMismatchError as exc:
        raise KernelMismatchError(f"{label} {index}: {exc}", patch_index=index) from None


def _sym_patch_sweep(pairs, n_dof, ktol):
    """Shared sweep for the symmetric bound algorithms.

    ``pairs`` yields (label, index, operator contribution, reference
    contribution).  Returns the assembled pair and the bounds.
    """
    if n_dof < 1:
        raise ValueError("the bound sweep needs at least one active dof")
    raw_min = np.full(n_dof, np.inf)
    raw_max = np.zeros(n_dof)
    ops, refs = [], []
    for label, index, op_c, ref_c in pairs:
        if op_c.dofs.size == 0:
            continue
        ops.append(op_c)
        refs.append(ref_c)
        eigs = _patch_eigs_with_index(op_c.block, ref_c.block, ktol, index, label)
        np.minimum.at(raw_min, op_c.dofs, eigs.lam_min)
        np.maximum.at(raw_max, op_c.dofs, eigs.lam_max)

    if np.isinf(raw_min).any():
        missing = int(np.isinf(raw_min).sum())
        raise ValueError(f"{missing} dofs are not covered by any contribution")

    a_mat = assemble(ops, n_dof, result="sym")
    p_mat = assemble(refs, n_dof, result="sym")
    bounds = BoundsVectors(
        gamma_min=np.sort(raw_min),
        gamma_max=np.sort(raw_max),
        raw_min=raw_min,
        raw_max=raw_max,
    )
    return a_mat, p_mat, bounds


def bounds_cg(mesh, coeff, coeff_ref, ktol=KTOL_DEFAULT):
    """Assemble the conforming (Dirichlet-eliminated) operator and reference
    matrices and compute guaranteed per-eigenvalue bounds from element
    patches.

    Both coefficient fields must be convection-free (symmetric problem).

    Returns
    -------
    (SparseSym, SparseSym, BoundsVectors)
    """
    if coeff.convection is not None or coeff_ref.convection is not None:
        raise ValueError("symmetric bounds require convection-free coefficients")
    dofmap = dof_map(mesh, "cg")

    def pairs():
        for tri in range(mesh.n_triangles):
            op_c, _ = element_matrices(mesh, tri, coeff, dofmap)
            ref_c, _ = element_matrices(mesh, tri, coeff_ref, dofmap)
            yield "element", tri, op_c, ref_c

    return _sym_patch_sweep(pairs(), dofmap.n_dof, ktol)


def bounds_dg(mesh, coeff, coeff_ref, c_sigma, c_sigma_ref=None, ktol=KTOL_DEFAULT):
    """Assemble the interior-penalty operator and reference matrices and
    compute guaranteed per-eigenvalue bounds from edge patches.

    The reference penalty uses ``c_sigma_ref`` (defaults to ``c_sigma``) with
    the reference diffusion data.

    Returns
    -------
    (SparseSym, SparseSym, BoundsVectors)
    """
    if c_sigma_ref is None:
        c_sigma_ref = c_sigma
    dofmap = dof_map(mesh, "dg")

    def pairs():
        for which, edges in (
            ("interior edge", mesh.interior_edges),
            ("boundary edge", mesh.boundary_edges),
        ):
            for k, edge in enumerate(edges):
                op_c = sipg_edge_matrices(mesh, edge, coeff, dofmap, c_sigma)
                ref_c = sipg_edge_matrices(mesh, edge, coeff_ref, dofmap, c_sigma_ref)
                yield which, k, op_c, ref_c

    return _sym_patch_sweep(pairs(), dofmap.n_dof, ktol)


def nonsym_patch_rectangles(triples, n_dof, ktol=KTOL_DEFAULT):
    """Per-dof rectangle data and global bounds from explicit local triples.

    ``triples`` yields (symmetric, skew, reference) LocalContributions.  The
    per-dof arrays record, for every dof, the extreme patch values over the
    contributions touching it; only the global triple is a guaranteed
    spectral enclosure (individual per-dof rectangles are not, which the
    bundled counterexample demonstrates).

    Returns
    -------
    (numpy.ndarray, numpy.ndarray, numpy.ndarray, NonSymBounds)
        Per-dof alpha_min, alpha_max, beta_max, and the global bounds.
    """
    if n_dof < 1:
        raise ValueError("the bound sweep needs at least one active dof")
    alpha_min = np.full(n_dof, np.inf)
    alpha_max = np.zeros(n_dof)
    beta_max = np.zeros(n_dof)
    for index, (sym_c, skew_c, ref_c) in enumerate(triples):
        if sym_c.dofs.size == 0:
            continue
        split = kernel_split(ref_c.block, ktol)
        eigs = _patch_eigs_with_index(sym_c.block, ref_c.block, ktol, index, "patch")
        try:
            beta = skew_gen_im_max(skew_c.block, ref_c.block, ktol=ktol, split=split)
        except KernelMismatchError as exc:
            raise KernelMismatchError(f"patch {index}: {exc}", patch_index=index) from None
        np.minimum.at(alpha_min, sym_c.dofs, eigs.lam_min)
        np.maximum.at(alpha_max, sym_c.dofs, eigs.lam_max)
        np.maximum.at(beta_max, sym_c.dofs, beta)

    covered = ~np.isinf(alpha_min)
    if not covered.all():
        raise ValueError(f"{int((~covered).sum())} dofs are not covered by any contribution")
    bounds = NonSymBounds(
        alpha_min=float(alpha_min.min()),
        alpha_max=float(alpha_max.max()),
        beta_max=float(beta_max.max()),
    )
    return alpha_min, alpha_max, beta_max, bounds


def bounds_nonsym(mesh, coeff, coeff_ref, ktol=KTOL_DEFAULT):
    """Assemble the convection-diffusion-reaction system split into symmetric
    and skew parts, plus the reference matrix, and compute the guaranteed
    spectral rectangle of the preconditioned system.

    The reference field must be convection-free.  If the operator's
    convection is declared divergence free, the per-element symmetric
    convection parts (whose assembled sum cancels) are left out of the
    symmetric blocks.

    The per-element eigenproblems run on the full three-vertex blocks.
    Dropping the eliminated dofs from the assembled matrices only removes
    Rayleigh quotients (a restricted vector extends by zeros), so the
    full-block extremes still enclose the preconditioned spectrum.

    Returns
    -------
    (SparseSym, SparseGen, SparseSym, NonSymBounds)
        Symmetric part A, skew part B, reference P, and the rectangle.
    """
    if coeff_ref.convection is not None:
        raise ValueError("the reference field must be convection-free")
    dofmap = dof_map(mesh, "cg")
    include_sym_conv = not coeff.div_free_convection

    syms, skews, refs = [], [], []
    for tri in range(mesh.n_triangles):
        sym_c, skew_c = element_matrices(
            mesh, tri, coeff, dofmap, include_convection_sym=include_sym_conv
        )
        ref_c, _ = element_matrices(mesh, tri, coeff_ref, dofmap)
        syms.append(sym_c)
        skews.append(skew_c)
        refs.append(ref_c)

    def full_triples():
        for tri in range(mesh.n_triangles):
            sym_f, skew_f = element_matrices(
                mesh, tri, coeff, include_convection_sym=include_sym_conv
            )
            ref_f, _ = element_matrices(mesh, tri, coeff_ref)
            yield sym_f, skew_f, ref_f

    _, _, _, bounds = nonsym_patch_rectangles(full_triples(), mesh.n_vertices, ktol)
    a_mat = assemble(syms, dofmap.n_dof, result="sym")
    b_mat = assemble(skews, dofmap.n_dof, result="gen")
    p_mat = assemble(refs, dofmap.n_dof, result="sym")
    return a_mat, b_mat, p_mat, bounds


def interval_union(per_patch):
    """Merge the closed intervals ``[lam_min, lam_max]`` of a sequence of
    PatchEigs (or (lo, hi) pairs) into disjoint closed intervals, ascending.
    """
    intervals = []
    for p in per_patch:
        lo, hi = (p.lam_min, p.lam_max) if isinstance(p, PatchEigs) else (p[0], p[1])
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        intervals.append((float(lo), float(hi)))
    if not intervals:
        return []
    intervals.sort()
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        mlo, mhi = merged[-1]
        if lo <= mhi:
            merged[-1] = (mlo, max(mhi, hi))
        else:
            merged.append((lo, hi))
    return merged


def per_dof_intervals(bounds):
    """The per-dof bound intervals of a BoundsVectors as PatchEigs, ready for
    :func:`interval_union` (their union encloses the spectrum)."""
    return [
        PatchEigs(lam_min=float(lo), lam_max=float(hi))
        for lo, hi in zip(bounds.raw_min, bounds.raw_max)
    ]


def identity_matrix(n):
    """Identity as a SparseSym (unpreconditioned oracle runs)."""
    return SparseSym(order=n, csr=sp.identity(n, format="csr"))


def add_matrices(a_sym, b_gen):
    """System matrix ``A + B`` as a SparseGen."""
    return SparseGen(order=a_sym.order, csr=(a_sym.csr + b_gen.csr).tocsr())


def write_matrix_market(path, mat):
    """Export a sparse matrix (SparseSym/SparseGen or scipy matrix) in Matrix
    Market coordinate format."""
    csr = getattr(mat, "csr", mat)
    scipy.io.mmwrite(str(path), csr)
