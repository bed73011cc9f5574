"""Local (element- and edge-associated) matrix blocks for piecewise-linear
discretizations of convection-diffusion-reaction problems.

All coefficients are evaluated once per element, at the centroid, and treated
as constants there; every integral below is then exact for P1 hats:

* stiffness          ``area * (a grad(phi_j)) . grad(phi_i)``
* reaction mass      ``c * area/12 * (1 + delta_ij)``
* convection         ``(b . grad(phi_j)) * area/3`` (then split sym/skew)
* edge traces        ``int_e phi ds = |e|/2`` for edge-endpoint hats,
                     ``int_e phi_i phi_j ds = |e|/6 * (1 + delta_ij)``

The interior-penalty edge blocks couple the six dofs of the two triangles
sharing an edge (three on a boundary edge): one third of each adjacent
element's stiffness+reaction block, minus the symmetrized consistency term
built from averaged normal fluxes and jumps, plus the penalty term.  The
penalty weight is derived from the local diffusion eigenvalues so that each
edge block is positive semidefinite on its own once the penalty scaling
exceeds one.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidCoefficientError
from .mesh import ABSENT, p1_gradients

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientField:
    """Coefficient data of a scalar convection-diffusion-reaction problem.

    Attributes
    ----------
    diffusion : callable
        Map point -> symmetric positive definite 2x2 array.
    reaction : callable
        Map point -> nonnegative scalar.
    convection : callable or None
        Map point -> 2-vector; None means no convective term.
    div_free_convection : bool
        Declares that the convection field is divergence free.  Patch blocks
        for the non-symmetric bounds then drop the per-element symmetric
        convection part (under exact integration its assembled sum cancels;
        with the frozen-centroid quadrature the leftover is O(h^2)).
    """

    diffusion: Callable
    reaction: Callable
    convection: Callable | None = None
    div_free_convection: bool = False

    @classmethod
    def from_constants(cls, a, c=0.0, b=None, div_free=False):
        """Field with constant coefficients; ``a`` may be a scalar or 2x2."""
        a_mat = np.asarray(a, dtype=float)
        if a_mat.ndim == 0:
            a_mat = float(a_mat) * np.eye(2)
        b_vec = None if b is None else np.asarray(b, dtype=float)
        conv = None if b_vec is None else (lambda p: b_vec)
        return cls(
            diffusion=lambda p: a_mat,
            reaction=lambda p: float(c),
            convection=conv,
            div_free_convection=div_free,
        )


@dataclass(frozen=True)
class LocalContribution:
    """A dense local block together with its global dof indices.

    ``kind`` is ``"symmetric"`` or ``"skew"``; ``dofs`` has one entry per
    block row/column (1 to 6 after boundary elimination).
    """

    dofs: np.ndarray
    block: np.ndarray
    kind: str


def _sym2x2_eigs(a):
    """Eigenvalues (lo, hi) of a symmetric 2x2 matrix, closed form."""
    mean = 0.5 * (a[0, 0] + a[1, 1])
    disc = np.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
    return mean - disc, mean + disc


def _diffusion_at(coeff, point, where, check_spd=True):
    a = np.asarray(coeff.diffusion(point), dtype=float)
    if a.shape != (2, 2):
        raise InvalidCoefficientError(f"diffusion at {where} has shape {a.shape}")
    scale = max(abs(a).max(), 1.0)
    if abs(a[0, 1] - a[1, 0]) > _SYM_TOL * scale:
        raise InvalidCoefficientError(f"diffusion at {where} is not symmetric")
    if check_spd:
        lo, _ = _sym2x2_eigs(a)
        if lo <= 0.0:
            raise InvalidCoefficientError(
                f"diffusion at {where} is not positive definite (lambda_min={lo:g})"
            )
    return a


def _reaction_at(coeff, point, where):
    c = float(coeff.reaction(point))
    if c < 0.0:
        raise InvalidCoefficientError(f"reaction at {where} is negative ({c:g})")
    return c


def _element_blocks(mesh, tri, coeff, check_spd):
    """Unrestricted 3x3 stiffness+reaction and raw convection blocks."""
    grads, area = p1_gradients(mesh, tri)
    centroid = mesh.centroid(tri)
    a = _diffusion_at(coeff, centroid, f"element {tri}", check_spd)
    c = _reaction_at(coeff, centroid, f"element {tri}")

    stiff = area * (grads @ a @ grads.T)
    mass = (c * area / 12.0) * (np.ones((3, 3)) + np.eye(3))
    sym = stiff + mass

    conv = None
    if coeff.convection is not None:
        b = np.asarray(coeff.convection(centroid), dtype=float)
        if b.shape != (2,):
            raise InvalidCoefficientError(f"convection at element {tri} has shape {b.shape}")
        # row i, column j: (b . grad(phi_j)) * area/3, independent of i
        conv = np.tile((grads @ b) * (area / 3.0), (3, 1))
    return sym, conv


def element_matrices(mesh, tri, coeff, dofmap=None, *, include_convection_sym=True, check_spd=True):
    """Element blocks of the discrete operator, split into symmetric and
    skew-symmetric parts.

    Parameters
    ----------
    mesh : TriMesh
    tri : int
        Triangle index.
    coeff : CoefficientField
    dofmap : DofMap or None
        Eliminated (ABSENT) dofs are dropped from the returned blocks; with
        None the full three-vertex blocks are returned, indexed by the
        triangle's vertex numbers.
    include_convection_sym : bool
        When False, the symmetric part of the convection block is left out of
        the symmetric contribution (used for divergence-free fields, whose
        symmetric convection parts cancel under assembly).
    check_spd : bool
        Allows semidefinite diffusion when False (testing hook).

    Returns
    -------
    (LocalContribution, LocalContribution)
        Symmetric part (stiffness + reaction mass [+ symmetrized convection])
        and skew part (antisymmetrized convection; zero block if no
        convection).
    """
    sym, conv = _element_blocks(mesh, tri, coeff, check_spd)
    skew = np.zeros((3, 3))
    if conv is not None:
        if include_convection_sym:
            sym = sym + 0.5 * (conv + conv.T)
        skew = 0.5 * (conv - conv.T)

    if dofmap is None:
        verts = np.array(mesh.triangles[tri], dtype=np.int64)
        return (
            LocalContribution(verts, sym, "symmetric"),
            LocalContribution(verts.copy(), skew, "skew"),
        )

    dofs_full = dofmap.triangle_dofs[tri]
    keep = dofs_full != ABSENT
    dofs = dofs_full[keep].copy()
    idx = np.flatnonzero(keep)
    sym_c = LocalContribution(dofs, sym[np.ix_(idx, idx)], "symmetric")
    skew_c = LocalContribution(dofs, skew[np.ix_(idx, idx)], "skew")
    return sym_c, skew_c


def sipg_penalty(edge, a_left, a_right, c_sigma):
    """Interior-penalty weight for one edge.

    Uses the eigenvalue ratio ``lambda_max(a)^2 / lambda_min(a)`` of each
    adjacent element's diffusion tensor: ``3 c_sigma/|e|`` times the sum of
    both ratios on an interior edge, ``6 c_sigma/|e|`` times the single ratio
    on a boundary edge (``a_right is None``).  Requires ``c_sigma > 1``.
    """
    if c_sigma <= 1.0:
        raise ValueError(f"penalty scaling must exceed 1, got {c_sigma:g}")

    def ratio(a):
        lo, hi = _sym2x2_eigs(a)
        if lo <= 0.0:
            raise InvalidCoefficientError("penalty needs positive definite diffusion")
        return hi * hi / lo

    if a_right is None:
        return 6.0 * c_sigma / edge.length * ratio(a_left)
    return 3.0 * c_sigma / edge.length * (ratio(a_left) + ratio(a_right))


def _trace_weights(mesh, edge, tri):
    """Per-local-vertex edge trace coefficients wrt the two endpoint hats."""
    u, v = edge.endpoints
    w = np.zeros((3, 2))
    for lv, gv in enumerate(mesh.triangles[tri]):
        if gv == u:
            w[lv, 0] = 1.0
        elif gv == v:
            w[lv, 1] = 1.0
    return w


def sipg_edge_matrices(mesh, edge, coeff, dofmap, c_sigma, *, check_spd=True):
    """Edge-associated interior-penalty block.

    For an interior edge this is the 6x6 block over the dofs of both adjacent
    triangles: one third of each element's stiffness+reaction block, minus
    the symmetrized consistency term (averaged normal flux times jump), plus
    the penalty term.  A boundary edge is handled by the mirrored-ghost
    convention -- as if the edge had a phantom neighbour carrying the same
    diffusion and a zero trace: the flux keeps the interior averaging factor
    1/2, the jump is the one-sided trace, and the penalty weight doubles the
    one-sided eigenvalue ratio.  The resulting 3x3 block acts on the dofs of
    the single adjacent triangle.
    """
    if dofmap.kind != "dg":
        raise ValueError("interior-penalty edge blocks require a DG dof map")

    n = edge.normal
    tl = edge.left_tri
    grads_l, _ = p1_gradients(mesh, tl)
    a_l = _diffusion_at(coeff, mesh.centroid(tl), f"element {tl}", check_spd)
    elem_l, _ = _element_blocks(mesh, tl, coeff, check_spd)
    w_l = _trace_weights(mesh, edge, tl)

    trace_mass = edge.length * np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]])

    if edge.is_boundary:
        dofs = dofmap.triangle_dofs[tl].copy()
        block = elem_l / 3.0
        flux = 0.5 * (grads_l @ a_l) @ n  # ghost neighbour: keep the 1/2
        jump = w_l.sum(axis=1) * (edge.length / 2.0)
        cons = np.outer(flux, jump)
        block -= cons + cons.T
        sigma = sipg_penalty(edge, a_l, None, c_sigma)
        block += sigma * (w_l @ trace_mass @ w_l.T)
        return LocalContribution(dofs, block, "symmetric")

    tr = edge.right_tri
    grads_r, _ = p1_gradients(mesh, tr)
    a_r = _diffusion_at(coeff, mesh.centroid(tr), f"element {tr}", check_spd)
    elem_r, _ = _element_blocks(mesh, tr, coeff, check_spd)
    w_r = _trace_weights(mesh, edge, tr)

    dofs = np.concatenate([dofmap.triangle_dofs[tl], dofmap.triangle_dofs[tr]])
    block = np.zeros((6, 6))
    block[:3, :3] = elem_l / 3.0
    block[3:, 3:] = elem_r / 3.0

    # signed traces: +1 on the side the normal points away from, -1 on the other
    signs = np.concatenate([np.ones(3), -np.ones(3)])
    weights = np.vstack([w_l, w_r])
    flux = 0.5 * np.concatenate([(grads_l @ a_l) @ n, (grads_r @ a_r) @ n])
    jump = signs * weights.sum(axis=1) * (edge.length / 2.0)
    cons = np.outer(flux, jump)
    block -= cons + cons.T

    sigma = sipg_penalty(edge, a_l, a_r, c_sigma)
    block += sigma * (signs[:, None] * weights) @ trace_mass @ (signs[:, None] * weights).T
    return LocalContribution(dofs, block, "symmetric")


def constant_load_vector(mesh, dofmap, value):
    """Load vector of a constant source: ``int f phi_i = f * area/3`` summed
    over the elements carrying each dof."""
    rhs = np.zeros(dofmap.n_dof)
    for tri in range(mesh.n_triangles):
        _, area = p1_gradients(mesh, tri)
        for d in dofmap.triangle_dofs[tri]:
            if d != ABSENT:
                rhs[d] += value * area / 3.0
    return rhs
