"""Guaranteed eigenvalue bounds for operator-preconditioned FEM/DG systems.

The package assembles piecewise-linear conforming (CG) and symmetric
interior-penalty discontinuous Galerkin (DG) discretizations of
convection-diffusion-reaction problems as sums of small local blocks, builds
preconditioners from reference coefficient data the same way, and computes
guaranteed bounds on the spectrum of the preconditioned operator from tiny
generalized eigenproblems on those local blocks.  Dense spectrum oracles and
Krylov solvers are included to verify the bounds and reproduce the bundled
experiment tables.
"""

__version__ = "0.1.0"

from .assembly_bounds import (
    BoundsVectors,
    NonSymBounds,
    SparseGen,
    SparseSym,
    assemble,
    add_matrices,
    bounds_cg,
    bounds_dg,
    bounds_nonsym,
    identity_matrix,
    interval_union,
    nonsym_patch_rectangles,
    per_dof_intervals,
    write_matrix_market,
)
from .dense_eig import PatchEigs, gen_eig_restricted, kernel_split, skew_gen_im_max, sym_eig
from .errors import (
    InvalidCoefficientError,
    KernelMismatchError,
    NotPositiveDefiniteError,
    NumericalDegeneracyError,
    NumericalFailureError,
    PatchBoundError,
    SpectrumSizeError,
)
from .experiments import EXPERIMENTS, ExperimentConfig, TableRow, run, verify
from .local_integrals import (
    CoefficientField,
    LocalContribution,
    constant_load_vector,
    element_matrices,
    sipg_edge_matrices,
    sipg_penalty,
)
from .mesh import DofMap, TriMesh, build_uniform, dof_map, dump_mesh_csv, p1_gradients
from .solvers import (
    CholeskyFactor,
    SolveReport,
    cg,
    chol,
    energy_error_interval,
    gmres,
    pcg,
    pgmres,
)
from .spectrum_oracle import Spectrum, gen_spectrum, skew_extreme, sym_def_spectrum

__all__ = [
    "BoundsVectors",
    "CholeskyFactor",
    "CoefficientField",
    "DofMap",
    "EXPERIMENTS",
    "ExperimentConfig",
    "InvalidCoefficientError",
    "KernelMismatchError",
    "LocalContribution",
    "NonSymBounds",
    "NotPositiveDefiniteError",
    "NumericalDegeneracyError",
    "NumericalFailureError",
    "PatchBoundError",
    "SolveReport",
    "SparseGen",
    "SparseSym",
    "Spectrum",
    "PatchEigs",
    "SpectrumSizeError",
    "TableRow",
    "TriMesh",
    "add_matrices",
    "assemble",
    "bounds_cg",
    "bounds_dg",
    "bounds_nonsym",
    "build_uniform",
    "cg",
    "chol",
    "constant_load_vector",
    "dof_map",
    "dump_mesh_csv",
    "element_matrices",
    "energy_error_interval",
    "gen_eig_restricted",
    "gen_spectrum",
    "gmres",
    "identity_matrix",
    "interval_union",
    "kernel_split",
    "nonsym_patch_rectangles",
    "p1_gradients",
    "pcg",
    "per_dof_intervals",
    "pgmres",
    "run",
    "sipg_edge_matrices",
    "sipg_penalty",
    "skew_extreme",
    "skew_gen_im_max",
    "sym_def_spectrum",
    "sym_eig",
    "verify",
    "write_matrix_market",
]
