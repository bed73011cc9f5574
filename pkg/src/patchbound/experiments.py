"""Reproducible experiment drivers: reference tables, spectrum figures, the
per-dof rectangle counterexample, and the self-check suite behind
``patchbound verify``.

Each experiment assembles one of the bundled problem families, computes the
guaranteed spectral bounds, runs the matching Krylov solver, and -- when the
system is small enough for the dense oracle -- cross-checks the bounds
against the true spectrum.  Artifacts (CSV tables, SVG spectrum plots) land
in per-row subdirectories of the output directory; identical configurations
produce bit-identical files.
"""

import os
import sys
from dataclasses import dataclass

import numpy as np

from .assembly_bounds import (
    add_matrices,
    assemble,
    bounds_cg,
    bounds_dg,
    bounds_nonsym,
    nonsym_patch_rectangles,
    write_matrix_market,
)
from .errors import PatchBoundError
from .local_integrals import (
    CoefficientField,
    LocalContribution,
    constant_load_vector,
    element_matrices,
    sipg_edge_matrices,
)
from .mesh import build_uniform, dof_map, dump_mesh_csv
from .solvers import cg, chol, gmres, pcg, pgmres
from .spectrum_oracle import (
    GEN_CAP,
    SYM_CAP,
    gen_spectrum,
    skew_extreme,
    sym_def_spectrum,
)

EXPERIMENTS = ("ex1-galerkin", "ex1-dg", "ex2-figure", "ex3-nonsym", "counterexample")

_DEFAULT_MESHES = {
    "ex1-galerkin": (10, 20, 30, 40),
    "ex1-dg": (10, 20, 30, 40),
    "ex2-figure": (10,),
    "ex3-nonsym": (10, 30, 50, 70),
    "counterexample": (),
}

_SOURCE_VALUE = 10.0


# ---------------------------------------------------------------------------
# bundled problem data
# ---------------------------------------------------------------------------
def smooth_anisotropic_problem():
    """Diffusion-reaction problem with a smooth anisotropic tensor
    ``diag(3.01 + 3 sin(x1 x2 pi), 1.01 + sin(x1 x2 pi))`` and unit
    reaction on the unit square."""

    def a(x):
        s = np.sin(x[0] * x[1] * np.pi)
        return np.array([[3.01 + 3.0 * s, 0.0], [0.0, 1.01 + s]])

    return CoefficientField(a, lambda x: 1.0)


def smooth_anisotropic_reference(which):
    """Constant reference data for :func:`smooth_anisotropic_problem`:
    ``ap1`` is the identity tensor, ``ap2`` the anisotropy ``diag(3, 1)``."""
    tensors = {"ap1": np.eye(2), "ap2": np.diag([3.0, 1.0])}
    return CoefficientField.from_constants(tensors[which], c=1.0)


def rotating_convection_problem():
    """Convection-diffusion-reaction problem with tensor
    ``diag(20 - 2 x2, 3 - 2 x1)``, reaction 10, and the divergence-free
    rigid-rotation field ``b(x) = 30 (-x2, x1)``."""
    return CoefficientField(
        lambda x: np.array([[20.0 - 2.0 * x[1], 0.0], [0.0, 3.0 - 2.0 * x[0]]]),
        lambda x: 10.0,
        convection=lambda x: np.array([-30.0 * x[1], 30.0 * x[0]]),
        div_free_convection=True,
    )


def rotating_convection_reference(which):
    """Convection-free reference data for
    :func:`rotating_convection_problem` (``ap1``: identity; ``ap2``:
    ``diag(19, 2)``, close to the midrange of the true tensor)."""
    tensors = {"ap1": np.eye(2), "ap2": np.diag([19.0, 2.0])}
    return CoefficientField.from_constants(tensors[which], c=10.0)


def figure_test_problems():
    """The three (problem, reference) pairs of the bound-quality figure:
    smooth anisotropic data with and without reaction, and a diffusion
    tensor jumping from I to 5I across x1 = 0.5."""

    def smooth(x):
        s = 1.0 + np.sin(x[0] * x[1] * np.pi)
        return np.array([[3.0 * s + 0.1, 0.0], [0.0, s + 0.1]])

    def jump(x):
        return np.eye(2) if x[0] < 0.5 else 5.0 * np.eye(2)

    return (
        (
            "test1",
            CoefficientField(smooth, lambda x: 1.0),
            CoefficientField.from_constants(np.diag([3.0, 1.0]), c=1.0),
        ),
        (
            "test2",
            CoefficientField(smooth, lambda x: 0.0),
            CoefficientField.from_constants(np.diag([3.0, 1.0])),
        ),
        (
            "test3",
            CoefficientField(jump, lambda x: 0.0),
            CoefficientField.from_constants(np.eye(2)),
        ),
    )


# ---------------------------------------------------------------------------
# configuration and result rows
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``ref=None`` runs the unpreconditioned solver (no bounds).  Empty
    ``mesh_sizes`` selects the experiment's default row set.
    """

    experiment: str
    mesh_sizes: tuple = ()
    c_sigma: float = 2.0
    ref: str | None = None
    diagonal: str = "ll-ur"
    cg_tol_reduction: float = 1e-6
    gmres_rel_tol: float = 1e-8
    out_dir: str | None = None
    dump_matrices: bool = False
    dump_mesh: bool = False

    def validated(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        sizes = tuple(int(n) for n in self.mesh_sizes) or _DEFAULT_MESHES[self.experiment]
        if any(n < 1 for n in sizes):
            raise ValueError("mesh sizes must be positive")
        if self.experiment == "ex1-dg" and self.c_sigma <= 1.0:
            raise ValueError("the penalty scaling must exceed 1 for DG runs")
        if self.ref not in (None, "ap1", "ap2"):
            raise ValueError(f"unknown reference data {self.ref!r}")
        return sizes

    def resolved_out_dir(self):
        return self.out_dir or os.path.join("patchbound-out", self.experiment)


@dataclass
class TableRow:
    """One line of an experiment table.

    The populated subset depends on the experiment; missing entries stay
    None and print as empty CSV cells.
    """

    N: int
    kappa_A: float | None = None
    kappa_PA: float | None = None
    bound_ratio: float | None = None
    lam_im_max: float | None = None
    beta_max: float | None = None
    iters: int | None = None

    _FIELDS = ("N", "kappa_A", "kappa_PA", "bound_ratio", "lam_im_max", "beta_max", "iters")


# ---------------------------------------------------------------------------
# deterministic artifact writers
# ---------------------------------------------------------------------------
def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_table(path, rows):
    """table.csv: one line per TableRow, header matching the field names."""
    _write_csv(path, TableRow._FIELDS, [[getattr(r, f) for f in TableRow._FIELDS] for r in rows])


def _write_bounds_sym(path, bounds):
    _write_csv(path, ("gamma_min", "gamma_max"), zip(bounds.gamma_min, bounds.gamma_max))


def _write_bounds_nonsym(path, nb):
    _write_csv(path, ("alpha_min", "alpha_max", "beta_max"),
               [(nb.alpha_min, nb.alpha_max, nb.beta_max)])


def _write_spectrum(path, values):
    vals = np.asarray(values)
    _write_csv(path, ("re", "im"), zip(vals.real, vals.imag))


def _write_residuals(path, report):
    _write_csv(path, ("iteration", "residual"), enumerate(report.residual_history))


def _svg_open(width=640, height=420):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _svg_axes(parts, x0, y0, x1, y1, labels):
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    )
    for text, x, y, anchor in labels:
        parts.append(
            f'<text x="{x:.1f}" y="{y:.1f}" font-size="12" font-family="sans-serif" '
            f'text-anchor="{anchor}">{text}</text>'
        )


def write_spectrum_svg(path, gamma_min=None, gamma_max=None, eigs=None, title=""):
    """Sorted-index spectrum plot: red/blue bound polylines with the true
    eigenvalues (when available) as black dots in between."""
    series = [s for s in (gamma_min, gamma_max, eigs) if s is not None and len(s)]
    if not series:
        raise ValueError("nothing to plot")
    n = max(len(s) for s in series)
    lo = min(float(np.min(s)) for s in series)
    hi = max(float(np.max(s)) for s in series)
    span = (hi - lo) or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span
    x0, y0, x1, y1 = 60.0, 380.0, 610.0, 30.0

    def px(i):
        return x0 + (x1 - x0) * (i / max(n - 1, 1))

    def py(v):
        return y0 + (y1 - y0) * ((v - lo) / (hi - lo))

    parts = _svg_open()
    _svg_axes(parts, x0, y0, x1, y1, [
        (title, (x0 + x1) / 2, 20, "middle"),
        (_fmt(lo), x0 - 6, y0, "end"),
        (_fmt(hi), x0 - 6, y1 + 10, "end"),
        ("sorted index", (x0 + x1) / 2, y0 + 26, "middle"),
    ])
    for vals, color in ((gamma_min, "red"), (gamma_max, "blue")):
        if vals is None:
            continue
        pts = " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(np.sort(vals)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    if eigs is not None:
        for i, v in enumerate(np.sort(np.asarray(eigs).real)):
            parts.append(f'<circle cx="{px(i):.2f}" cy="{py(v):.2f}" r="2.5" fill="black"/>')
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def write_rectangle_svg(path, rectangles, eigs=None, title=""):
    """Complex-plane plot: spectral enclosure rectangles
    (alpha_min, alpha_max, beta_max) with eigenvalues as black dots."""
    res, ims = [], []
    for a_lo, a_hi, b in rectangles:
        res += [a_lo, a_hi]
        ims += [-b, b]
    if eigs is not None and len(eigs):
        vals = np.asarray(eigs)
        res += [vals.real.min(), vals.real.max()]
        ims += [vals.imag.min(), vals.imag.max()]
    lo_x, hi_x = min(res), max(res)
    lo_y, hi_y = min(ims), max(ims)
    pad_x = 0.08 * ((hi_x - lo_x) or 1.0)
    pad_y = 0.08 * ((hi_y - lo_y) or 1.0)
    lo_x, hi_x, lo_y, hi_y = lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y
    x0, y0, x1, y1 = 60.0, 380.0, 610.0, 30.0

    def px(v):
        return x0 + (x1 - x0) * ((v - lo_x) / (hi_x - lo_x))

    def py(v):
        return y0 + (y1 - y0) * ((v - lo_y) / (hi_y - lo_y))

    parts = _svg_open()
    _svg_axes(parts, x0, y0, x1, y1, [
        (title, (x0 + x1) / 2, 20, "middle"),
        ("Re", (x0 + x1) / 2, y0 + 26, "middle"),
        ("Im", 20, (y0 + y1) / 2, "middle"),
    ])
    for a_lo, a_hi, b in rectangles:
        parts.append(
            f'<rect x="{px(a_lo):.2f}" y="{py(b):.2f}" width="{px(a_hi) - px(a_lo):.2f}" '
            f'height="{py(-b) - py(b):.2f}" fill="none" stroke="blue" stroke-width="1.5"/>'
        )
    if eigs is not None:
        for v in np.asarray(eigs):
            parts.append(f'<circle cx="{px(v.real):.2f}" cy="{py(v.imag):.2f}" r="3" fill="black"/>')
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# row runners
# ---------------------------------------------------------------------------
def _assemble_sym(mesh, coeff, dg, c_sigma):
    """Operator matrix alone (no reference / no bounds)."""
    dm = dof_map(mesh, "dg" if dg else "cg")
    contribs = []
    if dg:
        for edges in (mesh.interior_edges, mesh.boundary_edges):
            for edge in edges:
                contribs.append(sipg_edge_matrices(mesh, edge, coeff, dm, c_sigma))
    else:
        for tri in range(mesh.n_triangles):
            sym_c, _ = element_matrices(mesh, tri, coeff, dm)
            contribs.append(sym_c)
    return assemble(contribs, dm.n_dof, result="sym"), dm


def _dump_row_matrices(row_dir, **mats):
    for name, mat in mats.items():
        if mat is not None:
            write_matrix_market(os.path.join(row_dir, f"{name}.mtx"), mat)


def _sym_row(config, n, coeff, ref_field, dg, row_dir, label):
    mesh = build_uniform(n, n, diagonal=config.diagonal)
    row = TableRow(N=n)
    if ref_field is None:
        a_mat, dm = _assemble_sym(mesh, coeff, dg, config.c_sigma)
        p_mat = bounds = None
        eigs = sym_def_spectrum(a_mat).values if dm.n_dof <= SYM_CAP else None
        if eigs is not None:
            row.kappa_A = float(eigs[-1] / eigs[0])
        rhs = constant_load_vector(mesh, dm, _SOURCE_VALUE)
        _, report = cg(a_mat, rhs, config.cg_tol_reduction)
    else:
        if dg:
            a_mat, p_mat, bounds = bounds_dg(mesh, coeff, ref_field, config.c_sigma)
            dm = dof_map(mesh, "dg")
        else:
            a_mat, p_mat, bounds = bounds_cg(mesh, coeff, ref_field)
            dm = dof_map(mesh, "cg")
        row.bound_ratio = bounds.ratio
        eigs = sym_def_spectrum(a_mat, p_mat).values if dm.n_dof <= SYM_CAP else None
        if eigs is not None:
            row.kappa_PA = float(eigs[-1] / eigs[0])
        rhs = constant_load_vector(mesh, dm, _SOURCE_VALUE)
        _, report = pcg(a_mat, chol(p_mat), rhs, config.cg_tol_reduction)
    row.iters = report.iterations

    if bounds is not None:
        _write_bounds_sym(os.path.join(row_dir, "bounds.csv"), bounds)
    if eigs is not None:
        _write_spectrum(os.path.join(row_dir, "spectrum.csv"), eigs)
    if bounds is not None or eigs is not None:
        write_spectrum_svg(
            os.path.join(row_dir, "spectrum.svg"),
            gamma_min=None if bounds is None else bounds.gamma_min,
            gamma_max=None if bounds is None else bounds.gamma_max,
            eigs=eigs,
            title=label,
        )
    _write_residuals(os.path.join(row_dir, "residuals.csv"), report)
    if config.dump_matrices:
        _dump_row_matrices(row_dir, a=a_mat, p=p_mat)
    if config.dump_mesh:
        dump_mesh_csv(mesh, row_dir)
    return row


def _nonsym_row(config, n, row_dir, label):
    mesh = build_uniform(n, n, diagonal=config.diagonal)
    coeff = rotating_convection_problem()
    dm = dof_map(mesh, "cg")
    rhs = constant_load_vector(mesh, dm, _SOURCE_VALUE)
    row = TableRow(N=n)
    if config.ref is None:
        syms, skews = [], []
        for tri in range(mesh.n_triangles):
            sym_c, skew_c = element_matrices(mesh, tri, coeff, dm)
            syms.append(sym_c)
            skews.append(skew_c)
        a_mat = assemble(syms, dm.n_dof, result="sym")
        b_mat = assemble(skews, dm.n_dof, result="gen")
        p_mat = nb = None
        m_mat = add_matrices(a_mat, b_mat)
        if dm.n_dof <= SYM_CAP:
            row.kappa_A = sym_def_spectrum(a_mat).kappa
        if dm.n_dof <= GEN_CAP:
            row.lam_im_max = skew_extreme(b_mat)
        eigs = gen_spectrum(m_mat).values if dm.n_dof <= GEN_CAP else None
        _, report = gmres(m_mat, rhs, config.gmres_rel_tol)
    else:
        ref_field = rotating_convection_reference(config.ref)
        a_mat, b_mat, p_mat, nb = bounds_nonsym(mesh, coeff, ref_field)
        m_mat = add_matrices(a_mat, b_mat)
        row.bound_ratio = nb.alpha_max / nb.alpha_min
        row.beta_max = nb.beta_max
        if dm.n_dof <= SYM_CAP:
            row.kappa_PA = sym_def_spectrum(a_mat, p_mat).kappa
        if dm.n_dof <= GEN_CAP:
            row.lam_im_max = skew_extreme(b_mat, p_mat)
        eigs = gen_spectrum(m_mat, p_mat).values if dm.n_dof <= GEN_CAP else None
        _, report = pgmres(m_mat, chol(p_mat), rhs, config.gmres_rel_tol)
    row.iters = report.iterations

    if nb is not None:
        _write_bounds_nonsym(os.path.join(row_dir, "bounds.csv"), nb)
    if eigs is not None:
        _write_spectrum(os.path.join(row_dir, "spectrum.csv"), eigs)
        rects = [] if nb is None else [(nb.alpha_min, nb.alpha_max, nb.beta_max)]
        write_rectangle_svg(os.path.join(row_dir, "spectrum.svg"), rects, eigs, title=label)
    _write_residuals(os.path.join(row_dir, "residuals.csv"), report)
    if config.dump_matrices:
        _dump_row_matrices(row_dir, a=a_mat, b=b_mat, p=p_mat)
    if config.dump_mesh:
        dump_mesh_csv(mesh, row_dir)
    return row


# ---------------------------------------------------------------------------
# counterexample
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RectangleCheck:
    """Per-dof rectangle data of the bundled 4-dof counterexample and the
    verdicts derived from it.

    ``outside_all`` is True when at least one eigenvalue of the assembled
    preconditioned system escapes every per-dof rectangle -- per-dof
    rectangles are *not* guaranteed enclosures.  The single global rectangle
    (``global_bounds``) always is, and ``global_contains_all`` records it.
    """

    eigenvalues: np.ndarray
    alpha_min: np.ndarray
    alpha_max: np.ndarray
    beta_max: np.ndarray
    global_bounds: tuple
    escaped: np.ndarray
    outside_all: bool
    global_contains_all: bool


def counterexample_triples():
    """The three overlapping rotation blocks of the counterexample, as
    (symmetric, skew, reference) local contributions on 4 dofs."""

    def triple(dofs, diag, omega):
        dofs = np.array(dofs)
        sym = np.diag(np.array(diag, dtype=float))
        skew = np.array([[0.0, omega], [-omega, 0.0]])
        ref = np.eye(2)
        return (
            LocalContribution(dofs, sym, "symmetric"),
            LocalContribution(dofs.copy(), skew, "skew"),
            LocalContribution(dofs.copy(), ref, "symmetric"),
        )

    return [
        triple((0, 1), (10.0, 11.0), 12.0),
        triple((1, 2), (10.0, 10.0), 11.0),
        triple((2, 3), (8.0, 10.0), 11.0),
    ]


def counterexample_report(ktol=1e-10):
    """Assemble the counterexample, bound it per dof and globally, and test
    every eigenvalue against both kinds of enclosure."""
    triples = counterexample_triples()
    alpha_min, alpha_max, beta_max, nb = nonsym_patch_rectangles(triples, 4, ktol)
    a_mat = assemble([t[0] for t in triples], 4, result="sym")
    b_mat = assemble([t[1] for t in triples], 4, result="gen")
    p_mat = assemble([t[2] for t in triples], 4, result="sym")
    eigs = gen_spectrum(add_matrices(a_mat, b_mat), p_mat).values

    inside_some = np.zeros(eigs.size, dtype=bool)
    for j in range(alpha_min.size):
        inside = (
            (eigs.real >= alpha_min[j])
            & (eigs.real <= alpha_max[j])
            & (np.abs(eigs.imag) <= beta_max[j])
        )
        inside_some |= inside
    escaped = eigs[~inside_some]
    global_ok = bool(
        np.all(eigs.real >= nb.alpha_min)
        and np.all(eigs.real <= nb.alpha_max)
        and np.all(np.abs(eigs.imag) <= nb.beta_max)
    )
    return RectangleCheck(
        eigenvalues=eigs,
        alpha_min=alpha_min,
        alpha_max=alpha_max,
        beta_max=beta_max,
        global_bounds=(nb.alpha_min, nb.alpha_max, nb.beta_max),
        escaped=escaped,
        outside_all=bool(escaped.size > 0),
        global_contains_all=global_ok,
    )


def _counterexample_run(config, out_dir):
    report = counterexample_report()
    _write_csv(
        os.path.join(out_dir, "bounds.csv"),
        ("alpha_min", "alpha_max", "beta_max"),
        zip(report.alpha_min, report.alpha_max, report.beta_max),
    )
    _write_spectrum(os.path.join(out_dir, "spectrum.csv"), report.eigenvalues)
    rects = list(zip(report.alpha_min, report.alpha_max, report.beta_max))
    write_rectangle_svg(
        os.path.join(out_dir, "spectrum.svg"), rects, report.eigenvalues,
        title="per-dof rectangles vs true eigenvalues",
    )
    for val in report.eigenvalues:
        print(f"eigenvalue {val.real:.3f} {val.imag:+.3f}i")
    print(f"outside all per-patch rectangles: {str(report.outside_all).lower()}")
    print(f"global rectangle contains all: {str(report.global_contains_all).lower()}")
    return report


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------
def _row_plan(config, sizes):
    """(row_id, label, runner) triples for the configured experiment."""
    exp = config.experiment
    plan = []
    if exp in ("ex1-galerkin", "ex1-dg"):
        dg = exp == "ex1-dg"
        coeff = smooth_anisotropic_problem()
        ref = None if config.ref is None else smooth_anisotropic_reference(config.ref)
        for n in sizes:
            label = f"{exp} N={n}" + ("" if config.ref is None else f" {config.ref}")
            plan.append((
                f"n{n}", label,
                lambda n=n, d=None, lb=label: _sym_row(config, n, coeff, ref, dg, d, lb),
            ))
    elif exp == "ex2-figure":
        for test, coeff, ref in figure_test_problems():
            for disc in ("galerkin", "dg"):
                for n in sizes:
                    label = f"{test} {disc} N={n}"
                    plan.append((
                        f"{test}-{disc}-n{n}", label,
                        lambda n=n, c=coeff, r=ref, dg=(disc == "dg"), d=None, lb=label:
                            _sym_row(config, n, c, r, dg, d, lb),
                    ))
    elif exp == "ex3-nonsym":
        for n in sizes:
            label = f"{exp} N={n}" + ("" if config.ref is None else f" {config.ref}")
            plan.append((
                f"n{n}", label,
                lambda n=n, d=None, lb=label: _nonsym_row(config, n, d, lb),
            ))
    return plan


def run(config):
    """Run one experiment: compute every row, write per-row artifacts and the
    summary ``table.csv``, and return the table rows.

    A failing row prints a diagnostic and is skipped; remaining rows still
    run.
    """
    sizes = config.validated()
    out_dir = config.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)

    if config.experiment == "counterexample":
        _counterexample_run(config, out_dir)
        return []

    rows = []
    for row_id, label, runner in _row_plan(config, sizes):
        row_dir = os.path.join(out_dir, row_id)
        os.makedirs(row_dir, exist_ok=True)
        try:
            row = runner(d=row_dir)
        except (PatchBoundError, ValueError, np.linalg.LinAlgError) as exc:
            print(f"{label}: failed: {exc}", file=sys.stderr)
            continue
        rows.append(row)
        filled = ", ".join(
            f"{f}={_fmt(getattr(row, f))}" for f in TableRow._FIELDS[1:]
            if getattr(row, f) is not None
        )
        print(f"{label}: {filled}")
    write_table(os.path.join(out_dir, "table.csv"), rows)
    return rows


# ---------------------------------------------------------------------------
# self-check suite
# ---------------------------------------------------------------------------
@dataclass
class VerifySummary:
    """Outcome of the self-check suite: one line per check plus a verdict."""

    lines: list
    ok: bool

    def __str__(self):
        return "\n".join(self.lines + [f"verify: {'pass' if self.ok else 'FAIL'}"])


def _contained(bounds, eigs, slack=1e-9, swap=False):
    lo, hi = np.sort(bounds.gamma_min), np.sort(bounds.gamma_max)
    if swap:
        lo, hi = hi, lo
    lam = np.sort(np.asarray(eigs).real)
    return bool(np.all(lo - slack <= lam) and np.all(lam <= hi + slack))


def verify(config=None, _swap_gamma=False):
    """Run the bound-containment, structure, and counterexample self-checks
    on the bundled experiment problems (N = 10 throughout).

    ``_swap_gamma`` deliberately exchanges the bound vectors before the
    containment checks -- a negative control that must make the suite fail.
    """
    diagonal = config.diagonal if config is not None else "ll-ur"
    c_sigma = config.c_sigma if config is not None else 2.0
    lines = []
    ok = True

    def check(name, passed):
        nonlocal ok
        ok &= bool(passed)
        lines.append(f"{'ok  ' if passed else 'FAIL'} {name}")

    mesh = build_uniform(10, 10, diagonal=diagonal)
    problems = [
        ("ex1 ap1", smooth_anisotropic_problem(), smooth_anisotropic_reference("ap1")),
        ("ex1 ap2", smooth_anisotropic_problem(), smooth_anisotropic_reference("ap2")),
    ] + [(name, coeff, ref) for name, coeff, ref in figure_test_problems()]

    for name, coeff, ref in problems:
        a_mat, p_mat, bounds = bounds_cg(mesh, coeff, ref)
        eigs = sym_def_spectrum(a_mat, p_mat).values
        check(f"containment galerkin {name}", _contained(bounds, eigs, swap=_swap_gamma))
        check(f"symmetry galerkin {name}", a_mat.symmetry_error() <= 1e-12)
        a_mat, p_mat, bounds = bounds_dg(mesh, coeff, ref, c_sigma)
        eigs = sym_def_spectrum(a_mat, p_mat).values
        check(f"containment dg {name}", _contained(bounds, eigs, swap=_swap_gamma))

    coeff = smooth_anisotropic_problem()
    _, _, bounds = bounds_cg(mesh, coeff, coeff)
    one = max(abs(bounds.gamma_min - 1.0).max(), abs(bounds.gamma_max - 1.0).max())
    check("identical data gives unit bounds (galerkin)", one <= 1e-12)
    _, _, bounds = bounds_dg(mesh, coeff, coeff, c_sigma)
    one = max(abs(bounds.gamma_min - 1.0).max(), abs(bounds.gamma_max - 1.0).max())
    check("identical data gives unit bounds (dg)", one <= 1e-12)

    coeff = rotating_convection_problem()
    for which in ("ap1", "ap2"):
        ref = rotating_convection_reference(which)
        a_mat, b_mat, p_mat, nb = bounds_nonsym(mesh, coeff, ref)
        check(f"skew part exactly skew ({which})", b_mat.skew_error() <= 1e-12)
        eigs = gen_spectrum(add_matrices(a_mat, b_mat), p_mat).values
        lo, hi = (nb.alpha_min, nb.alpha_max) if not _swap_gamma else (nb.alpha_max, nb.alpha_min)
        inside = (
            np.all(eigs.real >= lo - 1e-9)
            and np.all(eigs.real <= hi + 1e-9)
            and np.all(np.abs(eigs.imag) <= nb.beta_max + 1e-9)
        )
        check(f"rectangle containment nonsym {which}", inside)

    report = counterexample_report()
    published = np.array([9.881 + 11.322j, 9.881 - 11.322j, 9.869 + 5.827j, 9.869 - 5.827j])
    match = np.allclose(np.sort_complex(report.eigenvalues), np.sort_complex(published), atol=2e-3)
    check("counterexample eigenvalues", match)
    check("counterexample escapes per-dof rectangles", report.outside_all)
    check("counterexample global rectangle holds", report.global_contains_all)

    return VerifySummary(lines=lines, ok=ok)
