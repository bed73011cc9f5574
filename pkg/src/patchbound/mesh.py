"""Uniform triangulations of axis-aligned rectangles, with the edge and
degree-of-freedom bookkeeping needed by conforming (CG) and interior-penalty
discontinuous (DG) piecewise-linear discretizations.

The mesh is the structured N1 x N2 grid of cells, each cell split into two
counterclockwise triangles by one of its diagonals.  Every edge carries a
fixed unit normal: boundary normals point out of the domain, interior normals
point from the lower-indexed adjacent triangle to the higher-indexed one.
"""

from dataclasses import dataclass

import numpy as np

ABSENT = -1
"""Marker used in CG triangle->dof tables for eliminated boundary vertices."""


@dataclass(frozen=True)
class EdgeRecord:
    """One mesh edge with its adjacency and orientation data.

    Attributes
    ----------
    endpoints : tuple[int, int]
        Vertex indices of the two endpoints, smaller first.
    normal : numpy.ndarray
        Fixed unit normal.  For a boundary edge it points out of the domain;
        for an interior edge it points from ``left_tri`` toward ``right_tri``.
    left_tri : int
        Adjacent triangle the normal points away from.  For interior edges
        this is the smaller of the two triangle indices.
    right_tri : int or None
        Second adjacent triangle, or None for a boundary edge.
    length : float
        Euclidean edge length.
    """

    endpoints: tuple
    normal: np.ndarray
    left_tri: int
    right_tri: int | None
    length: float

    @property
    def is_boundary(self):
        return self.right_tri is None


@dataclass(frozen=True)
class TriMesh:
    """Triangulation of a rectangle.

    Attributes
    ----------
    vertices : numpy.ndarray
        (n_vertex, 2) coordinates, ordered lexicographically by (x, y).
    triangles : numpy.ndarray
        (n_tri, 3) vertex indices, counterclockwise.
    interior_edges : tuple[EdgeRecord, ...]
        Edges shared by two triangles, in lexicographic endpoint order.
    boundary_edges : tuple[EdgeRecord, ...]
        Edges on the domain boundary, in lexicographic endpoint order.
    boundary_vertices : numpy.ndarray
        Sorted indices of the vertices on the domain boundary.
    rect : tuple
        The meshed rectangle as (x0, y0, x1, y1).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    interior_edges: tuple
    boundary_edges: tuple
    boundary_vertices: np.ndarray
    rect: tuple

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def centroid(self, tri):
        """Centroid of triangle ``tri``."""
        return self.vertices[self.triangles[tri]].mean(axis=0)


@dataclass(frozen=True)
class DofMap:
    """Assignment of global degrees of freedom to triangle vertices.

    Attributes
    ----------
    kind : str
        Either ``"cg"`` (continuous, homogeneous Dirichlet boundary vertices
        eliminated) or ``"dg"`` (one independent dof per triangle corner).
    n_dof : int
        Number of global degrees of freedom.
    triangle_dofs : numpy.ndarray
        (n_tri, 3) global dof per triangle corner; ``ABSENT`` (-1) marks an
        eliminated boundary vertex of a CG map.
    """

    kind: str
    n_dof: int
    triangle_dofs: np.ndarray


def build_uniform(n1, n2, rect=(0.0, 0.0, 1.0, 1.0), diagonal="ll-ur"):
    """Build the uniform n1 x n2 triangulation of an axis-aligned rectangle.

    Parameters
    ----------
    n1, n2 : int
        Number of cells along x and y; both must be >= 1.
    rect : tuple
        (x0, y0, x1, y1) with x0 < x1, y0 < y1.
    diagonal : str
        ``"ll-ur"`` splits every cell from the lower-left to the upper-right
        corner (default); ``"lr-ul"`` uses the other diagonal.

    Returns
    -------
    TriMesh
    """
    if n1 < 1 or n2 < 1:
        raise ValueError(f"cell counts must be positive, got ({n1}, {n2})")
    x0, y0, x1, y1 = map(float, rect)
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"degenerate rectangle {rect!r}")
    if diagonal not in ("ll-ur", "lr-ul"):
        raise ValueError(f"unknown diagonal convention {diagonal!r}")

    # Vertices ordered lexicographically by (x, y): index = ix*(n2+1) + iy.
    xs = np.linspace(x0, x1, n1 + 1)
    ys = np.linspace(y0, y1, n2 + 1)
    verts = np.empty(((n1 + 1) * (n2 + 1), 2))
    for ix in range(n1 + 1):
        base = ix * (n2 + 1)
        verts[base : base + n2 + 1, 0] = xs[ix]
        verts[base : base + n2 + 1, 1] = ys

    def vid(ix, iy):
        return ix * (n2 + 1) + iy

    tris = np.empty((2 * n1 * n2, 3), dtype=np.int64)
    t = 0
    for ix in range(n1):
        for iy in range(n2):
            ll = vid(ix, iy)
            lr = vid(ix + 1, iy)
            ur = vid(ix + 1, iy + 1)
            ul = vid(ix, iy + 1)
            if diagonal == "ll-ur":
                tris[t] = (ll, lr, ur)
                tris[t + 1] = (ll, ur, ul)
            else:
                tris[t] = (ll, lr, ul)
                tris[t + 1] = (lr, ur, ul)
            t += 2

    interior, boundary = _build_edges(verts, tris, rect)

    on_bnd = (
        np.isclose(verts[:, 0], x0)
        | np.isclose(verts[:, 0], x1)
        | np.isclose(verts[:, 1], y0)
        | np.isclose(verts[:, 1], y1)
    )
    boundary_vertices = np.flatnonzero(on_bnd)

    verts.setflags(write=False)
    tris.setflags(write=False)
    boundary_vertices.setflags(write=False)
    return TriMesh(
        vertices=verts,
        triangles=tris,
        interior_edges=interior,
        boundary_edges=boundary,
        boundary_vertices=boundary_vertices,
        rect=(x0, y0, x1, y1),
    )


def _build_edges(verts, tris, rect):
    """Collect edges with adjacency, normals and lengths."""
    adj = {}
    for t in range(tris.shape[0]):
        a, b, c = tris[t]
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            adj.setdefault(key, []).append(t)

    centroids = verts[tris].mean(axis=1)
    interior, boundary = [], []
    for key in sorted(adj):
        tlist = adj[key]
        u, v = key
        tang = verts[v] - verts[u]
        length = float(np.hypot(*tang))
        normal = np.array([tang[1], -tang[0]]) / length
        if len(tlist) == 2:
            left, right = min(tlist), max(tlist)
            if normal @ (centroids[right] - centroids[left]) < 0:
                normal = -normal
            rec = EdgeRecord((u, v), normal, left, right, length)
            interior.append(rec)
        elif len(tlist) == 1:
            left = tlist[0]
            midpoint = 0.5 * (verts[u] + verts[v])
            if normal @ (midpoint - centroids[left]) < 0:
                normal = -normal
            rec = EdgeRecord((u, v), normal, left, None, length)
            boundary.append(rec)
        else:  # pragma: no cover - impossible for a valid triangulation
            raise ValueError(f"edge {key} belongs to {len(tlist)} triangles")
        rec.normal.setflags(write=False)
    return tuple(interior), tuple(boundary)


def dof_map(mesh, kind):
    """Build the dof map for a discretization kind.

    ``"cg"`` assigns one dof per interior vertex (lexicographic vertex order)
    and marks boundary vertices ``ABSENT``; ``"dg"`` assigns three independent
    dofs per triangle, numbered triangle-major.
    """
    if kind == "cg":
        vertex_dof = np.full(mesh.n_vertices, ABSENT, dtype=np.int64)
        interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices)
        vertex_dof[interior] = np.arange(interior.size)
        table = vertex_dof[mesh.triangles]
        n_dof = int(interior.size)
    elif kind == "dg":
        table = np.arange(3 * mesh.n_triangles, dtype=np.int64).reshape(-1, 3)
        n_dof = 3 * mesh.n_triangles
    else:
        raise ValueError(f"unknown dof map kind {kind!r}")
    table.setflags(write=False)
    return DofMap(kind=kind, n_dof=n_dof, triangle_dofs=table)


def p1_gradients(mesh, tri):
    """Gradients of the three nodal hat functions on a triangle, and its area.

    Returns
    -------
    grads : numpy.ndarray
        (3, 2) constant gradients, row i for the hat of local vertex i.
    area : float
    """
    p = mesh.vertices[mesh.triangles[tri]]
    d1 = p[1] - p[0]
    d2 = p[2] - p[0]
    twice_area = d1[0] * d2[1] - d1[1] * d2[0]
    if twice_area <= 0:
        raise ValueError(f"triangle {tri} is degenerate or clockwise")
    grads = np.empty((3, 2))
    # grad of hat_i is the 90deg rotation of the opposite edge over 2*area
    for i in range(3):
        e = p[(i + 2) % 3] - p[(i + 1) % 3]
        grads[i, 0] = -e[1] / twice_area
        grads[i, 1] = e[0] / twice_area
    return grads, 0.5 * twice_area


def edge_count_check(mesh):
    """Sanity counts for the structured mesh: (n_interior, n_boundary)."""
    return len(mesh.interior_edges), len(mesh.boundary_edges)


def dump_mesh_csv(mesh, directory):
    """Write vertices.csv, triangles.csv, edges.csv into ``directory``."""
    import os

    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "vertices.csv"), "w") as fh:
        fh.write("index,x,y\n")
        for i, (x, y) in enumerate(mesh.vertices):
            fh.write(f"{i},{x:.6g},{y:.6g}\n")
    with open(os.path.join(directory, "triangles.csv"), "w") as fh:
        fh.write("index,v0,v1,v2\n")
        for i, (a, b, c) in enumerate(mesh.triangles):
            fh.write(f"{i},{a},{b},{c}\n")
    with open(os.path.join(directory, "edges.csv"), "w") as fh:
        fh.write("v0,v1,left_tri,right_tri,nx,ny,length,boundary\n")
        for rec in list(mesh.interior_edges) + list(mesh.boundary_edges):
            right = "" if rec.right_tri is None else rec.right_tri
            fh.write(
                f"{rec.endpoints[0]},{rec.endpoints[1]},{rec.left_tri},{right},"
                f"{rec.normal[0]:.6g},{rec.normal[1]:.6g},{rec.length:.6g},"
                f"{int(rec.is_boundary)}\n"
            )
