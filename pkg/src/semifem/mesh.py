"""Conforming triangulations of convex polygons with uniform red refinement.

Meshes are immutable after construction: the vertex, triangle and flag
arrays are locked, so instances can be shared freely between threads.
Refinement returns a new mesh that keeps a reference to its parent; parent
vertices keep their indices and coordinates, which makes transfer between
nested levels exact.
"""

import numpy as np

# Absolute tolerance for geometric predicates (convexity, point location).
GEOM_TOL = 1e-12

PRESET_POLYGONS = {
    "unit-square": ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
    "unit-triangle": ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)),
    # Convex pentagon with two cut corners; its largest interior angle is
    # 3*pi/4, the worst-angle configuration exercised by the studies.
    "pentagon": ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 1.0), (0.0, 0.5)),
}


class MeshError(ValueError):
    """Invalid polygon, broken mesh topology, or failed point location."""


def _cross(u, v):
    """z component of the cross product of stacks of 2D vectors."""
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class Polygon:
    """Convex polygon given by counter-clockwise ordered vertices.

    Parameters
    ----------
    vertices : array_like
        Sequence of (x, y) pairs in counter-clockwise order. At least three
        vertices; consecutive triples must be strictly convex and no vertex
        may repeat.

    Raises
    ------
    MeshError
        If the vertex list is degenerate, repeated, collinear or not
        strictly convex, naming the offending vertex.
    """

    def __init__(self, vertices):
        vertices = np.array(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("polygon vertices must form an (n, 2) array")
        n = vertices.shape[0]
        if n < 3:
            raise MeshError(f"polygon needs at least 3 vertices, got {n}")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("polygon vertices must be finite")
        for i in range(n):
            for j in range(i + 1, n):
                if np.all(np.abs(vertices[i] - vertices[j]) <= GEOM_TOL):
                    raise MeshError(f"vertices {i} and {j} coincide at "
                                    f"({vertices[i, 0]:g}, {vertices[i, 1]:g})")
        for i in range(n):
            a = vertices[i - 1]
            b = vertices[i]
            c = vertices[(i + 1) % n]
            turn = _cross(b - a, c - b)
            if turn <= GEOM_TOL:
                kind = "collinear" if abs(turn) <= GEOM_TOL else "reflex"
                raise MeshError(
                    f"vertex {i} at ({b[0]:g}, {b[1]:g}) is {kind}: polygon "
                    f"is not strictly convex (cross product {turn:.3e})")
        vertices.setflags(write=False)
        self.vertices = vertices

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    def area(self):
        """Enclosed area by the shoelace formula."""
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)

    def centroid(self):
        """Area centroid (center of mass of the enclosed region)."""
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        w = x * np.roll(y, -1) - np.roll(x, -1) * y
        a = 0.5 * np.sum(w)
        cx = np.sum((x + np.roll(x, -1)) * w) / (6.0 * a)
        cy = np.sum((y + np.roll(y, -1)) * w) / (6.0 * a)
        return np.array([cx, cy])

    def interior_angles(self):
        """Interior angle at every vertex, in radians."""
        v = self.vertices
        prev = np.roll(v, 1, axis=0) - v
        nxt = np.roll(v, -1, axis=0) - v
        cosang = np.sum(prev * nxt, axis=1) / (
            np.linalg.norm(prev, axis=1) * np.linalg.norm(nxt, axis=1))
        return np.arccos(np.clip(cosang, -1.0, 1.0))


def preset_polygon(name):
    """Return one of the built-in domains ('unit-square', 'unit-triangle', 'pentagon')."""
    try:
        return Polygon(PRESET_POLYGONS[name])
    except KeyError:
        options = ", ".join(sorted(PRESET_POLYGONS))
        raise MeshError(f"unknown domain preset '{name}' (available: {options})") from None


def _unique_edges(triangles):
    """Sorted unique vertex pairs of all triangle edges plus their multiplicities.

    The lexicographic ordering of the returned (ne, 2) array is the canonical
    edge numbering used both by refinement and by nodal transfer between
    nested meshes, so the two always agree.
    """
    half = np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    half = np.sort(half, axis=1)
    edges, counts = np.unique(half, axis=0, return_counts=True)
    return edges, counts


class TriMesh:
    """Conforming triangulation of a convex polygon.

    Attributes
    ----------
    vertices : ndarray, shape (nv, 2)
        Vertex coordinates. For a refined mesh the parent vertices occupy
        the leading indices with identical coordinates.
    triangles : ndarray, shape (nt, 3)
        Vertex indices per triangle, counter-clockwise.
    boundary_vertex : ndarray of bool, shape (nv,)
        True exactly for vertices lying on an edge shared by one triangle.
    level : int
        Refinement depth, 0 for an initial triangulation.
    parent : TriMesh or None
        The mesh this one refines.

    The constructor validates positive triangle areas and conformity (every
    edge belongs to one or two triangles) and derives the boundary flags.
    """

    def __init__(self, vertices, triangles, level=0, parent=None):
        vertices = np.array(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must form an (nv, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("triangles must form an (nt, 3) array")
        nv = vertices.shape[0]
        if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
            raise MeshError("triangle vertex index out of range")

        p0 = vertices[triangles[:, 0]]
        p1 = vertices[triangles[:, 1]]
        p2 = vertices[triangles[:, 2]]
        areas = 0.5 * _cross(p1 - p0, p2 - p0)
        if np.any(areas <= 0.0):
            k = int(np.argmin(areas))
            raise MeshError(f"triangle {k} has non-positive signed area {areas[k]:.3e}")

        edges, counts = _unique_edges(triangles)
        if counts.size and counts.max() > 2:
            k = int(np.argmax(counts))
            raise MeshError(f"edge {tuple(edges[k])} is shared by {counts[k]} triangles")
        boundary_edge = counts == 1
        boundary_vertex = np.zeros(nv, dtype=bool)
        boundary_vertex[edges[boundary_edge].ravel()] = True

        vertices.setflags(write=False)
        triangles.setflags(write=False)
        boundary_vertex.setflags(write=False)
        edges.setflags(write=False)

        self.vertices = vertices
        self.triangles = triangles
        self.boundary_vertex = boundary_vertex
        self.level = int(level)
        self.parent = parent
        self._edges = edges
        self._boundary_edge = boundary_edge
        self._signed_areas = areas

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    def edges(self):
        """Unique edges as a lexicographically sorted (ne, 2) index array."""
        return self._edges

    def signed_areas(self):
        """Signed area of every triangle (positive by the class invariant)."""
        return self._signed_areas

    def __repr__(self):
        return (f"TriMesh(level={self.level}, vertices={self.num_vertices}, "
                f"triangles={self.num_triangles})")


def triangulate_convex_polygon(poly):
    """Fan triangulation of a convex polygon from its centroid.

    Parameters
    ----------
    poly : Polygon or array_like
        The domain boundary; array input is validated as a Polygon first.

    Returns
    -------
    TriMesh
        Level-0 mesh whose vertices are the polygon vertices followed by
        the centroid, with one triangle per boundary edge.
    """
    if not isinstance(poly, Polygon):
        poly = Polygon(poly)
    n = poly.num_vertices
    vertices = np.vstack([poly.vertices, poly.centroid()])
    triangles = np.array([[i, (i + 1) % n, n] for i in range(n)], dtype=np.int64)
    return TriMesh(vertices, triangles, level=0, parent=None)


def refine_uniform(mesh):
    """Red refinement: split every triangle into 4 congruent children.

    New vertices are the edge midpoints, appended after the parent
    vertices in the canonical edge order, so the child mesh nests the
    parent exactly and all angles are preserved.
    """
    edges = mesh.edges()
    nv = mesh.num_vertices
    tri = mesh.triangles
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    vertices = np.vstack([mesh.vertices, midpoints])

    keys = edges[:, 0] * np.int64(nv) + edges[:, 1]

    def midpoint_index(a, b):
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        return nv + np.searchsorted(keys, lo * np.int64(nv) + hi)

    m01 = midpoint_index(tri[:, 0], tri[:, 1])
    m12 = midpoint_index(tri[:, 1], tri[:, 2])
    m20 = midpoint_index(tri[:, 2], tri[:, 0])

    nt = mesh.num_triangles
    children = np.empty((4 * nt, 3), dtype=np.int64)
    children[0::4] = np.column_stack([tri[:, 0], m01, m20])
    children[1::4] = np.column_stack([tri[:, 1], m12, m01])
    children[2::4] = np.column_stack([tri[:, 2], m20, m12])
    children[3::4] = np.column_stack([m01, m12, m20])
    return TriMesh(vertices, children, level=mesh.level + 1, parent=mesh)


def mesh_size(mesh):
    """Largest edge length over all triangles (the mesh parameter h)."""
    edges = mesh.edges()
    d = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    return float(np.sqrt(np.max(np.sum(d * d, axis=1))))


def min_angle(mesh):
    """Smallest interior angle over all triangles, in radians."""
    v = mesh.vertices
    t = mesh.triangles
    angles = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        u1 = v[t[:, b]] - v[t[:, a]]
        u2 = v[t[:, c]] - v[t[:, a]]
        cosang = np.sum(u1 * u2, axis=1) / (
            np.linalg.norm(u1, axis=1) * np.linalg.norm(u2, axis=1))
        angles.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return float(np.min(angles))


def locate_point(mesh, p, tol=GEOM_TOL):
    """Find a triangle containing a point, with its barycentric coordinates.

    Parameters
    ----------
    mesh : TriMesh
    p : array_like, shape (2,)
        Point inside or on the closure of the meshed domain.
    tol : float
        Absolute tolerance on the barycentric coordinates.

    Returns
    -------
    (int, ndarray)
        Triangle index and the three barycentric coordinates of p in it,
        each in [-tol, 1 + tol] and summing to 1.

    Raises
    ------
    MeshError
        If p lies outside every triangle beyond the tolerance.
    """
    p = np.asarray(p, dtype=float)
    v = mesh.vertices
    t = mesh.triangles
    a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    det = 2.0 * mesh.signed_areas()
    la = _cross(b - p, c - p) / det
    lb = _cross(c - p, a - p) / det
    lc = _cross(a - p, b - p) / det
    bary = np.column_stack([la, lb, lc])
    worst = bary.min(axis=1)
    k = int(np.argmax(worst))
    if worst[k] < -tol:
        raise MeshError(f"point ({p[0]:g}, {p[1]:g}) lies outside the mesh "
                        f"(barycentric deficit {worst[k]:.2e})")
    return k, bary[k]


def read_polygon(path):
    """Read a polygon from a text file with one `x y` pair per line.

    Blank lines and lines starting with '#' are skipped.
    """
    points = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise MeshError(f"{path}:{lineno}: expected 'x y', got {stripped!r}")
            try:
                points.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise MeshError(f"{path}:{lineno}: {exc}") from exc
    return Polygon(points)


def write_mesh(mesh, path):
    """Write a mesh in the line-oriented text format.

    Line 1 holds `nv nt`; then nv lines `x y b` with the boundary flag
    b in {0, 1}; then nt lines of 0-based vertex indices `i j k`.
    Coordinates carry 17 significant digits and round-trip exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{mesh.num_vertices} {mesh.num_triangles}\n")
        for (x, y), flag in zip(mesh.vertices, mesh.boundary_vertex):
            fh.write(f"{x:.16e} {y:.16e} {1 if flag else 0}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


def read_mesh(path):
    """Read a mesh written by `write_mesh`, revalidating all invariants."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise MeshError(f"{path}: empty mesh file")
    try:
        header = lines[0].split()
        if len(header) != 2:
            raise MeshError(f"{path}: first line must be 'nv nt'")
        nv, nt = int(header[0]), int(header[1])
        if len(lines) != 1 + nv + nt:
            raise MeshError(f"{path}: expected {1 + nv + nt} lines, found {len(lines)}")
        vertices = np.empty((nv, 2))
        flags = np.empty(nv, dtype=bool)
        for i in range(nv):
            parts = lines[1 + i].split()
            if len(parts) != 3:
                raise MeshError(f"{path}: vertex line {i} must be 'x y b'")
            vertices[i] = (float(parts[0]), float(parts[1]))
            flags[i] = bool(int(parts[2]))
        triangles = np.empty((nt, 3), dtype=np.int64)
        for k in range(nt):
            triangles[k] = [int(s) for s in lines[1 + nv + k].split()]
    except ValueError as exc:
        raise MeshError(f"{path}: malformed mesh file: {exc}") from exc
    mesh = TriMesh(vertices, triangles)
    if not np.array_equal(mesh.boundary_vertex, flags):
        bad = int(np.argmax(mesh.boundary_vertex != flags))
        raise MeshError(f"{path}: stored boundary flag of vertex {bad} "
                        "contradicts the mesh topology")
    return mesh
