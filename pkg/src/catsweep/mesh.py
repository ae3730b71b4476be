"""Triangle meshes in flat space and in the round 3-sphere.

Vertices live in the ambient chart (R^3, or R^4 restricted to the unit
sphere).  Areas, stiffness and mass matrices, geodesic distances, and the
Euler characteristic all work from the vertex/triangle arrays alone; the
optional chart fields let parametric surfaces be measured by quadrature of
the analytic area element instead of through the piecewise-flat geometry.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra as _sparse_dijkstra

from .errors import DomainError

AMBIENT_R3 = "euclidean_r3"
AMBIENT_S3 = "round_s3"


@dataclass
class MeshSurface:
    """Indexed triangle mesh with normal and curvature data per vertex.

    chart_uv_corners carries per-triangle corner coordinates of a parametric
    chart (unwrapped, so periodic seams stay consistent) and chart_sqrtg the
    analytic area element sampled at vertices; both may be None.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    ambient: str
    vertex_normals: np.ndarray
    a_norm2: np.ndarray
    ric_nn: np.ndarray
    chart_uv_corners: np.ndarray = None
    chart_sqrtg: np.ndarray = None
    normal_validity: float = math.inf
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        if self.ambient not in (AMBIENT_R3, AMBIENT_S3):
            raise DomainError("unknown ambient tag %r" % (self.ambient,))
        dim = 3 if self.ambient == AMBIENT_R3 else 4
        if self.vertices.ndim != 2 or self.vertices.shape[1] != dim:
            raise DomainError("vertex array must be (n, %d)" % dim)
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise DomainError("triangle array must be (m, 3)")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise DomainError("triangle index out of range")
        self.vertex_normals = np.asarray(self.vertex_normals, dtype=float)
        if self.vertex_normals.shape != self.vertices.shape:
            raise DomainError("normals must match vertex array shape")
        self.a_norm2 = np.asarray(self.a_norm2, dtype=float)
        self.ric_nn = np.asarray(self.ric_nn, dtype=float)
        if self.a_norm2.shape != (len(self.vertices),) or self.ric_nn.shape != (
            len(self.vertices),
        ):
            raise DomainError("curvature arrays must be per-vertex scalars")
        norms = np.linalg.norm(self.vertex_normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise DomainError("vertex normals must be unit to 1e-10")
        if self.ambient == AMBIENT_S3:
            radii = np.linalg.norm(self.vertices, axis=1)
            if np.any(np.abs(radii - 1.0) > 1e-12):
                raise DomainError("round_s3 vertices must satisfy |z|^2+|w|^2 = 1 to 1e-12")
            # normals must also be tangent to the sphere
            dots = np.abs(np.sum(self.vertices * self.vertex_normals, axis=1))
            if np.any(dots > 1e-10):
                raise DomainError("round_s3 normals must be tangent to the sphere")
        areas = triangle_areas(self)
        if self.triangles.size and np.any(areas <= 0.0):
            raise DomainError("every triangle needs positive metric area")

    @property
    def n_vertices(self):
        return len(self.vertices)


def _chordal_triangle_areas(verts, tris):
    u = verts[tris[:, 1]] - verts[tris[:, 0]]
    v = verts[tris[:, 2]] - verts[tris[:, 0]]
    uu = np.sum(u * u, axis=1)
    vv = np.sum(v * v, axis=1)
    uv = np.sum(u * v, axis=1)
    return 0.5 * np.sqrt(np.maximum(uu * vv - uv * uv, 0.0))


def _spherical_triangle_areas(verts, tris):
    # three points of S^3 span a great 2-sphere; the geodesic triangle area
    # is the spherical excess there, computed from side arcs (l'Huilier)
    p0, p1, p2 = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
    a = 2.0 * np.arcsin(np.clip(0.5 * np.linalg.norm(p1 - p2, axis=1), 0.0, 1.0))
    b = 2.0 * np.arcsin(np.clip(0.5 * np.linalg.norm(p0 - p2, axis=1), 0.0, 1.0))
    c = 2.0 * np.arcsin(np.clip(0.5 * np.linalg.norm(p0 - p1, axis=1), 0.0, 1.0))
    s = 0.5 * (a + b + c)
    prod = (
        np.tan(0.5 * s)
        * np.tan(0.5 * (s - a))
        * np.tan(0.5 * (s - b))
        * np.tan(0.5 * (s - c))
    )
    return 4.0 * np.arctan(np.sqrt(np.maximum(prod, 0.0)))


def triangle_areas(m, vertices=None):
    """Per-triangle metric areas through the piecewise-geodesic geometry."""
    verts = m.vertices if vertices is None else vertices
    if m.triangles.size == 0:
        return np.zeros(0)
    if m.ambient == AMBIENT_S3:
        return _spherical_triangle_areas(verts, m.triangles)
    return _chordal_triangle_areas(verts, m.triangles)


def mesh_area(m, method="auto"):
    """Total surface area.

    method "triangle" sums per-triangle geodesic areas; "chart" integrates
    the analytic area element over the chart triangles (available only when
    the mesh carries chart data); "auto" prefers the chart when present.
    """
    if method not in ("auto", "triangle", "chart"):
        raise DomainError("unknown area method %r" % (method,))
    if method == "auto":
        method = "chart" if m.chart_sqrtg is not None else "triangle"
    if method == "chart":
        if m.chart_sqrtg is None or m.chart_uv_corners is None:
            raise DomainError("mesh carries no chart data")
        uv = m.chart_uv_corners
        u = uv[:, 1, :] - uv[:, 0, :]
        v = uv[:, 2, :] - uv[:, 0, :]
        uv_area = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
        w = np.mean(m.chart_sqrtg[m.triangles], axis=1)
        return float(np.sum(uv_area * w))
    return float(np.sum(triangle_areas(m)))


def edge_lengths(m, vertices=None):
    """Unique undirected edges and their metric lengths (arcs in S^3)."""
    verts = m.vertices if vertices is None else vertices
    tris = m.triangles
    pairs = np.vstack(
        [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]
    )
    pairs = np.sort(pairs, axis=1)
    pairs = np.unique(pairs, axis=0)
    chord = np.linalg.norm(verts[pairs[:, 0]] - verts[pairs[:, 1]], axis=1)
    if m.ambient == AMBIENT_S3:
        lengths = 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    else:
        lengths = chord
    return pairs, lengths


def _metric_side(m, i, j):
    chord = np.linalg.norm(m.vertices[i] - m.vertices[j], axis=-1)
    if m.ambient == AMBIENT_S3:
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    return chord


def cotan_stiffness(m):
    """Cotangent-weight Laplacian as a sparse symmetric PSD matrix.

    Angles come from metric edge lengths, so the matrix is intrinsic; the
    quadratic form u' S u is the Dirichlet energy of the linear interpolant.
    """
    tris = m.triangles
    # side lengths opposite each corner
    a = _metric_side(m, tris[:, 1], tris[:, 2])
    b = _metric_side(m, tris[:, 0], tris[:, 2])
    c = _metric_side(m, tris[:, 0], tris[:, 1])
    rows, cols, vals = [], [], []
    for k, (la, lb, lc) in ((0, (a, b, c)), (1, (b, c, a)), (2, (c, a, b))):
        # cot of the angle at corner k, opposite side la
        cos_k = (lb * lb + lc * lc - la * la) / (2.0 * lb * lc)
        cos_k = np.clip(cos_k, -1.0, 1.0)
        sin_k = np.sqrt(np.maximum(1.0 - cos_k * cos_k, 1e-300))
        w = 0.5 * cos_k / sin_k
        i, j = tris[:, (k + 1) % 3], tris[:, (k + 2) % 3]
        rows.extend([i, j, i, j])
        cols.extend([j, i, i, j])
        vals.extend([-w, -w, w, w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    n = m.n_vertices
    return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def lumped_mass(m):
    """Diagonal mass vector: one third of each incident triangle area."""
    areas = triangle_areas(m)
    mass = np.zeros(m.n_vertices)
    for k in range(3):
        np.add.at(mass, m.triangles[:, k], areas / 3.0)
    return mass


def dirichlet_energy(m, values):
    s = cotan_stiffness(m)
    v = np.asarray(values, dtype=float)
    return float(v @ (s @ v))


def geodesic_distances(m, source):
    """Mesh geodesic distance from one vertex.

    Dijkstra over edge-length weights, then a single triangle-unfolding
    sweep in breadth order, which removes most of the metrication bias of
    pure edge paths.
    """
    pairs, lengths = edge_lengths(m)
    n = m.n_vertices
    graph = csr_matrix(
        (
            np.concatenate([lengths, lengths]),
            (
                np.concatenate([pairs[:, 0], pairs[:, 1]]),
                np.concatenate([pairs[:, 1], pairs[:, 0]]),
            ),
        ),
        shape=(n, n),
    )
    dist = _sparse_dijkstra(graph, indices=source)
    dist = np.asarray(dist, dtype=float)

    tris = m.triangles
    la = _metric_side(m, tris[:, 1], tris[:, 2])
    lb = _metric_side(m, tris[:, 0], tris[:, 2])
    lc = _metric_side(m, tris[:, 0], tris[:, 1])
    order = np.argsort(np.min(dist[tris], axis=1))
    for ti in order:
        i, j, k = tris[ti]
        sides = {
            (i, j, k): (lc[ti], lb[ti], la[ti]),
            (j, k, i): (la[ti], lc[ti], lb[ti]),
            (k, i, j): (lb[ti], la[ti], lc[ti]),
        }
        for (p, q, r), (c_pq, b_pr, a_qr) in sides.items():
            # unfold: p at origin, q at (c,0), source mirrored below the axis
            dp, dq = dist[p], dist[q]
            if not (np.isfinite(dp) and np.isfinite(dq)) or c_pq <= 0.0:
                continue
            xs = (dp * dp - dq * dq + c_pq * c_pq) / (2.0 * c_pq)
            ys2 = dp * dp - xs * xs
            if ys2 < 0.0:
                continue
            ys = -math.sqrt(ys2)
            xk = (b_pr * b_pr - a_qr * a_qr + c_pq * c_pq) / (2.0 * c_pq)
            yk2 = b_pr * b_pr - xk * xk
            if yk2 <= 0.0:
                continue
            yk = math.sqrt(yk2)
            # the straight segment source->r must cross the shared edge
            denom = yk - ys
            if denom <= 0.0:
                continue
            x_cross = xs + (xk - xs) * (-ys) / denom
            if x_cross <= 0.0 or x_cross >= c_pq:
                continue
            cand = math.hypot(xk - xs, yk - ys)
            if cand < dist[r]:
                dist[r] = cand
    return dist


def level_set_perimeter(m, values, level):
    """Length of the piecewise-linear level set of a vertex field."""
    v = np.asarray(values, dtype=float)
    total = 0.0
    for tri in m.triangles:
        pts = []
        for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            va, vb = v[e[0]], v[e[1]]
            if (va - level) * (vb - level) < 0.0:
                lam = (level - va) / (vb - va)
                pts.append((1.0 - lam) * m.vertices[e[0]] + lam * m.vertices[e[1]])
        if len(pts) == 2:
            seg = np.linalg.norm(pts[1] - pts[0])
            if m.ambient == AMBIENT_S3:
                seg = 2.0 * math.asin(min(0.5 * seg, 1.0))
            total += seg
    return total


def euler_characteristic(triangles):
    """V - E + F from a triangle list; counts only referenced vertices."""
    tris = np.asarray(triangles, dtype=np.int64)
    if tris.size == 0:
        return 0
    v = len(np.unique(tris))
    pairs = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    return int(v - len(pairs) + len(tris))


def push_along_normals(m, offsets):
    """Move vertices along their unit normals by per-vertex distances.

    In R^3 the push is a straight translation; in the round S^3 it follows
    the unit-speed great circle cos(s)p + sin(s)N.
    """
    off = np.asarray(offsets, dtype=float)
    if off.ndim == 0:
        off = np.full(m.n_vertices, float(off))
    if off.shape != (m.n_vertices,):
        raise DomainError("offset array must be per-vertex")
    if m.ambient == AMBIENT_S3:
        c = np.cos(off)[:, None]
        s = np.sin(off)[:, None]
        return c * m.vertices + s * m.vertex_normals
    return m.vertices + off[:, None] * m.vertex_normals


def save_mesh(path, m):
    """Index-list text format: header, vertex lines, face lines."""
    with open(path, "w") as fh:
        fh.write("# catsweep mesh ambient=%s\n" % m.ambient)
        for v in m.vertices:
            fh.write("v " + " ".join("%.17g" % x for x in v) + "\n")
        for t in m.triangles:
            fh.write("f %d %d %d\n" % (t[0], t[1], t[2]))


def load_mesh_arrays(path):
    """Read back vertices/triangles/ambient from the text format."""
    ambient = AMBIENT_R3
    verts, tris = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                if "ambient=" in line:
                    ambient = line.split("ambient=")[1].split()[0]
                continue
            if line.startswith("v "):
                verts.append([float(x) for x in line.split()[1:]])
            elif line.startswith("f "):
                tris.append([int(x) for x in line.split()[1:]])
    return np.array(verts), np.array(tris, dtype=np.int64), ambient
