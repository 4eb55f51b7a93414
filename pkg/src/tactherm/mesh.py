"""Structured tetrahedral meshing of the tissue block.

A graded tensor-product hex grid (finer inside a box around the inclusion) is
split into 6 tets per hex with a fixed diagonal pattern, so meshes are fully
deterministic. The inclusion is immersed: elements are labeled tumor/tissue by
a centroid test, and each element additionally carries the exact volume
fraction it shares with the prism (polygon clipping in-plane times interval
overlap in z), which sums to the exact prism volume.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .errors import ParameterError
from .geometry import GeometrySpec, clipped_area, points_in_polygon
from .textio import atomic_write_text, fmt


class Material(IntEnum):
    TISSUE = 0
    TUMOR = 1


class FaceTag(IntEnum):
    BOTTOM = 0
    TOP = 1
    SIDE_X0 = 2
    SIDE_X1 = 3
    SIDE_Y0 = 4
    SIDE_Y1 = 5


# 6-tet split of a hex with corner order
#   0:(x0,y0,z0) 1:(x1,y0,z0) 2:(x1,y1,z0) 3:(x0,y1,z0)
#   4:(x0,y0,z1) 5:(x1,y0,z1) 6:(x1,y1,z1) 7:(x0,y1,z1)
# All six share the 0-6 diagonal; every quad face of the hex is cut along the
# same diagonal direction, so neighboring hexes tile compatibly.
HEX_TO_TETS = np.array(
    [
        [0, 1, 2, 6],
        [0, 2, 3, 6],
        [0, 3, 7, 6],
        [0, 7, 4, 6],
        [0, 4, 5, 6],
        [0, 5, 1, 6],
    ]
)

# Boundary triangles of the split, per hex face (local corner indices).
BOUNDARY_TRIS = {
    FaceTag.BOTTOM: [(0, 1, 2), (0, 2, 3)],
    FaceTag.TOP: [(4, 5, 6), (4, 6, 7)],
    FaceTag.SIDE_X0: [(0, 3, 7), (0, 7, 4)],
    FaceTag.SIDE_X1: [(1, 2, 6), (5, 1, 6)],
    FaceTag.SIDE_Y0: [(0, 4, 5), (0, 5, 1)],
    FaceTag.SIDE_Y1: [(2, 3, 6), (3, 7, 6)],
}


@dataclass(frozen=True)
class RefinementSpec:
    """Grid resolution: base subdivisions per axis plus a local multiplier
    applied to every interval overlapping the refinement box."""

    nx: int
    ny: int
    nz: int
    local_factor: int = 1
    refine_box: tuple | None = None  # ((x0,x1),(y0,y1),(z0,z1)) override

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1 or self.local_factor < 1:
            raise ParameterError("subdivision counts and local_factor must be >= 1")


@dataclass(frozen=True)
class TetMesh:
    """Tetrahedral mesh with immersed material labels.

    nodes in mm. material is the binary centroid classification; tumor_frac
    holds the exact per-element volume fraction occupied by the prism (every
    tet of a hex carries its hex's fraction; tet volumes within a hex are
    equal, so fraction-weighted volume is exact).
    """

    nodes: np.ndarray  # (N, 3) float
    tets: np.ndarray  # (M, 4) int
    material: np.ndarray  # (M,) uint8
    faces: np.ndarray  # (F, 3) int
    face_tags: np.ndarray  # (F,) uint8
    tumor_frac: np.ndarray  # (M,) float

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_tets(self) -> int:
        return self.tets.shape[0]

    def tet_volumes(self) -> np.ndarray:
        """Signed volumes (mm^3); all positive for a valid mesh."""
        p = self.nodes[self.tets]
        a = p[:, 1] - p[:, 0]
        b = p[:, 2] - p[:, 0]
        c = p[:, 3] - p[:, 0]
        return np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0

    def with_nodes(self, nodes: np.ndarray) -> "TetMesh":
        return replace(self, nodes=np.asarray(nodes, dtype=float))

    def boundary_nodes(self, tag: FaceTag) -> np.ndarray:
        """Sorted unique node indices on the faces carrying `tag`."""
        return np.unique(self.faces[self.face_tags == tag])


def graded_axis(length: float, n: int, window: tuple | None, factor: int) -> np.ndarray:
    """1-D grid over [0, length]: n uniform intervals, each interval that
    overlaps `window` subdivided `factor` times."""
    edges = np.linspace(0.0, length, n + 1)
    if window is None or factor == 1:
        return edges
    lo, hi = window
    coords = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        if b > lo and a < hi:
            coords.extend(np.linspace(a, b, factor + 1)[1:])
        else:
            coords.append(b)
    return np.array(coords)


def build_mesh(geom: GeometrySpec, ref: RefinementSpec) -> TetMesh:
    """Mesh the block and label the immersed prism.

    Material: tumor iff the tet centroid lies in the prism z-range and inside
    the base polygon (boundary counting as inside is delegated to the bulk
    containment rule). tumor_frac: exact hex ∩ prism volume fraction.
    """
    dims = geom.dims
    window = ref.refine_box if ref.refine_box is not None else geom.refine_window()
    xs = graded_axis(dims.x_len, ref.nx, window[0], ref.local_factor)
    ys = graded_axis(dims.y_len, ref.ny, window[1], ref.local_factor)
    zs = graded_axis(dims.z_len, ref.nz, window[2], ref.local_factor)
    nnx, nny, nnz = len(xs), len(ys), len(zs)
    ncx, ncy, ncz = nnx - 1, nny - 1, nnz - 1
    if min(ncx, ncy, ncz) < 1:
        raise ParameterError("refinement produced an empty grid")

    xg, yg, zg = np.meshgrid(xs, ys, zs, indexing="ij")
    nodes = np.column_stack([xg.ravel(), yg.ravel(), zg.ravel()])

    def nid(i, j, k):
        return (i * nny + j) * nnz + k

    ii, jj, kk = np.meshgrid(
        np.arange(ncx), np.arange(ncy), np.arange(ncz), indexing="ij"
    )
    ii, jj, kk = ii.ravel(), jj.ravel(), kk.ravel()
    corners = np.stack(
        [
            nid(ii, jj, kk),
            nid(ii + 1, jj, kk),
            nid(ii + 1, jj + 1, kk),
            nid(ii, jj + 1, kk),
            nid(ii, jj, kk + 1),
            nid(ii + 1, jj, kk + 1),
            nid(ii + 1, jj + 1, kk + 1),
            nid(ii, jj + 1, kk + 1),
        ],
        axis=1,
    )  # (ncells, 8)
    # cell-major: the 6 tets of a hex are consecutive
    tets = corners[:, HEX_TO_TETS].reshape(-1, 4).astype(np.int32)

    # binary centroid labels
    centroids = nodes[tets].mean(axis=1)
    material = np.zeros(tets.shape[0], dtype=np.uint8)
    in_z = (centroids[:, 2] >= geom.z_lo) & (centroids[:, 2] <= geom.z_hi)
    if np.any(in_z):
        rel = centroids[in_z, :2] - np.array(geom.center)
        material[np.flatnonzero(in_z)[points_in_polygon(rel, geom.base_polygon)]] = (
            Material.TUMOR
        )

    # exact per-hex fractions: in-plane clipped area times z-interval overlap
    cx, cy = geom.center
    col_frac = np.zeros((ncx, ncy))
    for i in range(ncx):
        if xs[i + 1] - cx < -geom.base_polygon.max_radius or xs[i] - cx > geom.base_polygon.max_radius:
            continue
        for j in range(ncy):
            area = clipped_area(
                geom.base_polygon, xs[i] - cx, xs[i + 1] - cx, ys[j] - cy, ys[j + 1] - cy
            )
            if area > 0.0:
                col_frac[i, j] = area / ((xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]))
    z_over = np.maximum(
        0.0, np.minimum(zs[1:], geom.z_hi) - np.maximum(zs[:-1], geom.z_lo)
    ) / np.diff(zs)
    cell_frac = col_frac[ii, jj] * z_over[kk]
    tumor_frac = np.repeat(cell_frac, 6)

    faces, tags = _boundary_faces(corners, ii, jj, kk, ncx, ncy, ncz)
    return TetMesh(
        nodes=nodes,
        tets=tets,
        material=material,
        faces=faces,
        face_tags=tags,
        tumor_frac=tumor_frac,
    )


def _boundary_faces(corners, ii, jj, kk, ncx, ncy, ncz):
    sel = {
        FaceTag.BOTTOM: kk == 0,
        FaceTag.TOP: kk == ncz - 1,
        FaceTag.SIDE_X0: ii == 0,
        FaceTag.SIDE_X1: ii == ncx - 1,
        FaceTag.SIDE_Y0: jj == 0,
        FaceTag.SIDE_Y1: jj == ncy - 1,
    }
    all_faces = []
    all_tags = []
    for tag, mask in sel.items():
        cells = corners[mask]
        for tri in BOUNDARY_TRIS[tag]:
            all_faces.append(cells[:, tri])
            all_tags.append(np.full(cells.shape[0], tag, dtype=np.uint8))
    return np.vstack(all_faces).astype(np.int32), np.concatenate(all_tags)


@dataclass(frozen=True)
class QualityReport:
    n_nodes: int
    n_tets: int
    total_volume: float  # mm^3
    min_volume: float  # mm^3
    min_dihedral_deg: float
    mean_dihedral_deg: float
    max_aspect: float
    aspect_histogram: tuple  # counts in bins [1,1.5), [1.5,2), [2,3), [3,5), [5,inf)


def mesh_quality(mesh: TetMesh) -> QualityReport:
    """Volume, dihedral-angle, and aspect-ratio summary."""
    vols = mesh.tet_volumes()
    p = mesh.nodes[mesh.tets]

    # outward face normals: face f is opposite vertex f
    opp = [(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)]
    normals = np.empty((mesh.n_tets, 4, 3))
    areas = np.empty((mesh.n_tets, 4))
    for f, (a, b, c) in enumerate(opp):
        nrm = np.cross(p[:, b] - p[:, a], p[:, c] - p[:, a])
        mag = np.linalg.norm(nrm, axis=1)
        normals[:, f] = nrm / mag[:, None]
        areas[:, f] = 0.5 * mag
    # dihedral along the edge shared by faces (f, g): pi - angle(n_f, n_g)
    dihedrals = []
    for f in range(4):
        for g in range(f + 1, 4):
            cosang = np.clip(np.einsum("ij,ij->i", normals[:, f], normals[:, g]), -1, 1)
            dihedrals.append(np.pi - np.arccos(cosang))
    dihedrals = np.degrees(np.stack(dihedrals))

    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    elen = np.stack([np.linalg.norm(p[:, a] - p[:, b], axis=1) for a, b in edges])
    longest = elen.max(axis=0)
    r_in = 3.0 * vols / areas.sum(axis=1)
    aspect = longest / (2.0 * np.sqrt(6.0) * r_in)
    hist, _ = np.histogram(aspect, bins=[1.0, 1.5, 2.0, 3.0, 5.0, np.inf])

    return QualityReport(
        n_nodes=mesh.n_nodes,
        n_tets=mesh.n_tets,
        total_volume=float(vols.sum()),
        min_volume=float(vols.min()),
        min_dihedral_deg=float(dihedrals.min()),
        mean_dihedral_deg=float(dihedrals.mean()),
        max_aspect=float(aspect.max()),
        aspect_histogram=tuple(int(c) for c in hist),
    )


def write_mesh_text(mesh: TetMesh, path) -> None:
    """Plain-text dump: node, tet (with material), and tagged face tables."""
    out = [f"nodes {mesh.n_nodes}"]
    for idx, (x, y, z) in enumerate(mesh.nodes):
        out.append(f"{idx} {fmt(x)} {fmt(y)} {fmt(z)}")
    out.append(f"tets {mesh.n_tets}")
    for idx, (t, m) in enumerate(zip(mesh.tets, mesh.material)):
        out.append(f"{idx} {t[0]} {t[1]} {t[2]} {t[3]} {Material(m).name}")
    out.append(f"faces {mesh.faces.shape[0]}")
    for f, tag in zip(mesh.faces, mesh.face_tags):
        out.append(f"{f[0]} {f[1]} {f[2]} {FaceTag(tag).name}")
    atomic_write_text(path, "\n".join(out) + "\n")
