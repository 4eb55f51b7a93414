"""Steady-state heat conduction and linear-elastic compression on tet meshes.

Galerkin linear tetrahedra throughout. The thermal problem is
∇·(k∇T) + q = 0 with a fixed bottom temperature, convective (Robin) top
surface, and insulated sides; the mechanical problem is small-strain isotropic
elasticity with the bottom fully fixed and a vertical compression imposed on
the top. Coupling is one-way: solve elasticity, move the nodes, then solve
heat on the deformed mesh.

Material fields accept two modes: "binary" uses the per-element centroid
labels; "fraction" blends tissue/tumor properties by the exact per-element
tumor volume fraction, which keeps the injected power exact and makes results
vary smoothly with the shape parameter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DeformationError,
    ParameterError,
    SingularSystemError,
    SolverError,
)
from .mesh import FaceTag, Material, TetMesh
from .textio import write_csv

MM = 1e-3  # mesh lengths are mm; assembly is SI


@dataclass(frozen=True)
class ThermalParams:
    k_tissue: float = 0.6  # W/(m K)
    k_tumor: float = 0.6  # W/(m K)
    q_tumor: float = 1.0e5  # W/m^3
    h_top: float = 20.0  # W/(m^2 K)
    t_ambient: float = 24.0  # deg C (free parameter, see config)
    t_bottom: float = 33.1  # deg C

    def __post_init__(self):
        if self.k_tissue <= 0 or self.k_tumor <= 0:
            raise ParameterError("conductivities must be positive")
        if self.h_top < 0:
            raise ParameterError("h_top must be >= 0")


@dataclass(frozen=True)
class ElasticParams:
    e_tissue: float = 9210.87  # Pa
    poisson: float = 0.458344
    tumor_stiffness_factor: float = 10.0
    applied_strain: float = 0.06  # compressive, of z_len

    def __post_init__(self):
        if self.e_tissue <= 0:
            raise ParameterError("e_tissue must be positive")
        if not 0.0 <= self.poisson < 0.5:
            raise ParameterError("poisson must lie in [0, 0.5)")
        if not 0.0 <= self.applied_strain <= 0.2:
            raise ParameterError("applied_strain must lie in [0, 0.2]")


@dataclass(frozen=True)
class ScalarField:
    """Nodal temperatures (deg C) on a mesh."""

    mesh: TetMesh
    values: np.ndarray  # (N,)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes,):
            raise ParameterError("field length must equal node count")
        if not np.all(np.isfinite(v)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class VectorField:
    """Nodal displacements (mm) on a mesh."""

    mesh: TetMesh
    values: np.ndarray  # (N, 3)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_nodes, 3):
            raise ParameterError("field shape must be (n_nodes, 3)")
        if not np.all(np.isfinite(v)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_residual: float  # relative to ||rhs||
    wall_time: float  # seconds


def _gradients(nodes_m: np.ndarray, tets: np.ndarray):
    """Per-tet shape-function gradients (M,3,4) and volumes (M,), SI."""
    p = nodes_m[tets]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=1)
    vol = np.linalg.det(jac) / 6.0
    inv = np.linalg.inv(jac)  # columns are grad(lambda_1..3)
    grads = np.empty((tets.shape[0], 3, 4))
    grads[:, :, 1:] = inv
    grads[:, :, 0] = -inv.sum(axis=2)
    return grads, vol


def element_mix(mesh: TetMesh, mode: str) -> np.ndarray:
    """Per-element tumor weight in [0, 1] under the chosen material mode."""
    if mode == "binary":
        return (mesh.material == Material.TUMOR).astype(float)
    if mode == "fraction":
        return mesh.tumor_frac
    raise ParameterError(f"unknown material mode {mode!r}")


def _assemble_thermal(mesh: TetMesh, p: ThermalParams, mode: str):
    """Full stiffness (volume + Robin) and load vector, no Dirichlet yet."""
    n = mesh.n_nodes
    grads, vol = _gradients(mesh.nodes * MM, mesh.tets)
    mix = element_mix(mesh, mode)
    k_e = p.k_tissue + (p.k_tumor - p.k_tissue) * mix
    local = np.einsum("e,eia,eib->eab", k_e * vol, grads, grads)
    rows = np.repeat(mesh.tets, 4, axis=1).ravel()
    cols = np.tile(mesh.tets, (1, 4)).ravel()
    K = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))

    f = np.zeros(n)
    q_e = p.q_tumor * mix
    np.add.at(f, mesh.tets.ravel(), np.repeat(q_e * vol / 4.0, 4))

    top = mesh.faces[mesh.face_tags == FaceTag.TOP]
    if p.h_top > 0 and top.shape[0]:
        q = mesh.nodes[top] * MM
        area = 0.5 * np.linalg.norm(
            np.cross(q[:, 1] - q[:, 0], q[:, 2] - q[:, 0]), axis=1
        )
        face_m = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
        vals = p.h_top * area[:, None, None] * face_m[None, :, :]
        r_rows = np.repeat(top, 3, axis=1).ravel()
        r_cols = np.tile(top, (1, 3)).ravel()
        K = K + sp.coo_matrix((vals.ravel(), (r_rows, r_cols)), shape=(n, n))
        np.add.at(
            f, top.ravel(), np.repeat(p.h_top * p.t_ambient * area / 3.0, 3)
        )
    return K.tocsr(), f


def _solve_spd(K_ff, rhs, *, method: str, tol: float, x0=None, max_iter=None):
    """Solve an SPD reduced system; returns (x, iterations, rel_residual)."""
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros_like(rhs), 0, 0.0
    if method == "direct":
        try:
            lu = spla.splu(K_ff.tocsc())
        except RuntimeError as exc:
            raise SingularSystemError(f"direct factorization failed: {exc}") from exc
        x = lu.solve(rhs)
        res = float(np.linalg.norm(K_ff @ x - rhs)) / bnorm
        return x, 0, res
    if method != "pcg":
        raise ParameterError(f"unknown solver method {method!r}")

    diag = K_ff.diagonal()
    if np.any(diag <= 0):
        raise SingularSystemError("non-positive diagonal in SPD system")
    inv_diag = 1.0 / diag
    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    r = rhs - K_ff @ x
    z = inv_diag * r
    p_vec = z.copy()
    rz = float(r @ z)
    cap = int(50 * np.sqrt(K_ff.shape[0])) + 1 if max_iter is None else max_iter
    for it in range(cap):
        rnorm = float(np.linalg.norm(r))
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        Ap = K_ff @ p_vec
        alpha = rz / float(p_vec @ Ap)
        x += alpha * p_vec
        r -= alpha * Ap
        z = inv_diag * r
        rz_new = float(r @ z)
        p_vec = z + (rz_new / rz) * p_vec
        rz = rz_new
    raise SolverError(
        f"PCG did not reach tol {tol} within {cap} iterations",
        stats=SolveStats(cap, float(np.linalg.norm(r)) / bnorm, 0.0),
    )


def solve_heat(
    mesh: TetMesh,
    params: ThermalParams,
    *,
    material_mode: str = "fraction",
    method: str = "pcg",
    tol: float = 1e-10,
    max_iter: int | None = None,
) -> tuple[ScalarField, SolveStats]:
    """Temperature field for the mixed-boundary conduction problem.

    Dirichlet t_bottom on the bottom face, Robin (h_top, t_ambient) on the
    top, natural (insulated) sides. Raises SingularSystemError when no
    boundary condition pins the solution.
    """
    t0 = time.perf_counter()
    bottom = mesh.boundary_nodes(FaceTag.BOTTOM)
    if bottom.size == 0 and params.h_top == 0.0:
        raise SingularSystemError("no Dirichlet nodes and h_top = 0: T only fixed up to a constant")
    K, f = _assemble_thermal(mesh, params, material_mode)

    fixed = np.zeros(mesh.n_nodes, dtype=bool)
    fixed[bottom] = True
    free = ~fixed
    t_fix = np.full(bottom.size, params.t_bottom)
    rhs = f[free] - K[free][:, fixed] @ t_fix
    x, iters, res = _solve_spd(
        K[free][:, free], rhs, method=method, tol=tol, max_iter=max_iter
    )

    values = np.empty(mesh.n_nodes)
    values[free] = x
    values[fixed] = params.t_bottom
    stats = SolveStats(iters, res, time.perf_counter() - t0)
    return ScalarField(mesh, values), stats


@dataclass(frozen=True)
class EnergyBalance:
    generated_w: float
    outflow_top_w: float
    outflow_bottom_w: float

    @property
    def residual_rel(self) -> float:
        total_out = self.outflow_top_w + self.outflow_bottom_w
        return abs(self.generated_w - total_out) / abs(self.generated_w)


def energy_balance(
    field: ScalarField, params: ThermalParams, *, material_mode: str = "fraction"
) -> EnergyBalance:
    """Generated power vs boundary outflow (W).

    Top outflow integrates the Robin flux h(T - t_ambient); bottom outflow is
    the Galerkin reaction at the Dirichlet nodes, so the balance is exact up
    to the linear-solver residual when assembly is consistent.
    """
    mesh = field.mesh
    K, f = _assemble_thermal(mesh, params, material_mode)
    T = field.values

    _, vol = _gradients(mesh.nodes * MM, mesh.tets)
    mix = element_mix(mesh, material_mode)
    generated = float(params.q_tumor * np.dot(mix, vol))

    top = mesh.faces[mesh.face_tags == FaceTag.TOP]
    q = mesh.nodes[top] * MM
    area = 0.5 * np.linalg.norm(np.cross(q[:, 1] - q[:, 0], q[:, 2] - q[:, 0]), axis=1)
    t_mean = T[top].mean(axis=1)
    out_top = float(np.dot(params.h_top * area, t_mean - params.t_ambient))

    reaction = K @ T - f
    bottom = mesh.boundary_nodes(FaceTag.BOTTOM)
    out_bottom = -float(reaction[bottom].sum())
    return EnergyBalance(generated, out_top, out_bottom)


def solve_elastic(
    mesh: TetMesh,
    params: ElasticParams,
    *,
    material_mode: str = "fraction",
    method: str = "direct",
    tol: float = 1e-10,
) -> tuple[VectorField, SolveStats]:
    """Displacement under imposed vertical compression of the top face.

    Bottom face fully fixed; top face u_z = -applied_strain * z_len with
    horizontal components free; sides traction-free. Tumor elements are
    stiffened by tumor_stiffness_factor. The default solver is a direct
    factorization: near-incompressible Poisson ratios condition the system
    badly for diagonal-preconditioned CG.
    """
    t0 = time.perf_counter()
    n = mesh.n_nodes
    grads, vol = _gradients(mesh.nodes, mesh.tets)  # mm units cancel: no loads
    mix = element_mix(mesh, material_mode)
    e_mod = params.e_tissue * (1.0 + (params.tumor_stiffness_factor - 1.0) * mix)
    lam = e_mod * params.poisson / ((1.0 + params.poisson) * (1.0 - 2.0 * params.poisson))
    mu = e_mod / (2.0 * (1.0 + params.poisson))

    ndof = 3 * n
    blocks = np.empty((mesh.n_tets, 4, 4, 3, 3))
    dots = np.einsum("eia,eib->eab", grads, grads)
    eye = np.eye(3)
    for a in range(4):
        ga = grads[:, :, a]
        for b in range(4):
            gb = grads[:, :, b]
            blk = (
                lam[:, None, None] * ga[:, :, None] * gb[:, None, :]
                + mu[:, None, None] * gb[:, :, None] * ga[:, None, :]
                + (mu * dots[:, a, b])[:, None, None] * eye[None, :, :]
            )
            blocks[:, a, b] = vol[:, None, None] * blk
    dof = (3 * mesh.tets[:, :, None] + np.arange(3)[None, None, :]).reshape(
        mesh.n_tets, 12
    )
    rows = np.repeat(dof, 12, axis=1).ravel()
    cols = np.tile(dof, (1, 12)).ravel()
    K = sp.coo_matrix(
        (blocks.transpose(0, 1, 3, 2, 4).reshape(mesh.n_tets, 12, 12).ravel(), (rows, cols)),
        shape=(ndof, ndof),
    ).tocsr()

    z_len = float(mesh.nodes[:, 2].max())
    fixed = np.zeros(ndof, dtype=bool)
    u_fix = np.zeros(ndof)
    for node in mesh.boundary_nodes(FaceTag.BOTTOM):
        fixed[3 * node : 3 * node + 3] = True
    top_nodes = mesh.boundary_nodes(FaceTag.TOP)
    fixed[3 * top_nodes + 2] = True
    u_fix[3 * top_nodes + 2] = -params.applied_strain * z_len

    free = ~fixed
    rhs = -(K[free][:, fixed] @ u_fix[fixed])
    x, iters, res = _solve_spd(K[free][:, free], rhs, method=method, tol=tol)

    u = u_fix.copy()
    u[free] = x
    stats = SolveStats(iters, res, time.perf_counter() - t0)
    return VectorField(mesh, u.reshape(n, 3)), stats


def deform_mesh(mesh: TetMesh, u: VectorField) -> TetMesh:
    """Move nodes by the displacement field; rejects inverted elements."""
    if u.mesh is not mesh and u.values.shape[0] != mesh.n_nodes:
        raise ParameterError("displacement field does not match the mesh")
    moved = mesh.with_nodes(mesh.nodes + u.values)
    min_vol = float(moved.tet_volumes().min())
    if min_vol <= 0.0:
        raise DeformationError(f"deformation inverted elements (min volume {min_vol:g} mm^3)")
    return moved


def divergence_volume_change(u: VectorField) -> float:
    """First-order volume change integral ∫ div(u) dV in mm^3."""
    grads, vol = _gradients(u.mesh.nodes, u.mesh.tets)
    div = np.einsum("eia,eai->e", grads, u.values[u.mesh.tets])
    return float(np.dot(div, vol))


def surface_values(field: ScalarField, points_xy: np.ndarray, tag=FaceTag.TOP) -> np.ndarray:
    """Interpolate the field at (x, y) points on a tagged boundary surface.

    The tagged triangles are projected to the xy-plane (valid while the
    deformed surface remains a graph over xy) and sampled barycentrically.
    """
    mesh = field.mesh
    tris = mesh.faces[mesh.face_tags == tag]
    if tris.shape[0] == 0:
        raise ParameterError(f"mesh has no faces tagged {tag!r}")
    p = mesh.nodes[tris][:, :, :2]  # (F, 3, 2)
    pts = np.asarray(points_xy, dtype=float)

    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (
        b[:, 1] - a[:, 1]
    )
    dx = pts[:, None, 0] - a[None, :, 0]
    dy = pts[:, None, 1] - a[None, :, 1]
    w1 = ((c[:, 1] - a[:, 1])[None, :] * dx - (c[:, 0] - a[:, 0])[None, :] * dy) / det
    w2 = (-(b[:, 1] - a[:, 1])[None, :] * dx + (b[:, 0] - a[:, 0])[None, :] * dy) / det
    w0 = 1.0 - w1 - w2
    ok = (w0 >= -1e-9) & (w1 >= -1e-9) & (w2 >= -1e-9)
    hit = np.argmax(ok, axis=1)
    if not np.all(ok[np.arange(pts.shape[0]), hit]):
        missing = pts[~ok[np.arange(pts.shape[0]), hit]]
        raise ParameterError(f"points outside the tagged surface, e.g. {missing[0]}")
    idx = np.arange(pts.shape[0])
    tvals = field.values[tris[hit]]
    w = np.stack([w0[idx, hit], w1[idx, hit], w2[idx, hit]], axis=1)
    return np.einsum("pi,pi->p", w, tvals)


def surface_slice(
    field: ScalarField, axis: str, offset_mm: float, *, shape=(121, 51)
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample the field on a regular grid in a coordinate plane.

    axis: 'x', 'y' or 'z' (the plane normal); offset in mm. Returns
    (coords_u, coords_v, T) where u, v are the remaining axes in x<y<z order.
    Grid points outside the (possibly deformed) mesh come back as NaN.
    """
    mesh = field.mesh
    ax = {"x": 0, "y": 1, "z": 2}.get(axis)
    if ax is None:
        raise ParameterError(f"axis must be x, y or z, not {axis!r}")
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)
    if not lo[ax] <= offset_mm <= hi[ax]:
        raise ParameterError(
            f"plane {axis}={offset_mm} outside mesh range [{lo[ax]}, {hi[ax]}]"
        )
    uax, vax = [d for d in range(3) if d != ax]
    us = np.linspace(lo[uax], hi[uax], shape[0])
    vs = np.linspace(lo[vax], hi[vax], shape[1])
    pts = np.empty((shape[0] * shape[1], 3))
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    pts[:, uax] = uu.ravel()
    pts[:, vax] = vv.ravel()
    pts[:, ax] = offset_mm
    vals = _interpolate_points(field, pts)
    return us, vs, vals.reshape(shape)


def _interpolate_points(field: ScalarField, pts: np.ndarray) -> np.ndarray:
    """Barycentric interpolation at arbitrary points; NaN when not inside any tet."""
    mesh = field.mesh
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    nbins = np.maximum(1, np.minimum(40, (mesh.n_tets // 64) ** (1 / 3))).astype(int)
    nbins = np.array([nbins, nbins, nbins]).ravel()

    p = mesh.nodes[mesh.tets]
    tet_lo = p.min(axis=1)
    tet_hi = p.max(axis=1)
    cell_lo = ((tet_lo - lo) / span * nbins).astype(int).clip(0, nbins - 1)
    cell_hi = ((tet_hi - lo) / span * nbins).astype(int).clip(0, nbins - 1)
    buckets: dict[tuple, list] = {}
    for t in range(mesh.n_tets):
        for i in range(cell_lo[t, 0], cell_hi[t, 0] + 1):
            for j in range(cell_lo[t, 1], cell_hi[t, 1] + 1):
                for k in range(cell_lo[t, 2], cell_hi[t, 2] + 1):
                    buckets.setdefault((i, j, k), []).append(t)

    out = np.full(pts.shape[0], np.nan)
    cells = ((pts - lo) / span * nbins).astype(int).clip(0, nbins - 1)
    for i, pt in enumerate(pts):
        cand = buckets.get(tuple(cells[i]))
        if not cand:
            continue
        cand = np.array(cand)
        verts = mesh.nodes[mesh.tets[cand]]
        jac = np.stack(
            [verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0], verts[:, 3] - verts[:, 0]],
            axis=2,
        )
        try:
            bary123 = np.linalg.solve(jac, (pt - verts[:, 0])[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            continue
        bary = np.column_stack([1.0 - bary123.sum(axis=1), bary123])
        ok = np.all(bary >= -1e-9, axis=1)
        if np.any(ok):
            t = cand[np.argmax(ok)]
            w = bary[np.argmax(ok)]
            out[i] = float(np.dot(w, field.values[mesh.tets[t]]))
    return out


def write_field_csv(field: ScalarField, path) -> None:
    """CSV export: node_index, x_mm, y_mm, z_mm, T_celsius."""
    rows = (
        (i, x, y, z, t)
        for i, ((x, y, z), t) in enumerate(zip(field.mesh.nodes, field.values))
    )
    write_csv(path, ["node_index", "x_mm", "y_mm", "z_mm", "T_celsius"], rows)
