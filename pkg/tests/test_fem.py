from dataclasses import replace

import numpy as np
import pytest

from tactherm.errors import (
    DeformationError,
    ParameterError,
    SingularSystemError,
    SolverError,
)
from tactherm.fem import (
    ElasticParams,
    ScalarField,
    SolveStats,
    ThermalParams,
    VectorField,
    deform_mesh,
    divergence_volume_change,
    energy_balance,
    solve_elastic,
    solve_heat,
    surface_slice,
    surface_values,
    write_field_csv,
)
from tactherm.geometry import ShapeFamily, TissueDims, TumorShape, place_prism
from tactherm.mesh import FaceTag, RefinementSpec, build_mesh

import oracles

SLAB = dict(length=0.025, k=0.6, h=20.0, q=1.0e5, t_bottom=33.1, t_ambient=24.0)


def decagon_mesh(factor=2, nx=12, ny=6, nz=5):
    geom = place_prism(TumorShape(ShapeFamily.REGULAR_POLYGON, n=10), TissueDims())
    return build_mesh(geom, RefinementSpec(nx, ny, nz, local_factor=factor))


def all_tumor(mesh):
    """Relabel every element as tumor: turns the block into a uniform source."""
    return replace(
        mesh,
        material=np.ones(mesh.n_tets, dtype=np.uint8),
        tumor_frac=np.ones(mesh.n_tets),
    )


def slab_params():
    return ThermalParams(
        k_tissue=SLAB["k"],
        k_tumor=SLAB["k"],
        q_tumor=SLAB["q"],
        h_top=SLAB["h"],
        t_ambient=SLAB["t_ambient"],
        t_bottom=SLAB["t_bottom"],
    )


def slab_error(level, method="pcg"):
    """Max nodal deviation from the closed-form slab profile, relative to the
    profile's range. Levels refine isotropically: the worst error sits in the
    wall/corner columns where the split-hex stencils are one-sided, and that
    constant degrades badly for flat cells."""
    nx, ny, nz = level
    geom = place_prism(TumorShape(ShapeFamily.REGULAR_POLYGON, n=10), TissueDims())
    mesh = all_tumor(build_mesh(geom, RefinementSpec(nx, ny, nz)))
    field, stats = solve_heat(mesh, slab_params(), method=method)
    exact = oracles.slab_temperature(mesh.nodes[:, 2] * 1e-3, **SLAB)
    zs = np.linspace(0.0, SLAB["length"], 1001)
    rng = np.ptp(oracles.slab_temperature(zs, **SLAB))
    return float(np.max(np.abs(field.values - exact))) / rng, stats


def test_slab_error_shrinks_under_refinement():
    errs = [slab_error(lv)[0] for lv in ((12, 6, 4), (24, 12, 8))]
    assert errs[1] < 0.5 * errs[0]
    assert errs[1] < 0.03


def test_slab_assembly_is_exact_for_linear_solutions():
    # q = 0 makes the exact solution linear in z, which lives in the FE
    # space: any discrepancy beyond solver tolerance is an assembly bug
    geom = place_prism(TumorShape(ShapeFamily.REGULAR_POLYGON, n=10), TissueDims())
    mesh = build_mesh(geom, RefinementSpec(12, 6, 4))
    p = slab_params()
    field, _ = solve_heat(mesh, ThermalParams(
        k_tissue=p.k_tissue, k_tumor=p.k_tumor, q_tumor=0.0,
        h_top=p.h_top, t_ambient=p.t_ambient, t_bottom=p.t_bottom,
    ), method="direct")
    c = p.h_top * (p.t_ambient - p.t_bottom) / (p.k_tissue + p.h_top * SLAB["length"])
    exact = p.t_bottom + c * mesh.nodes[:, 2] * 1e-3
    np.testing.assert_allclose(field.values, exact, atol=1e-10)


def test_no_source_no_convection_gives_constant():
    mesh = decagon_mesh(factor=1, nx=6, ny=3, nz=3)
    p = ThermalParams(q_tumor=0.0, h_top=0.0)
    field, stats = solve_heat(mesh, p)
    np.testing.assert_allclose(field.values, p.t_bottom, atol=1e-6)
    assert stats.final_residual <= 1e-10


def test_maximum_principle_without_source():
    mesh = decagon_mesh(factor=1, nx=6, ny=3, nz=4)
    field, _ = solve_heat(mesh, ThermalParams(q_tumor=0.0))
    boundary = np.unique(mesh.faces)
    interior = np.setdiff1d(np.arange(mesh.n_nodes), boundary)
    assert field.values[interior].max() <= field.values[boundary].max() + 1e-9
    assert field.values[interior].min() >= field.values[boundary].min() - 1e-9


def test_monotone_in_source():
    mesh = decagon_mesh(factor=2, nx=8, ny=4, nz=4)
    lo, _ = solve_heat(mesh, ThermalParams(q_tumor=1.0e5), method="direct")
    hi, _ = solve_heat(mesh, ThermalParams(q_tumor=2.0e5), method="direct")
    assert np.all(hi.values >= lo.values - 1e-9)


def test_energy_balance_is_tight():
    mesh = decagon_mesh()
    params = ThermalParams()
    field, _ = solve_heat(mesh, params, method="direct")
    bal = energy_balance(field, params)
    assert bal.generated_w == pytest.approx(1.0e5 * 3200.0 * 1e-9, rel=1e-12)
    assert bal.residual_rel < 1e-8
    # bottom is warmer than the interior: heat flows in there, out the top
    assert bal.outflow_top_w > 0
    assert bal.outflow_bottom_w < 0


def test_pcg_and_direct_agree():
    mesh = decagon_mesh(factor=1, nx=8, ny=4, nz=4)
    params = ThermalParams()
    a, sa = solve_heat(mesh, params, method="pcg")
    b, sb = solve_heat(mesh, params, method="direct")
    assert sa.iterations > 0
    assert sb.iterations == 0
    np.testing.assert_allclose(a.values, b.values, atol=1e-7)


def test_pcg_nonconvergence_raises_with_stats():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    with pytest.raises(SolverError) as exc:
        solve_heat(mesh, ThermalParams(), max_iter=2)
    assert isinstance(exc.value.stats, SolveStats)
    assert exc.value.stats.iterations == 2


def test_singular_without_any_pinning_condition():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    # relabel the bottom faces away so no Dirichlet node remains
    tags = mesh.face_tags.copy()
    tags[tags == FaceTag.BOTTOM] = FaceTag.SIDE_X0
    unpinned = replace(mesh, face_tags=tags)
    with pytest.raises(SingularSystemError):
        solve_heat(unpinned, ThermalParams(h_top=0.0))
    # with convection the Robin term pins the solution fine
    field, _ = solve_heat(unpinned, ThermalParams(q_tumor=0.0))
    np.testing.assert_allclose(field.values, 24.0, atol=1e-6)


def test_elastic_zero_strain_zero_displacement():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    u, _ = solve_elastic(mesh, ElasticParams(applied_strain=0.0))
    np.testing.assert_allclose(u.values, 0.0, atol=1e-12)


def test_elastic_uniaxial_poisson_zero():
    mesh = decagon_mesh(factor=1, nx=6, ny=3, nz=3)
    p = ElasticParams(poisson=0.0, tumor_stiffness_factor=1.0, applied_strain=0.06)
    u, _ = solve_elastic(mesh, p)
    expect_uz = -0.06 * mesh.nodes[:, 2]
    np.testing.assert_allclose(u.values[:, 2], expect_uz, atol=1e-8)
    np.testing.assert_allclose(u.values[:, :2], 0.0, atol=1e-8)


def test_elastic_top_face_displacement_imposed():
    mesh = decagon_mesh(factor=1, nx=6, ny=3, nz=3)
    u, _ = solve_elastic(mesh, ElasticParams())
    top = mesh.boundary_nodes(FaceTag.TOP)
    np.testing.assert_allclose(u.values[top, 2], -0.06 * 25.0)
    assert np.max(np.abs(u.values[:, 2])) == pytest.approx(1.5)


def test_deform_mesh_and_volume_change():
    mesh = decagon_mesh(factor=2, nx=8, ny=4, nz=4)
    u, _ = solve_elastic(mesh, ElasticParams())
    moved = deform_mesh(mesh, u)
    dv = moved.tet_volumes().sum() - mesh.tet_volumes().sum()
    assert dv < 0
    # exact identity: per-element volume ratio is det(I + grad u)
    p = mesh.nodes[mesh.tets]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=1)
    uq = u.values[mesh.tets]
    du = np.stack([uq[:, 1] - uq[:, 0], uq[:, 2] - uq[:, 0], uq[:, 3] - uq[:, 0]], axis=1)
    grad_u = np.linalg.solve(jac, du)  # rows: d(u)/d(edge basis) -> full grad
    det_ratio = np.linalg.det(np.eye(3)[None] + grad_u)
    dv_exact = float(np.dot(mesh.tet_volumes(), det_ratio - 1.0))
    assert dv == pytest.approx(dv_exact, rel=1e-9)
    # first-order estimate: divergence integral agrees to O(|grad u|)
    est = divergence_volume_change(u)
    assert dv == pytest.approx(est, rel=0.25)


def test_deform_identity_and_translation():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    zero = VectorField(mesh, np.zeros((mesh.n_nodes, 3)))
    np.testing.assert_array_equal(deform_mesh(mesh, zero).nodes, mesh.nodes)
    shift = VectorField(mesh, np.tile([1.0, -2.0, 0.5], (mesh.n_nodes, 1)))
    np.testing.assert_allclose(
        deform_mesh(mesh, shift).tet_volumes(), mesh.tet_volumes(), rtol=1e-12
    )


def test_deform_rejects_inversion():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    u = np.zeros((mesh.n_nodes, 3))
    u[:, 2] = -2.0 * mesh.nodes[:, 2]  # flips the block
    with pytest.raises(DeformationError):
        deform_mesh(mesh, VectorField(mesh, u))


def test_surface_values_reproduces_nodal_temperatures():
    mesh = decagon_mesh(factor=1, nx=6, ny=3, nz=3)
    values = np.cos(mesh.nodes[:, 0]) + mesh.nodes[:, 1] ** 2
    field = ScalarField(mesh, values)
    top = mesh.boundary_nodes(FaceTag.TOP)
    got = surface_values(field, mesh.nodes[top, :2])
    np.testing.assert_allclose(got, values[top], rtol=1e-12)


def test_surface_values_outside_raises():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    field = ScalarField(mesh, np.zeros(mesh.n_nodes))
    with pytest.raises(ParameterError):
        surface_values(field, np.array([[-5.0, 30.0]]))


def test_surface_slice_constant_field():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    field = ScalarField(mesh, np.full(mesh.n_nodes, 7.25))
    us, vs, grid = surface_slice(field, "y", 30.0, shape=(13, 7))
    assert grid.shape == (13, 7)
    finite = np.isfinite(grid)
    assert finite.all()
    np.testing.assert_allclose(grid, 7.25, rtol=1e-12)


def test_surface_slice_hits_nodal_values():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    values = mesh.nodes[:, 0] + 3.0 * mesh.nodes[:, 2]
    field = ScalarField(mesh, values)
    # linear field: interpolation is exact everywhere
    us, vs, grid = surface_slice(field, "y", 15.0, shape=(9, 6))
    expect = us[:, None] + 3.0 * vs[None, :]
    np.testing.assert_allclose(grid, expect, rtol=1e-10)


def test_surface_slice_validation():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    field = ScalarField(mesh, np.zeros(mesh.n_nodes))
    with pytest.raises(ParameterError):
        surface_slice(field, "y", 99.0)
    with pytest.raises(ParameterError):
        surface_slice(field, "w", 10.0)


def test_field_validation():
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    with pytest.raises(ParameterError):
        ScalarField(mesh, np.zeros(3))
    bad = np.zeros(mesh.n_nodes)
    bad[0] = np.nan
    with pytest.raises(ParameterError):
        ScalarField(mesh, bad)
    with pytest.raises(ParameterError):
        ElasticParams(poisson=0.5)
    with pytest.raises(ParameterError):
        ThermalParams(k_tissue=0.0)


def test_field_csv_deterministic(tmp_path):
    mesh = decagon_mesh(factor=1, nx=4, ny=2, nz=2)
    field = ScalarField(mesh, np.linspace(20.0, 30.0, mesh.n_nodes))
    write_field_csv(field, tmp_path / "f1.csv")
    write_field_csv(field, tmp_path / "f2.csv")
    assert (tmp_path / "f1.csv").read_bytes() == (tmp_path / "f2.csv").read_bytes()
    header = (tmp_path / "f1.csv").read_text().splitlines()[0]
    assert header == "node_index,x_mm,y_mm,z_mm,T_celsius"
