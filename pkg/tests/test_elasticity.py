"""Elasticity assembly, solver, and recovery tests against dense oracles."""

import numpy as np
import pytest
import scipy.sparse as sp

from dentalfem.elasticity import (
    LoadSpec,
    Material,
    MaterialTable,
    PatchLoad,
    SolverParams,
    SparseSystem,
    Solution,
    apply_dirichlet,
    assemble,
    assemble_load,
    compute_strain,
    compute_stress,
    element_stiffness,
    export_vtk,
    fixed_nodes_of,
    lame_from_engineering,
    materials_per_tet,
    parse_materials_config,
    per_tooth_maxima,
    read_vtk,
    rigid_body_modes,
    solve_cg,
    von_mises,
)
from dentalfem.errors import (
    ConfigurationError,
    ConvergenceError,
    ElementQualityError,
    NearIncompressibleError,
    ParameterError,
    SingularSetupError,
    SubdomainReferenceError,
)
from dentalfem.geometry import BoundaryTag, TetMesh, tag_axis_faces, voxels_to_tets
from dentalfem.volume import LabelVolume

from conftest import box_labels, make_bar_mesh
from oracles import (
    dense_constrained_solve,
    dense_element_stiffness,
    dense_global_stiffness,
)

RNG = np.random.default_rng(2718)

REF_TET = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


def single_tet_mesh(coords=REF_TET, label=1, name="Jaw"):
    tets = np.array([[0, 1, 2, 3]], dtype=np.int32)
    facets = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]], dtype=np.int32)
    return TetMesh(
        nodes=np.asarray(coords, dtype=float),
        tets=tets,
        tet_labels=np.array([label], dtype=np.int32),
        subdomain_names={label: name},
        boundary_facets=facets,
        facet_owner=np.zeros(4, dtype=np.int32),
        facet_tags=np.full(4, BoundaryTag.FREE, dtype=np.int8),
        facet_patch=np.full(4, -1, dtype=np.int32),
    )


# --------------------------------------------------------------------------
# Lame conversion
# --------------------------------------------------------------------------

def test_lame_quarter_poisson_identity():
    lam, mu = lame_from_engineering(1.0, 0.25)
    assert abs(lam - 0.4) < 1e-15 and abs(mu - 0.4) < 1e-15


def test_lame_zero_poisson():
    lam, mu = lame_from_engineering(7.0, 0.0)
    assert lam == 0.0 and mu == 3.5


def test_lame_round_trip_random():
    rng = np.random.default_rng(1)
    for _ in range(50):
        E = float(rng.uniform(0.1, 1e5))
        nu = float(rng.uniform(-0.9, 0.49))
        lam, mu = lame_from_engineering(E, nu)
        E_back = mu * (3 * lam + 2 * mu) / (lam + mu)
        nu_back = lam / (2 * (lam + mu))
        assert abs(E_back - E) <= 1e-12 * E
        assert abs(nu_back - nu) <= 1e-12 * max(abs(nu), 1e-3)


def test_lame_near_incompressible_rejected():
    with pytest.raises(NearIncompressibleError):
        lame_from_engineering(1.0, 0.4999999)
    with pytest.raises(ParameterError):
        lame_from_engineering(-1.0, 0.3)
    with pytest.raises(ParameterError):
        lame_from_engineering(1.0, 0.6)


# --------------------------------------------------------------------------
# element stiffness
# --------------------------------------------------------------------------

def test_element_stiffness_kills_translations():
    K = element_stiffness(REF_TET, 1.3, 0.7)
    for c in range(3):
        t = np.zeros(12)
        t[c::3] = 1.0
        assert np.abs(K @ t).max() < 1e-14


def test_element_stiffness_scales_linearly_with_size():
    coords = RNG.normal(size=(4, 3))
    if np.linalg.det(coords[1:] - coords[0]) < 0:
        coords[[2, 3]] = coords[[3, 2]]
    K1 = element_stiffness(coords, 2.0, 1.0)
    K2 = element_stiffness(3.0 * coords, 2.0, 1.0)
    assert np.allclose(K2, 3.0 * K1, rtol=1e-12, atol=1e-12)


def test_element_stiffness_has_six_zero_eigenvalues():
    K = element_stiffness(REF_TET, 1.0, 1.0)
    w = np.linalg.eigvalsh(K)
    assert (np.abs(w) < 1e-10).sum() == 6
    assert np.all(w > -1e-12)


def test_element_stiffness_matches_tensor_oracle():
    for _ in range(10):
        coords = RNG.normal(size=(4, 3))
        if np.linalg.det(coords[1:] - coords[0]) < 0:
            coords[[2, 3]] = coords[[3, 2]]
        lam, mu = float(RNG.uniform(0.1, 5)), float(RNG.uniform(0.1, 5))
        K = element_stiffness(coords, lam, mu)
        K_oracle = dense_element_stiffness(coords, lam, mu)
        scale = np.abs(K_oracle).max()
        assert np.abs(K - K_oracle).max() <= 1e-12 * scale
        assert np.abs(K - K.T).max() <= 1e-13 * scale


def test_element_stiffness_rejects_degenerate():
    flat = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    with pytest.raises(ElementQualityError):
        element_stiffness(flat, 1.0, 1.0)


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

def test_assemble_single_tet_equals_element_matrix(simple_materials):
    mesh = single_tet_mesh()
    system = assemble(mesh, simple_materials)
    mat = simple_materials.materials["Jaw"]
    K_expected = element_stiffness(REF_TET, mat.lam, mat.mu)
    assert np.abs(system.matrix.toarray() - K_expected).max() < 1e-12 * np.abs(K_expected).max()


def test_assemble_disconnected_copies_are_block_diagonal(simple_materials):
    data = np.zeros((5, 1, 1), dtype=np.int32)
    data[0, 0, 0] = 1
    data[4, 0, 0] = 1
    labels = LabelVolume(data, (1, 1, 1), (0, 0, 0), {1: "Jaw"})
    mesh = voxels_to_tets(labels)
    K = assemble(mesh, simple_materials).matrix.toarray()
    # node ids of the two cubes, each in identical internal (x-fastest) order
    a_nodes = np.flatnonzero(mesh.nodes[:, 0] < 2)
    b_nodes = np.flatnonzero(mesh.nodes[:, 0] > 2)
    a_dofs = (3 * a_nodes[:, None] + np.arange(3)).ravel()
    b_dofs = (3 * b_nodes[:, None] + np.arange(3)).ravel()
    assert np.abs(K[np.ix_(a_dofs, b_dofs)]).max() == 0.0
    assert np.allclose(K[np.ix_(a_dofs, a_dofs)], K[np.ix_(b_dofs, b_dofs)],
                       rtol=1e-12, atol=1e-12)


def test_assemble_matches_dense_oracle_on_random_mesh(simple_materials):
    rng = np.random.default_rng(5)
    data = (rng.random((3, 3, 3)) < 0.7).astype(np.int32)
    data[1, 1, 1] = 1
    labels = LabelVolume(data, (0.5, 0.6, 0.7), (0, 0, 0), {1: "Jaw"})
    mesh = voxels_to_tets(labels)
    system = assemble(mesh, simple_materials)
    lam, mu = materials_per_tet(mesh, simple_materials)
    K_dense = dense_global_stiffness(mesh.nodes, mesh.tets, lam, mu)
    scale = np.abs(K_dense).max()
    for _ in range(5):
        x = rng.normal(size=system.ndof)
        assert np.abs(system.matrix @ x - K_dense @ x).max() <= 1e-12 * scale * np.abs(x).max()


def test_assemble_missing_material_names_subdomain():
    mesh = single_tet_mesh(name="Jaw")
    table = MaterialTable({"Tooth": Material(1000.0, 0.3)})
    with pytest.raises(ConfigurationError, match="Jaw"):
        assemble(mesh, table)


def test_assembled_matrix_annihilates_rigid_modes(simple_materials, bar_mesh):
    system = assemble(bar_mesh, simple_materials)
    K = system.matrix
    norm_K = sp.linalg.norm(K, np.inf)
    for mode in rigid_body_modes(bar_mesh.nodes):
        assert np.abs(K @ mode).max() <= 1e-9 * norm_K * max(np.abs(mode).max(), 1.0)


def test_energy_positivity(simple_materials, bar_mesh):
    system = assemble(bar_mesh, simple_materials)
    rng = np.random.default_rng(2)
    norm_K = sp.linalg.norm(system.matrix, np.inf)
    for _ in range(10):
        x = rng.normal(size=system.ndof)
        assert x @ (system.matrix @ x) >= -1e-12 * norm_K * (x @ x)


# --------------------------------------------------------------------------
# loads
# --------------------------------------------------------------------------

def test_load_share_rule_on_single_facet():
    # z=0 face (nodes 0,1,2) of a stretched tet has area 2
    coords = np.array([[0.0, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 1]])
    mesh = single_tet_mesh(coords)
    mesh.facet_tags[3] = BoundaryTag.LOADED  # facet (0, 2, 1), outward -z
    mesh.facet_patch[3] = 1
    mesh.patch_names[1] = "base"
    loads = LoadSpec(patches={"base": PatchLoad(mode="fixed-vector", vector=(3.0, 0, 0))})
    rhs = assemble_load(mesh, loads)
    for node in (0, 1, 2):
        assert np.allclose(rhs[3 * node:3 * node + 3], (2.0, 0.0, 0.0))
    assert np.allclose(rhs[9:12], 0.0)


def test_zero_traction_gives_zero_vector(bar_mesh):
    rhs = assemble_load(bar_mesh, LoadSpec(default=PatchLoad(magnitude=0.0)))
    assert np.abs(rhs).max() == 0.0


def test_total_force_equals_traction_times_area():
    rng = np.random.default_rng(8)
    for _ in range(5):
        nz = int(rng.integers(2, 6))
        mesh = make_bar_mesh(nz=nz, section=(2, 3), spacing=0.5)
        vec = tuple(rng.normal(size=3))
        loads = LoadSpec(default=PatchLoad(mode="fixed-vector", vector=vec))
        rhs = assemble_load(mesh, loads)
        total = rhs.reshape(-1, 3).sum(axis=0)
        areas, _ = mesh.facet_areas_normals()
        patch_area = areas[mesh.facet_tags == BoundaryTag.LOADED].sum()
        assert np.allclose(total, np.asarray(vec) * patch_area, rtol=1e-12, atol=1e-12)


def test_normal_pressure_points_into_surface(bar_mesh):
    rhs = assemble_load(bar_mesh, LoadSpec(default=PatchLoad(magnitude=100.0)))
    total = rhs.reshape(-1, 3).sum(axis=0)
    # +z face loaded: pressure presses along -z with magnitude * area (1 mm^2)
    assert np.allclose(total, (0, 0, -100.0), rtol=1e-12, atol=1e-9)


def test_unknown_patch_rejected(bar_mesh):
    loads = LoadSpec(patches={"nonexistent": PatchLoad()})
    with pytest.raises(SubdomainReferenceError, match="nonexistent"):
        assemble_load(bar_mesh, loads)


# --------------------------------------------------------------------------
# Dirichlet
# --------------------------------------------------------------------------

def test_all_nodes_fixed_yields_identity(simple_materials):
    mesh = single_tet_mesh()
    system = assemble(mesh, simple_materials)
    constrained = apply_dirichlet(system, np.arange(4))
    assert np.allclose(constrained.matrix.toarray(), np.eye(12))
    assert np.abs(constrained.rhs).max() == 0.0
    u, report = solve_cg(constrained)
    assert np.abs(u).max() == 0.0


def test_dirichlet_keeps_spd(simple_materials, bar_mesh):
    system = assemble(bar_mesh, simple_materials)
    system.rhs = assemble_load(bar_mesh, LoadSpec())
    constrained = apply_dirichlet(system, fixed_nodes_of(bar_mesh))
    K = constrained.matrix.toarray()
    assert np.abs(K - K.T).max() <= 1e-12 * np.abs(K).max()
    w = np.linalg.eigvalsh(K)
    assert w.min() > 0


def test_dirichlet_empty_set_rejected(simple_materials):
    mesh = single_tet_mesh()
    system = assemble(mesh, simple_materials)
    with pytest.raises(SingularSetupError):
        apply_dirichlet(system, np.array([], dtype=int))


def test_dirichlet_homogeneous_rhs_untouched_on_free_rows(simple_materials, bar_mesh):
    system = assemble(bar_mesh, simple_materials)
    system.rhs = assemble_load(bar_mesh, LoadSpec())
    fixed = fixed_nodes_of(bar_mesh)
    constrained = apply_dirichlet(system, fixed)
    free_dofs = np.setdiff1d(np.arange(system.ndof), constrained.fixed_dofs)
    # homogeneous condition: eliminating columns cannot change the free rhs
    assert np.allclose(constrained.rhs[free_dofs], system.rhs[free_dofs])
    assert np.abs(constrained.rhs[constrained.fixed_dofs]).max() == 0.0


# --------------------------------------------------------------------------
# solver
# --------------------------------------------------------------------------

def test_cg_zero_rhs_zero_iterations(simple_materials, bar_mesh):
    system = assemble(bar_mesh, simple_materials)
    constrained = apply_dirichlet(system, fixed_nodes_of(bar_mesh))
    u, report = solve_cg(constrained)
    assert report.iterations == 0
    assert np.abs(u).max() == 0.0


def test_cg_identity_one_iteration():
    n = 30
    f = RNG.normal(size=3 * n)
    system = SparseSystem(matrix=sp.identity(3 * n, format="csr"), rhs=f, num_nodes=n)
    u, report = solve_cg(system)
    assert report.iterations == 1
    assert np.allclose(u.ravel(), f, rtol=1e-14, atol=1e-14)


def test_cg_matches_dense_solve(simple_materials, pressure_load):
    mesh = make_bar_mesh(nz=4, section=(2, 2), spacing=0.5)  # 75 nodes, 225 dofs
    system = assemble(mesh, simple_materials)
    system.rhs = assemble_load(mesh, pressure_load)
    fixed = fixed_nodes_of(mesh)
    constrained = apply_dirichlet(system, fixed)
    u, report = solve_cg(constrained, SolverParams(rel_tol=1e-13))
    lam, mu = materials_per_tet(mesh, simple_materials)
    K_dense = dense_global_stiffness(mesh.nodes, mesh.tets, lam, mu)
    dofs = (3 * fixed[:, None] + np.arange(3)).ravel()
    u_dense = dense_constrained_solve(K_dense, system.rhs, dofs)
    err = np.abs(u.ravel() - u_dense).max() / np.abs(u_dense).max()
    assert err <= 1e-8
    # homogeneous fixed dofs stay exactly zero through the iteration
    assert np.abs(u.ravel()[dofs]).max() == 0.0


def test_cg_nonconvergence_carries_history(simple_materials, bar_mesh, pressure_load):
    system = assemble(bar_mesh, simple_materials)
    system.rhs = assemble_load(bar_mesh, pressure_load)
    constrained = apply_dirichlet(system, fixed_nodes_of(bar_mesh))
    with pytest.raises(ConvergenceError) as err:
        solve_cg(constrained, SolverParams(rel_tol=1e-14, max_iter=2))
    assert len(err.value.residual_history) == 2


# --------------------------------------------------------------------------
# strain / stress recovery
# --------------------------------------------------------------------------

def test_strain_of_uniaxial_field(bar_mesh):
    a = 0.01
    u = np.zeros((bar_mesh.num_nodes, 3))
    u[:, 0] = a * bar_mesh.nodes[:, 0]
    eps = compute_strain(bar_mesh, u)
    assert np.allclose(eps[:, 0, 0], a, rtol=1e-12, atol=1e-14)
    mask = np.ones((3, 3), dtype=bool)
    mask[0, 0] = False
    assert np.abs(eps[:, mask]).max() < 1e-14


def test_strain_of_rigid_rotation_vanishes(bar_mesh):
    omega = np.array([1e-3, -2e-3, 0.5e-3])
    u = np.cross(omega, bar_mesh.nodes)
    eps = compute_strain(bar_mesh, u)
    assert np.abs(eps).max() < 1e-12


def test_strain_of_linear_field_is_symmetrized_gradient(bar_mesh):
    A = RNG.normal(size=(3, 3)) * 1e-2
    u = bar_mesh.nodes @ A.T
    eps = compute_strain(bar_mesh, u)
    expected = 0.5 * (A + A.T)
    assert np.abs(eps - expected).max() <= 1e-12 * np.abs(expected).max()


def test_stress_zero_strain():
    eps = np.zeros((3, 3, 3))
    sigma = compute_stress(eps, np.ones(3), np.ones(3))
    assert np.abs(sigma).max() == 0.0
    assert np.abs(von_mises(sigma)).max() == 0.0


def test_von_mises_uniaxial():
    s = -37.5
    sigma = np.zeros((1, 3, 3))
    sigma[0, 0, 0] = s
    assert np.allclose(von_mises(sigma), abs(s), rtol=1e-14)


def test_hydrostatic_strain_gives_spherical_stress():
    lam, mu = 2.0, 0.7
    e = 1e-3
    eps = np.eye(3)[None, :, :] * e
    sigma = compute_stress(eps, np.array([lam]), np.array([mu]))
    assert np.allclose(sigma[0], (2 * mu + 3 * lam) * e * np.eye(3), rtol=1e-14)
    assert von_mises(sigma)[0] <= 1e-12 * abs((2 * mu + 3 * lam) * e)


# --------------------------------------------------------------------------
# per-tooth maxima
# --------------------------------------------------------------------------

def tooth_mesh():
    data = np.zeros((4, 4, 6), dtype=np.int32)
    data[:, :, :2] = 1
    data[1:3, 1:3, 2:5] = 2
    labels = LabelVolume(data, (1, 1, 1), (0, 0, 0), {1: "Jaw", 2: "Tooth_14"})
    mesh = voxels_to_tets(labels)
    return tag_axis_faces(mesh, fixed=[(2, "lo")], loaded=[(2, "hi")])


def fake_solution(mesh, seed=3):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(mesh.num_nodes, 3))
    eps = rng.normal(size=(mesh.num_tets, 3, 3))
    eps = 0.5 * (eps + np.swapaxes(eps, 1, 2))
    sigma = compute_stress(eps, np.ones(mesh.num_tets), np.ones(mesh.num_tets))
    from dentalfem.elasticity import SolverReport
    return Solution(u=u, strain=eps, stress=sigma, von_mises=von_mises(sigma),
                    report=SolverReport(0, 0.0, True, 3 * mesh.num_nodes))


def test_maxima_zero_solution():
    mesh = tooth_mesh()
    sol = fake_solution(mesh)
    sol.u[:] = 0
    sol.von_mises[:] = 0
    table, warnings = per_tooth_maxima(sol, mesh)
    assert table == {"Tooth_14": {"max_displacement": 0.0, "max_von_mises": 0.0}}


def test_maxima_single_tooth_matches_scan_oracle():
    mesh = tooth_mesh()
    sol = fake_solution(mesh)
    table, _ = per_tooth_maxima(sol, mesh)
    tooth_label = [k for k, v in mesh.subdomain_names.items() if v == "Tooth_14"][0]
    best_u, best_vm = 0.0, 0.0
    for t in range(mesh.num_tets):
        if mesh.tet_labels[t] != tooth_label:
            continue
        best_vm = max(best_vm, sol.von_mises[t])
        for n in mesh.tets[t]:
            best_u = max(best_u, float(np.linalg.norm(sol.u[n])))
    assert table["Tooth_14"]["max_displacement"] == pytest.approx(best_u, rel=1e-15)
    assert table["Tooth_14"]["max_von_mises"] == pytest.approx(best_vm, rel=1e-15)


# --------------------------------------------------------------------------
# VTK
# --------------------------------------------------------------------------

def test_vtk_single_tet_zero_solution():
    mesh = single_tet_mesh()
    sol = fake_solution(mesh)
    sol.u[:] = 0
    sol.strain[:] = 0
    sol.stress[:] = 0
    sol.von_mises[:] = 0
    doc = read_vtk(export_vtk(mesh, sol))
    assert len(doc["points"]) == 4
    assert len(doc["cells"]) == 1
    assert np.abs(doc["point_data"]["displacement"]).max() == 0.0
    assert np.abs(doc["cell_data"]["von_mises"]).max() == 0.0


def test_vtk_round_trip_full_precision():
    mesh = tooth_mesh()
    sol = fake_solution(mesh)
    doc = read_vtk(export_vtk(mesh, sol))
    assert np.array_equal(doc["points"], mesh.nodes)
    assert np.array_equal(doc["point_data"]["displacement"], sol.u)
    assert np.array_equal(doc["cell_data"]["stress"], sol.stress)
    assert np.array_equal(doc["cell_data"]["subdomain"], mesh.tet_labels)


def test_vtk_cell_count_audit():
    rng = np.random.default_rng(12)
    for _ in range(3):
        data = (rng.random((4, 4, 4)) < 0.5).astype(np.int32)
        data[0, 0, 0] = 1
        labels = LabelVolume(data, (1, 1, 1), (0, 0, 0), {1: "Jaw"})
        mesh = voxels_to_tets(labels)
        doc = read_vtk(export_vtk(mesh))
        assert len(doc["cells"]) == mesh.num_tets
        assert np.all(doc["cell_types"] == 10)


# --------------------------------------------------------------------------
# physics invariants
# --------------------------------------------------------------------------

def solve_bar(traction, simple_materials, nz=6):
    mesh = make_bar_mesh(nz=nz)
    system = assemble(mesh, simple_materials)
    system.rhs = assemble_load(
        mesh, LoadSpec(default=PatchLoad(mode="fixed-vector", vector=traction)))
    constrained = apply_dirichlet(system, fixed_nodes_of(mesh))
    u, _ = solve_cg(constrained, SolverParams(rel_tol=1e-12))
    return mesh, system, u


def test_linearity_and_superposition(simple_materials):
    f1 = (0.0, 0.0, -50.0)
    f2 = (10.0, 0.0, 5.0)
    _, _, u1 = solve_bar(f1, simple_materials)
    _, _, u2 = solve_bar(f2, simple_materials)
    _, _, u_scaled = solve_bar(tuple(3 * c for c in f1), simple_materials)
    _, _, u_sum = solve_bar(tuple(a + b for a, b in zip(f1, f2)), simple_materials)
    # within 10x the solver tolerance of 1e-12
    scale = np.abs(u_scaled).max()
    assert np.abs(u_scaled - 3 * u1).max() <= 1e-11 * scale
    assert np.abs(u_sum - (u1 + u2)).max() <= 1e-11 * max(np.abs(u_sum).max(), scale)


def test_global_equilibrium(simple_materials, pressure_load):
    mesh = make_bar_mesh(nz=5, section=(2, 2))
    system = assemble(mesh, simple_materials)
    rhs = assemble_load(mesh, pressure_load)
    system.rhs = rhs.copy()
    constrained = apply_dirichlet(system, fixed_nodes_of(mesh))
    u, _ = solve_cg(constrained, SolverParams(rel_tol=1e-13))
    K = assemble(mesh, simple_materials).matrix  # pre-Dirichlet operator
    residual = K @ u.ravel() - rhs
    reactions = residual[constrained.fixed_dofs].reshape(-1, 3).sum(axis=0)
    applied = rhs.reshape(-1, 3).sum(axis=0)
    assert np.abs(reactions + applied).max() <= 1e-8 * np.abs(applied).max()


# --------------------------------------------------------------------------
# materials config
# --------------------------------------------------------------------------

def test_parse_sample_materials_config():
    from importlib import resources
    doc = resources.files("dentalfem").joinpath("data/sample_materials.json").read_text()
    import json
    table, loads = parse_materials_config(json.loads(doc))
    assert set(table.materials) >= {"Jaw", "Tooth", "PDL", "Prosthesis"}
    assert sorted(table.mobility_map) == [0, 1, 2, 3]
    assert loads.default.mode == "normal-pressure"
    assert loads.default.magnitude == 100.0


def test_mobility_resolution_and_errors():
    table = MaterialTable(
        {"Jaw": Material(13700, 0.3), "Tooth": Material(18600, 0.31),
         "PDL": Material(68.9, 0.45)},
        mobility_map={0: Material(68.9, 0.45), 1: Material(35.0, 0.45)},
    )
    names = {1: "Jaw", 2: "Tooth_14", 3: "PDL_14"}
    resolved = table.resolve(names, mobility={"Tooth_14": 1})
    assert resolved[3].E == 35.0
    resolved_default = table.resolve(names)
    assert resolved_default[3].E == 68.9
    with pytest.raises(ConfigurationError, match="degree 3"):
        table.resolve(names, mobility={"Tooth_14": 3})


def test_mobility_presets_must_soften():
    doc = {"materials": {"Jaw": {"E": 1000, "nu": 0.3}},
           "mobility": {"0": {"E": 10, "nu": 0.4}, "1": {"E": 20, "nu": 0.4}}}
    with pytest.raises(ConfigurationError, match="decreasing"):
        parse_materials_config(doc)
