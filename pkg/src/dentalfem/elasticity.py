"""Static linear elasticity on P1 tetrahedra.

Assembles the piecewise-isotropic stiffness operator (Hooke's law
sigma = 2*mu*eps + lambda*tr(eps)*I with per-subdomain Lame coefficients),
applies surface tractions on the loaded boundary patches and homogeneous
or prescribed displacements on the fixed boundary, solves with
Jacobi-preconditioned conjugate gradients, and recovers element strain,
stress, and von Mises fields.

Units are the consistent mm-MPa-N system: 1 MPa acting on 1 mm^2 gives 1 N,
displacements come out in mm.  Constant-strain elements make single-point
quadrature exact, so element matrices are formed in closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConfigurationError,
    ConvergenceError,
    ElementQualityError,
    NearIncompressibleError,
    NonSpdError,
    ParameterError,
    SingularSetupError,
    SubdomainReferenceError,
)
from .geometry import BoundaryTag, SubdomainKind, TetMesh, subdomain_kind

_ASSEMBLY_CHUNK = 50_000  # tets per batched element-matrix block


def lame_from_engineering(E: float, nu: float) -> tuple[float, float]:
    """(lambda, mu) from Young's modulus and Poisson ratio."""
    if E <= 0:
        raise ParameterError(f"Young's modulus must be > 0, got {E}")
    if not -1.0 < nu < 0.5:
        raise ParameterError(f"Poisson ratio must lie in (-1, 0.5), got {nu}")
    if nu >= 0.5 - 1e-6:
        raise NearIncompressibleError(
            f"nu = {nu} is too close to 0.5: linear tetrahedra lock"
        )
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


@dataclass(frozen=True)
class Material:
    E: float   # MPa
    nu: float
    lam: float = field(init=False)
    mu: float = field(init=False)

    def __post_init__(self):
        lam, mu = lame_from_engineering(self.E, self.nu)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class MaterialTable:
    """Subdomain name -> material, plus mobility-degree presets for the PDL.

    Lookup order for a mesh subdomain: exact name, then the tooth's mobility
    preset for PDL_XX subdomains, then the kind-level name ("Jaw", "Tooth",
    "PDL", "Prosthesis").
    """

    materials: dict[str, Material]
    mobility_map: dict[int, Material] = field(default_factory=dict)

    _KIND_KEY = {
        SubdomainKind.JAW: "Jaw",
        SubdomainKind.PDL: "PDL",
        SubdomainKind.TOOTH: "Tooth",
        SubdomainKind.PROSTHESIS: "Prosthesis",
    }

    def resolve(self, subdomain_names: dict[int, str],
                mobility: dict[str, int] | None = None) -> dict[int, Material]:
        """One material per mesh label; raises naming the missing subdomain."""
        mobility = mobility or {}
        out = {}
        for label, name in subdomain_names.items():
            if name in self.materials:
                out[label] = self.materials[name]
                continue
            kind = subdomain_kind(name)
            if kind == SubdomainKind.PDL and name.startswith("PDL_"):
                tooth = "Tooth_" + name[len("PDL_"):]
                if tooth in mobility:
                    degree = mobility[tooth]
                    if degree not in self.mobility_map:
                        raise ConfigurationError(
                            f"mobility degree {degree} for {tooth} has no material preset"
                        )
                    out[label] = self.mobility_map[degree]
                    continue
            fallback = self._KIND_KEY[kind]
            if fallback not in self.materials:
                raise ConfigurationError(
                    f"no material for subdomain {name!r} (label {label}); "
                    f"add {name!r} or {fallback!r} to the materials table"
                )
            out[label] = self.materials[fallback]
        return out


@dataclass(frozen=True)
class PatchLoad:
    mode: str = "normal-pressure"   # or "fixed-vector"
    magnitude: float = 100.0        # MPa, used by normal-pressure
    vector: tuple[float, float, float] | None = None  # MPa, used by fixed-vector

    def __post_init__(self):
        if self.mode not in ("normal-pressure", "fixed-vector"):
            raise ConfigurationError(f"unknown load mode {self.mode!r}")
        if self.mode == "fixed-vector":
            if self.vector is None:
                raise ConfigurationError("fixed-vector load needs a vector")
            object.__setattr__(self, "vector", tuple(float(c) for c in self.vector))
        if not np.isfinite(self.magnitude):
            raise ConfigurationError("load magnitude must be finite")


@dataclass(frozen=True)
class LoadSpec:
    """Traction per load patch; unlisted patches get the default
    (100 MPa pressing along the inward surface normal)."""

    default: PatchLoad = PatchLoad()
    patches: dict[str, PatchLoad] = field(default_factory=dict)

    def for_patch(self, name: str) -> PatchLoad:
        return self.patches.get(name, self.default)


@dataclass
class SparseSystem:
    """3-dof-per-node CSR system; dof = 3 * node + component."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    num_nodes: int
    fixed_dofs: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    fixed_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    constrained: bool = False

    @property
    def ndof(self) -> int:
        return 3 * self.num_nodes


@dataclass(frozen=True)
class SolverParams:
    rel_tol: float = 1e-8
    max_iter: int | None = None     # None = 10 * ndof
    preconditioner: str = "jacobi"  # or "none"


@dataclass
class SolverReport:
    iterations: int
    relative_residual: float
    converged: bool
    ndof: int
    residual_history: list[float] = field(default_factory=list)


@dataclass
class Solution:
    u: np.ndarray           # (n, 3) nodal displacement, mm
    strain: np.ndarray      # (m, 3, 3) element strain
    stress: np.ndarray      # (m, 3, 3) element stress, MPa
    von_mises: np.ndarray   # (m,) MPa
    report: SolverReport


# --------------------------------------------------------------------------
# element matrices and assembly
# --------------------------------------------------------------------------

def _elastic_matrix(lam: float, mu: float) -> np.ndarray:
    """6x6 isotropic stiffness in engineering (Voigt) order
    (xx, yy, zz, xy, yz, zx) with shear strains gamma = 2*eps."""
    C = np.zeros((6, 6))
    C[:3, :3] = lam
    C[np.arange(3), np.arange(3)] += 2.0 * mu
    C[np.arange(3, 6), np.arange(3, 6)] = mu
    return C


def _shape_gradients(coords: np.ndarray, index_offset: int = 0):
    """Batched P1 shape-function gradients and volumes.

    coords: (m, 4, 3) -> grads (m, 4, 3), volumes (m,)
    """
    edges = coords[:, 1:, :] - coords[:, :1, :]          # (m, 3, 3)
    det = np.linalg.det(edges)
    vol = det / 6.0
    if np.any(vol <= 0):
        bad = index_offset + int(np.argmin(vol))
        raise ElementQualityError(
            f"tetrahedron {bad} has volume {vol.min():.3e} <= 0"
        )
    inv = np.linalg.inv(edges)                            # (m, 3, 3)
    grads = np.empty((len(coords), 4, 3))
    grads[:, 1:, :] = np.swapaxes(inv, 1, 2)              # rows of inv^T
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads, vol


def _strain_displacement(grads: np.ndarray) -> np.ndarray:
    """B matrices (m, 6, 12) mapping nodal displacements to Voigt strain."""
    m = len(grads)
    B = np.zeros((m, 6, 12))
    for a in range(4):
        gx, gy, gz = grads[:, a, 0], grads[:, a, 1], grads[:, a, 2]
        c = 3 * a
        B[:, 0, c + 0] = gx
        B[:, 1, c + 1] = gy
        B[:, 2, c + 2] = gz
        B[:, 3, c + 0] = gy
        B[:, 3, c + 1] = gx
        B[:, 4, c + 1] = gz
        B[:, 4, c + 2] = gy
        B[:, 5, c + 0] = gz
        B[:, 5, c + 2] = gx
    return B


def element_stiffness(coords: np.ndarray, lam: float, mu: float) -> np.ndarray:
    """12x12 stiffness of one tetrahedron (exact for constant strain)."""
    coords = np.asarray(coords, dtype=float).reshape(1, 4, 3)
    grads, vol = _shape_gradients(coords)
    B = _strain_displacement(grads)[0]
    return vol[0] * B.T @ _elastic_matrix(lam, mu) @ B


def assemble(mesh: TetMesh, materials: MaterialTable,
             mobility: dict[str, int] | None = None) -> SparseSystem:
    """Global stiffness matrix from per-subdomain materials."""
    by_label = materials.resolve(mesh.subdomain_names, mobility)
    lam = np.array([by_label[int(l)].lam for l in mesh.tet_labels])
    mu = np.array([by_label[int(l)].mu for l in mesh.tet_labels])

    ndof = 3 * mesh.num_nodes
    edofs = (3 * mesh.tets[:, :, None].astype(np.int64) + np.arange(3)).reshape(-1, 12)

    blocks_rows, blocks_cols, blocks_data = [], [], []
    for start in range(0, mesh.num_tets, _ASSEMBLY_CHUNK):
        sl = slice(start, start + _ASSEMBLY_CHUNK)
        coords = mesh.nodes[mesh.tets[sl]]
        grads, vol = _shape_gradients(coords, index_offset=start)
        B = _strain_displacement(grads)
        # C depends on (lam, mu) per element: C = lam * L + mu * M with
        # constant L, M patterns, so form CB = lam*(L@B) + mu*(M@B)
        L = np.zeros((6, 6))
        L[:3, :3] = 1.0
        M = np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0])
        CB = lam[sl][:, None, None] * (L @ B) + mu[sl][:, None, None] * (M @ B)
        K = vol[:, None, None] * np.einsum("mki,mkj->mij", B, CB)
        e = edofs[start:start + len(K)]
        blocks_rows.append(np.repeat(e, 12, axis=1).ravel())
        blocks_cols.append(np.tile(e, (1, 12)).ravel())
        blocks_data.append(K.ravel())

    rows = np.concatenate(blocks_rows)
    cols = np.concatenate(blocks_cols)
    data = np.concatenate(blocks_data)
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(ndof, ndof)).tocsr()
    return SparseSystem(matrix=matrix, rhs=np.zeros(ndof), num_nodes=mesh.num_nodes)


def assemble_load(mesh: TetMesh, loads: LoadSpec) -> np.ndarray:
    """Right-hand side from constant tractions on the loaded patches: each
    facet node receives traction * area / 3."""
    known = set(mesh.patch_names.values())
    unknown = set(loads.patches) - known
    if unknown:
        raise SubdomainReferenceError(
            f"load patches {sorted(unknown)} not present in mesh (have {sorted(known)})"
        )
    rhs = np.zeros(3 * mesh.num_nodes)
    loaded = np.flatnonzero(mesh.facet_tags == BoundaryTag.LOADED)
    if len(loaded) == 0:
        return rhs
    areas, normals = mesh.facet_areas_normals()
    for f in loaded:
        patch = mesh.patch_names.get(int(mesh.facet_patch[f]), "")
        load = loads.for_patch(patch)
        if load.mode == "normal-pressure":
            traction = -load.magnitude * normals[f]  # presses into the surface
        else:
            traction = np.asarray(load.vector)
        share = traction * (areas[f] / 3.0)
        for node in mesh.boundary_facets[f]:
            rhs[3 * node:3 * node + 3] += share
    return rhs


def fixed_nodes_of(mesh: TetMesh) -> np.ndarray:
    """Nodes on facets tagged as the fixed boundary."""
    fixed_facets = mesh.boundary_facets[mesh.facet_tags == BoundaryTag.FIXED]
    return np.unique(fixed_facets)


def apply_dirichlet(system: SparseSystem, fixed_nodes: np.ndarray,
                    values: np.ndarray | None = None) -> SparseSystem:
    """Constrain all three components of the given nodes by symmetric
    elimination: known contributions move to the right-hand side, constrained
    rows/columns become identity.  values (n_fixed, 3) prescribes
    displacements; None means the homogeneous fixed condition."""
    fixed_nodes = np.unique(np.asarray(fixed_nodes, dtype=np.int64))
    if len(fixed_nodes) == 0:
        raise SingularSetupError("empty fixed-node set: system would be singular")
    dofs = (3 * fixed_nodes[:, None] + np.arange(3)).ravel()
    if values is None:
        vals = np.zeros(len(dofs))
    else:
        values = np.asarray(values, dtype=float)
        if values.shape != (len(fixed_nodes), 3):
            raise ParameterError(
                f"values must be ({len(fixed_nodes)}, 3), got {values.shape}"
            )
        vals = values.ravel()

    K = system.matrix
    ndof = system.ndof
    u_known = np.zeros(ndof)
    u_known[dofs] = vals
    rhs = system.rhs - K @ u_known

    keep = np.ones(ndof, dtype=bool)
    keep[dofs] = False
    coo = K.tocoo()
    mask = keep[coo.row] & keep[coo.col]
    rows = np.concatenate([coo.row[mask], dofs])
    cols = np.concatenate([coo.col[mask], dofs])
    data = np.concatenate([coo.data[mask], np.ones(len(dofs))])
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(ndof, ndof)).tocsr()
    rhs[dofs] = vals
    return SparseSystem(matrix=matrix, rhs=rhs, num_nodes=system.num_nodes,
                        fixed_dofs=dofs, fixed_values=vals, constrained=True)


# --------------------------------------------------------------------------
# solver
# --------------------------------------------------------------------------

def solve_cg(system: SparseSystem,
             params: SolverParams = SolverParams()) -> tuple[np.ndarray, SolverReport]:
    """Preconditioned conjugate gradients on the constrained SPD system.

    Converges when ||K u - f|| / ||f|| <= rel_tol (true residual, re-checked
    after the recurrence converges); f = 0 returns u = 0 in 0 iterations.
    """
    A = system.matrix
    b = system.rhs
    ndof = system.ndof
    max_iter = params.max_iter if params.max_iter is not None else 10 * ndof
    norm_b = float(np.linalg.norm(b))
    report = SolverReport(iterations=0, relative_residual=0.0, converged=True, ndof=ndof)
    if norm_b == 0.0:
        return np.zeros((system.num_nodes, 3)), report

    diag = A.diagonal()
    if params.preconditioner == "jacobi":
        if np.any(diag <= 0):
            raise NonSpdError("non-positive diagonal entry: system is not SPD")
        minv = 1.0 / diag
    elif params.preconditioner == "none":
        minv = np.ones(ndof)
    else:
        raise ParameterError(f"unknown preconditioner {params.preconditioner!r}")

    x = np.zeros(ndof)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = float(r @ z)
    history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NonSpdError(f"negative curvature at iteration {iterations}: p'Kp = {pAp:.3e}")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rel = float(np.linalg.norm(r)) / norm_b
        history.append(rel)
        if rel <= params.rel_tol:
            converged = True
            break
        z = minv * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    true_rel = float(np.linalg.norm(b - A @ x)) / norm_b
    report.iterations = iterations
    report.relative_residual = true_rel
    report.converged = converged and true_rel <= 10 * params.rel_tol
    report.residual_history = history
    if not converged:
        raise ConvergenceError(
            f"CG did not reach rel_tol {params.rel_tol:g} in {max_iter} iterations "
            f"(current residual {history[-1]:.3e})",
            residual_history=history,
        )
    return x.reshape(system.num_nodes, 3), report


# --------------------------------------------------------------------------
# field recovery
# --------------------------------------------------------------------------

def compute_strain(mesh: TetMesh, u: np.ndarray) -> np.ndarray:
    """Element-constant strain eps = sym(grad u) from P1 gradients."""
    u = np.asarray(u, dtype=float).reshape(mesh.num_nodes, 3)
    strains = np.empty((mesh.num_tets, 3, 3))
    for start in range(0, mesh.num_tets, _ASSEMBLY_CHUNK):
        sl = slice(start, start + _ASSEMBLY_CHUNK)
        coords = mesh.nodes[mesh.tets[sl]]
        grads, _ = _shape_gradients(coords)
        ue = u[mesh.tets[sl]]                       # (m, 4, 3)
        grad_u = np.einsum("mai,maj->mij", ue, grads)
        strains[sl] = 0.5 * (grad_u + np.swapaxes(grad_u, 1, 2))
    return strains


def compute_stress(strain: np.ndarray, lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Hooke's law per element: sigma = 2*mu*eps + lambda*tr(eps)*I."""
    lam = np.asarray(lam).reshape(-1, 1, 1)
    mu = np.asarray(mu).reshape(-1, 1, 1)
    tr = np.trace(strain, axis1=1, axis2=2).reshape(-1, 1, 1)
    return 2.0 * mu * strain + lam * tr * np.eye(3)


def von_mises(stress: np.ndarray) -> np.ndarray:
    """sqrt(3/2 * s:s) with the deviator s = sigma - tr(sigma)/3 * I."""
    tr = np.trace(stress, axis1=1, axis2=2) / 3.0
    dev = stress - tr[:, None, None] * np.eye(3)
    return np.sqrt(1.5 * np.einsum("mij,mij->m", dev, dev))


def materials_per_tet(mesh: TetMesh, materials: MaterialTable,
                      mobility: dict[str, int] | None = None):
    by_label = materials.resolve(mesh.subdomain_names, mobility)
    lam = np.array([by_label[int(l)].lam for l in mesh.tet_labels])
    mu = np.array([by_label[int(l)].mu for l in mesh.tet_labels])
    return lam, mu


def per_tooth_maxima(solution: Solution, mesh: TetMesh):
    """Per tooth: max displacement magnitude over the nodes of the tooth and
    its ligament elements, and max von Mises over those elements.  Teeth with
    no elements are omitted with a warning entry."""
    umag = np.linalg.norm(solution.u, axis=1)
    table: dict[str, dict[str, float]] = {}
    warnings: list[str] = []
    name_to_label = {v: k for k, v in mesh.subdomain_names.items()}
    for label, name in sorted(mesh.subdomain_names.items()):
        if not name.startswith("Tooth_"):
            continue
        labels = [label]
        pdl = "PDL_" + name[len("Tooth_"):]
        if pdl in name_to_label:
            labels.append(name_to_label[pdl])
        in_set = np.isin(mesh.tet_labels, labels)
        if not in_set.any():
            warnings.append(f"tooth {name} has no elements; omitted from maxima")
            continue
        nodes = np.unique(mesh.tets[in_set])
        table[name] = {
            "max_displacement": float(umag[nodes].max()),
            "max_von_mises": float(solution.von_mises[in_set].max()),
        }
    return table, warnings


# --------------------------------------------------------------------------
# legacy VTK export
# --------------------------------------------------------------------------

def export_vtk(mesh: TetMesh, solution: Solution | None = None,
               title: str = "dentalfem results") -> bytes:
    """Legacy ASCII unstructured grid (cell type 10) with point-data
    displacement and cell-data strain/stress/von_mises/subdomain arrays."""
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.num_nodes} double",
    ]
    fmt = "%.17g"
    for p in mesh.nodes:
        lines.append(f"{fmt % p[0]} {fmt % p[1]} {fmt % p[2]}")
    lines.append(f"CELLS {mesh.num_tets} {5 * mesh.num_tets}")
    for t in mesh.tets:
        lines.append(f"4 {t[0]} {t[1]} {t[2]} {t[3]}")
    lines.append(f"CELL_TYPES {mesh.num_tets}")
    lines.extend(["10"] * mesh.num_tets)

    if solution is not None:
        lines.append(f"POINT_DATA {mesh.num_nodes}")
        lines.append("VECTORS displacement double")
        for v in solution.u:
            lines.append(f"{fmt % v[0]} {fmt % v[1]} {fmt % v[2]}")

    lines.append(f"CELL_DATA {mesh.num_tets}")
    lines.append("SCALARS subdomain int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(str(int(l)) for l in mesh.tet_labels)
    if solution is not None:
        for name, tensor in (("strain", solution.strain), ("stress", solution.stress)):
            lines.append(f"TENSORS {name} double")
            for T in tensor:
                for row in T:
                    lines.append(f"{fmt % row[0]} {fmt % row[1]} {fmt % row[2]}")
        lines.append("SCALARS von_mises double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(fmt % v for v in solution.von_mises)
    lines.append("")
    return "\n".join(lines).encode()


def read_vtk(blob: bytes) -> dict:
    """Parse the subset of legacy ASCII VTK that export_vtk writes."""
    tokens = blob.decode().split()
    pos = 0

    def take(n):
        nonlocal pos
        out = tokens[pos:pos + n]
        pos += n
        return out

    out: dict = {"point_data": {}, "cell_data": {}}
    while pos < len(tokens):
        tok = tokens[pos]
        if tok == "POINTS":
            n = int(tokens[pos + 1])
            pos += 3
            out["points"] = np.array(take(3 * n), dtype=float).reshape(n, 3)
        elif tok == "CELLS":
            n = int(tokens[pos + 1])
            pos += 3
            rows = np.array(take(5 * n), dtype=int).reshape(n, 5)
            out["cells"] = rows[:, 1:]
        elif tok == "CELL_TYPES":
            n = int(tokens[pos + 1])
            pos += 2
            out["cell_types"] = np.array(take(n), dtype=int)
        elif tok == "VECTORS":
            name = tokens[pos + 1]
            pos += 3
            n = len(out["points"])
            out["point_data"][name] = np.array(take(3 * n), dtype=float).reshape(n, 3)
        elif tok == "TENSORS":
            name = tokens[pos + 1]
            pos += 3
            n = len(out["cells"])
            out["cell_data"][name] = np.array(take(9 * n), dtype=float).reshape(n, 3, 3)
        elif tok == "SCALARS":
            name = tokens[pos + 1]
            kind = tokens[pos + 2]
            pos += 6  # SCALARS name type 1 LOOKUP_TABLE default
            n = len(out["cells"])
            dtype = int if kind == "int" else float
            out["cell_data"][name] = np.array(take(n), dtype=dtype)
        else:
            pos += 1
    return out


# --------------------------------------------------------------------------
# materials / loads configuration file
# --------------------------------------------------------------------------

def parse_materials_config(doc: dict) -> tuple[MaterialTable, LoadSpec]:
    """Parse the documented JSON schema:

    {
      "materials": {"Jaw": {"E": 13700, "nu": 0.3}, ...},
      "mobility":  {"0": {"E": 68.9, "nu": 0.45}, ...},
      "loads": {
        "default": {"mode": "normal-pressure", "magnitude": 100.0},
        "patches": {"crown_Tooth_13": {"mode": "fixed-vector", "vector": [0, 0, -50]}}
      }
    }
    """
    if "materials" not in doc or not isinstance(doc["materials"], dict):
        raise ConfigurationError('config needs a "materials" table')
    try:
        materials = {name: Material(float(m["E"]), float(m["nu"]))
                     for name, m in doc["materials"].items()}
    except KeyError as err:
        raise ConfigurationError(f"material entry missing field {err}") from None

    mobility_map = {}
    for key, m in doc.get("mobility", {}).items():
        degree = int(key)
        if degree not in (0, 1, 2, 3):
            raise ConfigurationError(f"mobility degree must be 0..3, got {degree}")
        mobility_map[degree] = Material(float(m["E"]), float(m["nu"]))
    if mobility_map:
        degrees = sorted(mobility_map)
        stiffnesses = [mobility_map[d].E for d in degrees]
        if any(nxt >= prev for prev, nxt in zip(stiffnesses, stiffnesses[1:])):
            raise ConfigurationError(
                "mobility presets must have strictly decreasing E with degree"
            )

    loads_doc = doc.get("loads", {})
    default = PatchLoad(**loads_doc["default"]) if "default" in loads_doc else PatchLoad()
    patches = {name: PatchLoad(**entry)
               for name, entry in loads_doc.get("patches", {}).items()}
    return MaterialTable(materials, mobility_map), LoadSpec(default, patches)


def load_materials_config(path) -> tuple[MaterialTable, LoadSpec]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"materials config {path}: {err}") from None
    return parse_materials_config(doc)


def rigid_body_modes(nodes: np.ndarray) -> np.ndarray:
    """Six rigid modes (3 translations, 3 unit rotations about the centroid)
    as (6, ndof) vectors; the assembled operator annihilates all of them."""
    n = len(nodes)
    centered = nodes - nodes.mean(axis=0)
    modes = np.zeros((6, 3 * n))
    for c in range(3):
        modes[c, c::3] = 1.0
    axes = np.eye(3)
    for c in range(3):
        modes[3 + c] = np.cross(axes[c], centered).ravel()
    return modes
