"""End-to-end study orchestration.

Runs the two shape sweeps (n = 3..100 per family), the mesh-independence
study, the RBF learning stage, and figure generation, all driven by a single
JSON-serializable StudyConfig. Every artifact is written atomically with
deterministic formatting, and a manifest makes sweeps resumable: models
already completed under the same config hash are not solved again.

Models are independent jobs (optionally run in a process pool); the manifest
has a single writer and results are reduced in model-id order, so outputs are
byte-identical regardless of worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svgplot
from .errors import ArtifactError, ParameterError
from .fem import (
    ElasticParams,
    ScalarField,
    ThermalParams,
    deform_mesh,
    solve_elastic,
    solve_heat,
    write_field_csv,
)
from .geometry import ShapeFamily, TissueDims, TumorShape, place_prism
from .learn import (
    FEATURE_NAMES,
    TEST,
    TRAIN,
    Dataset,
    EvalReport,
    RbfModel,
    coefficient_stats,
    evaluate,
    fit_normalizer,
    predict,
    rank_correlation,
    save_model,
    split_dataset,
    train_rbf,
    write_report_csv,
)
from .mesh import RefinementSpec, build_mesh
from .signature import FourierSignature, extract_profile, fit_fourier4, max_surface_temp
from .textio import atomic_write_text, fmt, read_csv, write_csv

__all__ = [
    "GeometryDefaults",
    "SweepSpec",
    "MeshLevels",
    "LearnSpec",
    "SolverSpec",
    "StudyConfig",
    "RunManifest",
    "ModelResult",
    "SweepResult",
    "MeshStudyReport",
    "LearningResult",
    "config_hash",
    "config_to_json",
    "config_from_json",
    "load_config",
    "save_config",
    "model_id",
    "refinement_spec",
    "tumor_shape",
    "run_model",
    "run_sweep",
    "mesh_study",
    "calibrate_ambient",
    "run_learning",
    "load_dataset",
    "make_figures",
]

PROFILE_OVERLAY_ORDERS = (3, 4, 5, 10, 20, 50, 100)
CONTOUR_MODEL_N = 10


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GeometryDefaults:
    """Tumor shape defaults shared by every sweep model (mm / mm^2)."""

    base_area_mm2: float = 400.0
    prism_height_mm: float = 8.0
    star_inner_radius_mm: float = 10.0
    top_depth_mm: float = 12.0


@dataclass(frozen=True)
class SweepSpec:
    """Shape-order schedule: initial 3, increment 1, final 100."""

    start: int = 3
    step: int = 1
    stop: int = 100

    def __post_init__(self):
        if self.start < 3:
            raise ParameterError("sweep start must be >= 3 (smallest polygon)")
        if self.step < 1 or self.stop < self.start:
            raise ParameterError("sweep needs step >= 1 and stop >= start")

    def values(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.stop + 1, self.step))


@dataclass(frozen=True)
class MeshLevels:
    """Per-family refinement ladders (nx, ny, nz, local_factor) plus the
    production level index used for sweeps."""

    polygon: tuple = ((13, 6, 4, 3), (12, 6, 5, 3), (12, 7, 6, 3))
    star: tuple = ((13, 6, 4, 3), (16, 8, 4, 3), (17, 8, 5, 3))
    level: int = 0
    margin_mm: float = 5.0

    def __post_init__(self):
        for name, ladder in (("polygon", self.polygon), ("star", self.star)):
            if not ladder:
                raise ParameterError(f"{name} refinement ladder is empty")
            for entry in ladder:
                if len(entry) != 4 or any(int(v) < 1 for v in entry):
                    raise ParameterError(f"bad {name} refinement entry {entry!r}")
        if not 0 <= self.level < min(len(self.polygon), len(self.star)):
            raise ParameterError("refinement level index out of range")
        if self.margin_mm < 0:
            raise ParameterError("margin_mm must be >= 0")

    def ladder(self, family: ShapeFamily) -> tuple:
        return self.polygon if family is ShapeFamily.REGULAR_POLYGON else self.star


@dataclass(frozen=True)
class LearnSpec:
    """RBF hyperparameters and the seeded 68/30 split."""

    width: float = 1.0
    ridge: float = 1.0e-10
    split_seed: int = 0
    train_size: int = 68
    test_size: int = 30

    def __post_init__(self):
        if self.train_size < 1 or self.test_size < 1:
            raise ParameterError("split sizes must be positive")


@dataclass(frozen=True)
class SolverSpec:
    thermal_method: str = "direct"
    tol: float = 1.0e-10
    profile_samples: int = 121

    def __post_init__(self):
        if self.thermal_method not in ("direct", "pcg"):
            raise ParameterError("thermal_method must be 'direct' or 'pcg'")
        if self.profile_samples < 41:
            raise ParameterError("profile_samples must be >= 41")


@dataclass(frozen=True)
class StudyConfig:
    """Every knob of the study in one JSON-serializable document."""

    tissue: TissueDims = TissueDims()
    thermal: ThermalParams = ThermalParams()
    elastic: ElasticParams = ElasticParams()
    geometry: GeometryDefaults = GeometryDefaults()
    sweep: SweepSpec = SweepSpec()
    refinement: MeshLevels = MeshLevels()
    learn: LearnSpec = LearnSpec()
    solver: SolverSpec = SolverSpec()
    out_dir: str = "out"


def _tuplize(value):
    if isinstance(value, list):
        return tuple(_tuplize(v) for v in value)
    return value


def config_to_dict(cfg: StudyConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_from_dict(data: dict) -> StudyConfig:
    sections = {
        "tissue": TissueDims,
        "thermal": ThermalParams,
        "elastic": ElasticParams,
        "geometry": GeometryDefaults,
        "sweep": SweepSpec,
        "refinement": MeshLevels,
        "learn": LearnSpec,
        "solver": SolverSpec,
    }
    kwargs = {}
    for key, value in data.items():
        if key == "out_dir":
            kwargs[key] = str(value)
        elif key in sections:
            if not isinstance(value, dict):
                raise ParameterError(f"config section {key!r} must be an object")
            known = {f.name for f in dataclasses.fields(sections[key])}
            extra = set(value) - known
            if extra:
                raise ParameterError(f"unknown keys in config section {key!r}: {sorted(extra)}")
            kwargs[key] = sections[key](**{k: _tuplize(v) for k, v in value.items()})
        else:
            raise ParameterError(f"unknown config key {key!r}")
    return StudyConfig(**kwargs)


def config_to_json(cfg: StudyConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def config_from_json(text: str) -> StudyConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("config root must be a JSON object")
    return config_from_dict(data)


def load_config(path) -> StudyConfig:
    return config_from_json(Path(path).read_text())


def save_config(cfg: StudyConfig, path) -> None:
    atomic_write_text(path, config_to_json(cfg))


def config_hash(cfg: StudyConfig) -> str:
    """Canonical digest; sweeps resume only under an identical config."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# single-model run


def model_id(family: ShapeFamily, n: int) -> str:
    return f"{family.value}-n{int(n):03d}"


def tumor_shape(cfg: StudyConfig, family: ShapeFamily, n: int) -> TumorShape:
    g = cfg.geometry
    return TumorShape(
        family=family,
        n=n,
        base_area=g.base_area_mm2,
        inner_radius=g.star_inner_radius_mm,
        top_depth=g.top_depth_mm,
        prism_height=g.prism_height_mm,
    )


def refinement_spec(
    cfg: StudyConfig, family: ShapeFamily, level: int | None = None
) -> RefinementSpec:
    """Production refinement for a family.

    The local-refinement window is fixed per family from the widest sweep
    shape (the smallest n), so every model of a sweep shares one mesh
    topology and signatures vary smoothly with n.
    """
    ladder = cfg.refinement.ladder(family)
    idx = cfg.refinement.level if level is None else level
    if not 0 <= idx < len(ladder):
        raise ParameterError(f"refinement level {idx} out of range for {family.value}")
    nx, ny, nz, factor = (int(v) for v in ladder[idx])
    widest = place_prism(tumor_shape(cfg, family, cfg.sweep.start), cfg.tissue)
    box = widest.refine_window(cfg.refinement.margin_mm)
    return RefinementSpec(nx, ny, nz, local_factor=factor, refine_box=box)


@dataclass(frozen=True)
class ModelResult:
    """Everything one sweep model produces."""

    model_id: str
    family: str
    n: int
    signature: FourierSignature
    t_max_c: float
    x_max_m: float
    elements: int
    nodes: int
    wall_time: float
    field: ScalarField
    profile_x_m: np.ndarray
    profile_t_c: np.ndarray


def run_model(
    cfg: StudyConfig,
    family: ShapeFamily,
    n: int,
    *,
    level: int | None = None,
    ambient_c: float | None = None,
) -> ModelResult:
    """geometry -> mesh -> elastic -> deform -> heat -> profile -> signature."""
    t0 = time.perf_counter()
    thermal = cfg.thermal
    if ambient_c is not None:
        thermal = dataclasses.replace(thermal, t_ambient=float(ambient_c))
    geom = place_prism(tumor_shape(cfg, family, n), cfg.tissue)
    mesh = build_mesh(geom, refinement_spec(cfg, family, level))
    u, _ = solve_elastic(mesh, cfg.elastic)
    moved = deform_mesh(mesh, u)
    field, _ = solve_heat(
        moved, thermal, method=cfg.solver.thermal_method, tol=cfg.solver.tol
    )
    profile = extract_profile(
        field,
        cfg.solver.profile_samples,
        x_range_mm=(0.0, cfg.tissue.x_len),
        y_mid_mm=cfg.tissue.y_len / 2.0,
    )
    sig = fit_fourier4(profile)
    x_max, t_max = max_surface_temp(profile)
    return ModelResult(
        model_id=model_id(family, n),
        family=family.value,
        n=n,
        signature=sig,
        t_max_c=t_max,
        x_max_m=x_max,
        elements=mesh.n_tets,
        nodes=mesh.n_nodes,
        wall_time=time.perf_counter() - t0,
        field=field,
        profile_x_m=profile.positions,
        profile_t_c=profile.temps,
    )


# ---------------------------------------------------------------------------
# manifest


class RunManifest:
    """Per-model completion ledger (single JSON file, single writer).

    Each completed model records its signature row and artifact paths, so a
    dataset can be rebuilt without re-solving and interrupted sweeps resume
    where they stopped. A config-hash mismatch invalidates all entries.
    """

    def __init__(self, path, cfg_hash: str, models: dict | None = None):
        self.path = Path(path)
        self.cfg_hash = cfg_hash
        self.models = dict(models or {})

    @classmethod
    def load(cls, path, cfg_hash: str) -> "RunManifest":
        path = Path(path)
        if path.exists():
            data = json.loads(path.read_text())
            if data.get("config_hash") == cfg_hash:
                return cls(path, cfg_hash, data.get("models", {}))
        return cls(path, cfg_hash)

    def save(self) -> None:
        doc = {"config_hash": self.cfg_hash, "models": self.models}
        atomic_write_text(self.path, json.dumps(doc, indent=1, sort_keys=True) + "\n")

    def completed(self, mid: str) -> bool:
        return self.models.get(mid, {}).get("status") == "ok"

    def record_ok(self, result: ModelResult, artifacts: dict) -> None:
        sig = result.signature
        self.models[result.model_id] = {
            "status": "ok",
            "family": result.family,
            "n": result.n,
            "elements": result.elements,
            "nodes": result.nodes,
            "wall_time": result.wall_time,
            "signature": dict(zip(FEATURE_NAMES, (float(v) for v in sig.features()))),
            "fit_rmse_rel": sig.fit_rmse_rel,
            "t_max_c": result.t_max_c,
            "x_max_m": result.x_max_m,
            "artifacts": artifacts,
        }

    def record_error(self, mid: str, family: ShapeFamily, n: int, message: str) -> None:
        self.models[mid] = {
            "status": "error",
            "family": family.value,
            "n": n,
            "message": message,
        }

    def missing_artifacts(self, out_dir) -> list:
        out_dir = Path(out_dir)
        missing = []
        for mid in sorted(self.models):
            entry = self.models[mid]
            if entry.get("status") != "ok":
                continue
            for rel in entry.get("artifacts", {}).values():
                if not (out_dir / rel).exists():
                    missing.append(mid)
                    break
        return missing


# ---------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepResult:
    dataset: Dataset
    csv_path: Path
    solved: tuple  # model ids actually solved by this call
    skipped: tuple  # model ids resumed from the manifest
    failed: tuple  # (model id, message) pairs


def _dataset_header() -> list:
    return (
        ["model_id", "family", "n"]
        + list(FEATURE_NAMES)
        + ["fit_rmse_rel", "t_max_c", "x_max_m"]
    )


def _solve_job(args) -> ModelResult:
    cfg, family, n = args
    return run_model(cfg, family, n)


def _write_model_artifacts(out_dir: Path, result: ModelResult) -> dict:
    rel_dir = Path("models") / result.model_id
    (out_dir / rel_dir).mkdir(parents=True, exist_ok=True)
    field_rel = rel_dir / "field.csv"
    profile_rel = rel_dir / "profile.csv"
    write_field_csv(result.field, out_dir / field_rel)
    write_csv(
        out_dir / profile_rel,
        ["x_m", "t_c"],
        list(zip(result.profile_x_m, result.profile_t_c)),
    )
    return {"field": str(field_rel), "profile": str(profile_rel)}


def run_sweep(
    cfg: StudyConfig, family: ShapeFamily, *, workers: int = 1
) -> SweepResult:
    """Solve every sweep model of one family and write its dataset CSV.

    Completed models recorded in the manifest (same config hash) are skipped,
    unless their artifact files have been removed — those are re-solved so the
    disk always matches the manifest. Failures are recorded per model and the
    sweep continues.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out_dir / "config.json")
    manifest = RunManifest.load(out_dir / "manifest.json", config_hash(cfg))

    def resumable(n: int) -> bool:
        mid = model_id(family, n)
        if not manifest.completed(mid):
            return False
        arts = manifest.models[mid].get("artifacts", {})
        return bool(arts) and all((out_dir / rel).exists() for rel in arts.values())

    orders = cfg.sweep.values()
    pending = [n for n in orders if not resumable(n)]
    skipped = tuple(model_id(family, n) for n in orders if n not in pending)
    solved, failed = [], []

    def finish(n: int, result: ModelResult | None, message: str | None) -> None:
        mid = model_id(family, n)
        if result is not None:
            artifacts = _write_model_artifacts(out_dir, result)
            manifest.record_ok(result, artifacts)
            solved.append(mid)
        else:
            manifest.record_error(mid, family, n, message)
            failed.append((mid, message))
        manifest.save()

    if workers > 1 and len(pending) > 1:
        jobs = [(cfg, family, n) for n in pending]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for n, outcome in zip(pending, pool.map(_solve_job, jobs)):
                finish(n, outcome, None)
    else:
        for n in pending:
            try:
                result = run_model(cfg, family, n)
            except Exception as exc:  # recorded per model; sweep continues
                finish(n, None, f"{type(exc).__name__}: {exc}")
            else:
                finish(n, result, None)

    rows = []
    feats, targets = [], []
    for n in orders:
        entry = manifest.models.get(model_id(family, n))
        if not entry or entry.get("status") != "ok":
            continue
        sig = entry["signature"]
        vec = [sig[name] for name in FEATURE_NAMES]
        rows.append(
            [model_id(family, n), family.value, n]
            + vec
            + [entry["fit_rmse_rel"], entry["t_max_c"], entry["x_max_m"]]
        )
        feats.append(vec)
        targets.append(float(n))

    csv_path = out_dir / f"dataset_{family.value}.csv"
    write_csv(csv_path, _dataset_header(), rows)
    dataset = Dataset(
        np.array(feats, dtype=float).reshape(len(feats), len(FEATURE_NAMES)),
        np.array(targets, dtype=float),
        family=family.value,
    )
    return SweepResult(dataset, csv_path, tuple(solved), skipped, tuple(failed))


def load_dataset(cfg: StudyConfig, family: ShapeFamily) -> Dataset:
    """Rebuild a Dataset from a sweep CSV; errors name what is missing."""
    csv_path = Path(cfg.out_dir) / f"dataset_{family.value}.csv"
    if not csv_path.exists():
        raise ArtifactError(f"dataset not found: {csv_path}", missing=[str(csv_path)])
    header, rows = read_csv(csv_path)
    if header != _dataset_header():
        raise ArtifactError(f"unexpected dataset header in {csv_path}")
    want = {model_id(family, n): n for n in cfg.sweep.values()}
    feats, targets, seen = [], [], set()
    cols = {name: header.index(name) for name in FEATURE_NAMES}
    for row in rows:
        mid = row[0]
        seen.add(mid)
        feats.append([float(row[cols[name]]) for name in FEATURE_NAMES])
        targets.append(float(row[2]))
    missing = sorted(set(want) - seen)
    if missing:
        raise ArtifactError(
            f"dataset {csv_path} is incomplete: missing {len(missing)} models "
            f"({', '.join(missing[:5])}{', ...' if len(missing) > 5 else ''})",
            missing=missing,
        )
    return Dataset(
        np.array(feats, dtype=float),
        np.array(targets, dtype=float),
        family=family.value,
    )


# ---------------------------------------------------------------------------
# mesh-independence study


@dataclass(frozen=True)
class MeshStudyReport:
    """Consecutive-level temperature agreement for one model."""

    family: str
    n: int
    levels: tuple  # (nx, ny, nz, factor) per level
    elements: tuple
    nodes: tuple
    t_max_c: tuple
    wall_times: tuple
    rel_diffs: tuple  # len(levels) - 1, each vs the next (finer) level

    @property
    def passes(self) -> bool:
        return bool(self.rel_diffs and self.rel_diffs[0] < 0.01)


def mesh_study(
    cfg: StudyConfig, family: ShapeFamily, n: int = 10, levels=None
) -> MeshStudyReport:
    """Solve one model across the refinement ladder and compare profiles.

    The difference metric is the max pointwise relative temperature gap
    between consecutive levels on the common centerline sampling, with the
    finer level as the reference.
    """
    ladder = cfg.refinement.ladder(family) if levels is None else tuple(levels)
    if len(ladder) < 2:
        raise ParameterError("mesh study needs at least two refinement levels")
    study_cfg = cfg
    if levels is not None:
        study_cfg = dataclasses.replace(
            cfg, refinement=dataclasses.replace(cfg.refinement, polygon=ladder, star=ladder)
        )
    temps, elements, nodes, tmaxes, walls = [], [], [], [], []
    for idx in range(len(ladder)):
        result = run_model(study_cfg, family, n, level=idx)
        temps.append(result.profile_t_c)
        elements.append(result.elements)
        nodes.append(result.nodes)
        tmaxes.append(result.t_max_c)
        walls.append(result.wall_time)
    diffs = []
    for coarse, fine in zip(temps, temps[1:]):
        diffs.append(float(np.max(np.abs(coarse - fine) / np.abs(fine))))
    report = MeshStudyReport(
        family=family.value,
        n=n,
        levels=tuple(tuple(int(v) for v in entry) for entry in ladder),
        elements=tuple(elements),
        nodes=tuple(nodes),
        t_max_c=tuple(tmaxes),
        wall_times=tuple(walls),
        rel_diffs=tuple(diffs),
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(len(ladder)):
        nx, ny, nz, factor = report.levels[i]
        rows.append(
            [
                i,
                nx,
                ny,
                nz,
                factor,
                report.elements[i],
                report.nodes[i],
                report.t_max_c[i],
                "" if i == 0 else report.rel_diffs[i - 1],
                report.wall_times[i],
            ]
        )
    write_csv(
        out_dir / f"mesh_study_{family.value}_n{n:03d}.csv",
        ["level", "nx", "ny", "nz", "local_factor", "elements", "nodes",
         "t_max_c", "rel_diff_prev", "wall_s"],
        rows,
    )
    return report


# ---------------------------------------------------------------------------
# ambient calibration


def calibrate_ambient(
    cfg: StudyConfig,
    target_c: float = 29.7,
    family: ShapeFamily = ShapeFamily.REGULAR_POLYGON,
    n: int = 3,
) -> float:
    """Ambient temperature that puts the reference model's T_max at target.

    The steady temperature field is affine in t_ambient (it enters only the
    Robin right-hand side), so two solves determine the calibration exactly.
    """
    a0 = cfg.thermal.t_ambient
    a1 = a0 - 2.0
    t0 = run_model(cfg, family, n).t_max_c
    t1 = run_model(cfg, family, n, ambient_c=a1).t_max_c
    slope = (t1 - t0) / (a1 - a0)
    if abs(slope) < 1e-12:
        raise ParameterError("T_max does not respond to ambient temperature")
    return a0 + (target_c - t0) / slope


# ---------------------------------------------------------------------------
# learning stage


@dataclass(frozen=True)
class LearningResult:
    family: str
    seed: int
    model: RbfModel
    train_report: EvalReport
    test_report: EvalReport
    test_rank_corr: float
    paths: tuple


def run_learning(
    dataset: Dataset, cfg: StudyConfig, seed: int | None = None, *, persist: bool = True
) -> LearningResult:
    """Split, train the exact-interpolation RBF, evaluate both splits."""
    seed = cfg.learn.split_seed if seed is None else int(seed)
    split = split_dataset(dataset, seed, cfg.learn.train_size, cfg.learn.test_size)
    x_train, y_train = split.rows(TRAIN)
    x_test, y_test = split.rows(TEST)
    model = train_rbf(x_train, y_train, width=cfg.learn.width, ridge=cfg.learn.ridge)
    train_report = evaluate(model, x_train, y_train)
    test_report = evaluate(model, x_test, y_test)
    corr = rank_correlation(predict(model, x_test), y_test)
    paths = ()
    if persist:
        learn_dir = Path(cfg.out_dir) / "learn"
        learn_dir.mkdir(parents=True, exist_ok=True)
        stem = dataset.family or "dataset"
        model_path = learn_dir / f"{stem}_model.txt"
        train_path = learn_dir / f"{stem}_train_report.csv"
        test_path = learn_dir / f"{stem}_test_report.csv"
        save_model(model, model_path)
        write_report_csv(train_report, train_path)
        write_report_csv(test_report, test_path)
        paths = (model_path, train_path, test_path)
    return LearningResult(
        family=dataset.family,
        seed=seed,
        model=model,
        train_report=train_report,
        test_report=test_report,
        test_rank_corr=corr,
        paths=paths,
    )


# ---------------------------------------------------------------------------
# figures


def _read_profile_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    _, rows = read_csv(path)
    data = np.array([[float(v) for v in row] for row in rows])
    return data[:, 0], data[:, 1]


def _idw_resample(px, pz, pt, grid_x, grid_z) -> np.ndarray:
    """Inverse-distance-squared resampling of scattered slice nodes."""
    gx, gz = np.meshgrid(grid_x, grid_z, indexing="ij")
    d2 = (gx.ravel()[:, None] - px) ** 2 + (gz.ravel()[:, None] - pz) ** 2
    w = 1.0 / (d2 + 1e-9)
    vals = (w @ pt) / w.sum(axis=1)
    return vals.reshape(gx.shape)


def make_figures(cfg: StudyConfig, families=None) -> tuple:
    """Emit every figure with the raw CSV behind it; nothing partial.

    Requires completed sweep artifacts; missing models are reported by id.
    All documents are assembled in memory before the first file is written.
    """
    if families is None:
        families = (ShapeFamily.REGULAR_POLYGON, ShapeFamily.STAR_POLYGON)
    out_dir = Path(cfg.out_dir)
    fig_dir = out_dir / "figures"
    orders = cfg.sweep.values()

    manifest = RunManifest.load(out_dir / "manifest.json", config_hash(cfg))
    missing = manifest.missing_artifacts(out_dir)
    if missing:
        raise ArtifactError(
            f"artifacts missing for {len(missing)} completed models: "
            f"{', '.join(missing[:5])}{', ...' if len(missing) > 5 else ''}",
            missing=missing,
        )

    documents = {}  # relative name -> text

    def tmax_rows(family):
        rows = []
        for n in orders:
            entry = manifest.models.get(model_id(family, n))
            if not entry or entry.get("status") != "ok":
                raise ArtifactError(
                    f"sweep incomplete for {family.value}: {model_id(family, n)}",
                    missing=[model_id(family, n)],
                )
            rows.append((n, entry["t_max_c"]))
        return rows

    for family in families:
        datasets_rows = tmax_rows(family)
        if not datasets_rows:
            raise ArtifactError(f"no completed models for {family.value}")

        # --- T_max vs n
        ns = [r[0] for r in datasets_rows]
        ts = [r[1] for r in datasets_rows]
        name = f"fig_tmax_{family.value}"
        documents[f"{name}.csv"] = None, (["n", "t_max_c"], list(datasets_rows))
        documents[f"{name}.svg"] = (
            svgplot.line_chart(
                [(family.value, [float(v) for v in ns], ts)],
                title=f"Maximum surface temperature vs {family.value} order",
                x_label="number of sides/wings n",
                y_label="T_max (deg C)",
                markers=True,
            ),
            None,
        )

        # --- centerline profile overlay
        chosen = [n for n in PROFILE_OVERLAY_ORDERS if n in ns]
        series, first_x = [], None
        for n in chosen:
            entry = manifest.models[model_id(family, n)]
            rel = entry.get("artifacts", {}).get("profile")
            path = out_dir / rel if rel else None
            if path is None or not path.exists():
                raise ArtifactError(
                    f"profile artifact missing for {model_id(family, n)}",
                    missing=[model_id(family, n)],
                )
            x_m, t_c = _read_profile_csv(path)
            first_x = x_m if first_x is None else first_x
            series.append((f"n={n}", list(x_m * 1e3), list(t_c)))
        name = f"fig_profiles_{family.value}"
        header = ["x_mm"] + [f"t_c_n{n:03d}" for n in chosen]
        rows = [
            [first_x[i] * 1e3] + [series[j][2][i] for j in range(len(series))]
            for i in range(len(first_x))
        ]
        documents[f"{name}.csv"] = None, (header, rows)
        documents[f"{name}.svg"] = (
            svgplot.line_chart(
                series,
                title=f"Top-surface centerline temperature, {family.value} tumors",
                x_label="x (mm)",
                y_label="T (deg C)",
            ),
            None,
        )

        # --- normalized-coefficient box plot
        feats = np.array(
            [
                [manifest.models[model_id(family, n)]["signature"][f] for f in FEATURE_NAMES]
                for n in ns
            ]
        )
        normalized = fit_normalizer(feats).transform(feats)
        boxes, box_rows = [], []
        for j, fname in enumerate(FEATURE_NAMES):
            stats = coefficient_stats(normalized[:, j])
            five = (stats.minimum, stats.q1, stats.median, stats.q3, stats.maximum)
            boxes.append((fname, five))
            box_rows.append([fname, *five])
        name = f"fig_box_{family.value}"
        documents[f"{name}.csv"] = None, (
            ["coefficient", "min", "q1", "median", "q3", "max"],
            box_rows,
        )
        documents[f"{name}.svg"] = (
            svgplot.box_chart(
                boxes,
                title=f"Normalized signature coefficients, {family.value} sweep",
                y_label="normalized value",
            ),
            None,
        )

    # --- mid cross-section contour of the reference model (the completed
    # model of the first family closest to n=10, ties toward smaller n)
    contour_family = families[0]
    done = sorted(
        n for n in orders if manifest.completed(model_id(contour_family, n))
    )
    if not done:
        raise ArtifactError(f"no completed models for {contour_family.value}")
    pick = min(done, key=lambda n: (abs(n - CONTOUR_MODEL_N), n))
    mid = model_id(contour_family, pick)
    entry = manifest.models[mid]
    field_path = out_dir / entry["artifacts"]["field"]
    header, rows = read_csv(field_path)
    data = np.array([[float(v) for v in row] for row in rows])
    x, y, z, t = data[:, 1], data[:, 2], data[:, 3], data[:, 4]
    y_mid = cfg.tissue.y_len / 2.0
    keep = np.abs(y - y_mid) <= 2.5
    grid_x = np.linspace(x.min(), x.max(), 61)
    grid_z = np.linspace(z[keep].min(), z[keep].max(), 26)
    vals = _idw_resample(x[keep], z[keep], t[keep], grid_x, grid_z)
    contour_rows = [
        [grid_x[i], grid_z[j], vals[i, j]]
        for i in range(len(grid_x))
        for j in range(len(grid_z))
    ]
    documents["fig_contour.csv"] = None, (["x_mm", "z_mm", "t_c"], contour_rows)
    xe = np.linspace(grid_x[0], grid_x[-1], len(grid_x) + 1)
    ze = np.linspace(grid_z[0], grid_z[-1], len(grid_z) + 1)
    documents["fig_contour.svg"] = (
        svgplot.heatmap(
            list(xe),
            list(ze),
            [[float(vals[i, j]) for i in range(len(grid_x))] for j in range(len(grid_z))],
            title=f"Mid cross-section temperature, {mid}",
            x_label="x (mm)",
            y_label="z (mm)",
            value_label="T (deg C)",
        ),
        None,
    )

    # everything assembled; write in deterministic order
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for rel in sorted(documents):
        text, csv_parts = documents[rel]
        path = fig_dir / rel
        if csv_parts is not None:
            write_csv(path, csv_parts[0], csv_parts[1])
        else:
            atomic_write_text(path, text)
        written.append(path)
    return tuple(written)
