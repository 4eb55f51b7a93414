"""Shape-order recovery from Fourier signatures.

An exact-interpolation RBF network: every training signature becomes a
Gaussian center, and the output layer (plus bias) is solved in one shot from
the regularized normal equations. There is no iterative training. Features
are min-max normalized to [-1, 1] using the training split only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.stats import spearmanr

from .errors import DatasetSizeError, ParameterError, TrainingError
from .textio import atomic_write_text, fmt, write_csv

FEATURE_NAMES = ("a0", "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "w")

TRAIN, TEST = 0, 1


@dataclass(frozen=True)
class Dataset:
    """Signature rows (features) with their shape order n as target."""

    features: np.ndarray  # (R, F)
    targets: np.ndarray  # (R,)
    family: str = ""
    split: np.ndarray | None = None  # (R,) in {TRAIN, TEST}

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise ParameterError("features must be (R, F) with matching targets")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ParameterError("dataset contains non-finite values")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def rows(self, label) -> tuple[np.ndarray, np.ndarray]:
        if self.split is None:
            raise ParameterError("dataset has not been split")
        m = self.split == label
        return self.features[m], self.targets[m]


def split_dataset(d: Dataset, seed: int, train_size: int = 68, test_size: int = 30) -> Dataset:
    """Seeded shuffle; the first train_size rows train, the rest test."""
    if d.n_rows != train_size + test_size:
        raise DatasetSizeError(
            f"expected {train_size}+{test_size} rows, dataset has {d.n_rows}"
        )
    perm = np.random.default_rng(seed).permutation(d.n_rows)
    split = np.empty(d.n_rows, dtype=np.uint8)
    split[perm[:train_size]] = TRAIN
    split[perm[train_size:]] = TEST
    return Dataset(d.features, d.targets, family=d.family, split=split)


@dataclass(frozen=True)
class Normalizer:
    """Per-feature affine map sending training [min, max] to [-1, 1]."""

    lo: np.ndarray
    hi: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        span = self.hi - self.lo
        out = np.zeros_like(x)
        live = span > 0
        out[:, live] = 2.0 * (x[:, live] - self.lo[live]) / span[live] - 1.0
        return out


def fit_normalizer(features: np.ndarray) -> Normalizer:
    x = np.asarray(features, dtype=float)
    if x.size == 0:
        raise ParameterError("cannot fit a normalizer on empty data")
    return Normalizer(lo=x.min(axis=0), hi=x.max(axis=0))


def _kernel(xn: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    d2 = ((xn[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-d2 / width**2)


@dataclass(frozen=True)
class RbfModel:
    centers: np.ndarray  # (C, F) normalized training features
    width: float
    ridge: float
    weights: np.ndarray  # (C + 1,), last entry is the bias
    normalizer: Normalizer


def train_rbf(
    features: np.ndarray,
    targets: np.ndarray,
    width: float = 1.0,
    ridge: float = 1e-10,
) -> RbfModel:
    """One-shot least-squares fit of the output layer.

    Design matrix A = [Phi | 1] with Phi the Gaussian kernel between every
    training pair. The bias column makes A underdetermined (n equations,
    n+1 weights), so the ridge problem is solved in its dual form,
    w = A'(AA' + ridge I)^{-1} y: AA' = Phi Phi' + 11' is positive definite
    for distinct centers even at ridge 0, and the result is the minimum-norm
    interpolant, independent of training-row order.
    """
    if width <= 0:
        raise ParameterError("width must be positive")
    if ridge < 0:
        raise ParameterError("ridge must be >= 0")
    x = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    norm = fit_normalizer(x)
    xn = norm.transform(x)
    phi = _kernel(xn, xn, width)
    a = np.column_stack([phi, np.ones(xn.shape[0])])
    gram = a @ a.T + ridge * np.eye(a.shape[0])
    try:
        cho = sla.cho_factor(gram)
        beta = sla.cho_solve(cho, y)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise TrainingError(
            f"interpolation system not positive definite (ridge={ridge}): {exc}"
        ) from exc
    w = a.T @ beta
    if not np.all(np.isfinite(w)):
        raise TrainingError("non-finite output weights; increase ridge")
    return RbfModel(centers=xn, width=width, ridge=ridge, weights=w, normalizer=norm)


def predict(model: RbfModel, features: np.ndarray) -> np.ndarray:
    xn = model.normalizer.transform(features)
    phi = _kernel(xn, model.centers, model.width)
    return phi @ model.weights[:-1] + model.weights[-1]


@dataclass(frozen=True)
class EvalReport:
    """Error statistics of predictions vs targets (units of n).

    mean_err is the signed mean; variance/std are population moments of the
    errors, so mse = variance + mean_err^2 holds identically.
    """

    rmse: float
    mse: float
    mean_err: float
    variance: float
    std: float
    rounded_accuracy: float
    count: int


def eval_report(predictions: np.ndarray, targets: np.ndarray) -> EvalReport:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape or p.ndim != 1 or p.size == 0:
        raise ParameterError("predictions and targets must be matching 1-D arrays")
    e = p - t
    mse = float(np.mean(e**2))
    mu = float(np.mean(e))
    var = float(np.mean((e - mu) ** 2))
    acc = float(np.mean(np.rint(p) == t))
    return EvalReport(
        rmse=float(np.sqrt(mse)),
        mse=mse,
        mean_err=mu,
        variance=var,
        std=float(np.sqrt(var)),
        rounded_accuracy=acc,
        count=p.size,
    )


def evaluate(model: RbfModel, features: np.ndarray, targets: np.ndarray) -> EvalReport:
    return eval_report(predict(model, features), np.asarray(targets, dtype=float))


def rank_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation."""
    return float(spearmanr(a, b).statistic)


@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def coefficient_stats(values: np.ndarray) -> BoxStats:
    """Five-number summary; quartiles interpolate linearly between order
    statistics, whiskers are the raw extremes."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ParameterError("no values")
    q = np.percentile(v, [0, 25, 50, 75, 100], method="linear")
    return BoxStats(*(float(x) for x in q))


def save_model(model: RbfModel, path) -> None:
    """Versioned plain-text dump; floats round-trip bit-exactly."""
    lines = [
        "rbfmodel v1",
        f"width {fmt(model.width)}",
        f"ridge {fmt(model.ridge)}",
        f"shape {model.centers.shape[0]} {model.centers.shape[1]}",
        "norm_lo " + " ".join(fmt(v) for v in model.normalizer.lo),
        "norm_hi " + " ".join(fmt(v) for v in model.normalizer.hi),
    ]
    for row in model.centers:
        lines.append("center " + " ".join(fmt(v) for v in row))
    lines.append("weights " + " ".join(fmt(v) for v in model.weights))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_model(path) -> RbfModel:
    lines = Path(path).read_text().strip("\n").split("\n")
    if lines[0] != "rbfmodel v1":
        raise ParameterError(f"unrecognized model file header {lines[0]!r}")
    fields = {}
    centers = []
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        if key == "center":
            centers.append([float(v) for v in rest.split()])
        else:
            fields[key] = rest
    n_c, n_f = (int(v) for v in fields["shape"].split())
    centers = np.array(centers, dtype=float).reshape(n_c, n_f)
    return RbfModel(
        centers=centers,
        width=float(fields["width"]),
        ridge=float(fields["ridge"]),
        weights=np.array([float(v) for v in fields["weights"].split()]),
        normalizer=Normalizer(
            lo=np.array([float(v) for v in fields["norm_lo"].split()]),
            hi=np.array([float(v) for v in fields["norm_hi"].split()]),
        ),
    )


def write_report_csv(report: EvalReport, path) -> None:
    rows = [
        ("rmse", report.rmse),
        ("mse", report.mse),
        ("mean_err", report.mean_err),
        ("variance", report.variance),
        ("std", report.std),
        ("rounded_accuracy", report.rounded_accuracy),
        ("count", report.count),
    ]
    write_csv(path, ["metric", "value"], rows)


def report_text(report: EvalReport, title: str = "evaluation") -> str:
    return "\n".join(
        [
            f"{title} ({report.count} samples)",
            f"  RMSE             {report.rmse:.6e}",
            f"  MSE              {report.mse:.6e}",
            f"  mean error       {report.mean_err:+.6e}",
            f"  variance         {report.variance:.6e}",
            f"  std              {report.std:.6e}",
            f"  rounded accuracy {report.rounded_accuracy:.4f}",
        ]
    )
