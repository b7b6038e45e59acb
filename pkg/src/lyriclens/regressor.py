"""Release-year regression on frozen mean-pooled embeddings.

Five regressor families are trained and benchmarked on a shared split,
producing an RMSE comparison table. Kernel and distance based kinds see
standardized features; tree ensembles consume raw features. Training rows
are canonically ordered by content digest before fitting, which makes every
fit invariant to input row permutation and gives nearest-neighbor ties a
deterministic index order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .metrics import rmse

log = logging.getLogger(__name__)

YEAR_MIN, YEAR_MAX = 1960, 2022

DEFAULT_KINDS = (
    "random_forest",
    "svr_linear",
    "linear_regression",
    "gradient_boosted_trees",
    "k_nearest_neighbors",
)

# feature-flagged extra kind, excluded from the default benchmark
FLAGGED_KINDS = ("neural_net",)

_DEFAULT_HYPERPARAMS: dict[str, dict] = {
    "random_forest": {"n_estimators": 100},
    "svr_linear": {"C": 1.0, "epsilon": 0.1},
    "linear_regression": {},
    "gradient_boosted_trees": {"n_estimators": 100, "max_depth": 6, "learning_rate": 0.1},
    "k_nearest_neighbors": {"n_neighbors": 5},
    "neural_net": {"hidden_layer_sizes": (64,), "max_iter": 500},
}

_STANDARDIZED_KINDS = {"svr_linear", "linear_regression", "k_nearest_neighbors", "neural_net"}


def _make_random_forest(params: dict, seed: int):
    from sklearn.ensemble import RandomForestRegressor

    return RandomForestRegressor(random_state=seed, **params)


def _make_svr_linear(params: dict, seed: int):
    from sklearn.svm import SVR

    return SVR(kernel="linear", **params)


def _make_linear_regression(params: dict, seed: int):
    from sklearn.linear_model import LinearRegression

    return LinearRegression(**params)


def _make_gbt(params: dict, seed: int):
    from sklearn.ensemble import GradientBoostingRegressor

    return GradientBoostingRegressor(random_state=seed, **params)


def _make_knn(params: dict, seed: int):
    from sklearn.neighbors import KNeighborsRegressor

    return KNeighborsRegressor(metric="euclidean", **params)


def _make_neural_net(params: dict, seed: int):
    from sklearn.neural_network import MLPRegressor

    return MLPRegressor(random_state=seed, **params)


KIND_FACTORIES: dict[str, Callable[[dict, int], object]] = {
    "random_forest": _make_random_forest,
    "svr_linear": _make_svr_linear,
    "linear_regression": _make_linear_regression,
    "gradient_boosted_trees": _make_gbt,
    "k_nearest_neighbors": _make_knn,
    "neural_net": _make_neural_net,
}


@dataclass(frozen=True)
class RegressorSpec:
    kind: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KIND_FACTORIES:
            raise ValueError(f"unknown regressor kind {self.kind!r}; known: {sorted(KIND_FACTORIES)}")
        allowed = set(_DEFAULT_HYPERPARAMS.get(self.kind, {}))
        unknown = set(self.hyperparams) - allowed
        if unknown:
            raise ValueError(f"unknown hyperparams for {self.kind}: {sorted(unknown)} (allowed: {sorted(allowed)})")

    def resolved_hyperparams(self) -> dict:
        params = dict(_DEFAULT_HYPERPARAMS.get(self.kind, {}))
        params.update(self.hyperparams)
        return params

    def hyperparams_digest(self) -> str:
        payload = json.dumps(self.resolved_hyperparams(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def default_specs(seed: int = 0) -> list[RegressorSpec]:
    """One spec per default kind, sharing a seed."""
    return [RegressorSpec(kind=k, seed=seed) for k in DEFAULT_KINDS]


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices sorting rows by content digest; permutation-invariant."""
    digests = [
        hashlib.sha256(X[i].tobytes() + np.float64(y[i]).tobytes()).digest() for i in range(len(y))
    ]
    return np.array(sorted(range(len(y)), key=lambda i: (digests[i], i)), dtype=np.int64)


@dataclass
class RegressorArtifact:
    spec: RegressorSpec
    model: object = field(repr=False)
    hidden_size: int = 0
    scaler_mean: np.ndarray | None = None
    scaler_std: np.ndarray | None = None
    train_digest: str = ""
    train_seconds: float = 0.0
    # checkpoint whose embeddings this model was trained on, when known
    embedding_checkpoint_id: str = ""

    @property
    def artifact_id(self) -> str:
        return f"year-{self.spec.kind}-{self.train_digest[:12]}"

    def _transform(self, X: np.ndarray) -> np.ndarray:
        if self.scaler_mean is None:
            return X
        return (X - self.scaler_mean) / self.scaler_std

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.hidden_size:
            raise ValueError(f"embedding dimension {X.shape[1]} does not match training dimension {self.hidden_size}")
        return np.asarray(self.model.predict(self._transform(X)), dtype=np.float64)

    def save(self, out_dir: str | Path) -> Path:
        import joblib

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        joblib.dump(self.model, out_dir / "model.joblib")
        meta = {
            "artifact_id": self.artifact_id,
            "kind": self.spec.kind,
            "hyperparams": self.spec.resolved_hyperparams(),
            "hyperparams_digest": self.spec.hyperparams_digest(),
            "seed": self.spec.seed,
            "hidden_size": self.hidden_size,
            "standardized": self.scaler_mean is not None,
            "train_digest": self.train_digest,
            "train_seconds": self.train_seconds,
            "embedding_checkpoint_id": self.embedding_checkpoint_id,
            "year_range": [YEAR_MIN, YEAR_MAX],
        }
        (out_dir / "regressor.json").write_text(json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8")
        if self.scaler_mean is not None:
            np.savez(out_dir / "scaler.npz", mean=self.scaler_mean, std=self.scaler_std)
        return out_dir

    @classmethod
    def load(cls, artifact_dir: str | Path) -> "RegressorArtifact":
        import joblib

        artifact_dir = Path(artifact_dir)
        meta_path = artifact_dir / "regressor.json"
        if not meta_path.exists():
            raise FileNotFoundError(f"not a regressor artifact: {artifact_dir}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        model = joblib.load(artifact_dir / "model.joblib")
        scaler_mean = scaler_std = None
        scaler_path = artifact_dir / "scaler.npz"
        if scaler_path.exists():
            data = np.load(scaler_path)
            scaler_mean, scaler_std = data["mean"], data["std"]
        hyperparams = meta["hyperparams"]
        if meta["kind"] == "neural_net" and "hidden_layer_sizes" in hyperparams:
            hyperparams["hidden_layer_sizes"] = tuple(hyperparams["hidden_layer_sizes"])
        spec = RegressorSpec(kind=meta["kind"], hyperparams=hyperparams, seed=meta["seed"])
        return cls(
            spec=spec,
            model=model,
            hidden_size=meta["hidden_size"],
            scaler_mean=scaler_mean,
            scaler_std=scaler_std,
            train_digest=meta["train_digest"],
            train_seconds=meta.get("train_seconds", 0.0),
            embedding_checkpoint_id=meta.get("embedding_checkpoint_id", ""),
        )


def train_regressor(
    X: np.ndarray, y: Sequence[float], spec: RegressorSpec, embedding_checkpoint_id: str = ""
) -> RegressorArtifact:
    """Fit one regressor family on embeddings X against years y."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: X {X.shape} vs y {y.shape}")
    if len(y) < 10:
        raise ValueError(f"need at least 10 training rows, got {len(y)}")
    if y.min() < YEAR_MIN or y.max() > YEAR_MAX:
        log.warning("targets outside [%d, %d]: range [%.1f, %.1f]", YEAR_MIN, YEAR_MAX, y.min(), y.max())
    if np.ptp(y) == 0:
        log.warning("constant target %s: fitting anyway", y[0])

    order = _canonical_order(X, y)
    X_fit, y_fit = X[order], y[order]

    scaler_mean = scaler_std = None
    if spec.kind in _STANDARDIZED_KINDS:
        scaler_mean = X_fit.mean(axis=0)
        scaler_std = X_fit.std(axis=0)
        scaler_std = np.where(scaler_std == 0, 1.0, scaler_std)
        X_fit = (X_fit - scaler_mean) / scaler_std

    model = KIND_FACTORIES[spec.kind](spec.resolved_hyperparams(), spec.seed)
    started = time.monotonic()
    model.fit(X_fit, y_fit)
    elapsed = time.monotonic() - started

    digest = hashlib.sha256(X.tobytes() + y.tobytes() + spec.kind.encode()).hexdigest()
    return RegressorArtifact(
        spec=spec,
        model=model,
        hidden_size=X.shape[1],
        scaler_mean=scaler_mean,
        scaler_std=scaler_std,
        train_digest=digest,
        train_seconds=elapsed,
        embedding_checkpoint_id=embedding_checkpoint_id,
    )


@dataclass(frozen=True)
class YearPrediction:
    raw_estimate: float
    display_year: int  # rounded and clamped to the corpus year range


def predict_year(artifact: RegressorArtifact, embedding: np.ndarray) -> YearPrediction:
    """Point estimate for one embedding; display year is clamped."""
    raw = float(artifact.predict(np.asarray(embedding))[0])
    if not np.isfinite(raw):
        raise ValueError(f"non-finite year prediction: {raw!r}")
    display = int(min(max(round(raw), YEAR_MIN), YEAR_MAX))
    return YearPrediction(raw_estimate=raw, display_year=display)


@dataclass
class BenchmarkRow:
    kind: str
    rmse: float | None
    train_seconds: float
    hyperparams_digest: str
    status: str = "ok"  # ok | failed
    error: str = ""


@dataclass
class BenchmarkTable:
    rows: list[BenchmarkRow]
    split_seed: int
    test_fraction: float
    n_train: int
    n_test: int

    def to_csv(self, path: str | Path) -> Path:
        import csv

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["kind", "rmse", "train_seconds", "hyperparams_digest", "status"])
            for row in self.rows:
                writer.writerow(
                    [
                        row.kind,
                        "" if row.rmse is None else f"{row.rmse:.6f}",
                        f"{row.train_seconds:.3f}",
                        row.hyperparams_digest,
                        row.status,
                    ]
                )
        return path

    def to_text(self) -> str:
        lines = [f"{'Model':<24}{'RMSE':>10}", "-" * 34]
        for row in self.rows:
            value = f"{row.rmse:.2f}" if row.rmse is not None else "failed"
            lines.append(f"{row.kind:<24}{value:>10}")
        lines.append("")
        lines.append(f"(split_seed={self.split_seed}, test_fraction={self.test_fraction}, "
                     f"train={self.n_train}, test={self.n_test})")
        return "\n".join(lines)

    def comparable(self) -> list[tuple]:
        """Determinism-relevant content: everything except wall-clock time."""
        return [(r.kind, r.rmse, r.hyperparams_digest, r.status) for r in self.rows]


def benchmark_regressors(
    X: np.ndarray,
    y: Sequence[float],
    specs: Sequence[RegressorSpec] | None = None,
    split_seed: int = 0,
    test_fraction: float = 0.2,
) -> BenchmarkTable:
    """Train every spec on one shared split and rank kinds by held-out RMSE.

    A failing model marks its row failed; the rest proceed. Rows are sorted
    ascending by RMSE with failures last.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    specs = list(specs) if specs is not None else default_specs(seed=split_seed)

    rng = np.random.default_rng(split_seed)
    n = len(y)
    perm = rng.permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    test_idx, train_idx = perm[:n_test], perm[n_test:]

    rows: list[BenchmarkRow] = []
    for spec in specs:
        try:
            artifact = train_regressor(X[train_idx], y[train_idx], spec)
            predictions = artifact.predict(X[test_idx])
            score = rmse(y[test_idx], predictions)
            rows.append(
                BenchmarkRow(
                    kind=spec.kind,
                    rmse=score,
                    train_seconds=artifact.train_seconds,
                    hyperparams_digest=spec.hyperparams_digest(),
                )
            )
        except Exception as exc:
            log.warning("benchmark: %s failed: %s", spec.kind, exc)
            rows.append(
                BenchmarkRow(
                    kind=spec.kind,
                    rmse=None,
                    train_seconds=0.0,
                    hyperparams_digest=spec.hyperparams_digest(),
                    status="failed",
                    error=str(exc),
                )
            )
    rows.sort(key=lambda r: (r.rmse is None, r.rmse if r.rmse is not None else 0.0, r.kind))
    return BenchmarkTable(
        rows=rows,
        split_seed=split_seed,
        test_fraction=test_fraction,
        n_train=len(train_idx),
        n_test=len(test_idx),
    )
