"""Extreme Learning Machine regression and derivative-based sensitivity.

A single hidden layer of randomly initialized neurons feeds a linear
output layer solved in closed form: the hidden weights are drawn once
from U[-1, 1] and the output weights come from the pseudoinverse of the
hidden-layer output matrix (or a ridge-regularized solve). Feature
sensitivity is the sum over the dataset of squared partial derivatives of
the prediction with respect to each input.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import DataSchemaError, InvalidInputError

MODEL_FORMAT_VERSION = 1
DEFAULT_NEURONS = 100

_TRANSFERS = ("sigmoid", "tanh", "gaussian")


def _activate(transfer, z):
    if transfer == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if transfer == "tanh":
        return np.tanh(z)
    if transfer == "gaussian":
        return np.exp(-np.clip(z, -30, 30) ** 2)
    raise InvalidInputError(f"unknown transfer {transfer!r} (options: {_TRANSFERS})")


def _activate_deriv(transfer, z):
    if transfer == "sigmoid":
        h = _activate("sigmoid", z)
        return h * (1.0 - h)
    if transfer == "tanh":
        h = np.tanh(z)
        return 1.0 - h * h
    if transfer == "gaussian":
        zc = np.clip(z, -30, 30)
        return -2.0 * zc * np.exp(-(zc**2))
    raise InvalidInputError(f"unknown transfer {transfer!r} (options: {_TRANSFERS})")


@dataclass(frozen=True)
class ElmModel:
    """Trained model: random hidden layer plus linear output weights."""

    transfer: str
    weights: np.ndarray  # (L, m) hidden weights
    biases: np.ndarray   # (L,)
    beta: np.ndarray     # (L,)
    feature_names: tuple
    training_sse: float
    scaler: dict = None  # optional serialized min-max scaler

    @property
    def n_neurons(self):
        return int(self.beta.shape[0])

    @property
    def n_features(self):
        return int(self.weights.shape[1])


def _hidden(model_or_parts, x):
    if isinstance(model_or_parts, ElmModel):
        w, b, transfer = model_or_parts.weights, model_or_parts.biases, model_or_parts.transfer
    else:
        w, b, transfer = model_or_parts
    z = x @ w.T + b
    return _activate(transfer, z)


def train(x, y, feature_names=None, n_neurons=DEFAULT_NEURONS, transfer="sigmoid",
          rng=None, ridge=0.0, scaler=None):
    """Fit output weights on features already scaled to [0, 1].

    Hidden weights and biases are i.i.d. U[-1, 1] draws from ``rng``. With
    ``ridge=0`` the output weights are the pseudoinverse solution; a
    positive ridge solves (H'H + ridge*I) beta = H'y instead.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInputError("need a non-empty 2-D feature matrix")
    if y.shape[0] != x.shape[0]:
        raise InvalidInputError("target length does not match samples")
    if n_neurons < 1:
        raise InvalidInputError("n_neurons must be >= 1")
    if ridge < 0:
        raise InvalidInputError("ridge must be >= 0")
    n, m = x.shape
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(m))
    feature_names = tuple(feature_names)
    if len(feature_names) != m:
        raise InvalidInputError("feature_names length does not match columns")
    weights = rng.uniform(-1.0, 1.0, size=(n_neurons, m))
    biases = rng.uniform(-1.0, 1.0, size=n_neurons)
    h = _hidden((weights, biases, transfer), x)
    if not np.all(np.isfinite(h)):
        raise InvalidInputError(f"transfer {transfer!r} produced non-finite activations")
    if ridge > 0:
        gram = h.T @ h + ridge * np.eye(n_neurons)
        beta = np.linalg.solve(gram, h.T @ y)
    else:
        beta = numkit.pinv(h) @ y
    resid = y - h @ beta
    return ElmModel(
        transfer=transfer,
        weights=weights,
        biases=biases,
        beta=beta,
        feature_names=feature_names,
        training_sse=float(resid @ resid),
        scaler=scaler,
    )


@dataclass(frozen=True)
class PredictionResult:
    values: np.ndarray
    n_clipped: int


def _coerce_features(model, x):
    if isinstance(x, dict):
        missing = [n for n in model.feature_names if n not in x]
        if missing:
            raise DataSchemaError(f"missing features {missing}")
        return np.array([[float(x[n]) for n in model.feature_names]])
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != model.n_features:
        raise DataSchemaError(
            f"expected {model.n_features} features, got {arr.shape[1]}"
        )
    return arr


def predict_many(model: ElmModel, x) -> PredictionResult:
    """Predictions for a feature matrix; out-of-range inputs are clipped
    to [0, 1] and counted."""
    arr = _coerce_features(model, x)
    clipped = np.clip(arr, 0.0, 1.0)
    n_clipped = int(np.sum((arr < 0.0) | (arr > 1.0)))
    h = _hidden(model, clipped)
    return PredictionResult(values=h @ model.beta, n_clipped=n_clipped)


def predict(model: ElmModel, x):
    """Prediction for a single feature vector (mapping or array)."""
    result = predict_many(model, x)
    return float(result.values[0])


@dataclass(frozen=True)
class SensitivityReport:
    """Per-feature sum of squared partial derivatives, largest first."""

    feature_names: tuple
    ssd: np.ndarray
    normalized: np.ndarray  # ssd / max(ssd)
    rank_order: tuple       # feature indices, descending sensitivity

    def top(self, k):
        return tuple(self.feature_names[i] for i in self.rank_order[:k])


def ssd_sensitivity(model: ElmModel, x) -> SensitivityReport:
    """Rank features by the sum over samples of squared output partials.

    Partials are analytic for all supported transfers. Normalization is
    with respect to the largest value; ties in the ranking break by
    feature registry order.
    """
    arr = _coerce_features(model, x)
    z = arr @ model.weights.T + model.biases
    dh = _activate_deriv(model.transfer, z)  # (n, L)
    grads = (dh * model.beta) @ model.weights  # (n, m)
    ssd = np.sum(grads**2, axis=0)
    top = float(ssd.max())
    normalized = ssd / top if top > 0 else np.zeros_like(ssd)
    order = tuple(int(i) for i in np.lexsort((np.arange(ssd.size), -ssd)))
    return SensitivityReport(
        feature_names=model.feature_names,
        ssd=ssd,
        normalized=normalized,
        rank_order=order,
    )


def ssd_finite_difference(model: ElmModel, x, step=1e-5):
    """Central finite-difference check of the analytic partials."""
    arr = _coerce_features(model, x)
    m = arr.shape[1]
    ssd = np.zeros(m)
    for j in range(m):
        plus = arr.copy()
        minus = arr.copy()
        plus[:, j] += step
        minus[:, j] -= step
        hp = _hidden(model, plus) @ model.beta
        hm = _hidden(model, minus) @ model.beta
        grad = (hp - hm) / (2.0 * step)
        ssd[j] = float(np.sum(grad**2))
    return ssd


@dataclass(frozen=True)
class EvalReport:
    fold_rmse: tuple
    rmse: float          # mean of fold RMSEs
    r2: float            # on pooled out-of-fold predictions
    n_folds: int
    seed: int


def kfold_eval(x, y, n_folds=10, n_neurons=DEFAULT_NEURONS, transfer="sigmoid",
               seed=0, ridge=0.0) -> EvalReport:
    """Cross-validated RMSE and pooled out-of-fold R-squared.

    The fold assignment is a deterministic shuffle from ``seed``; each
    fold trains a fresh model (fresh hidden layer) on the remainder.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    if n_folds < 2:
        raise InvalidInputError("need at least 2 folds")
    if n < n_folds:
        raise InvalidInputError(f"cannot split {n} samples into {n_folds} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = np.array_split(perm, n_folds)
    pooled_pred = np.empty(n)
    fold_rmse = []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model = train(
            x[train_idx], y[train_idx],
            n_neurons=n_neurons, transfer=transfer,
            rng=np.random.default_rng(rng.integers(0, 2**63 - 1)),
            ridge=ridge,
        )
        pred = predict_many(model, x[test_idx]).values
        pooled_pred[test_idx] = pred
        fold_rmse.append(float(np.sqrt(np.mean((pred - y[test_idx]) ** 2))))
    ss_res = float(np.sum((y - pooled_pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return EvalReport(
        fold_rmse=tuple(fold_rmse),
        rmse=float(np.mean(fold_rmse)),
        r2=r2,
        n_folds=n_folds,
        seed=seed,
    )


def to_json(model: ElmModel) -> str:
    """Serialize a model to versioned JSON (floats round-trip exactly)."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "transfer": model.transfer,
        "L": model.n_neurons,
        "theta": {
            "weights": [[float(v) for v in row] for row in model.weights],
            "biases": [float(v) for v in model.biases],
        },
        "beta": [float(v) for v in model.beta],
        "feature_names": list(model.feature_names),
        "training_sse": model.training_sse,
        "scaler": model.scaler,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def from_json(text: str) -> ElmModel:
    doc = json.loads(text)
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise DataSchemaError(f"unsupported model version {doc.get('version')!r}")
    return ElmModel(
        transfer=doc["transfer"],
        weights=np.array(doc["theta"]["weights"], dtype=np.float64),
        biases=np.array(doc["theta"]["biases"], dtype=np.float64),
        beta=np.array(doc["beta"], dtype=np.float64),
        feature_names=tuple(doc["feature_names"]),
        training_sse=float(doc.get("training_sse", 0.0)),
        scaler=doc.get("scaler"),
    )
