"""Baseline, regression pair, Ranking SVM and score blending.

Prediction scores are plain ``dict`` objects mapping institution id to a
float. Learned models operate on dense ``n x K`` arrays; use
:func:`to_scores` to attach institution ids.

All SGD fits shuffle with ``numpy.random.default_rng(seed)`` once per epoch
and use the step ``learning_rate / sqrt(epoch)``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import EmptyPairSetError, FormatVersionError, ParseError

log = logging.getLogger(__name__)

MODEL_TAG = "acceptrank-model"
MODEL_VERSION = 1

DEFAULT_LR = 0.01
DEFAULT_EPOCHS = 200
DEFAULT_TOL = 1e-8
DEFAULT_SVR_EPSILON = 0.1
DEFAULT_SVR_C = 1.0
DEFAULT_LAMBDA = 0.01
DEFAULT_MAX_PAIRS = 50_000


# -- baseline --------------------------------------------------------------


@dataclass(frozen=True)
class BaselineModel:
    window: int = 5

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("baseline window must be >= 1")


def baseline_predict(history: Mapping[str, Mapping[int, float]], target_year, window=5):
    """Mean score over the ``window`` years before ``target_year``; missing years are 0."""
    BaselineModel(window)
    t = int(target_year)
    out = {}
    for inst, per_year in history.items():
        total = 0.0
        for j in range(1, window + 1):
            total += per_year.get(t - j, 0.0)
        out[inst] = total / window
    return out


# -- shared helpers --------------------------------------------------------


def _as_design(X, y=None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D design matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix contains non-finite values")
    if y is None:
        return X
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError("X and y have different numbers of rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    return X, y


def _step(learning_rate, epoch):
    return learning_rate / math.sqrt(epoch)


def _check_dim(weights, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != weights.shape[0]:
        raise ValueError(f"model expects {weights.shape[0]} features, got {X.shape[1]}")
    return X


# -- linear regression -----------------------------------------------------


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    hyper: Dict[str, float] = field(default_factory=dict)
    loss_history: Tuple[float, ...] = ()

    def predict(self, X):
        return _check_dim(self.weights, X) @ self.weights + self.bias


def squared_loss(w, b, X, y):
    r = y - X @ w - b
    return 0.5 * float(r @ r)


def squared_loss_grad(w, b, X, y):
    r = y - X @ w - b
    return -(X.T @ r), -float(r.sum())


def fit_linear_regression(X, y, learning_rate=DEFAULT_LR, epochs=DEFAULT_EPOCHS, seed=0,
                          tolerance=DEFAULT_TOL, decay=True):
    """Least squares by per-sample SGD.

    Starts from ``w = 0, b = mean(y)`` and stops after ``epochs`` or once the
    full-data loss improves by less than ``tolerance`` in an epoch.
    ``decay=False`` keeps the step fixed.
    """
    X, y = _as_design(X, y)
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    b = np.array([y.mean()])
    prev = squared_loss(w, b[0], X, y)
    history = [prev]
    for epoch in range(1, epochs + 1):
        lr = _step(learning_rate, epoch) if decay else learning_rate
        kernels.linreg_epoch(X, y, w, b, rng.permutation(X.shape[0]), lr)
        loss = squared_loss(w, b[0], X, y)
        if not math.isfinite(loss):
            raise FloatingPointError("linear regression diverged; lower the learning rate")
        history.append(loss)
        if prev - loss < tolerance:
            break
        prev = loss
    hyper = {"learning_rate": learning_rate, "epochs": epochs, "seed": seed, "tolerance": tolerance}
    return LinearModel(w, float(b[0]), hyper, tuple(history))


# -- linear SVR ------------------------------------------------------------


@dataclass(frozen=True)
class SvrModel:
    weights: np.ndarray
    bias: float
    epsilon: float
    c: float
    hyper: Dict[str, float] = field(default_factory=dict)

    def predict(self, X):
        return _check_dim(self.weights, X) @ self.weights + self.bias


def svr_objective(w, b, X, y, epsilon, c):
    r = np.abs(y - X @ w - b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, r - epsilon).sum())


def fit_svr_linear(X, y, epsilon=DEFAULT_SVR_EPSILON, c=DEFAULT_SVR_C, learning_rate=DEFAULT_LR,
                   epochs=DEFAULT_EPOCHS, seed=0):
    """Epsilon-insensitive linear SVR in the primal, by per-sample subgradient steps."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if c <= 0:
        raise ValueError("c must be > 0")
    X, y = _as_design(X, y)
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    b = np.array([y.mean()])
    for epoch in range(1, epochs + 1):
        kernels.svr_epoch(X, y, w, b, rng.permutation(X.shape[0]), _step(learning_rate, epoch),
                          float(epsilon), float(c))
    if not (np.all(np.isfinite(w)) and math.isfinite(b[0])):
        raise FloatingPointError("SVR diverged; lower the learning rate")
    hyper = {"learning_rate": learning_rate, "epochs": epochs, "seed": seed}
    return SvrModel(w, float(b[0]), float(epsilon), float(c), hyper)


def regression_predict(linear, svr, X):
    """Average of the linear and SVR outputs."""
    if linear.weights.shape != svr.weights.shape:
        raise ValueError("linear and SVR models have different feature dimensions")
    return 0.5 * (linear.predict(X) + svr.predict(X))


# -- Ranking SVM -----------------------------------------------------------


@dataclass(frozen=True)
class PairSet:
    x1: np.ndarray
    x2: np.ndarray
    y: np.ndarray

    def __len__(self):
        return self.y.shape[0]

    @property
    def diffs(self):
        return self.x1 - self.x2


def make_pairs(ranked_lists: Sequence[Mapping[str, Tuple[Sequence[float], float]]],
               max_pairs=DEFAULT_MAX_PAIRS, seed=0, min_score_gap=0.0):
    """Within-list preference pairs.

    Each list maps institution id to ``(feature_vector, true_score)``. Every
    unordered pair whose scores differ (by at least ``min_score_gap``) yields
    one pair; even-indexed pairs put the better item first with ``y=+1``,
    odd-indexed ones put it second with ``y=-1``. Pairs with identical
    feature vectors are skipped.
    """
    x1, x2, ys = [], [], []
    k = 0
    for ranked in ranked_lists:
        items = sorted(ranked.items())
        vecs = [np.asarray(v, dtype=np.float64) for _, (v, _) in items]
        scores = [float(s) for _, (_, s) in items]
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                gap = scores[i] - scores[j]
                if gap == 0.0 or abs(gap) < min_score_gap:
                    continue
                if np.array_equal(vecs[i], vecs[j]):
                    continue
                hi, lo = (vecs[i], vecs[j]) if gap > 0 else (vecs[j], vecs[i])
                if k % 2 == 0:
                    x1.append(hi), x2.append(lo), ys.append(1.0)
                else:
                    x1.append(lo), x2.append(hi), ys.append(-1.0)
                k += 1
    if not ys:
        raise EmptyPairSetError("no pairs with distinct scores and features")
    x1, x2, ys = np.array(x1), np.array(x2), np.array(ys)
    if len(ys) > max_pairs:
        keep = np.sort(np.random.default_rng(seed).choice(len(ys), size=max_pairs, replace=False))
        x1, x2, ys = x1[keep], x2[keep], ys[keep]
    return PairSet(x1, x2, ys)


@dataclass(frozen=True)
class RankSvmModel:
    weights: np.ndarray
    lam: float
    hyper: Dict[str, float] = field(default_factory=dict)
    objective_history: Tuple[float, ...] = ()
    rejected_epochs: int = 0

    def predict(self, X):
        return _check_dim(self.weights, X) @ self.weights


def ranksvm_objective(w, D, y, lam):
    margins = y * (D @ w)
    return float(np.maximum(0.0, 1.0 - margins).sum()) + lam * float(w @ w)


def ranksvm_subgradient(w, D, y, lam):
    active = y * (D @ w) < 1.0
    return -(D[active].T @ y[active]) + 2.0 * lam * w


def count_inversions(w, pairs):
    return int(np.sum(pairs.y * (pairs.diffs @ w) <= 0.0))


def fit_ranksvm(pairs, lam=DEFAULT_LAMBDA, learning_rate=DEFAULT_LR, epochs=DEFAULT_EPOCHS, seed=0):
    """Minimise summed pair hinge loss plus ``lam * ||w||^2``.

    Per-pair subgradient steps. An epoch that raises the objective is
    discarded and the step scale halved, so the recorded per-epoch objective
    never increases.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if len(pairs) == 0:
        raise EmptyPairSetError("pair set is empty")
    D = np.ascontiguousarray(pairs.diffs, dtype=np.float64)
    y = np.ascontiguousarray(pairs.y, dtype=np.float64)
    rng = np.random.default_rng(seed)
    w = np.zeros(D.shape[1])
    best = ranksvm_objective(w, D, y, lam)
    history = [best]
    scale = 1.0
    rejected = 0
    for epoch in range(1, epochs + 1):
        trial = w.copy()
        kernels.ranksvm_epoch(D, y, trial, rng.permutation(D.shape[0]),
                              scale * _step(learning_rate, epoch), float(lam))
        obj = ranksvm_objective(trial, D, y, lam)
        if obj <= best:
            w, best = trial, obj
        else:
            scale *= 0.5
            rejected += 1
        history.append(best)
    hyper = {"learning_rate": learning_rate, "epochs": epochs, "seed": seed}
    return RankSvmModel(w, float(lam), hyper, tuple(history), rejected)


def ranksvm_predict(model, X):
    return model.predict(X)


# -- blending --------------------------------------------------------------


def to_scores(institutions, values):
    return {inst: float(v) for inst, v in zip(institutions, values)}


def normalize_scores(scores: Mapping[str, float]):
    """Min-max scale into [0, 1]; a constant table maps to 0.5 everywhere."""
    if not scores:
        raise ValueError("cannot normalise an empty score table")
    lo = min(scores.values())
    hi = max(scores.values())
    if hi == lo:
        return {k: 0.5 for k in scores}
    span = hi - lo
    return {k: (v - lo) / span for k, v in scores.items()}


def ensemble(tables: Sequence[Mapping[str, float]]):
    """Per-institution mean of already-normalised tables; missing keys count as 0."""
    if not tables:
        raise ValueError("ensemble needs at least one score table")
    keys = set().union(*tables)
    if any(set(t) != keys for t in tables):
        log.warning("ensemble members have different institution sets; missing scores count as 0")
    m = len(tables)
    return {k: sum(t.get(k, 0.0) for t in tables) / m for k in sorted(keys)}


def rank_of(scores: Mapping[str, float]) -> List[str]:
    return [k for k, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))]


# -- persistence -----------------------------------------------------------

_KINDS = {"linear": LinearModel, "svr": SvrModel, "ranksvm": RankSvmModel}


def _fmt(values):
    return "\t".join(f"{v:.12g}" for v in np.atleast_1d(values))


def save_model(model, path):
    kind = {v: k for k, v in _KINDS.items()}[type(model)]
    lines = [f"{MODEL_TAG}\t{kind}\t{MODEL_VERSION}"]
    for key in sorted(model.hyper):
        lines.append(f"hyper\t{key}\t{model.hyper[key]!r}")
    if kind == "svr":
        lines.append(f"hyper\tepsilon\t{model.epsilon!r}")
        lines.append(f"hyper\tc\t{model.c!r}")
    if kind == "ranksvm":
        lines.append(f"hyper\tlambda\t{model.lam!r}")
    lines.append("weights\t" + _fmt(model.weights))
    if kind != "ranksvm":
        lines.append("bias\t" + _fmt(model.bias))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        rows = [ln.rstrip("\n").split("\t") for ln in fh if ln.strip()]
    if not rows or rows[0][0] != MODEL_TAG or len(rows[0]) != 3:
        raise ParseError("missing model type tag", source=str(path))
    _, kind, version = rows[0]
    if version != str(MODEL_VERSION):
        raise FormatVersionError(f"{path}: model version {version}, expected {MODEL_VERSION}")
    if kind not in _KINDS:
        raise ParseError(f"unknown model type {kind!r}", source=str(path))
    try:
        hyper = {}
        weights = bias = None
        for parts in rows[1:]:
            if parts[0] == "hyper":
                hyper[parts[1]] = float(parts[2])
            elif parts[0] == "weights":
                weights = np.array([float(x) for x in parts[1:]])
            elif parts[0] == "bias":
                bias = float(parts[1])
        for key in ("epochs", "seed"):
            if key in hyper:
                hyper[key] = int(hyper[key])
        if weights is None:
            raise KeyError("weights")
        if kind == "linear":
            return LinearModel(weights, float(bias), hyper)
        if kind == "svr":
            eps = hyper.pop("epsilon")
            c = hyper.pop("c")
            return SvrModel(weights, float(bias), eps, c, hyper)
        lam = hyper.pop("lambda")
        return RankSvmModel(weights, lam, hyper)
    except (KeyError, ValueError, IndexError, TypeError) as exc:
        raise ParseError(f"malformed model file ({exc!r})", source=str(path)) from None
