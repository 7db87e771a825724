"""Train / validate / predict workflow for one target conference.

Artifacts live under ``<out>/<conference>/``::

    manifest.tsv   similar.tsv   pca.tsv   scaler.tsv
    linear.tsv     svr.tsv       ranksvm.tsv
    validation/    report.tsv and normalised per-model scores
    final/         models refit on training + validation years
    prediction.tsv
"""

import logging
import os
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

from . import rankers
from .corpus import load_corpus, load_index
from .errors import ConfigError, NotTrainedError, ParseError
from .evaluation import ndcg_at
from .features import FeatureSpec, assemble_matrix, target_scores
from .pca import fit_pca, load_pca, save_pca, transform
from .scoring import institution_scores
from .simconf import build_author_venue_matrix, similarity_ranking

log = logging.getLogger(__name__)

MODELS = ("baseline", "regression", "ranksvm", "ensemble")
N_SIMILAR = 3
HISTORY_YEARS = 3


@dataclass
class RunConfig:
    conference: Optional[str] = None
    train_year: Optional[int] = None
    val_year: Optional[int] = None
    predict_year: Optional[int] = None
    papers: Optional[str] = None
    authorships: Optional[str] = None
    data: Optional[str] = None
    index: Optional[str] = None
    out: str = "runs"
    similar: Optional[Tuple[str, ...]] = None
    model: str = "ensemble"
    seed: int = 0
    method: str = "cosine"
    since: int = 2010
    tau: float = 0.95
    fixed_k: Optional[int] = None
    baseline_window: int = 5
    learning_rate: float = rankers.DEFAULT_LR
    epochs: int = rankers.DEFAULT_EPOCHS
    tolerance: float = rankers.DEFAULT_TOL
    svr_epsilon: float = rankers.DEFAULT_SVR_EPSILON
    svr_c: float = rankers.DEFAULT_SVR_C
    rank_lambda: float = rankers.DEFAULT_LAMBDA
    max_pairs: int = rankers.DEFAULT_MAX_PAIRS
    min_score_gap: float = 0.0
    ndcg: int = 20

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string or typed values, ignoring unknown keys and None."""
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            key = key.replace("-", "_")
            if key in names and value is not None:
                kwargs[key] = _coerce(key, value)
        return cls(**kwargs)

    def check_years(self):
        years = (self.train_year, self.val_year, self.predict_year)
        if not self.conference:
            raise ConfigError("conference is required")
        if any(y is None for y in years):
            raise ConfigError("train_year, val_year and predict_year are all required")
        if not self.train_year < self.val_year < self.predict_year:
            raise ConfigError("years must satisfy train_year < val_year < predict_year")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if self.similar is not None and len(self.similar) != N_SIMILAR:
            raise ConfigError(f"exactly {N_SIMILAR} similar conferences must be given")

    def conf_dir(self):
        return os.path.join(self.out, self.conference)


_INT_KEYS = {"train_year", "val_year", "predict_year", "seed", "since", "fixed_k", "baseline_window",
             "epochs", "max_pairs", "ndcg"}
_FLOAT_KEYS = {"tau", "learning_rate", "tolerance", "svr_epsilon", "svr_c", "rank_lambda", "min_score_gap"}


def _coerce(key, value):
    if key == "similar":
        if isinstance(value, str):
            value = value.split(",")
        return tuple(v.strip() for v in value if v.strip())
    if not isinstance(value, str):
        return value
    text = value.strip()
    if key == "fixed_k" and text.lower() in ("", "none"):
        return None
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    return text


def load_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    with fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def open_index(config):
    if config.index:
        return load_index(config.index)
    if config.data:
        return load_corpus(os.path.join(config.data, "papers.tsv"), os.path.join(config.data, "authorships.tsv"))
    if config.papers and config.authorships:
        return load_corpus(config.papers, config.authorships)
    raise ConfigError("no corpus given: use --index, --data or --papers/--authorships")


def check_history(index, config):
    span = index.year_span
    if span is None:
        raise ConfigError("corpus is empty")
    for name in ("train_year", "val_year", "predict_year"):
        year = getattr(config, name)
        if year - HISTORY_YEARS < span[0]:
            raise ConfigError(
                f"{name}={year} needs {HISTORY_YEARS} preceding data years; corpus starts in {span[0]}"
            )
    if config.conference not in index.venues:
        raise ConfigError(f"conference {config.conference!r} not found in corpus")


# -- small persisted tables ------------------------------------------------


@dataclass(frozen=True)
class Standardizer:
    """Per-column centring and scaling of reduced features."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, Z):
        mean = Z.mean(axis=0)
        std = Z.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    def apply(self, Z):
        return (Z - self.mean) / self.scale


def _fmt(values):
    return "\t".join(f"{v:.12g}" for v in values)


def save_standardizer(s, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mean\t" + _fmt(s.mean) + "\n")
        fh.write("scale\t" + _fmt(s.scale) + "\n")


def load_standardizer(path):
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            rows[parts[0]] = np.array([float(x) for x in parts[1:]])
    return Standardizer(rows["mean"], rows["scale"])


def write_scores(scores, path, digits=17):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("institution_id\tscore\n")
        for inst, score in sorted(scores.items()):
            fh.write(f"{inst}\t{score:.{digits}g}\n")


def read_scores(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            inst, score = line.rstrip("\n").split("\t")
            out[inst] = float(score)
    return out


def write_ranking(scores, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank\tinstitution_id\tscore\n")
        for rank, inst in enumerate(rankers.rank_of(scores), start=1):
            fh.write(f"{rank}\t{inst}\t{scores[inst]:.6f}\n")


def write_similar(ranked, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank\tvenue_id\tscore\n")
        for rank, (venue, score) in enumerate(ranked, start=1):
            fh.write(f"{rank}\t{venue}\t{float(score):.6f}\n")


def read_similar(path):
    with open(path, encoding="utf-8") as fh:
        next(fh)
        return tuple(line.split("\t")[1] for line in fh if line.strip())


def _write_manifest(config, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("key\tvalue\n")
        for f in fields(config):
            if f.name in ("papers", "authorships", "data", "index", "out"):
                continue
            value = getattr(config, f.name)
            if isinstance(value, tuple):
                value = ",".join(value)
            fh.write(f"{f.name}\t{value}\n")


# -- features for one year -------------------------------------------------


@dataclass
class Artifacts:
    similar: Tuple[str, ...]
    pca: object
    scaler: Standardizer
    linear: Optional[rankers.LinearModel] = None
    svr: Optional[rankers.SvrModel] = None
    ranksvm: Optional[rankers.RankSvmModel] = None


def discover_similar(index, config):
    """Similar venues from years ``since .. train_year-1``."""
    if config.similar:
        return tuple(config.similar), None
    matrix = build_author_venue_matrix(index, config.conference, config.since, config.train_year - 1)
    ranking = similarity_ranking(matrix, config.method)
    top = ranking.ranked[:N_SIMILAR]
    if len(top) < N_SIMILAR:
        raise ConfigError(
            f"only {len(top)} venues share authors with {config.conference}; {N_SIMILAR} are needed"
        )
    return tuple(v for v, _ in top), top


def score_history(index, venue, target_year, window):
    """``{institution: {year: score}}`` over the ``window`` years before ``target_year``."""
    history = {}
    for year in range(target_year - window, target_year):
        table = institution_scores(index, (venue,), (year, year), full_only=True)
        for inst, score in table.scores.items():
            history.setdefault(inst, {})[year] = score
    return history


def training_rows(index, config, similar, year):
    """Nonzero-feature rows for ``year`` with their labels."""
    spec = FeatureSpec(config.conference, similar, year)
    fm = assemble_matrix(index, spec)
    keep = fm.values.any(axis=1)
    labels = target_scores(index, config.conference, year).labels
    insts = tuple(i for i, k in zip(fm.institutions, keep) if k)
    y = np.array([labels.get(i, 0.0) for i in insts])
    return insts, fm.values[keep], y


def fit_learners(config, blocks):
    """Fit linear, SVR and Ranking SVM on ``[(institutions, Z, y), ...]`` per year."""
    Z = np.vstack([b[1] for b in blocks])
    y = np.concatenate([b[2] for b in blocks])
    linear = rankers.fit_linear_regression(Z, y, config.learning_rate, config.epochs, config.seed, config.tolerance)
    svr = rankers.fit_svr_linear(Z, y, config.svr_epsilon, config.svr_c, config.learning_rate, config.epochs,
                                 config.seed)
    lists = [{inst: (z, t) for inst, z, t in zip(insts, zb, yb)} for insts, zb, yb in blocks]
    pairs = rankers.make_pairs(lists, config.max_pairs, config.seed, config.min_score_gap)
    ranksvm = rankers.fit_ranksvm(pairs, config.rank_lambda, config.learning_rate, config.epochs, config.seed)
    return linear, svr, ranksvm


def predict_year(index, config, arts, year):
    """Raw score tables for every model plus the ensemble, using years < ``year`` only."""
    history = score_history(index, config.conference, year, config.baseline_window)
    spec = FeatureSpec(config.conference, arts.similar, year)
    fm = assemble_matrix(index, spec, extra_institutions=history.keys())
    if not fm.institutions:
        raise ConfigError(f"no candidate institutions for {config.conference} {year}")
    Z = arts.scaler.apply(transform(arts.pca, fm.values))
    baseline = rankers.baseline_predict({i: history.get(i, {}) for i in fm.institutions}, year, config.baseline_window)
    out = {
        "baseline": baseline,
        "regression": rankers.to_scores(fm.institutions, rankers.regression_predict(arts.linear, arts.svr, Z)),
        "ranksvm": rankers.to_scores(fm.institutions, rankers.ranksvm_predict(arts.ranksvm, Z)),
    }
    normalized = {name: rankers.normalize_scores(s) for name, s in out.items()}
    normalized["ensemble"] = rankers.ensemble([normalized[m] for m in ("baseline", "regression", "ranksvm")])
    out["ensemble"] = normalized["ensemble"]
    return out, normalized


# -- the three stages ------------------------------------------------------


def run_training(config, index=None):
    config.check_years()
    index = index if index is not None else open_index(config)
    check_history(index, config)
    similar, ranked = discover_similar(index, config)
    insts, X, y = training_rows(index, config, similar, config.train_year)
    if len(insts) < 2:
        raise ConfigError(f"too few active institutions ({len(insts)}) in training year")
    d = config.conf_dir()
    os.makedirs(d, exist_ok=True)
    _write_manifest(config, os.path.join(d, "manifest.tsv"))
    write_similar(ranked if ranked is not None else [(v, float("nan")) for v in similar],
                  os.path.join(d, "similar.tsv"))
    # fit on the persisted (rounded) parameters so later stages see the same numbers
    save_pca(fit_pca(X, tau=config.tau, fixed_k=config.fixed_k), os.path.join(d, "pca.tsv"))
    pca = load_pca(os.path.join(d, "pca.tsv"))
    Z = transform(pca, X)
    save_standardizer(Standardizer.fit(Z), os.path.join(d, "scaler.tsv"))
    scaler = load_standardizer(os.path.join(d, "scaler.tsv"))
    linear, svr, ranksvm = fit_learners(config, [(insts, scaler.apply(Z), y)])
    rankers.save_model(linear, os.path.join(d, "linear.tsv"))
    rankers.save_model(svr, os.path.join(d, "svr.tsv"))
    rankers.save_model(ranksvm, os.path.join(d, "ranksvm.tsv"))
    log.info("trained %s: similar=%s K=%d rows=%d", config.conference, similar, pca.k, len(insts))
    return d


def load_artifacts(config, final=False):
    d = config.conf_dir()
    model_dir = os.path.join(d, "final") if final else d
    needed = [os.path.join(d, n) for n in ("similar.tsv", "pca.tsv", "scaler.tsv")]
    needed += [os.path.join(model_dir, n) for n in ("linear.tsv", "svr.tsv", "ranksvm.tsv")]
    missing = [p for p in needed if not os.path.exists(p)]
    if missing:
        raise NotTrainedError(f"missing artifacts ({', '.join(missing)}); run 'train' first")
    try:
        return Artifacts(
            read_similar(needed[0]),
            load_pca(needed[1]),
            load_standardizer(needed[2]),
            rankers.load_model(needed[3]),
            rankers.load_model(needed[4]),
            rankers.load_model(needed[5]),
        )
    except (ValueError, KeyError, StopIteration) as exc:
        raise ParseError(f"corrupt artifacts in {d} ({exc!r})") from None


def run_validation(config, index=None):
    """NDCG@n of each model on the validation year; writes ``validation/``."""
    config.check_years()
    arts = load_artifacts(config)
    index = index if index is not None else open_index(config)
    check_history(index, config)
    _, normalized = predict_year(index, config, arts, config.val_year)
    truth = target_scores(index, config.conference, config.val_year).labels
    report = {m: ndcg_at(rankers.rank_of(normalized[m]), truth, config.ndcg) for m in MODELS}
    vdir = os.path.join(config.conf_dir(), "validation")
    os.makedirs(vdir, exist_ok=True)
    for m in MODELS:
        write_scores(normalized[m], os.path.join(vdir, f"scores_{m}.tsv"))
    write_scores(truth, os.path.join(vdir, "truth.tsv"))
    with open(os.path.join(vdir, "report.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_report(config.conference, report, config.ndcg))
    return report


def format_report(conference, report, n=20):
    head = "\t".join(("conference",) + MODELS)
    row = "\t".join([conference] + [f"{report[m]:.6f}" for m in MODELS])
    return f"# NDCG@{n}\n{head}\n{row}\n"


def run_prediction(config, index=None):
    """Refit learners on training + validation years and rank ``predict_year``."""
    config.check_years()
    arts = load_artifacts(config)
    index = index if index is not None else open_index(config)
    check_history(index, config)
    blocks = []
    for year in (config.train_year, config.val_year):
        insts, X, y = training_rows(index, config, arts.similar, year)
        blocks.append((insts, arts.scaler.apply(transform(arts.pca, X)), y))
    fdir = os.path.join(config.conf_dir(), "final")
    os.makedirs(fdir, exist_ok=True)
    for name, model in zip(("linear", "svr", "ranksvm"), fit_learners(config, blocks)):
        rankers.save_model(model, os.path.join(fdir, f"{name}.tsv"))
    arts = load_artifacts(config, final=True)
    raw, normalized = predict_year(index, config, arts, config.predict_year)
    for m in MODELS:
        write_scores(normalized[m], os.path.join(fdir, f"scores_{m}.tsv"))
    chosen = raw[config.model]
    path = os.path.join(config.conf_dir(), "prediction.tsv")
    write_ranking(chosen, path)
    return path
