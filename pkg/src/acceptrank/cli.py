"""Command line entry point: ``acceptrank <subcommand> ...``.

Exit status is 0 on success, 1 on validation or configuration errors and 2
on I/O or parse errors.
"""

import argparse
import logging
import os
import sys

from . import pipeline, simconf
from .corpus import save_index
from .errors import AcceptRankError, ConfigError, InputError
from .evaluation import ndcg_at, read_ranking, read_truth
from .features import FeatureSpec, assemble_matrix
from .scoring import format_scores, institution_scores
from .synth import SynthSpec, generate_synthetic

log = logging.getLogger("acceptrank")

INDEX_FILE = "index.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _years(text):
    lo, _, hi = text.partition(":")
    try:
        return (int(lo), int(hi or lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YEAR or FROM:TO, got {text!r}") from None


def _common():
    p = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a subcommand from resetting a value given before it
    p.add_argument("--config", default=argparse.SUPPRESS, help="key = value file; flags override it")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="global RNG seed")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _corpus_args():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("corpus")
    g.add_argument("--index", help="index cache written by 'ingest'")
    g.add_argument("--data", help="directory holding papers.tsv and authorships.tsv")
    g.add_argument("--papers")
    g.add_argument("--authorships")
    return p


def _run_args():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run")
    g.add_argument("--conference")
    g.add_argument("--train-year", type=int)
    g.add_argument("--val-year", type=int)
    g.add_argument("--predict-year", type=int)
    g.add_argument("--similar", help="comma-separated override of the 3 similar venues")
    g.add_argument("--model", choices=pipeline.MODELS)
    g.add_argument("--method", choices=("cosine", "colsum"))
    g.add_argument("--since", type=int)
    g.add_argument("--tau", type=float)
    g.add_argument("--fixed-k", type=int)
    g.add_argument("--baseline-window", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--epochs", type=int)
    g.add_argument("--tolerance", type=float)
    g.add_argument("--svr-epsilon", type=float)
    g.add_argument("--svr-c", type=float)
    g.add_argument("--rank-lambda", type=float)
    g.add_argument("--max-pairs", type=int)
    g.add_argument("--min-score-gap", type=float)
    g.add_argument("--ndcg", type=int)
    return p


def build_parser():
    common, corpus, run = _common(), _corpus_args(), _run_args()
    parser = _Parser(prog="acceptrank", description="Paper-acceptance rank prediction.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common, corpus], help="validate TSV input and write an index cache")

    p = sub.add_parser("score", parents=[common, corpus], help="Institution Ranking Scores")
    p.add_argument("--venues", help="comma-separated venue ids")
    p.add_argument("--conference", help="single venue (alternative to --venues)")
    p.add_argument("--years", type=_years, help="YEAR or FROM:TO (inclusive)")
    p.add_argument("--all-papers", action="store_true", default=None, help="count non-full papers too")

    p = sub.add_parser("similar", parents=[common, corpus], help="top similar conferences")
    p.add_argument("--conference")
    p.add_argument("--top", type=int)
    p.add_argument("--method", choices=("cosine", "colsum"))
    p.add_argument("--since", type=int)
    p.add_argument("--until", type=int, help="last year included (default: all)")

    p = sub.add_parser("features", parents=[common, corpus], help="144-column feature matrix")
    p.add_argument("--conference")
    p.add_argument("--year", type=int, required=True, help="target year t; features use t-3..t-1")
    p.add_argument("--similar", help="comma-separated 3 similar venues (default: discovered)")
    p.add_argument("--method", choices=("cosine", "colsum"))
    p.add_argument("--since", type=int)

    for name, text in (("train", "fit PCA and models on the training year"),
                       ("validate", "NDCG report on the validation year"),
                       ("predict", "refit on train+validation years and rank the prediction year")):
        sub.add_parser(name, parents=[common, corpus, run], help=text)

    p = sub.add_parser("evaluate", parents=[common], help="NDCG@n of a ranking file against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--ndcg", type=int)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic corpus")
    p.add_argument("--institutions", type=int)
    p.add_argument("--venues", type=int)
    p.add_argument("--authors", type=int)
    p.add_argument("--years", type=int)
    p.add_argument("--start-year", type=int)
    p.add_argument("--papers-per-venue", type=int)
    p.add_argument("--time-constant", action="store_true", default=None, help="repeat the first year's papers every year")
    return parser


def _settings(args):
    """Config file values overlaid with explicitly given flags."""
    config = getattr(args, "config", None)
    values = pipeline.load_config_file(config) if config else {}
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "verbose"):
            values[key] = value
    return values


def _index(values):
    return pipeline.open_index(pipeline.RunConfig.from_mapping(values))


def _emit(text):
    sys.stdout.write(text)


def _method(name):
    return "column_sum" if name == "colsum" else (name or "cosine")


def cmd_ingest(values):
    index = _index(values)
    out = values.get("out") or "."
    os.makedirs(out, exist_ok=True)
    save_index(index, os.path.join(out, INDEX_FILE))
    span = index.year_span or ("", "")
    _emit("papers\tauthorships\tvenues\tinstitutions\tfirst_year\tlast_year\tduplicates\n"
          f"{len(index.papers)}\t{index.n_authorships}\t{len(index.venues)}\t{len(index.institutions)}\t"
          f"{span[0]}\t{span[1]}\t{index.duplicates}\n")


def cmd_score(values):
    index = _index(values)
    venues = values.get("venues") or values.get("conference")
    if not venues:
        raise ConfigError("give --venues or --conference")
    venues = tuple(v.strip() for v in str(venues).split(",") if v.strip())
    years = values.get("years")
    if years is None:
        span = index.year_span
        if span is None:
            raise ConfigError("corpus is empty")
        years = span
    elif isinstance(years, str):
        years = _years(years)
    full_only = not _flag(values.get("all_papers"))
    _emit(format_scores(institution_scores(index, venues, years, full_only)))


def _flag(value):
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def cmd_similar(values):
    index = _index(values)
    conf = values.get("conference")
    if not conf:
        raise ConfigError("--conference is required")
    since = int(values.get("since") or simconf.DEFAULT_CUTOFF)
    until = values.get("until")
    matrix = simconf.build_author_venue_matrix(index, conf, since, int(until) if until else None)
    ranking = simconf.similarity_ranking(matrix, _method(values.get("method")))
    top = simconf.top_similar(ranking, int(values.get("top") or 3))
    if top.shortfall:
        log.warning("only %d similar venues available", len(top.venues))
    lines = ["rank\tvenue_id\tscore"]
    for rank, (venue, score) in enumerate(ranking.ranked[: len(top.venues)], start=1):
        lines.append(f"{rank}\t{venue}\t{float(score):.6f}")
    _emit("\n".join(lines) + "\n")


def cmd_features(values):
    index = _index(values)
    conf = values.get("conference")
    if not conf:
        raise ConfigError("--conference is required")
    year = int(values["year"])
    if values.get("similar"):
        similar = tuple(v.strip() for v in str(values["similar"]).split(",") if v.strip())
    else:
        since = int(values.get("since") or simconf.DEFAULT_CUTOFF)
        matrix = simconf.build_author_venue_matrix(index, conf, since, year - 1)
        similar = tuple(simconf.top_similar(simconf.similarity_ranking(matrix, _method(values.get("method"))), 3).venues)
    try:
        spec = FeatureSpec(conf, similar, year)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _emit(assemble_matrix(index, spec).to_tsv())


def _run_config(values, need_seed):
    if need_seed and values.get("seed") is None:
        raise ConfigError("--seed is required (flag or config file)")
    if "method" in values:
        values = dict(values, method=_method(values["method"]))
    cfg = pipeline.RunConfig.from_mapping(values)
    cfg.check_years()
    return cfg


def cmd_train(values):
    path = pipeline.run_training(_run_config(values, need_seed=True))
    log.info("artifacts written to %s", path)


def cmd_validate(values):
    cfg = _run_config(values, need_seed=False)
    report = pipeline.run_validation(cfg)
    _emit(pipeline.format_report(cfg.conference, report, cfg.ndcg))


def cmd_predict(values):
    path = pipeline.run_prediction(_run_config(values, need_seed=True))
    with open(path, encoding="utf-8") as fh:
        _emit(fh.read())


def cmd_evaluate(values):
    ranked = read_ranking(values["pred"])
    truth = read_truth(values["truth"])
    n = int(values.get("ndcg") or 20)
    _emit(f"NDCG@{n}\t{ndcg_at(ranked, truth, n):.6f}\n")


def cmd_synth(values):
    out = values.get("out")
    if not out:
        raise ConfigError("--out is required")
    spec = SynthSpec(
        seed=int(values.get("seed") or 0),
        n_institutions=int(values.get("institutions", 50)),
        n_venues=int(values.get("venues", 6)),
        n_authors=int(values.get("authors", 600)),
        n_years=int(values.get("years", 8)),
        start_year=int(values.get("start_year", 2008)),
        papers_per_venue_year=int(values.get("papers_per_venue", 40)),
        time_constant=_flag(values.get("time_constant")),
    )
    index = generate_synthetic(spec, out)
    _emit("papers\tauthorships\tvenues\tinstitutions\n"
          f"{len(index.papers)}\t{index.n_authorships}\t{len(index.venues)}\t{len(index.institutions)}\n")


COMMANDS = {
    "ingest": cmd_ingest,
    "score": cmd_score,
    "similar": cmd_similar,
    "features": cmd_features,
    "train": cmd_train,
    "validate": cmd_validate,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = _settings(args)
        COMMANDS[args.command](values)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AcceptRankError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
