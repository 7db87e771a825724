"""Rank institutions by predicted paper acceptance at a target conference."""

from .corpus import AuthorshipRecord, CorpusIndex, PaperRecord, build_index, load_corpus, papers_of
from .evaluation import dcg_at, ndcg_at
from .features import BasicFeatures, FeatureSpec, assemble_matrix, basic_features, target_scores
from .kernels import BACKEND
from .pca import explained_variance_ratio, fit_pca, transform
from .rankers import (
    baseline_predict,
    ensemble,
    fit_linear_regression,
    fit_ranksvm,
    fit_svr_linear,
    make_pairs,
    normalize_scores,
    rank_of,
    ranksvm_predict,
    regression_predict,
)
from .scoring import ScoreTable, institution_scores
from .simconf import (
    build_author_venue_matrix,
    column_sum_ranking,
    cosine_similarity_ranking,
    top_similar,
)

__version__ = "0.1.0"
