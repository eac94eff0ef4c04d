"""Term-extraction re-ranking with embedding-based word graphs."""

from .candidates import CandidateSet, CandidateTerm, ExtractionConfig, extract_candidates
from .corpus import Corpus, Document, NormalizeConfig, load_corpus
from .embedding import EmbeddingModel, RelatednessIndex, build_relrank, load_embeddings, relatedness, train_embeddings
from .errors import ConfigError, DataError
from .evaluation import GroundTruth, avg_p_at_k, load_ground_truth, movement, precision_at_k, rtp_and_prf
from .rerank import RevisedList, SeedSet, propose_and_verify, revise_scores, unsupervised_seeds
from .scorers import ScoredList, run_scorer
from .semgraph import PageRankParams, WordGraph, activate, build_graph, compute_smi, personalized_pagerank, pswa_stats
from .textrank import build_cooccurrence_graph, ctextrank, revise_with_ctextrank

__version__ = "0.1.0"
