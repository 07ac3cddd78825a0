"""
Filtered link prediction: MRR, Hits@1 and Hits@10.

A candidate is filtered out when it forms a known triple (any split) other
than the one being ranked. Ties with the true entity count half:
rank = 1 + #greater + #tied / 2. MRR uses that rank as is; Hits@k rounds
it half up first.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .data import KnowledgeGraph, Triple
from .errors import UsageError
from .model import EmbeddingStore, entity_states, relation_score_matrix, score_all_heads, score_all_tails

logger = logging.getLogger(__name__)

HITS_AT = (1, 10)

# Published UMLS test results of the fidelity model, keyed by (qubits, negatives)
PUBLISHED_UMLS_RESULTS = {
    (4, 1): {"mrr": 0.743, "hits1": 0.630, "hits10": 0.930},
    (2, 4): {"mrr": 0.590, "hits1": 0.434, "hits10": 0.905},
    (2, 3): {"mrr": 0.609, "hits1": 0.469, "hits10": 0.891},
    (2, 2): {"mrr": 0.590, "hits1": 0.445, "hits10": 0.887},
    (2, 1): {"mrr": 0.595, "hits1": 0.439, "hits10": 0.876},
}


class EvalMode(str, Enum):
    TAIL = "tail"  # rank (h, r, ?)
    BOTH = "both"  # also rank (?, r, t); reciprocal ranks averaged over both


def rank_from_scores(scores: np.ndarray, true_index: int, filtered_out: Iterable[int] = ()) -> float:
    """Mean-tie rank of `true_index` among the candidates that survive filtering."""
    scores = np.asarray(scores)
    keep = np.ones(len(scores), dtype=bool)
    keep[list(filtered_out)] = False
    keep[true_index] = False
    others = scores[keep]
    true_score = scores[true_index]
    greater = int(np.count_nonzero(others > true_score))
    ties = int(np.count_nonzero(others == true_score))
    return 1.0 + greater + ties / 2.0


def hits_rank(rank: float) -> int:
    """Round half up to an integer rank."""
    return math.floor(rank + 0.5)


def _check(store: EmbeddingStore, kg: KnowledgeGraph, triple: Triple) -> None:
    if store.entity_count != kg.entity_count or store.relation_count != kg.relation_count:
        raise UsageError("Store and knowledge graph vocabularies differ in size")
    store.check_entity(triple.head)
    store.check_entity(triple.tail)
    store.check_relation(triple.relation)


def rank_triple(store: EmbeddingStore, kg: KnowledgeGraph, triple: Triple) -> float:
    """Filtered rank of the true tail among all entities."""
    _check(store, kg, triple)
    h, r, t = triple
    scores = score_all_tails(store, h, r)
    return rank_from_scores(scores, t, kg.known_tails(h, r) - {t})


def rank_head(store: EmbeddingStore, kg: KnowledgeGraph, triple: Triple) -> float:
    """Filtered rank of the true head among all entities."""
    _check(store, kg, triple)
    h, r, t = triple
    scores = score_all_heads(store, r, t)
    return rank_from_scores(scores, h, kg.known_heads(r, t) - {h})


@dataclass
class RankingReport:
    split: str
    mode: EvalMode
    ranks: list[float]
    n_triples: int
    mrr: float = field(init=False)
    hits1: float = field(init=False)
    hits10: float = field(init=False)
    per_relation: dict[str, dict[str, float]] | None = None

    def __post_init__(self):
        if not self.ranks:
            raise UsageError("Ranking report needs at least one rank")
        count = len(self.ranks)
        self.mrr = math.fsum(1.0 / r for r in self.ranks) / count
        rounded = [hits_rank(r) for r in self.ranks]
        self.hits1 = sum(1 for r in rounded if r <= 1) / count
        self.hits10 = sum(1 for r in rounded if r <= 10) / count

    def metrics(self) -> dict:
        data = {
            "split": self.split,
            "mode": self.mode.value,
            "mrr": self.mrr,
            "hits1": self.hits1,
            "hits10": self.hits10,
            "n_triples": self.n_triples,
        }
        if self.per_relation is not None:
            data["per_relation"] = self.per_relation
        return data

    def to_json(self) -> str:
        return json.dumps(self.metrics(), indent=2)

    def format_table(self) -> str:
        lines = [
            f"split={self.split}  mode={self.mode.value}  n_triples={self.n_triples}",
            f"{'metric':<8}{'fraction':>10}{'percent':>10}",
        ]
        for name, value in (("MRR", self.mrr), ("Hits@1", self.hits1), ("Hits@10", self.hits10)):
            lines.append(f"{name:<8}{value:>10.4f}{value * 100:>10.1f}")
        return "\n".join(lines)


def evaluate(
    store: EmbeddingStore,
    kg: KnowledgeGraph,
    split: str,
    mode: EvalMode = EvalMode.TAIL,
    per_relation: bool = False,
    threads: int = 1,
) -> RankingReport:
    """Rank every triple of `split`; one score matrix per relation is shared by its triples.

    The per-relation matrices may be built on a thread pool; ranking itself
    runs in split order, so the report does not depend on `threads`.
    """
    triples = kg.split(split)
    if not triples:
        raise UsageError(f"Split '{split}' is empty")
    if store.entity_count != kg.entity_count or store.relation_count != kg.relation_count:
        raise UsageError("Store and knowledge graph vocabularies differ in size")

    states = entity_states(store)
    relation_ids = sorted({r for _, r, _ in triples})
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(lambda r: relation_score_matrix(store, r, states), relation_ids))
    else:
        built = [relation_score_matrix(store, r, states) for r in relation_ids]
    matrices = dict(zip(relation_ids, built))
    ranks: list[float] = []
    by_relation: dict[int, list[float]] = {}

    for h, r, t in triples:
        scores = matrices[r]
        triple_ranks = [rank_from_scores(scores[h], t, kg.known_tails(h, r) - {t})]
        if mode is EvalMode.BOTH:
            triple_ranks.append(rank_from_scores(scores[:, t], h, kg.known_heads(r, t) - {h}))
        ranks.extend(triple_ranks)
        by_relation.setdefault(r, []).extend(triple_ranks)

    breakdown = None
    if per_relation:
        breakdown = {
            kg.relations.name(r): {
                "mrr": math.fsum(1.0 / x for x in rel_ranks) / len(rel_ranks),
                "n_ranks": len(rel_ranks),
            }
            for r, rel_ranks in sorted(by_relation.items())
        }
    report = RankingReport(split, mode, ranks, len(triples), per_relation=breakdown)
    logger.info(f"Ranked {len(triples)} {split} triples ({mode.value}): MRR {report.mrr:.4f}")
    return report


def harmonic_number(n: int) -> float:
    return math.fsum(1.0 / i for i in range(1, n + 1))


def random_baseline(num_candidates: int, hits_at: Sequence[int] = HITS_AT) -> dict[str, float]:
    """Expected metrics when the true entity's rank is uniform over the candidates."""
    baseline = {"mrr": harmonic_number(num_candidates) / num_candidates}
    for k in hits_at:
        baseline[f"hits{k}"] = min(k, num_candidates) / num_candidates
    return baseline
