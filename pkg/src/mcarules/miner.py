"""Rule mining by literal extension, scored with correspondence-analysis cosines.

Candidate rules grow one literal at a time, per label. Two prunes keep the
search tractable: a per-label support floor (support is monotone under
extension, so failing rules are never extended) and a score bound that
discards rules no extension of which can reach the working score floor. The
floor itself rises as better rules fill the per-label pool, tightening both
prunes as mining progresses.
"""

from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import CategoricalDataset, Literal
from .mca import McaModel, ScoreTable, score_table


@dataclass(frozen=True, order=True)
class Rule:
    """A conjunction of literals, at most one per attribute, canonically sorted."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        if len(self.literals) < 1:
            raise ValueError("a rule needs at least one literal")
        if list(self.literals) != sorted(self.literals):
            raise ValueError("literals must be in canonical (attribute, category) order")
        attrs = [lit.attribute for lit in self.literals]
        if len(set(attrs)) != len(attrs):
            raise ValueError("two literals on one attribute are jointly unsatisfiable")

    @classmethod
    def of(cls, literals) -> "Rule":
        return cls(literals=tuple(sorted(literals)))

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def attributes(self) -> frozenset:
        return frozenset(lit.attribute for lit in self.literals)

    def extended(self, literal: Literal) -> "Rule":
        return Rule.of(self.literals + (literal,))

    def describe(self, dataset: CategoricalDataset) -> str:
        return " and ".join(dataset.describe_literal(lit) for lit in self.literals)


@dataclass(frozen=True)
class ScoredRule:
    rule: Rule
    label: int
    score: float
    support: float


@dataclass(frozen=True)
class MinerConfig:
    """Search floors and caps.

    ``signed`` keeps scores as printed: literals negatively correlated with a
    label never qualify for that label (the score floor is positive). Setting
    it to False scores literals by cosine magnitude instead.
    """

    r_max: int = 2
    s_min: float = 0.3
    mu_min: float = 0.5
    M: int = 70
    signed: bool = True

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be at least 1")
        if self.s_min <= 0:
            raise ValueError("s_min must be positive")
        if self.M < 1:
            raise ValueError("M must be at least 1")


@dataclass(frozen=True)
class MiningResult:
    """Union of the per-label top-M rules; ``status`` is "empty" when nothing passed."""

    rules: tuple[ScoredRule, ...]
    per_label: tuple[tuple[ScoredRule, ...], ...]
    status: str

    def __len__(self) -> int:
        return len(self.rules)


def rule_mask(rule: Rule, X: np.ndarray) -> np.ndarray:
    """Boolean row mask where every literal of the rule holds."""
    mask = X[:, rule.literals[0].attribute] == rule.literals[0].category
    for lit in rule.literals[1:]:
        mask = mask & (X[:, lit.attribute] == lit.category)
    return mask


def support(rule: Rule, dataset: CategoricalDataset, label: int) -> float:
    """Fraction of class-``label`` rows on which the rule is true."""
    class_mask = dataset.Y == label
    total = int(class_mask.sum())
    if total == 0:
        raise ValueError(f"label class {label} has no samples; support undefined")
    hits = int(np.count_nonzero(rule_mask(rule, dataset.X) & class_mask))
    return hits / total


def rule_score(rule: Rule, table: ScoreTable, label: int) -> float:
    """Mean literal-label score over the rule's literals, in canonical order."""
    return sum(table.score(lit, label) for lit in rule.literals) / len(rule)


def score_bound(current_len: int, mu_min: float, rho_bar_k: float) -> float:
    """Smallest rule score from which some extension can still reach ``mu_min``.

    The best extension appends the strongest available literal, so a rule
    scoring below this bound cannot produce an acceptable child.
    """
    if current_len < 1:
        raise ValueError("score_bound needs a rule of length at least 1")
    return ((current_len + 1) * mu_min - rho_bar_k) / current_len


def mine(
    dataset: CategoricalDataset,
    model: McaModel,
    config: MinerConfig,
    n_workers: int | None = None,
) -> MiningResult:
    """Mine the top-M rules per label, returning their deduplicated union.

    Labels are mined independently (and concurrently); the dataset, model,
    and score table are shared read-only, so results do not depend on the
    worker count.
    """
    table = score_table(model, dataset)
    scores = table.scores if config.signed else np.abs(table.scores)
    rho_bar = np.full(dataset.n_labels, np.nan)
    for k in range(dataset.n_labels):
        col = scores[table.defined, k]
        col = col[~np.isnan(col)]
        if col.size:
            rho_bar[k] = col.max()

    flat_literals = []
    for j, schema in enumerate(dataset.schemas):
        for cat in range(schema.n_categories):
            flat_literals.append(Literal(j, cat))
    lit_masks = np.stack(
        [dataset.literal_mask(lit) for lit in flat_literals]
    )
    class_counts = dataset.label_counts()

    def mine_label(k: int) -> tuple[ScoredRule, ...]:
        if class_counts[k] == 0 or np.isnan(rho_bar[k]):
            return ()
        return _mine_one_label(
            dataset, table, scores[:, k], float(rho_bar[k]), config, k,
            flat_literals, lit_masks, int(class_counts[k]),
        )

    workers = n_workers or os.cpu_count() or 1
    workers = max(1, min(workers, dataset.n_labels))
    if workers == 1:
        per_label = [mine_label(k) for k in range(dataset.n_labels)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_label = list(pool.map(mine_label, range(dataset.n_labels)))

    best: dict[Rule, ScoredRule] = {}
    for ranked in per_label:
        for sr in ranked:
            kept = best.get(sr.rule)
            if kept is None or (sr.score, -sr.label) > (kept.score, -kept.label):
                best[sr.rule] = sr
    union = tuple(
        sorted(best.values(), key=lambda s: (-s.score, len(s.rule), s.rule.literals, s.label))
    )
    status = "ok" if union else "empty"
    return MiningResult(rules=union, per_label=tuple(per_label), status=status)


def _mine_one_label(
    dataset, table, scores_k, rho_bar_k, config, k, flat_literals, lit_masks, class_count
):
    """Seed, extend, prune, and rank rules for one label."""
    class_mask = dataset.Y == k

    defined = table.defined & ~np.isnan(scores_k)
    lit_class_counts = lit_masks[:, class_mask].sum(axis=1)

    pool: dict[Rule, ScoredRule] = {}
    top_scores: list[float] = []  # min-heap of the best M scores seen

    def add(rule, score, supp):
        pool[rule] = ScoredRule(rule=rule, label=k, score=score, support=supp)
        if len(top_scores) < config.M:
            heapq.heappush(top_scores, score)
        else:
            heapq.heappushpop(top_scores, score)

    for flat, lit in enumerate(flat_literals):
        if not defined[flat]:
            continue
        score = float(scores_k[flat])
        supp = lit_class_counts[flat] / class_count
        if score >= config.mu_min and supp >= config.s_min:
            add(Rule.of([lit]), score, supp)

    for length in range(1, config.r_max):
        frontier = sorted(
            (r for r in pool if len(r) == length), key=lambda r: r.literals
        )
        for rule in frontier:
            working_mu = config.mu_min
            if len(top_scores) == config.M:
                working_mu = max(working_mu, top_scores[0])
            if pool[rule].score < score_bound(length, working_mu, rho_bar_k):
                continue
            parent_mask = rule_mask(rule, dataset.X)
            used = rule.attributes
            for flat, lit in enumerate(flat_literals):
                if not defined[flat] or lit.attribute in used:
                    continue
                child = rule.extended(lit)
                if child in pool:
                    continue
                # Recompute the mean in canonical literal order so equal rules
                # score bit-identically however they were reached.
                child_score = (
                    sum(float(scores_k[table.flat_index(l)]) for l in child.literals)
                    / len(child)
                )
                if child_score < working_mu:
                    continue
                hits = int(
                    np.count_nonzero(parent_mask & lit_masks[flat] & class_mask)
                )
                child_supp = hits / class_count
                if child_supp < config.s_min:
                    continue
                add(child, child_score, child_supp)

    ranked = sorted(
        pool.values(), key=lambda s: (-s.score, len(s.rule), s.rule.literals)
    )
    return tuple(ranked[: config.M])
