"""Scripted annotation campaigns for testing and desk-scale rehearsal.

``simulate_campaign`` drives a real :class:`~srcurate.campaign.Campaign`
with scripted annotators under a logical clock, so two runs with the
same seed produce byte-identical record logs. ``build_vote_plan``
constructs per-patch vote triples that hit prescribed campaign-level
marginals exactly (raw label counts per model, final label counts per
model and the positives-per-group histogram), which lets reports be
validated against known totals.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable, Sequence

import numpy as np

from .campaign import LABELS, AnnotationRecord, Campaign, GroupEntry
from .seeding import spawn_rng

# policy(annotator_id, group_id, variant_ids, rng) -> (labels, elapsed_ms)
LabelPolicy = Callable[[str, str, Sequence[int], np.random.Generator],
                       tuple[dict[int, str], int]]


class LogicalClock:
    """Deterministic ISO timestamps: fixed epoch, one tick per call."""

    def __init__(self, start: str = "2000-01-01T00:00:00+00:00", step_s: int = 1):
        self._now = datetime.fromisoformat(start).astimezone(timezone.utc)
        self._step = timedelta(seconds=step_s)

    def __call__(self) -> str:
        stamp = self._now.isoformat()
        self._now += self._step
        return stamp


def constant_policy(label: str, elapsed_ms: int = 20000) -> LabelPolicy:
    def policy(annotator_id, group_id, variant_ids, rng):
        return {vid: label for vid in variant_ids}, elapsed_ms

    return policy


def random_policy(weights: dict[str, float] | None = None,
                  elapsed_range_ms: tuple[int, int] = (15000, 30000)) -> LabelPolicy:
    """Draw labels independently with the given probabilities."""
    if weights is None:
        weights = {"Positive": 0.7, "Similar": 0.2, "Negative": 0.1}
    labels = list(LABELS)
    probs = np.array([weights.get(l, 0.0) for l in labels], dtype=float)
    probs = probs / probs.sum()

    def policy(annotator_id, group_id, variant_ids, rng):
        chosen = {vid: labels[int(rng.choice(len(labels), p=probs))] for vid in variant_ids}
        elapsed = int(rng.integers(elapsed_range_ms[0], elapsed_range_ms[1] + 1))
        return chosen, elapsed

    return policy


class PlanPolicy:
    """Replay a vote plan: the k-th annotator of a group takes vote k."""

    def __init__(self, plan: dict[tuple[str, int], tuple[str, str, str]],
                 elapsed_ms: int = 20000):
        self.plan = plan
        self.elapsed_ms = elapsed_ms
        self._next_index: dict[str, int] = {}

    def __call__(self, annotator_id, group_id, variant_ids, rng):
        k = self._next_index.get(group_id, 0)
        self._next_index[group_id] = k + 1
        labels = {vid: self.plan[(group_id, vid)][k] for vid in variant_ids}
        return labels, self.elapsed_ms


def synthetic_groups(count: int, variant_ids: Sequence[int] = (1, 2, 3, 4)) -> list[GroupEntry]:
    return [
        GroupEntry(
            group_id=f"g{i:05d}",
            original_ref=f"g{i:05d}/orig",
            variant_refs={m: f"g{i:05d}/m{m}" for m in variant_ids},
        )
        for i in range(count)
    ]


def simulate_campaign(groups: int | list[GroupEntry], annotators: int | list[str],
                      label_policy: LabelPolicy, seed: int, per_group: int = 3,
                      log_path=None) -> tuple[list[AnnotationRecord], Campaign]:
    """Run a campaign to completion with scripted annotators.

    Annotators take turns round-robin, one group per sweep, submitting
    through the same code path the HTTP service uses.
    """
    group_entries = synthetic_groups(groups) if isinstance(groups, int) else groups
    annotator_ids = ([f"a{i:02d}" for i in range(annotators)]
                     if isinstance(annotators, int) else list(annotators))
    campaign = Campaign(group_entries, annotator_ids, per_group=per_group, seed=seed,
                        log_path=log_path, clock=LogicalClock())
    rng = spawn_rng(seed, "simulate-policy")
    pending = True
    while pending:
        pending = False
        for aid in annotator_ids:
            task = campaign.next_task(aid)
            if task is None:
                continue
            pending = True
            variant_ids = [vid for vid, _ in task.slots]
            labels, elapsed = label_policy(aid, task.group_id, variant_ids, rng)
            campaign.submit_labels(aid, task.group_id, labels, elapsed)
    campaign.close()
    return campaign.records, campaign


# ---------------------------------------------------------------------------
# Vote planning against prescribed marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabelMarginals:
    """Per-model counts keyed by label, e.g. {"Positive": {1: 42362, ...}, ...}."""

    counts: dict[str, dict[int, int]]

    def for_model(self, model_id: int) -> tuple[int, int, int]:
        return (self.counts["Positive"][model_id],
                self.counts["Similar"][model_id],
                self.counts["Negative"][model_id])


def _pattern_counts(fp: int, fs: int, fn: int, rp: int, rs: int, rn: int) -> dict[tuple[str, ...], int]:
    """Vote-triple pattern counts for one model.

    Given final-label counts (fp, fs, fn) and raw vote counts
    (rp, rs, rn) with rp + rs + rn = 3 (fp + fs + fn), decompose into
    majority-consistent patterns. Raises when the marginals are not
    jointly achievable.
    """
    if rp + rs + rn != 3 * (fp + fs + fn):
        raise ValueError("raw counts must total three times the final counts")
    ep = rp - 2 * fp  # raw positives beyond the minimum two per final-P patch
    en = rn - 2 * fn
    if ep < 0 or en < 0:
        raise ValueError("raw counts below the majority minimum")
    n3 = min(fn, en)
    rem = en - n3
    p_budget = min(fp, ep + rem)
    if ep + rem - p_budget > fs:
        raise ValueError("similar patches cannot absorb the vote excess")
    p3 = min(ep, p_budget)
    p2n = p_budget - p3
    if p2n > rem:
        raise ValueError("negative vote excess exceeds the plan capacity")
    s2p = ep - p3
    s2n = rem - p2n
    patterns = {
        ("Positive", "Positive", "Positive"): p3,
        ("Positive", "Positive", "Similar"): fp - p3 - p2n,
        ("Positive", "Positive", "Negative"): p2n,
        ("Similar", "Similar", "Similar"): fs - s2p - s2n,
        ("Similar", "Similar", "Positive"): s2p,
        ("Similar", "Similar", "Negative"): s2n,
        ("Negative", "Negative", "Negative"): n3,
        ("Negative", "Negative", "Similar"): fn - n3,
    }
    if any(v < 0 for v in patterns.values()):
        raise ValueError(f"infeasible marginals: {patterns}")
    return patterns


def _assign_positive_models(k_by_group: dict[str, int], quotas: dict[int, int]) -> dict[str, list[int]]:
    """Pick which models are Positive in each group, meeting per-model quotas."""
    remaining = dict(quotas)
    heap = [(-n, m) for m, n in remaining.items()]
    heapq.heapify(heap)
    chosen: dict[str, list[int]] = {}
    for gid in sorted(k_by_group, key=lambda g: (-k_by_group[g], g)):
        k = k_by_group[gid]
        picked = []
        for _ in range(k):
            neg_n, m = heapq.heappop(heap)
            if neg_n >= 0:
                raise ValueError("positive quotas exhausted before covering all groups")
            picked.append((neg_n, m))
        chosen[gid] = sorted(m for _, m in picked)
        for neg_n, m in picked:
            heapq.heappush(heap, (neg_n + 1, m))
    if any(n < 0 for n, _ in heap):
        raise ValueError("positive quotas not fully consumed")
    return chosen


def build_vote_plan(group_ids: list[str], model_ids: list[int],
                    raw_marginals: LabelMarginals, final_marginals: LabelMarginals,
                    positive_histogram: dict[int, int],
                    seed: int = 0) -> dict[tuple[str, int], tuple[str, str, str]]:
    """Vote triples per (group, model) hitting all three marginal tables.

    The histogram fixes how many models are Positive in each group; the
    final marginals fix which, plus the Similar/Negative split; the raw
    marginals fix the vote patterns inside each final class.
    """
    if sum(positive_histogram.values()) != len(group_ids):
        raise ValueError("histogram does not cover every group exactly once")
    rng = spawn_rng(seed, "vote-plan")
    shuffled = list(group_ids)
    rng.shuffle(shuffled)
    k_by_group: dict[str, int] = {}
    cursor = 0
    for k in sorted(positive_histogram):
        for _ in range(positive_histogram[k]):
            k_by_group[shuffled[cursor]] = k
            cursor += 1
    pos_quotas = {m: final_marginals.counts["Positive"][m] for m in model_ids}
    if sum(pos_quotas.values()) != sum(k * n for k, n in positive_histogram.items()):
        raise ValueError("positive totals disagree between histogram and final marginals")
    positive_models = _assign_positive_models(k_by_group, pos_quotas)

    plan: dict[tuple[str, int], tuple[str, str, str]] = {}
    ordered_groups = sorted(group_ids)
    for m in model_ids:
        fp, fs, fn = final_marginals.for_model(m)
        rp, rs, rn = raw_marginals.for_model(m)
        patterns = _pattern_counts(fp, fs, fn, rp, rs, rn)
        pos_slots = [g for g in ordered_groups if m in positive_models[g]]
        other_slots = [g for g in ordered_groups if m not in positive_models[g]]
        if len(pos_slots) != fp or len(other_slots) != fs + fn:
            raise ValueError(f"model {m}: slot counts disagree with final marginals")
        neg_slots = other_slots[:fn]
        sim_slots = other_slots[fn:]
        queues = {
            "Positive": (pos_slots, [p for p in patterns if p.count("Positive") >= 2]),
            "Similar": (sim_slots, [p for p in patterns if p.count("Similar") >= 2
                                    or len(set(p)) == 3]),
            "Negative": (neg_slots, [p for p in patterns if p.count("Negative") >= 2]),
        }
        for _, (slots, pattern_keys) in queues.items():
            cursor = 0
            for key in pattern_keys:
                for _ in range(patterns[key]):
                    gid = slots[cursor]
                    cursor += 1
                    votes = list(key)
                    rng.shuffle(votes)
                    plan[(gid, m)] = tuple(votes)
            if cursor != len(slots):
                raise ValueError(f"model {m}: pattern counts do not fill the slots")
    return plan


def records_from_plan(plan: dict[tuple[str, int], tuple[str, str, str]],
                      assignments: dict[str, list[str]], model_ids: list[int],
                      elapsed_ms: int = 20000) -> list[AnnotationRecord]:
    """Materialize a vote plan as annotation records.

    ``assignments`` maps group_id to its (three) annotators in vote
    order. Display order and timestamps are synthesized the same way a
    simulated campaign would produce them.
    """
    clock = LogicalClock()
    records: list[AnnotationRecord] = []
    for gid in sorted(assignments):
        annotators = assignments[gid]
        for k, aid in enumerate(annotators):
            stamp = clock()
            order = tuple(model_ids)
            for m in model_ids:
                records.append(AnnotationRecord(
                    group_id=gid, variant_id=m, annotator_id=aid,
                    label=plan[(gid, m)][k], elapsed_ms=elapsed_ms,
                    display_order=order, submitted_at=stamp,
                ))
    return records
