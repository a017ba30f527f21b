"""Annotation campaign state: assignments, task serving, durable records.

Every group is labeled by a fixed number of distinct annotators (three
by default) with balanced per-annotator load. Submissions land in an
append-only JSONL log, four records at a time; replaying the log
reconstructs the campaign state exactly. Display permutations are
derived from the campaign seed, so a restart (or a browser refresh)
re-serves the identical pending task.
"""

from __future__ import annotations

import heapq
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable

from .seeding import spawn_rng

LABELS = ("Positive", "Similar", "Negative")


class CampaignError(Exception):
    """Base class for campaign contract violations."""


class UnknownAnnotatorError(CampaignError):
    pass


class DuplicateSubmissionError(CampaignError):
    pass


class InvalidSubmissionError(CampaignError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    group_id: str
    variant_id: int
    annotator_id: str
    label: str
    elapsed_ms: int
    display_order: tuple[int, ...]
    submitted_at: str  # ISO timestamp; masked by determinism diffs

    def to_obj(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "display_order": list(self.display_order),
            "elapsed_ms": self.elapsed_ms,
            "group_id": self.group_id,
            "label": self.label,
            "submitted_at": self.submitted_at,
            "variant_id": self.variant_id,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "AnnotationRecord":
        return cls(
            group_id=obj["group_id"],
            variant_id=int(obj["variant_id"]),
            annotator_id=obj["annotator_id"],
            label=obj["label"],
            elapsed_ms=int(obj["elapsed_ms"]),
            display_order=tuple(obj["display_order"]),
            submitted_at=obj["submitted_at"],
        )


def write_records(path, records: Iterable[AnnotationRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_obj(), sort_keys=True) + "\n")


def read_records(path) -> list[AnnotationRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(AnnotationRecord.from_obj(json.loads(line)))
    return records


@dataclass
class Assignment:
    annotator_id: str
    group_ids: list[str] = field(default_factory=list)


def create_assignments(group_ids: list[str], annotator_ids: list[str],
                       per_group: int = 3, seed: int = 0) -> list[Assignment]:
    """Cover every group ``per_group`` times by distinct annotators.

    Greedy least-loaded assignment keeps the load spread at most 1.
    Group order and tie-breaking are shuffled by ``seed``, so the result
    is deterministic for a given seed.
    """
    if len(annotator_ids) < per_group:
        raise ValueError(
            f"need at least {per_group} annotators, got {len(annotator_ids)}"
        )
    if len(set(annotator_ids)) != len(annotator_ids):
        raise ValueError("annotator ids must be unique")
    rng = spawn_rng(seed, "assignments")
    shuffled_groups = list(group_ids)
    rng.shuffle(shuffled_groups)
    tie_break = rng.permutation(len(annotator_ids))
    heap = [(0, int(tie_break[i]), annotator_ids[i]) for i in range(len(annotator_ids))]
    heapq.heapify(heap)
    lists: dict[str, list[str]] = {a: [] for a in annotator_ids}
    for gid in shuffled_groups:
        picked = [heapq.heappop(heap) for _ in range(per_group)]
        for load, tb, annotator in picked:
            lists[annotator].append(gid)
            heapq.heappush(heap, (load + 1, tb, annotator))
    return [Assignment(annotator_id=a, group_ids=lists[a]) for a in annotator_ids]


@dataclass(frozen=True)
class GroupEntry:
    """What the campaign needs to serve one group."""

    group_id: str
    original_ref: str
    variant_refs: dict[int, str]  # model id -> patch reference


@dataclass(frozen=True)
class Task:
    group_id: str
    original_ref: str
    slots: tuple[tuple[int, str], ...]  # (variant_id, ref) in display order

    @property
    def display_order(self) -> tuple[int, ...]:
        return tuple(variant_id for variant_id, _ in self.slots)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Campaign:
    """Single campaign with static assignments and an append-only log.

    ``clock`` supplies the ``submitted_at`` strings; simulations pass a
    logical clock so two runs of the same seed produce byte-identical
    logs.
    """

    def __init__(self, groups: list[GroupEntry], annotator_ids: list[str],
                 per_group: int = 3, seed: int = 0,
                 log_path: str | Path | None = None,
                 clock: Callable[[], str] = _utc_now):
        if len(set(g.group_id for g in groups)) != len(groups):
            raise ValueError("group ids must be unique")
        self.groups = {g.group_id: g for g in groups}
        self.per_group = per_group
        self.seed = seed
        self.clock = clock
        self.assignments = {
            a.annotator_id: a
            for a in create_assignments([g.group_id for g in groups], annotator_ids,
                                        per_group=per_group, seed=seed)
        }
        self.records: list[AnnotationRecord] = []
        self._done: dict[str, set[str]] = {a: set() for a in annotator_ids}
        self._elapsed: list[int] = []
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        self._log_handle = None
        if self._log_path is not None:
            if self._log_path.exists():
                for rec in read_records(self._log_path):
                    self._absorb(rec)
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_handle = open(self._log_path, "a", encoding="utf-8")

    def close(self) -> None:
        if self._log_handle is not None:
            self._log_handle.close()
            self._log_handle = None

    def _absorb(self, rec: AnnotationRecord) -> None:
        self.records.append(rec)
        self._done.setdefault(rec.annotator_id, set())
        if rec.variant_id == min(self.groups[rec.group_id].variant_refs):
            # One submission covers 4 records; count elapsed once.
            self._done[rec.annotator_id].add(rec.group_id)
            self._elapsed.append(rec.elapsed_ms)

    def display_permutation(self, annotator_id: str, group_id: str) -> tuple[int, ...]:
        """Stable per-(annotator, group) variant ordering."""
        variant_ids = sorted(self.groups[group_id].variant_refs)
        rng = spawn_rng(self.seed, "display", annotator_id, group_id)
        return tuple(variant_ids[i] for i in rng.permutation(len(variant_ids)))

    def next_task(self, annotator_id: str) -> Task | None:
        """The annotator's pending task, or None when the list is done.

        Calling repeatedly without submitting returns the same group
        with the same permutation.
        """
        with self._lock:
            if annotator_id not in self.assignments:
                raise UnknownAnnotatorError(f"unknown annotator: {annotator_id}")
            done = self._done[annotator_id]
            for gid in self.assignments[annotator_id].group_ids:
                if gid not in done:
                    group = self.groups[gid]
                    order = self.display_permutation(annotator_id, gid)
                    slots = tuple((vid, group.variant_refs[vid]) for vid in order)
                    return Task(group_id=gid, original_ref=group.original_ref, slots=slots)
            return None

    def submit_labels(self, annotator_id: str, group_id: str,
                      labels: dict[int, str], elapsed_ms: int) -> dict:
        """Persist one group's four labels atomically."""
        with self._lock:
            if annotator_id not in self.assignments:
                raise UnknownAnnotatorError(f"unknown annotator: {annotator_id}")
            if group_id not in self.groups:
                raise InvalidSubmissionError(f"unknown group: {group_id}")
            if group_id not in self.assignments[annotator_id].group_ids:
                raise InvalidSubmissionError(
                    f"group {group_id} is not assigned to {annotator_id}"
                )
            if group_id in self._done[annotator_id]:
                raise DuplicateSubmissionError(
                    f"{annotator_id} already labeled group {group_id}"
                )
            pending = None
            for gid in self.assignments[annotator_id].group_ids:
                if gid not in self._done[annotator_id]:
                    pending = gid
                    break
            if group_id != pending:
                raise InvalidSubmissionError(
                    f"group {group_id} is not the pending task (expected {pending})"
                )
            variant_ids = sorted(self.groups[group_id].variant_refs)
            if sorted(labels) != variant_ids:
                raise InvalidSubmissionError(
                    f"labels must cover exactly variants {variant_ids}, got {sorted(labels)}"
                )
            for vid, label in labels.items():
                if label not in LABELS:
                    raise InvalidSubmissionError(
                        f"invalid label {label!r} for variant {vid}"
                    )
            if elapsed_ms < 0:
                raise InvalidSubmissionError("elapsed_ms must be >= 0")
            order = self.display_permutation(annotator_id, group_id)
            stamp = self.clock()
            batch = [
                AnnotationRecord(
                    group_id=group_id,
                    variant_id=vid,
                    annotator_id=annotator_id,
                    label=labels[vid],
                    elapsed_ms=int(elapsed_ms),
                    display_order=order,
                    submitted_at=stamp,
                )
                for vid in variant_ids
            ]
            if self._log_handle is not None:
                payload = "".join(
                    json.dumps(rec.to_obj(), sort_keys=True) + "\n" for rec in batch
                )
                self._log_handle.write(payload)
                self._log_handle.flush()
            for rec in batch:
                self.records.append(rec)
            self._done[annotator_id].add(group_id)
            self._elapsed.append(int(elapsed_ms))
            return self._progress_locked(annotator_id)

    def _progress_locked(self, annotator_id: str | None) -> dict:
        if annotator_id is None:
            assigned = sum(len(a.group_ids) for a in self.assignments.values())
            labeled = sum(len(done) for done in self._done.values())
            elapsed = self._elapsed
        else:
            if annotator_id not in self.assignments:
                raise UnknownAnnotatorError(f"unknown annotator: {annotator_id}")
            assigned = len(self.assignments[annotator_id].group_ids)
            labeled = len(self._done[annotator_id])
            done = self._done[annotator_id]
            elapsed = []
            seen = set()
            for rec in self.records:
                key = (rec.annotator_id, rec.group_id)
                if rec.annotator_id == annotator_id and rec.group_id in done and key not in seen:
                    seen.add(key)
                    elapsed.append(rec.elapsed_ms)
        mean_elapsed = float(sum(elapsed)) / len(elapsed) if elapsed else 0.0
        return {"labeled": labeled, "remaining": assigned - labeled,
                "mean_elapsed_ms": mean_elapsed}

    def progress(self, annotator_id: str | None = None) -> dict:
        with self._lock:
            return self._progress_locked(annotator_id)


def verify_coverage(records: list[AnnotationRecord], group_ids: list[str],
                    variant_ids: list[int], per_group: int = 3) -> None:
    """Raise unless every (group, variant) has per_group records from
    distinct annotators."""
    seen: dict[tuple[str, int], list[str]] = {}
    for rec in records:
        seen.setdefault((rec.group_id, rec.variant_id), []).append(rec.annotator_id)
    for gid in group_ids:
        for vid in variant_ids:
            annotators = seen.get((gid, vid), [])
            if len(annotators) != per_group or len(set(annotators)) != per_group:
                raise CampaignError(
                    f"coverage violated for group {gid} variant {vid}: {annotators}"
                )
