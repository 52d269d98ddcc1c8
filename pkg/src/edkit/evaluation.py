"""Measurement protocol: inKB micro F1, averages, frequency classes, McNemar.

One prediction record per instance. Abstentions (predicted is None) lower
recall but not precision; precision over zero predictions is defined as 0
so aggregates stay total. Frequency classes are non-exclusive sets (an
unseen entity necessarily makes an unseen pair), reported independently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .datasets import TrainIndex, collapse_whitespace
from .errors import (
    EmptyRecordSetError,
    MisalignedRecordsError,
    MissingGoldError,
    UnknownDatasetError,
)
from .types import EDInstance

MFC = "MFC"
LFC = "LFC"
UE = "UE"
UEM = "UEM"
UM = "UM"
FREQUENCY_CLASSES = (MFC, LFC, UE, UEM, UM)


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    instance_id: str
    predicted: str | None
    gold: str
    correct: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "correct", self.predicted is not None and self.predicted == self.gold)


def build_records(
    predictions: Mapping[str, str | None], instances: Iterable[EDInstance]
) -> list[PredictionRecord]:
    """Join a prediction map with gold instances; id sets must coincide."""
    records = []
    seen = set()
    for inst in instances:
        if inst.gold is None:
            raise MissingGoldError(f"{inst.id}: cannot score an instance without gold")
        if inst.id not in predictions:
            raise MisalignedRecordsError(f"no prediction for instance {inst.id}")
        seen.add(inst.id)
        records.append(PredictionRecord(inst.id, predictions[inst.id], inst.gold))
    extra = set(predictions) - seen
    if extra:
        raise MisalignedRecordsError(f"{len(extra)} prediction(s) without instances, e.g. {sorted(extra)[:3]}")
    return records


def micro_f1(records: Sequence[PredictionRecord]) -> tuple[float, float, float]:
    """(precision, recall, f1); precision counts only records with a prediction."""
    if not records:
        raise EmptyRecordSetError("micro_f1 over zero records")
    correct = sum(1 for r in records if r.correct)
    predicted = sum(1 for r in records if r.predicted is not None)
    precision = correct / predicted if predicted else 0.0
    recall = correct / len(records)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def aggregate(
    per_dataset: Sequence[tuple[str, float]], ood_names: Iterable[str] = ()
) -> tuple[float, float | None]:
    """Unweighted means over all datasets and over the out-of-domain subset."""
    if not per_dataset:
        raise EmptyRecordSetError("aggregate over zero datasets")
    names = [name for name, _ in per_dataset]
    ood = set(ood_names)
    unknown = ood - set(names)
    if unknown:
        raise UnknownDatasetError(f"not among scored datasets: {sorted(unknown)}")
    avg = sum(f1 for _, f1 in per_dataset) / len(per_dataset)
    ood_scores = [f1 for name, f1 in per_dataset if name in ood]
    avg_ood = sum(ood_scores) / len(ood_scores) if ood_scores else None
    return avg, avg_ood


def classify(instance: EDInstance, index: TrainIndex, lfc_scope: str = "mention") -> set[str]:
    """Frequency classes of one test instance against the training index.

    MFC: mention seen, gold is its most frequent training entity.
    LFC: mention seen, gold seen (for this mention by default, anywhere in
         training with lfc_scope="global") but not the most frequent.
    UE/UEM/UM: gold entity / (mention, gold) pair / mention surface unseen.
    Memberships are computed independently and may overlap.
    """
    if instance.gold is None:
        raise MissingGoldError(f"{instance.id}: classification needs a gold entity")
    if lfc_scope not in ("mention", "global"):
        raise ValueError(f"unknown lfc_scope {lfc_scope!r}")
    gold = instance.gold
    surface = collapse_whitespace(instance.mention_text)
    classes: set[str] = set()
    if index.seen_mention(surface):
        if gold == index.most_frequent(surface):
            classes.add(MFC)
        else:
            gold_seen = (
                index.seen_pair(surface, gold) if lfc_scope == "mention" else index.seen_entity(gold)
            )
            if gold_seen:
                classes.add(LFC)
    else:
        classes.add(UM)
    if not index.seen_entity(gold):
        classes.add(UE)
    if not index.seen_pair(surface, gold):
        classes.add(UEM)
    return classes


@dataclass(frozen=True, slots=True)
class McNemarResult:
    b: int
    c: int
    statistic: float
    p_value: float
    significant: bool
    method: str
    alpha: float

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "c": self.c,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "significant": self.significant,
            "method": self.method,
            "alpha": self.alpha,
        }


MCNEMAR_METHODS = ("chi2-cc", "exact-binomial")


def mcnemar(
    a_records: Sequence[PredictionRecord],
    b_records: Sequence[PredictionRecord],
    method: str = "chi2-cc",
    alpha: float = 0.01,
) -> McNemarResult:
    """Paired significance test on the two systems' discordant predictions.

    chi2-cc is the continuity-corrected (|b-c|-1)^2/(b+c) statistic against
    the 1-dof chi-square survival function (erfc(sqrt(x/2)) exactly);
    exact-binomial is the two-sided binomial tail, better for small counts.
    """
    if method not in MCNEMAR_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {MCNEMAR_METHODS}")
    a_by_id = {r.instance_id: r.correct for r in a_records}
    b_by_id = {r.instance_id: r.correct for r in b_records}
    if len(a_by_id) != len(a_records) or len(b_by_id) != len(b_records):
        raise MisalignedRecordsError("duplicate instance ids within a record set")
    if a_by_id.keys() != b_by_id.keys():
        raise MisalignedRecordsError("record sets cover different instance ids")
    b_count = sum(1 for i, a_ok in a_by_id.items() if a_ok and not b_by_id[i])
    c_count = sum(1 for i, a_ok in a_by_id.items() if not a_ok and b_by_id[i])
    n = b_count + c_count
    if method == "chi2-cc":
        if n == 0:
            statistic, p = 0.0, 1.0
        else:
            statistic = (abs(b_count - c_count) - 1) ** 2 / n
            p = math.erfc(math.sqrt(statistic / 2))
    else:
        statistic = float(min(b_count, c_count))
        if n == 0:
            p = 1.0
        else:
            tail = sum(math.comb(n, k) for k in range(min(b_count, c_count) + 1))
            p = min(1.0, 2 * tail / 2**n)
    return McNemarResult(b_count, c_count, statistic, p, p < alpha, method, alpha)


@dataclass(frozen=True, slots=True)
class DatasetScore:
    name: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True, slots=True)
class EvaluationReport:
    datasets: tuple[DatasetScore, ...]
    avg: float
    avg_ood: float | None

    def to_dict(self) -> dict:
        return {
            "datasets": [
                {"name": d.name, "precision": d.precision, "recall": d.recall, "f1": d.f1}
                for d in self.datasets
            ],
            "avg": self.avg,
            "avg_ood": self.avg_ood,
        }


def evaluation_report(
    records_by_dataset: Sequence[tuple[str, Sequence[PredictionRecord]]],
    ood_names: Iterable[str] = (),
) -> EvaluationReport:
    scores = []
    for name, records in records_by_dataset:
        precision, recall, f1 = micro_f1(records)
        scores.append(DatasetScore(name, precision, recall, f1))
    avg, avg_ood = aggregate([(s.name, s.f1) for s in scores], ood_names)
    return EvaluationReport(tuple(scores), avg, avg_ood)


@dataclass(frozen=True, slots=True)
class ClassScore:
    name: str
    count: int
    accuracy: float | None


@dataclass(frozen=True, slots=True)
class FrequencyClassReport:
    classes: tuple[ClassScore, ...]

    def to_dict(self) -> dict:
        return {
            "classes": [
                {"name": c.name, "count": c.count, "accuracy": c.accuracy} for c in self.classes
            ]
        }


def frequency_class_report(
    records: Sequence[PredictionRecord],
    instances: Sequence[EDInstance],
    index: TrainIndex,
    lfc_scope: str = "mention",
) -> FrequencyClassReport:
    """Accuracy per frequency class; instances may count in several classes."""
    by_id = {r.instance_id: r for r in records}
    counts = {name: 0 for name in FREQUENCY_CLASSES}
    hits = {name: 0 for name in FREQUENCY_CLASSES}
    for inst in instances:
        record = by_id.get(inst.id)
        if record is None:
            raise MisalignedRecordsError(f"no prediction record for instance {inst.id}")
        for name in classify(inst, index, lfc_scope):
            counts[name] += 1
            if record.correct:
                hits[name] += 1
    classes = tuple(
        ClassScore(name, counts[name], hits[name] / counts[name] if counts[name] else None)
        for name in FREQUENCY_CLASSES
    )
    return FrequencyClassReport(classes)


def to_json(report) -> str:
    """Stable JSON for any report object exposing to_dict()."""
    return json.dumps(report.to_dict(), sort_keys=True, ensure_ascii=False)


def render_evaluation_text(report: EvaluationReport) -> str:
    width = max([len("dataset"), *(len(d.name) for d in report.datasets)])
    lines = [f"{'dataset':<{width}}  {'P':>7}  {'R':>7}  {'F1':>7}"]
    for d in report.datasets:
        lines.append(f"{d.name:<{width}}  {d.precision:7.4f}  {d.recall:7.4f}  {d.f1:7.4f}")
    lines.append(f"{'Avg':<{width}}  {'':7}  {'':7}  {report.avg:7.4f}")
    if report.avg_ood is not None:
        lines.append(f"{'Avg_OOD':<{width}}  {'':7}  {'':7}  {report.avg_ood:7.4f}")
    return "\n".join(lines)


def render_frequency_text(report: FrequencyClassReport) -> str:
    lines = [f"{'class':<5}  {'count':>7}  {'accuracy':>8}"]
    for c in report.classes:
        acc = f"{c.accuracy:8.4f}" if c.accuracy is not None else f"{'-':>8}"
        lines.append(f"{c.name:<5}  {c.count:7d}  {acc}")
    return "\n".join(lines)


def render_mcnemar_text(result: McNemarResult) -> str:
    verdict = "significant" if result.significant else "not significant"
    return (
        f"b={result.b} c={result.c} statistic={result.statistic:.4f} "
        f"p={result.p_value:.6f} ({result.method}, alpha={result.alpha}): {verdict}"
    )
