"""Cohort splitting, prediction scoring, and the experiment harnesses.

Scores predictions against dual administrations with exact match accuracy
(EMA, on the 0..4 scale, 20% random-guess floor), mean absolute error, and
binary accuracy at thresholds 0..3. Includes the cross-inventory
evaluation pipeline, a within-inventory upper-bound estimator, an ordinary
least squares baseline, external-prediction scoring, and stratified
effect-size comparisons (Cohen's d with Welch's t-test).
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .crosswalk import CrosswalkModel, convert_participant
from .errors import DisjointnessError, FormatError, ValidationError
from .inventory import Cohort, Inventory, deduplicate, enforce_completeness
from .numerics import fit_linear, round_half_down_clip

log = logging.getLogger(__name__)

RANDOM_GUESS_EMA = 20.0  # five equiprobable severity levels
BINARY_THRESHOLDS = (0, 1, 2, 3)
AGE_CUTOFF = 65.0

Cell = tuple[int, int]  # (predicted, actual)


@dataclass(frozen=True)
class SplitPlan:
    """Participant-level train/test partition, reproducible by seed."""

    seed: int
    ratio: float
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "train_ids", tuple(self.train_ids))
        object.__setattr__(self, "test_ids", tuple(self.test_ids))
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise DisjointnessError(
                f"participants in both train and test sets: {sorted(overlap)[:5]}"
            )


def split(cohort: Cohort, ratio: float = 0.5, seed: int = 0) -> SplitPlan:
    """Randomly partition participants into disjoint train/test sets.

    A deterministic function of the participant id set (not file order),
    the ratio, and the seed. floor(n * ratio) participants train; the
    remainder test.
    """
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"ratio must be in (0, 1), got {ratio}")
    ids = sorted(cohort.participant_ids())
    if len(ids) < 2:
        raise ValidationError(f"need at least 2 participants to split, got {len(ids)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_train = int(math.floor(len(ids) * ratio))
    train = tuple(ids[i] for i in sorted(order[:n_train]))
    test = tuple(ids[i] for i in sorted(order[n_train:]))
    return SplitPlan(seed=seed, ratio=ratio, train_ids=train, test_ids=test)


def subset_cohort(cohort: Cohort, participant_ids: Iterable[str]) -> Cohort:
    wanted = set(participant_ids)
    return Cohort(
        records=tuple(r for r in cohort.records if r.participant_id in wanted),
        provenance=cohort.provenance,
    )


def ema(cells: Sequence[Cell]) -> float:
    """Exact match accuracy: percentage of predictions equal to the truth."""
    if not cells:
        raise ValidationError("ema of an empty cell set")
    hits = sum(1 for pred, actual in cells if pred == actual)
    return 100.0 * hits / len(cells)


def mae(cells: Sequence[Cell]) -> float:
    if not cells:
        raise ValidationError("mae of an empty cell set")
    return sum(abs(pred - actual) for pred, actual in cells) / len(cells)


def binary_accuracy(cells: Sequence[Cell], threshold: int) -> float:
    """Agreement percentage after binarizing both sides as score > threshold."""
    if not cells:
        raise ValidationError("binary accuracy of an empty cell set")
    if threshold not in BINARY_THRESHOLDS:
        raise ValidationError(f"threshold must be one of {BINARY_THRESHOLDS}")
    hits = sum(1 for pred, actual in cells if (pred > threshold) == (actual > threshold))
    return 100.0 * hits / len(cells)


class ItemMetrics(NamedTuple):
    ema: float
    mae: float
    acc_t0: float
    acc_t1: float
    acc_t2: float
    acc_t3: float
    n: int


class ParticipantMetrics(NamedTuple):
    ema: float
    mae: float
    n: int


@dataclass(frozen=True)
class PredictionSet:
    """Aligned predicted vs actual target scores for a set of participants."""

    source_inventory_id: str
    target_inventory_id: str
    predictions: Mapping[str, Mapping[str, int]]
    actuals: Mapping[str, Mapping[str, int]]
    model_tag: str = ""
    demographics: Mapping[str, tuple[float | None, str]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "predictions", {p: dict(m) for p, m in self.predictions.items()})
        object.__setattr__(self, "actuals", {p: dict(m) for p, m in self.actuals.items()})
        object.__setattr__(self, "demographics", dict(self.demographics))
        if set(self.predictions.keys()) != set(self.actuals.keys()):
            raise ValidationError("prediction and actual participant sets differ")
        for pid, pred in self.predictions.items():
            actual = self.actuals[pid]
            if set(pred.keys()) != set(actual.keys()):
                raise ValidationError(f"cell mismatch for participant {pid!r}")
            for item, value in list(pred.items()) + list(actual.items()):
                if value not in (0, 1, 2, 3, 4):
                    raise ValidationError(
                        f"score {value!r} outside 0..4 for ({pid!r}, {item!r})"
                    )

    def cells(self) -> list[tuple[str, str, int, int]]:
        out = []
        for pid in self.predictions:
            pred = self.predictions[pid]
            actual = self.actuals[pid]
            for item in pred:
                out.append((pid, item, pred[item], actual[item]))
        return out

    def participant_cells(self, pid: str) -> list[Cell]:
        pred = self.predictions[pid]
        actual = self.actuals[pid]
        return [(pred[item], actual[item]) for item in pred]


@dataclass(frozen=True)
class MetricReport:
    ema: float
    mae: float
    binary: Mapping[int, float]
    n_cells: int
    n_participants: int
    per_item: Mapping[str, ItemMetrics]
    per_participant: Mapping[str, ParticipantMetrics]
    model_tag: str = ""
    random_guess_ema: float = RANDOM_GUESS_EMA

    def __post_init__(self):
        object.__setattr__(self, "binary", dict(self.binary))
        object.__setattr__(self, "per_item", dict(self.per_item))
        object.__setattr__(self, "per_participant", dict(self.per_participant))

    def to_dict(self) -> dict:
        return {
            "model_tag": self.model_tag,
            "ema": self.ema,
            "mae": self.mae,
            "binary_accuracy": {f"t{t}": v for t, v in sorted(self.binary.items())},
            "n_cells": self.n_cells,
            "n_participants": self.n_participants,
            "random_guess_ema": self.random_guess_ema,
            "per_item": {
                item: {
                    "ema": m.ema, "mae": m.mae,
                    "acc_t0": m.acc_t0, "acc_t1": m.acc_t1,
                    "acc_t2": m.acc_t2, "acc_t3": m.acc_t3, "n": m.n,
                }
                for item, m in self.per_item.items()
            },
            "per_participant": {
                pid: {"ema": m.ema, "mae": m.mae, "n": m.n}
                for pid, m in self.per_participant.items()
            },
        }

    def per_item_csv(self) -> str:
        lines = ["item_id,ema,mae,acc_t0,acc_t1,acc_t2,acc_t3,n"]
        for item in sorted(self.per_item):
            m = self.per_item[item]
            lines.append(
                f"{item},{m.ema:.4f},{m.mae:.4f},{m.acc_t0:.4f},"
                f"{m.acc_t1:.4f},{m.acc_t2:.4f},{m.acc_t3:.4f},{m.n}"
            )
        return "\n".join(lines) + "\n"


def metric_report(pred_set: PredictionSet) -> MetricReport:
    """Aggregate a prediction set into overall, per-item, and per-participant metrics."""
    all_cells = [(p, a) for _, _, p, a in pred_set.cells()]
    if not all_cells:
        raise ValidationError("empty prediction set")

    by_item: dict[str, list[Cell]] = {}
    by_pid: dict[str, list[Cell]] = {}
    for pid, item, pred, actual in pred_set.cells():
        by_item.setdefault(item, []).append((pred, actual))
        by_pid.setdefault(pid, []).append((pred, actual))

    per_item = {
        item: ItemMetrics(
            ema(cells), mae(cells),
            binary_accuracy(cells, 0), binary_accuracy(cells, 1),
            binary_accuracy(cells, 2), binary_accuracy(cells, 3),
            len(cells),
        )
        for item, cells in by_item.items()
    }
    per_participant = {
        pid: ParticipantMetrics(ema(cells), mae(cells), len(cells))
        for pid, cells in by_pid.items()
    }
    return MetricReport(
        ema=ema(all_cells),
        mae=mae(all_cells),
        binary={t: binary_accuracy(all_cells, t) for t in BINARY_THRESHOLDS},
        n_cells=len(all_cells),
        n_participants=len(by_pid),
        per_item=per_item,
        per_participant=per_participant,
        model_tag=pred_set.model_tag,
    )


def _collect_predictions(
    predict: Callable[[Mapping[str, int]], Mapping[str, int]],
    cohort: Cohort,
    participant_ids: Sequence[str],
    source_inventory_id: str,
    target_inventory_id: str,
    model_tag: str,
) -> PredictionSet:
    predictions = {}
    actuals = {}
    demographics = {}
    for pid in sorted(participant_ids):
        rec = cohort.record(pid)
        source = rec.responses_for(source_inventory_id)
        actual = rec.responses_for(target_inventory_id)
        if source is None or actual is None:
            raise ValidationError(
                f"participant {pid!r} is not dually administered "
                f"({source_inventory_id!r} and {target_inventory_id!r})"
            )
        predictions[pid] = dict(predict(source))
        actuals[pid] = dict(actual)
        demographics[pid] = (rec.age, rec.sex)
    return PredictionSet(
        source_inventory_id=source_inventory_id,
        target_inventory_id=target_inventory_id,
        predictions=predictions,
        actuals=actuals,
        model_tag=model_tag,
        demographics=demographics,
    )


def predict_crosswalk(
    model: CrosswalkModel,
    cohort: Cohort,
    participant_ids: Sequence[str],
    mode: str = "deterministic",
    seed: int | None = None,
) -> PredictionSet:
    """Run the crosswalk over participants' source responses.

    In stochastic mode one generator is consumed across participants in
    sorted participant-id order, so results are reproducible by seed.
    """
    rng = np.random.default_rng(seed) if mode == "stochastic" else None

    def predict(source: Mapping[str, int]) -> Mapping[str, int]:
        return convert_participant(model, source, mode=mode, rng=rng)

    return _collect_predictions(
        predict, cohort, participant_ids,
        model.source_inventory_id, model.target_inventory_id,
        model_tag=f"crosswalk[{model.backend_tag}]",
    )


def evaluate_crosswalk(
    model: CrosswalkModel,
    cohort: Cohort,
    plan: SplitPlan,
    mode: str = "deterministic",
    seed: int | None = None,
) -> MetricReport:
    """Score the crosswalk on held-out test participants.

    Raises DisjointnessError if any participant appears in both the
    training/calibration and test sets; only source-inventory responses
    are consumed as inputs.
    """
    overlap = set(plan.train_ids) & set(plan.test_ids)
    if overlap:
        raise DisjointnessError(
            f"participants in both train and test sets: {sorted(overlap)[:5]}"
        )
    if not plan.test_ids:
        raise ValidationError("empty test set")
    pred_set = predict_crosswalk(model, cohort, plan.test_ids, mode=mode, seed=seed)
    return metric_report(pred_set)


@dataclass(frozen=True)
class ExperimentResult:
    model: CrosswalkModel
    plan: SplitPlan
    prediction_set: PredictionSet
    report: MetricReport


def run_crosswalk_experiment(
    cohort: Cohort,
    source_inventory: Inventory,
    target_inventory: Inventory,
    embeddings_source,
    embeddings_target,
    tau: float = 0.6,
    ratio: float = 0.5,
    seed: int = 0,
    mode: str = "deterministic",
    conversion_seed: int | None = None,
) -> ExperimentResult:
    """Full pipeline: dedup, dual-completeness filter, split, build, evaluate.

    Calibrations and fallback fits see only training participants; the
    report covers only held-out test participants.
    """
    from .crosswalk import build_model
    from .embedding import similarity_matrix

    deduped = deduplicate(cohort)
    dual, _ = enforce_completeness(deduped, source_inventory)
    dual, _ = enforce_completeness(dual, target_inventory)
    plan = split(dual, ratio=ratio, seed=seed)
    train = subset_cohort(dual, plan.train_ids)
    sims = similarity_matrix(embeddings_source, embeddings_target)
    model = build_model(
        sims, train, source_inventory, target_inventory,
        tau=tau, backend_tag=embeddings_source.backend_tag,
    )
    pred_set = predict_crosswalk(model, dual, plan.test_ids, mode=mode, seed=conversion_seed)
    report = metric_report(pred_set)
    return ExperimentResult(model=model, plan=plan, prediction_set=pred_set, report=report)


@dataclass(frozen=True)
class WithinInventoryCurve:
    inventory_id: str
    rows: tuple[tuple[int, float], ...]  # (k regressors, mean EMA %)
    all_items_ema: float
    all_items_per_item: Mapping[str, float]
    n_train: int
    n_test: int
    repetitions: int

    def __post_init__(self):
        object.__setattr__(self, "all_items_per_item", dict(self.all_items_per_item))

    def to_csv(self) -> str:
        lines = ["k,mean_ema"]
        for k, value in self.rows:
            lines.append(f"{k},{value:.4f}")
        lines.append(f"all,{self.all_items_ema:.4f}")
        return "\n".join(lines) + "\n"


def within_inventory_curve(
    cohort: Cohort,
    inventory: Inventory,
    seed: int = 0,
    repetitions: int = 5,
    ratio: float = 0.5,
) -> WithinInventoryCurve:
    """Accuracy of predicting held-out items from k random same-inventory items.

    For each k, `repetitions` random regressor subsets are drawn; every
    item outside the subset is fit by least squares on the training split
    and scored on the test split (rounded half-down, clipped). The
    all-items row uses every other item as regressors, which bounds
    cross-inventory conversion accuracy from above.
    """
    if len(inventory) < 3:
        raise ValidationError("within-inventory curve needs an inventory with >= 3 items")
    deduped = deduplicate(cohort)
    complete, _ = enforce_completeness(deduped, inventory)
    plan = split(complete, ratio=ratio, seed=seed)
    if len(plan.train_ids) < 20:
        raise ValidationError(
            f"need >= 20 training participants, got {len(plan.train_ids)}"
        )

    item_ids = list(inventory.item_ids)
    m = len(item_ids)

    def score_matrix(ids: Sequence[str]) -> np.ndarray:
        rows = []
        for pid in ids:
            resp = complete.record(pid).responses_for(inventory.inventory_id)
            rows.append([resp[item] for item in item_ids])
        return np.asarray(rows, dtype=np.float64)

    X_train = score_matrix(plan.train_ids)
    X_test = score_matrix(plan.test_ids)

    def ema_for_regressors(regressors: list[int]) -> float:
        held_out = [j for j in range(m) if j not in regressors]
        hits = 0
        total = 0
        for j in held_out:
            fit = fit_linear(X_train[:, regressors], X_train[:, j])
            raw = X_test[:, regressors] @ np.asarray(fit.coefficients) + fit.intercept
            preds = np.clip(np.ceil(raw - 0.5), 0, 4).astype(int)
            hits += int(np.sum(preds == X_test[:, j].astype(int)))
            total += len(preds)
        return 100.0 * hits / total

    rng = np.random.default_rng(seed)
    rows = []
    for k in range(1, m):
        values = []
        for _ in range(repetitions):
            regressors = sorted(rng.choice(m, size=k, replace=False).tolist())
            values.append(ema_for_regressors(regressors))
        rows.append((k, float(np.mean(values))))

    # exhaustive bound: each item predicted from all the others
    hits = 0
    total = 0
    per_item = {}
    for j in range(m):
        regressors = [i for i in range(m) if i != j]
        fit = fit_linear(X_train[:, regressors], X_train[:, j])
        raw = X_test[:, regressors] @ np.asarray(fit.coefficients) + fit.intercept
        preds = np.clip(np.ceil(raw - 0.5), 0, 4).astype(int)
        item_hits = int(np.sum(preds == X_test[:, j].astype(int)))
        per_item[item_ids[j]] = 100.0 * item_hits / len(preds)
        hits += item_hits
        total += len(preds)
    all_items_ema = 100.0 * hits / total

    return WithinInventoryCurve(
        inventory_id=inventory.inventory_id,
        rows=tuple(rows),
        all_items_ema=all_items_ema,
        all_items_per_item=per_item,
        n_train=len(plan.train_ids),
        n_test=len(plan.test_ids),
        repetitions=repetitions,
    )


@dataclass(frozen=True)
class OlsBaseline:
    """Per-target-item least squares on all source items (benchmark model)."""

    source_inventory_id: str
    target_inventory_id: str
    source_item_ids: tuple[str, ...]
    fits: Mapping[str, tuple[tuple[float, ...], float]]  # item -> (coefs, intercept)
    n_train: int
    singular_items: tuple[str, ...] = ()

    def predict(self, source_responses: Mapping[str, int]) -> dict[str, int]:
        x = np.asarray([source_responses[i] for i in self.source_item_ids], dtype=np.float64)
        out = {}
        for item, (coefs, intercept) in self.fits.items():
            out[item] = round_half_down_clip(float(x @ np.asarray(coefs) + intercept))
        return out


def fit_baseline_ols(
    cohort: Cohort,
    train_ids: Sequence[str],
    source_inventory: Inventory,
    target_inventory: Inventory,
) -> OlsBaseline:
    """Fit the linear-regression benchmark on dually administered training data."""
    src_ids = list(source_inventory.item_ids)
    dst_ids = list(target_inventory.item_ids)
    X = []
    Y = []
    for pid in sorted(train_ids):
        rec = cohort.record(pid)
        source = rec.responses_for(source_inventory.inventory_id)
        target = rec.responses_for(target_inventory.inventory_id)
        if source is None or target is None:
            raise ValidationError(f"participant {pid!r} is not dually administered")
        X.append([source[i] for i in src_ids])
        Y.append([target[i] for i in dst_ids])
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] < 5:
        raise ValidationError(f"need at least 5 training participants, got {X.shape[0]}")
    fits = {}
    singular = []
    for j, item in enumerate(dst_ids):
        fit = fit_linear(X, Y[:, j], context=f"baseline for {item}")
        if fit.singular:
            singular.append(item)
        fits[item] = (fit.coefficients, fit.intercept)
    return OlsBaseline(
        source_inventory_id=source_inventory.inventory_id,
        target_inventory_id=target_inventory.inventory_id,
        source_item_ids=tuple(src_ids),
        fits=fits,
        n_train=X.shape[0],
        singular_items=tuple(singular),
    )


def predict_baseline(
    baseline: OlsBaseline, cohort: Cohort, participant_ids: Sequence[str]
) -> PredictionSet:
    return _collect_predictions(
        baseline.predict, cohort, participant_ids,
        baseline.source_inventory_id, baseline.target_inventory_id,
        model_tag="ols-baseline",
    )


_EXTERNAL_COLUMNS = ["participant_id", "target_inventory_id", "item_id", "predicted_score"]


def score_external(path: str | Path, cohort: Cohort) -> MetricReport:
    """Score a third-party prediction file against actual cohort scores.

    The file must reference one target inventory and only cells present in
    the (deduplicated) cohort; every referenced cell is scored with the
    same report as internal evaluation.
    """
    deduped = deduplicate(cohort)
    by_pid = {rec.participant_id: rec for rec in deduped.records}

    predictions: dict[str, dict[str, int]] = {}
    actuals: dict[str, dict[str, int]] = {}
    demographics: dict[str, tuple[float | None, str]] = {}
    target_ids = set()

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != _EXTERNAL_COLUMNS:
            raise FormatError(
                f"{path}: header must be {','.join(_EXTERNAL_COLUMNS)}, got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, start=2):
            pid = (row["participant_id"] or "").strip()
            inv_id = (row["target_inventory_id"] or "").strip()
            item_id = (row["item_id"] or "").strip()
            raw = (row["predicted_score"] or "").strip()
            target_ids.add(inv_id)
            if len(target_ids) > 1:
                raise ValidationError(
                    f"{path}: multiple target inventories in one prediction file: {sorted(target_ids)}"
                )
            try:
                pred = int(raw)
            except ValueError:
                raise FormatError(f"{path} row {lineno}: predicted score {raw!r} is not an integer") from None
            if pred not in (0, 1, 2, 3, 4):
                raise FormatError(f"{path} row {lineno}: predicted score {pred} outside 0..4")
            rec = by_pid.get(pid)
            if rec is None:
                raise ValidationError(f"{path} row {lineno}: unknown participant {pid!r}")
            actual_map = rec.responses_for(inv_id)
            if actual_map is None or item_id not in actual_map:
                raise ValidationError(
                    f"{path} row {lineno}: no actual score for ({pid!r}, {inv_id!r}, {item_id!r})"
                )
            if item_id in predictions.get(pid, {}):
                raise ValidationError(f"{path} row {lineno}: duplicate cell ({pid!r}, {item_id!r})")
            predictions.setdefault(pid, {})[item_id] = pred
            actuals.setdefault(pid, {})[item_id] = actual_map[item_id]
            demographics[pid] = (rec.age, rec.sex)

    if not predictions:
        raise ValidationError(f"{path}: no prediction rows")
    pred_set = PredictionSet(
        source_inventory_id="external",
        target_inventory_id=next(iter(target_ids)),
        predictions=predictions,
        actuals=actuals,
        model_tag=f"external[{Path(path).name}]",
        demographics=demographics,
    )
    return metric_report(pred_set)


@dataclass(frozen=True)
class StratumComparison:
    stratum: str
    group_labels: tuple[str, str]
    group_sizes: tuple[int, int]
    group_emas: tuple[float, float]
    cohens_d: float
    t_statistic: float
    p_value: float
    skipped: int

    def to_dict(self) -> dict:
        return {
            "stratum": self.stratum,
            "groups": [
                {"label": l, "n": n, "mean_ema": e}
                for l, n, e in zip(self.group_labels, self.group_sizes, self.group_emas)
            ],
            "cohens_d": self.cohens_d,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "skipped": self.skipped,
        }


def cohens_d(group1: Sequence[float], group2: Sequence[float]) -> float:
    """Pooled-standard-deviation effect size, group1 minus group2."""
    a = np.asarray(group1, dtype=np.float64)
    b = np.asarray(group2, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValidationError("Cohen's d of an empty group")
    if n1 + n2 <= 2:
        return float("nan")
    v1 = float(np.var(a, ddof=1)) if n1 > 1 else 0.0
    v2 = float(np.var(b, ddof=1)) if n2 > 1 else 0.0
    pooled = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    if pooled == 0.0:
        return float("nan")
    return (float(a.mean()) - float(b.mean())) / math.sqrt(pooled)


def stratified_compare(
    pred_set: PredictionSet,
    stratum: str,
    age_cutoff: float = AGE_CUTOFF,
) -> StratumComparison:
    """Compare per-participant EMA between two strata (sex or age).

    Participants with missing stratum fields are skipped and counted.
    """
    per_pid_ema = {
        pid: ema(pred_set.participant_cells(pid)) for pid in pred_set.predictions
    }
    groups: tuple[list[float], list[float]] = ([], [])
    skipped = 0
    if stratum == "sex":
        labels = ("female", "male")
        for pid, value in per_pid_ema.items():
            _, sex = pred_set.demographics.get(pid, (None, "unknown"))
            if sex == "female":
                groups[0].append(value)
            elif sex == "male":
                groups[1].append(value)
            else:
                skipped += 1
    elif stratum == "age":
        labels = (f"<{age_cutoff:g}", f">={age_cutoff:g}")
        for pid, value in per_pid_ema.items():
            age, _ = pred_set.demographics.get(pid, (None, "unknown"))
            if age is None:
                skipped += 1
            elif age < age_cutoff:
                groups[0].append(value)
            else:
                groups[1].append(value)
    else:
        raise ValidationError(f"unknown stratum {stratum!r}; expected 'sex' or 'age'")

    g1, g2 = groups
    if not g1 or not g2:
        raise ValidationError(f"empty stratum in {stratum!r} comparison")
    if np.ptp(g1) == 0.0 and np.ptp(g2) == 0.0:
        raise ValidationError("zero variance in both groups; comparison undefined")

    d = cohens_d(g1, g2)
    if len(g1) > 1 and len(g2) > 1:
        t_res = stats.ttest_ind(g1, g2, equal_var=False)
        t_stat, p_value = float(t_res.statistic), float(t_res.pvalue)
    else:
        t_stat, p_value = float("nan"), float("nan")
    if skipped:
        log.info("stratified_compare(%s): skipped %d participants with missing fields",
                 stratum, skipped)
    return StratumComparison(
        stratum=stratum,
        group_labels=labels,
        group_sizes=(len(g1), len(g2)),
        group_emas=(float(np.mean(g1)), float(np.mean(g2))),
        cohens_d=d,
        t_statistic=t_stat,
        p_value=p_value,
        skipped=skipped,
    )
