"""Crosswalk model: item links, percentile calibration, score conversion.

A crosswalk from inventory A to inventory B links every B item to its most
similar A item, calibrates per-item percentile thresholds on a cohort, and
converts scores by mapping the source score's percentile bin onto the
target item's bins. Target items whose best link falls below the
similarity threshold tau are instead predicted from the already-converted
strongly linked items via a least-squares fallback.

Percentile thresholds (c1..c4) are cumulative proportions: ck is the
empirical probability of scoring at most k-1, so score k occupies the
half-open bin [c_k, c_k+1) with c0 = 0 and c5 = 1.
"""
from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .embedding import SimilarityMatrix
from .errors import FormatError, ValidationError, VersionError
from .inventory import Cohort, Inventory
from .jsonio import atomic_write_json, canonical_json, read_json
from .numerics import fit_linear, round_half_down_clip

log = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0"
DEFAULT_TAU = 0.6
TIE_POLICY = "lowest-source-index"

Thresholds = tuple[float, float, float, float]


class Link(NamedTuple):
    source_item_id: str
    similarity: float


@dataclass(frozen=True)
class LinkMap:
    """Per target item, the most similar source item and its similarity."""

    source_inventory_id: str
    target_inventory_id: str
    links: Mapping[str, Link]
    tie_policy: str = TIE_POLICY

    def __post_init__(self):
        object.__setattr__(self, "links", dict(self.links))
        for target, link in self.links.items():
            if not 0.0 <= link.similarity <= 1.0:
                raise ValidationError(
                    f"link similarity for {target!r} outside [0, 1]: {link.similarity}"
                )

    @property
    def target_item_ids(self) -> tuple[str, ...]:
        return tuple(self.links.keys())


def build_link_map(m: SimilarityMatrix) -> LinkMap:
    """Link each target item to the argmax source item (ties: lowest index)."""
    best = np.argmax(m.values, axis=0)
    links = {
        target: Link(m.source_item_ids[int(i)], float(m.values[int(i), j]))
        for j, (target, i) in enumerate(zip(m.target_item_ids, best))
    }
    return LinkMap(
        source_inventory_id=m.source_inventory_id,
        target_inventory_id=m.target_inventory_id,
        links=links,
    )


def validate_thresholds(th: Sequence[float]) -> Thresholds:
    t = tuple(float(x) for x in th)
    if len(t) != 4:
        raise ValidationError(f"expected 4 thresholds, got {len(t)}")
    if not (0.0 <= t[0] <= t[1] <= t[2] <= t[3] <= 1.0):
        raise ValidationError(f"thresholds not monotone within [0, 1]: {t}")
    return t  # type: ignore[return-value]


@dataclass(frozen=True)
class Calibration:
    """Per-item cumulative percentile thresholds for one inventory."""

    inventory_id: str
    thresholds: Mapping[str, Thresholds]
    sample_sizes: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(
            self, "thresholds", {k: validate_thresholds(v) for k, v in self.thresholds.items()}
        )
        object.__setattr__(self, "sample_sizes", dict(self.sample_sizes))

    def thresholds_for(self, item_id: str) -> Thresholds:
        try:
            return self.thresholds[item_id]
        except KeyError:
            raise ValidationError(
                f"no calibration for item {item_id!r} of {self.inventory_id!r}"
            ) from None

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(self.thresholds.keys())


def calibrate(cohort: Cohort, inventory: Inventory, add_one_smoothing: bool = False) -> Calibration:
    """Empirical cumulative thresholds ck = P(score <= k-1) per item.

    The cohort must be deduplicated and complete for the inventory.
    Optional add-one smoothing adds one pseudo-response per level.
    """
    if len(cohort) == 0:
        raise ValidationError(f"empty cohort; cannot calibrate {inventory.inventory_id!r}")
    columns: dict[str, list[int]] = {item_id: [] for item_id in inventory.item_ids}
    for rec in cohort.records:
        scores = rec.responses_for(inventory.inventory_id)
        if scores is None or set(scores.keys()) != set(inventory.item_ids):
            raise ValidationError(
                f"participant {rec.participant_id!r} lacks a complete "
                f"{inventory.inventory_id!r} response map; run enforce_completeness first"
            )
        for item_id in inventory.item_ids:
            columns[item_id].append(scores[item_id])
    thresholds = {}
    sizes = {}
    for item_id, values in columns.items():
        counts = np.bincount(np.asarray(values, dtype=np.int64), minlength=5).astype(np.float64)
        n = float(len(values))
        if add_one_smoothing:
            counts = counts + 1.0
            n += 5.0
        cum = np.cumsum(counts) / n
        thresholds[item_id] = tuple(float(c) for c in cum[:4])
        sizes[item_id] = len(values)
    return Calibration(inventory_id=inventory.inventory_id, thresholds=thresholds, sample_sizes=sizes)


def _bin_edges(th: Thresholds) -> tuple[float, ...]:
    return (0.0, th[0], th[1], th[2], th[3], 1.0)


_TIE_EPS = 1e-12


def conversion_distribution(s: int, src: Sequence[float], dst: Sequence[float]) -> dict[int, float]:
    """Outcome distribution for converting source score s between calibrations.

    The source score's bin is intersected with every target bin; outcome
    probabilities are proportional to intersection length. A zero-width
    source bin collapses to the point c_s, which lands in the target bin
    containing it (bins are right-open; the point 1.0 belongs to score 4).
    """
    if s not in (0, 1, 2, 3, 4):
        raise ValidationError(f"source score {s!r} outside 0..4")
    src_t = validate_thresholds(src)
    dst_t = validate_thresholds(dst)
    src_edges = _bin_edges(src_t)
    lo, hi = src_edges[s], src_edges[s + 1]
    if hi > lo:
        dst_edges = _bin_edges(dst_t)
        weights = {}
        for t in range(5):
            w = min(hi, dst_edges[t + 1]) - max(lo, dst_edges[t])
            if w > 0.0:
                weights[t] = w
        total = sum(weights.values())
        return {t: w / total for t, w in weights.items()}
    return {bisect_right(dst_t, lo): 1.0}


def convert_score(
    s: int,
    src: Sequence[float],
    dst: Sequence[float],
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
) -> int:
    """Convert one source score to a target score.

    Deterministic mode returns the maximal-overlap outcome (ties to the
    lower severity score); stochastic mode samples from the outcome
    distribution using the caller's generator.
    """
    dist = conversion_distribution(s, src, dst)
    if mode == "deterministic":
        best = max(dist.values())
        return min(t for t, w in dist.items() if w >= best - _TIE_EPS)
    if mode == "stochastic":
        if rng is None:
            raise ValidationError("stochastic mode requires a seeded generator")
        outcomes = sorted(dist)
        u = float(rng.random())
        acc = 0.0
        for t in outcomes:
            acc += dist[t]
            if u < acc:
                return t
        return outcomes[-1]
    raise ValidationError(f"unknown conversion mode {mode!r}")


@dataclass(frozen=True)
class FallbackModel:
    """Within-inventory least-squares predictor for a weakly linked item."""

    item_id: str
    regressors: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    n_train: int

    def __post_init__(self):
        if len(self.regressors) < 1:
            raise ValidationError(f"fallback for {self.item_id!r} needs >= 1 regressor")
        if len(self.regressors) != len(self.coefficients):
            raise ValidationError(
                f"fallback for {self.item_id!r}: {len(self.coefficients)} coefficients "
                f"for {len(self.regressors)} regressors"
            )
        if not all(np.isfinite(c) for c in self.coefficients) or not np.isfinite(self.intercept):
            raise ValidationError(f"fallback for {self.item_id!r} has non-finite coefficients")

    def predict(self, values: Mapping[str, float]) -> float:
        return self.intercept + sum(
            c * float(values[r]) for r, c in zip(self.regressors, self.coefficients)
        )


def fit_fallbacks(
    train_target: Cohort,
    target_inventory: Inventory,
    link_map: LinkMap,
    tau: float,
    min_records: int = 5,
) -> dict[str, FallbackModel]:
    """Fit one fallback per target item whose link similarity is below tau.

    Each weak item is regressed on the strongly linked target items over
    the training cohort; if fewer than two strong items exist, all other
    target items serve as regressors.
    """
    item_ids = list(target_inventory.item_ids)
    if set(item_ids) != set(link_map.links.keys()):
        raise ValidationError(
            f"link map targets do not match inventory {target_inventory.inventory_id!r}"
        )
    weak = [b for b in item_ids if link_map.links[b].similarity < tau]
    if not weak:
        return {}
    if len(train_target) < min_records:
        raise ValidationError(
            f"need at least {min_records} training records to fit fallbacks, got {len(train_target)}"
        )
    strong = [b for b in item_ids if link_map.links[b].similarity >= tau]

    scores = np.empty((len(train_target), len(item_ids)), dtype=np.float64)
    for i, rec in enumerate(train_target.records):
        resp = rec.responses_for(target_inventory.inventory_id)
        if resp is None or set(resp.keys()) != set(item_ids):
            raise ValidationError(
                f"participant {rec.participant_id!r} lacks a complete "
                f"{target_inventory.inventory_id!r} response map"
            )
        scores[i] = [resp[item] for item in item_ids]
    col = {item: j for j, item in enumerate(item_ids)}

    fallbacks = {}
    for b in weak:
        regressors = strong if len(strong) >= 2 else [x for x in item_ids if x != b]
        X = scores[:, [col[r] for r in regressors]]
        y = scores[:, col[b]]
        fit = fit_linear(X, y, context=f"fallback for {b}")
        fallbacks[b] = FallbackModel(
            item_id=b,
            regressors=tuple(regressors),
            coefficients=fit.coefficients,
            intercept=fit.intercept,
            n_train=len(train_target),
        )
    return fallbacks


@dataclass(frozen=True)
class CrosswalkModel:
    """Serializable bundle: link map, calibrations, tau, and fallbacks."""

    link_map: LinkMap
    source_calibration: Calibration
    target_calibration: Calibration
    tau: float
    fallbacks: Mapping[str, FallbackModel] = field(default_factory=dict)
    backend_tag: str = ""
    version: str = ARTIFACT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "fallbacks", dict(self.fallbacks))
        if not 0.0 <= self.tau <= 1.0:
            raise ValidationError(f"tau outside [0, 1]: {self.tau}")
        if self.source_calibration.inventory_id != self.link_map.source_inventory_id:
            raise ValidationError("source calibration does not match link map source")
        if self.target_calibration.inventory_id != self.link_map.target_inventory_id:
            raise ValidationError("target calibration does not match link map target")
        for target, link in self.link_map.links.items():
            if link.similarity < self.tau and target not in self.fallbacks:
                raise ValidationError(
                    f"target item {target!r} is weakly linked (S={link.similarity:.3f} < "
                    f"tau={self.tau}) but has no fallback model"
                )
            if target not in self.target_calibration.thresholds:
                raise ValidationError(f"target calibration missing item {target!r}")
            if link.source_item_id not in self.source_calibration.thresholds:
                raise ValidationError(
                    f"source calibration missing linked item {link.source_item_id!r}"
                )

    @property
    def source_inventory_id(self) -> str:
        return self.link_map.source_inventory_id

    @property
    def target_inventory_id(self) -> str:
        return self.link_map.target_inventory_id

    @property
    def source_item_ids(self) -> tuple[str, ...]:
        return self.source_calibration.item_ids

    def method_for(self, target_item: str) -> str:
        return "fallback" if target_item in self.fallbacks else "linked"


def build_model(
    similarity: SimilarityMatrix,
    calibration_cohort: Cohort,
    source_inventory: Inventory,
    target_inventory: Inventory,
    tau: float = DEFAULT_TAU,
    backend_tag: str = "",
    add_one_smoothing: bool = False,
) -> CrosswalkModel:
    """Assemble a full crosswalk model from a similarity matrix and a cohort.

    The cohort is deduplicated and completeness-filtered per inventory
    internally; calibrations and fallback fits use only its records.
    """
    from .inventory import deduplicate, enforce_completeness

    if set(similarity.source_item_ids) != set(source_inventory.item_ids):
        raise ValidationError("similarity matrix rows do not match the source inventory")
    if set(similarity.target_item_ids) != set(target_inventory.item_ids):
        raise ValidationError("similarity matrix columns do not match the target inventory")
    link_map = build_link_map(similarity)
    deduped = deduplicate(calibration_cohort)
    src_cohort, _ = enforce_completeness(deduped, source_inventory)
    dst_cohort, _ = enforce_completeness(deduped, target_inventory)
    source_calibration = calibrate(src_cohort, source_inventory, add_one_smoothing)
    target_calibration = calibrate(dst_cohort, target_inventory, add_one_smoothing)
    fallbacks = fit_fallbacks(dst_cohort, target_inventory, link_map, tau)
    return CrosswalkModel(
        link_map=link_map,
        source_calibration=source_calibration,
        target_calibration=target_calibration,
        tau=tau,
        fallbacks=fallbacks,
        backend_tag=backend_tag,
    )


def convert_participant(
    model: CrosswalkModel,
    responses: Mapping[str, int],
    mode: str = "deterministic",
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> dict[str, int]:
    """Convert a complete set of source responses to target item estimates.

    Strongly linked target items are converted first, in sorted item-id
    order (the order in which stochastic draws consume the generator);
    weakly linked items are then predicted by their fallback models from
    the converted estimates, rounded half-down and clipped to 0..4. The
    generator is numpy's default PCG64, seeded with the given 64-bit seed.
    """
    required = set(model.source_item_ids)
    provided = set(responses.keys())
    missing = sorted(required - provided)
    unknown = sorted(provided - required)
    if missing or unknown:
        raise ValidationError(
            f"source responses do not match inventory {model.source_inventory_id!r}: "
            f"missing={missing} unknown={unknown}"
        )
    bad = sorted(
        item for item, score in responses.items()
        if not isinstance(score, int) or isinstance(score, bool) or score not in (0, 1, 2, 3, 4)
    )
    if bad:
        raise ValidationError(f"scores outside 0..4 for items: {bad}")

    if mode == "stochastic" and rng is None:
        rng = np.random.default_rng(seed)

    targets = sorted(model.link_map.links.keys())
    estimates: dict[str, int] = {}
    for b in targets:
        if b in model.fallbacks:
            continue
        link = model.link_map.links[b]
        estimates[b] = convert_score(
            responses[link.source_item_id],
            model.source_calibration.thresholds_for(link.source_item_id),
            model.target_calibration.thresholds_for(b),
            mode,
            rng,
        )

    def linked_estimate(item: str) -> int:
        # deterministic link-based conversion; used only when a fallback's
        # regressor is itself weakly linked (fewer than two strong items)
        link = model.link_map.links[item]
        return convert_score(
            responses[link.source_item_id],
            model.source_calibration.thresholds_for(link.source_item_id),
            model.target_calibration.thresholds_for(item),
            "deterministic",
        )

    for b in targets:
        if b not in model.fallbacks:
            continue
        fb = model.fallbacks[b]
        inputs = {r: estimates[r] if r in estimates else linked_estimate(r) for r in fb.regressors}
        estimates[b] = round_half_down_clip(fb.predict(inputs))
    return {b: estimates[b] for b in targets}


def serialize_model(model: CrosswalkModel) -> dict:
    calibrations: dict[str, dict] = {}
    for cal in (model.source_calibration, model.target_calibration):
        existing = calibrations.get(cal.inventory_id)
        entry = {
            "thresholds": {item: list(th) for item, th in cal.thresholds.items()},
            "n": dict(cal.sample_sizes),
        }
        if existing is not None and existing != entry:
            raise ValidationError(
                f"conflicting calibrations for inventory {cal.inventory_id!r} in one model"
            )
        calibrations[cal.inventory_id] = entry
    return {
        "version": model.version,
        "backend_tag": model.backend_tag,
        "tau": model.tau,
        "source_inventory_id": model.source_inventory_id,
        "target_inventory_id": model.target_inventory_id,
        "tie_policy": model.link_map.tie_policy,
        "link_map": {
            target: {"source_item": link.source_item_id, "similarity": link.similarity}
            for target, link in model.link_map.links.items()
        },
        "calibrations": calibrations,
        "fallbacks": {
            target: {
                "regressors": list(fb.regressors),
                "coefficients": list(fb.coefficients),
                "intercept": fb.intercept,
                "n": fb.n_train,
            }
            for target, fb in model.fallbacks.items()
        },
    }


def save_model(model: CrosswalkModel, path: str | Path) -> None:
    atomic_write_json(path, serialize_model(model))


def model_to_json(model: CrosswalkModel) -> str:
    return canonical_json(serialize_model(model))


def deserialize_model(doc: dict) -> CrosswalkModel:
    if not isinstance(doc, dict):
        raise FormatError("model artifact must be a JSON object")
    version = doc.get("version")
    if version is None:
        raise FormatError("model artifact missing field 'version'")
    try:
        major = int(str(version).split(".")[0])
    except ValueError:
        raise FormatError(f"unparseable artifact version {version!r}") from None
    if major > int(ARTIFACT_VERSION.split(".")[0]):
        raise VersionError(
            f"artifact version {version} is newer than supported {ARTIFACT_VERSION}"
        )
    for key in ("backend_tag", "tau", "source_inventory_id", "target_inventory_id",
                "link_map", "calibrations", "fallbacks"):
        if key not in doc:
            raise FormatError(f"model artifact missing field {key!r}")

    links = {
        target: Link(str(entry["source_item"]), float(entry["similarity"]))
        for target, entry in doc["link_map"].items()
    }
    link_map = LinkMap(
        source_inventory_id=str(doc["source_inventory_id"]),
        target_inventory_id=str(doc["target_inventory_id"]),
        links=links,
        tie_policy=str(doc.get("tie_policy", TIE_POLICY)),
    )

    def calibration_for(inventory_id: str) -> Calibration:
        try:
            entry = doc["calibrations"][inventory_id]
        except KeyError:
            raise FormatError(f"model artifact missing calibration for {inventory_id!r}") from None
        return Calibration(
            inventory_id=inventory_id,
            thresholds={item: tuple(th) for item, th in entry["thresholds"].items()},
            sample_sizes={item: int(n) for item, n in entry["n"].items()},
        )

    fallbacks = {
        target: FallbackModel(
            item_id=target,
            regressors=tuple(entry["regressors"]),
            coefficients=tuple(float(c) for c in entry["coefficients"]),
            intercept=float(entry["intercept"]),
            n_train=int(entry["n"]),
        )
        for target, entry in doc["fallbacks"].items()
    }
    return CrosswalkModel(
        link_map=link_map,
        source_calibration=calibration_for(str(doc["source_inventory_id"])),
        target_calibration=calibration_for(str(doc["target_inventory_id"])),
        tau=float(doc["tau"]),
        fallbacks=fallbacks,
        backend_tag=str(doc["backend_tag"]),
        version=str(version),
    )


def load_model(path: str | Path) -> CrosswalkModel:
    try:
        doc = read_json(path)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return deserialize_model(doc)
