"""Inventories, response scales, and cohort score data.

An inventory is a fixed, ordered questionnaire whose items are each rated
on a five-point 0..4 scale. A cohort holds participants' raw item scores,
possibly with repeated administrations of the same inventory; `deduplicate`
and `enforce_completeness` reduce it to the clean form the rest of the
engine requires (one complete response map per participant and inventory).
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FormatError, ValidationError
from .jsonio import read_json

log = logging.getLogger(__name__)

SCORE_LEVELS = (0, 1, 2, 3, 4)
SEXES = ("female", "male", "unknown")

_SEX_ALIASES = {
    "f": "female",
    "female": "female",
    "m": "male",
    "male": "male",
    "": "unknown",
    "unknown": "unknown",
}


@dataclass(frozen=True)
class LikertScale:
    """Five ordered anchor labels for the 0..4 severity levels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != 5:
            raise ValidationError(
                f"scale must have exactly 5 labels, got {len(self.labels)}"
            )
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def levels(self) -> tuple[int, ...]:
        return SCORE_LEVELS


@dataclass(frozen=True)
class Item:
    item_id: str
    text: str
    scale: LikertScale
    group: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"item {self.item_id!r} has empty text")


@dataclass(frozen=True)
class Inventory:
    inventory_id: str
    name: str
    reference_period: str
    items: tuple[Item, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if len(self.items) < 2:
            raise ValidationError(
                f"inventory {self.inventory_id!r} needs at least 2 items"
            )
        seen = set()
        for item in self.items:
            if item.item_id in seen:
                raise ValidationError(
                    f"duplicate item_id {item.item_id!r} in inventory {self.inventory_id!r}"
                )
            seen.add(item.item_id)

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(item.item_id for item in self.items)

    def item_texts(self) -> tuple[str, ...]:
        return tuple(item.text for item in self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Administration:
    """One completed (or partial) pass over a single inventory."""

    inventory_id: str
    scores: Mapping[str, int]
    timestamp: str | None = None
    file_order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scores", dict(self.scores))
        for item_id, score in self.scores.items():
            if not isinstance(score, int) or isinstance(score, bool) or score not in SCORE_LEVELS:
                raise ValidationError(
                    f"score {score!r} for item {item_id!r} is not an integer in 0..4"
                )

    def sort_key(self) -> tuple:
        # Timestamped administrations order before untimestamped ones;
        # earliest timestamp wins, then file order.
        if self.timestamp:
            return (0, self.timestamp, self.file_order)
        return (1, "", self.file_order)


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    administrations: tuple[Administration, ...]
    age: float | None = None
    sex: str = "unknown"

    def __post_init__(self):
        object.__setattr__(self, "administrations", tuple(self.administrations))
        if self.sex not in SEXES:
            raise ValidationError(f"sex must be one of {SEXES}, got {self.sex!r}")

    def administrations_of(self, inventory_id: str) -> tuple[Administration, ...]:
        return tuple(a for a in self.administrations if a.inventory_id == inventory_id)

    def responses_for(self, inventory_id: str) -> Mapping[str, int] | None:
        """Scores for one inventory; requires a deduplicated record."""
        admins = self.administrations_of(inventory_id)
        if not admins:
            return None
        if len(admins) > 1:
            raise ValidationError(
                f"participant {self.participant_id!r} has {len(admins)} administrations "
                f"of {inventory_id!r}; deduplicate the cohort first"
            )
        return admins[0].scores

    @property
    def responses(self) -> dict[str, Mapping[str, int]]:
        """inventory_id -> scores map view (deduplicated records only)."""
        out: dict[str, Mapping[str, int]] = {}
        for a in self.administrations:
            if a.inventory_id in out:
                raise ValidationError(
                    f"participant {self.participant_id!r} has duplicate administrations; "
                    "deduplicate the cohort first"
                )
            out[a.inventory_id] = a.scores
        return out


@dataclass(frozen=True)
class Cohort:
    records: tuple[ParticipantRecord, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.participant_id in seen:
                raise ValidationError(f"duplicate participant_id {rec.participant_id!r}")
            seen.add(rec.participant_id)

    def __len__(self) -> int:
        return len(self.records)

    def participant_ids(self) -> tuple[str, ...]:
        return tuple(rec.participant_id for rec in self.records)

    def record(self, participant_id: str) -> ParticipantRecord:
        for rec in self.records:
            if rec.participant_id == participant_id:
                return rec
        raise KeyError(participant_id)


def parse_inventory(path: str | Path) -> Inventory:
    """Load and validate an inventory definition JSON document."""
    try:
        doc = read_json(path)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: inventory document must be a JSON object")
    for key in ("inventory_id", "name", "reference_period", "scale", "items"):
        if key not in doc:
            raise FormatError(f"{path}: missing field {key!r}")
    scale_doc = doc["scale"]
    if not isinstance(scale_doc, dict) or "labels" not in scale_doc:
        raise FormatError(f"{path}: scale must be an object with a 'labels' list")
    scale = LikertScale(labels=tuple(scale_doc["labels"]))
    items = []
    for entry in doc["items"]:
        if not isinstance(entry, dict) or "item_id" not in entry or "text" not in entry:
            raise FormatError(f"{path}: each item needs 'item_id' and 'text'")
        items.append(
            Item(
                item_id=str(entry["item_id"]),
                text=str(entry["text"]),
                scale=scale,
                group=entry.get("group"),
            )
        )
    return Inventory(
        inventory_id=str(doc["inventory_id"]),
        name=str(doc["name"]),
        reference_period=str(doc["reference_period"]),
        items=tuple(items),
    )


def serialize_inventory(inventory: Inventory) -> dict:
    """Inverse of parse_inventory (parse ∘ serialize is the identity)."""
    items = []
    for item in inventory.items:
        entry: dict = {"item_id": item.item_id, "text": item.text}
        if item.group is not None:
            entry["group"] = item.group
        items.append(entry)
    return {
        "inventory_id": inventory.inventory_id,
        "name": inventory.name,
        "reference_period": inventory.reference_period,
        "scale": {"labels": list(inventory.items[0].scale.labels)},
        "items": items,
    }


_SCORE_COLUMNS = ["participant_id", "inventory_id", "item_id", "score", "age", "sex", "timestamp"]


def parse_scores(path: str | Path, inventories: Iterable[Inventory]) -> Cohort:
    """Parse a cohort score CSV into raw, unadjusted per-participant records.

    Rows are grouped into administrations by (participant, inventory,
    timestamp); a repeated item id within a group starts a new
    administration, so repeated untimestamped measurements survive parsing
    and are resolved later by `deduplicate`.
    """
    by_id = {inv.inventory_id: inv for inv in inventories}
    item_sets = {inv.inventory_id: set(inv.item_ids) for inv in inventories}

    # participant -> (inventory, timestamp) -> list of open administrations
    participants: dict[str, dict] = {}
    order_counter = 0

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != _SCORE_COLUMNS:
            raise FormatError(
                f"{path}: header must be {','.join(_SCORE_COLUMNS)}, "
                f"got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, start=2):
            pid = (row["participant_id"] or "").strip()
            inv_id = (row["inventory_id"] or "").strip()
            item_id = (row["item_id"] or "").strip()
            if not pid or not inv_id or not item_id:
                raise FormatError(f"{path} row {lineno}: blank participant/inventory/item id")
            if inv_id not in by_id:
                raise FormatError(f"{path} row {lineno}: unknown inventory id {inv_id!r}")
            if item_id not in item_sets[inv_id]:
                raise FormatError(
                    f"{path} row {lineno}: unknown item id {item_id!r} for inventory {inv_id!r}"
                )
            raw_score = (row["score"] or "").strip()
            try:
                score = int(raw_score)
            except ValueError:
                raise FormatError(
                    f"{path} row {lineno}: score {raw_score!r} is not an integer"
                ) from None
            if score not in SCORE_LEVELS:
                raise FormatError(f"{path} row {lineno}: score {score} outside 0..4")

            age_raw = (row["age"] or "").strip()
            age = None
            if age_raw:
                try:
                    age = float(age_raw)
                except ValueError:
                    raise FormatError(f"{path} row {lineno}: bad age {age_raw!r}") from None
            sex_raw = (row["sex"] or "").strip().lower()
            if sex_raw not in _SEX_ALIASES:
                raise FormatError(f"{path} row {lineno}: bad sex {sex_raw!r}")
            sex = _SEX_ALIASES[sex_raw]
            timestamp = (row["timestamp"] or "").strip() or None

            entry = participants.setdefault(
                pid, {"age": None, "sex": "unknown", "admins": {}}
            )
            if entry["age"] is None and age is not None:
                entry["age"] = age
            if entry["sex"] == "unknown" and sex != "unknown":
                entry["sex"] = sex

            key = (inv_id, timestamp)
            groups = entry["admins"].setdefault(key, [])
            # reuse the last open administration unless this item already appears in it
            if groups and item_id not in groups[-1]["scores"]:
                group = groups[-1]
            else:
                group = {"scores": {}, "order": order_counter}
                order_counter += 1
                groups.append(group)
            group["scores"][item_id] = score

    records = []
    for pid, entry in participants.items():
        admins = []
        for (inv_id, timestamp), groups in entry["admins"].items():
            for group in groups:
                admins.append(
                    Administration(
                        inventory_id=inv_id,
                        scores=group["scores"],
                        timestamp=timestamp,
                        file_order=group["order"],
                    )
                )
        admins.sort(key=lambda a: a.file_order)
        records.append(
            ParticipantRecord(
                participant_id=pid,
                administrations=tuple(admins),
                age=entry["age"],
                sex=entry["sex"],
            )
        )
    return Cohort(records=tuple(records), provenance=str(path))


def format_scores_csv(cohort: Cohort) -> str:
    """Render a cohort in the score-table CSV format (inverse of parse_scores)."""
    lines = [",".join(_SCORE_COLUMNS)]
    for rec in cohort.records:
        age = "" if rec.age is None else f"{rec.age:g}"
        sex = "" if rec.sex == "unknown" else rec.sex
        for admin in rec.administrations:
            ts = admin.timestamp or ""
            for item_id, score in admin.scores.items():
                lines.append(
                    f"{rec.participant_id},{admin.inventory_id},{item_id},{score},{age},{sex},{ts}"
                )
    return "\n".join(lines) + "\n"


def deduplicate(cohort: Cohort) -> Cohort:
    """Keep one administration per (participant, inventory).

    The earliest timestamp wins; administrations without a timestamp lose
    to timestamped ones and tie-break by first appearance in file order.
    """
    records = []
    dropped = 0
    for rec in cohort.records:
        by_inv: dict[str, list[Administration]] = {}
        for admin in rec.administrations:
            by_inv.setdefault(admin.inventory_id, []).append(admin)
        kept: list[Administration] = []
        for admins in by_inv.values():
            chosen = min(admins, key=lambda a: a.sort_key())
            dropped += len(admins) - 1
            kept.append(chosen)
        kept.sort(key=lambda a: a.file_order)
        records.append(
            ParticipantRecord(
                participant_id=rec.participant_id,
                administrations=tuple(kept),
                age=rec.age,
                sex=rec.sex,
            )
        )
    if dropped:
        log.info("deduplicate: dropped %d repeated administrations", dropped)
    return Cohort(records=tuple(records), provenance=cohort.provenance)


def enforce_completeness(cohort: Cohort, inventory: Inventory) -> tuple[Cohort, int]:
    """Drop records lacking a complete response map for `inventory`.

    Returns the filtered cohort and the number of excluded records.
    Administrations of other inventories are untouched, so a record
    excluded here can still participate in analyses of other inventories
    through the original cohort.
    """
    wanted = set(inventory.item_ids)
    records = []
    excluded = 0
    for rec in cohort.records:
        complete = []
        incomplete = 0
        for admin in rec.administrations:
            if admin.inventory_id != inventory.inventory_id:
                continue
            if set(admin.scores.keys()) == wanted:
                complete.append(admin)
            else:
                incomplete += 1
        if complete:
            kept = tuple(
                a
                for a in rec.administrations
                if a.inventory_id != inventory.inventory_id or a in complete
            )
            records.append(
                ParticipantRecord(
                    participant_id=rec.participant_id,
                    administrations=kept,
                    age=rec.age,
                    sex=rec.sex,
                )
            )
        else:
            excluded += 1
    if excluded:
        log.info(
            "enforce_completeness: excluded %d records without a complete %s",
            excluded,
            inventory.inventory_id,
        )
    return Cohort(records=tuple(records), provenance=cohort.provenance), excluded
