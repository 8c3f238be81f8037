"""Synthetic latent-trait cohorts and deterministic embedding backends.

Real inventory item texts and clinical scores are proprietary, so studies
and tests run on generated data: each participant carries one latent
severity, items load on it plus a concept-specific effect shared by the
paired items of the two inventories, and raw values are discretized with
per-item anchor cuts (shifted between inventories to mimic scale
differences). The module also provides two lightweight embedding
backends: concept vectors for generated inventories, and a hashed
character-trigram embedder for arbitrary item text.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingSet, EmbeddingVector
from .inventory import Administration, Cohort, Inventory, Item, LikertScale, ParticipantRecord

_SCALE_A = LikertScale(("Not at all", "A little", "Moderately", "Quite a bit", "Extremely"))
_SCALE_B = LikertScale(("None", "Mild", "Moderate", "Severe", "Very severe"))

# paired phrasings for up to 24 symptom concepts (index = concept id)
_CONCEPT_PHRASES = [
    ("Headaches or head pressure", "Head pain"),
    ("Feeling dizzy or lightheaded", "Dizziness or faintness"),
    ("Stomach upset or queasiness", "Nausea"),
    ("Trouble falling or staying asleep", "Sleep disturbance"),
    ("Feeling tired or low on energy", "Fatigue or low energy"),
    ("Blurred or double vision", "Vision problems"),
    ("Bothered by loud noise", "Noise sensitivity"),
    ("Bothered by bright light", "Light sensitivity"),
    ("Feeling easily annoyed or irritable", "Irritability"),
    ("Feeling sad or down", "Feeling depressed or tearful"),
    ("Worrying or feeling anxious", "Feeling anxious or tense"),
    ("Trouble keeping attention on tasks", "Poor concentration"),
    ("Trouble remembering recent things", "Forgetfulness"),
    ("Taking longer to think things through", "Slowed thinking"),
    ("Clumsiness or unsteady movement", "Poor coordination"),
    ("Ringing or buzzing in the ears", "Ringing in the ears"),
    ("Feeling restless or keyed up", "Restlessness"),
    ("Numbness or tingling in the body", "Numbness or tingling"),
    ("Changes in taste or smell", "Altered taste or smell"),
    ("Feeling little interest in activities", "Loss of interest"),
    ("Neck or shoulder pain", "Neck pain"),
    ("Sensitivity to motion or travel", "Motion sensitivity"),
    ("Feeling hopeless about the future", "Hopelessness"),
    ("Appetite changes", "Changes in appetite"),
]


@dataclass(frozen=True)
class SyntheticStudyConfig:
    n_participants: int = 2000
    n_items: int = 16
    n_shared: int = 12
    seed: int = 7021
    embedding_dim: int = 64
    concept_weight: float = 0.45  # shared concept effect on top of the latent trait
    noise_sd: float = 0.55
    threshold_shift: float = 0.25  # second inventory's anchors sit higher
    base_cuts: tuple[float, float, float, float] = (-0.8, 0.0, 0.8, 1.6)
    item_cut_jitter: float = 0.3

    def __post_init__(self):
        if not 0 < self.n_shared <= self.n_items:
            raise ValueError("n_shared must be in 1..n_items")
        if self.n_items + (self.n_items - self.n_shared) > len(_CONCEPT_PHRASES):
            raise ValueError(
                f"at most {len(_CONCEPT_PHRASES)} concepts available; "
                f"reduce n_items or n_shared"
            )


@dataclass(frozen=True)
class SyntheticStudy:
    config: SyntheticStudyConfig
    inventory_a: Inventory
    inventory_b: Inventory
    cohort: Cohort
    embeddings_a: EmbeddingSet
    embeddings_b: EmbeddingSet
    shared_pairs: tuple[tuple[str, str], ...]  # (a item, b item) sharing a concept


def _concept_vectors(n_concepts: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    vectors = rng.normal(size=(n_concepts, dim))
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def make_synthetic_study(config: SyntheticStudyConfig = SyntheticStudyConfig()) -> SyntheticStudy:
    """Generate a dually administered two-inventory study.

    Inventory A and inventory B each have n_items items; the first
    n_shared items of B measure the same concepts as the first n_shared
    items of A (with different phrasings and shifted anchor cuts), the
    rest are inventory-specific concepts.
    """
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    n_concepts = cfg.n_items + (cfg.n_items - cfg.n_shared)

    # concepts 0..n_items-1 belong to A; B reuses 0..n_shared-1 and then
    # takes fresh concepts n_items..n_concepts-1
    a_concepts = list(range(cfg.n_items))
    b_concepts = list(range(cfg.n_shared)) + list(range(cfg.n_items, n_concepts))

    width = len(str(cfg.n_items))
    items_a = tuple(
        Item(item_id=f"a{idx + 1:0{width}d}", text=_CONCEPT_PHRASES[c][0], scale=_SCALE_A)
        for idx, c in enumerate(a_concepts)
    )
    items_b = tuple(
        Item(item_id=f"b{idx + 1:0{width}d}", text=_CONCEPT_PHRASES[c][1], scale=_SCALE_B)
        for idx, c in enumerate(b_concepts)
    )
    inventory_a = Inventory("syn_a", "Synthetic Symptom Survey A", "past 7 days", items_a)
    inventory_b = Inventory("syn_b", "Synthetic Symptom Survey B", "past 24 hours", items_b)
    shared_pairs = tuple(
        (items_a[i].item_id, items_b[i].item_id) for i in range(cfg.n_shared)
    )

    # per-item anchor cuts: concept-level jitter keeps paired items aligned
    # up to the configured shift
    concept_shift = rng.uniform(-cfg.item_cut_jitter, cfg.item_cut_jitter, size=n_concepts)
    base = np.asarray(cfg.base_cuts)
    cuts_a = {
        item.item_id: base + concept_shift[c] for item, c in zip(items_a, a_concepts)
    }
    cuts_b = {
        item.item_id: base + concept_shift[c] + cfg.threshold_shift
        for item, c in zip(items_b, b_concepts)
    }

    # latent severity + shared concept effects + item noise
    theta = rng.normal(size=cfg.n_participants)
    concept_effects = rng.normal(size=(cfg.n_participants, n_concepts)) * cfg.concept_weight
    ages = np.round(rng.uniform(18, 85, size=cfg.n_participants), 1)
    sexes = rng.choice(["female", "male", "unknown"], size=cfg.n_participants, p=[0.35, 0.60, 0.05])

    def scores_for(items, concepts, cuts) -> np.ndarray:
        out = np.empty((cfg.n_participants, len(items)), dtype=np.int64)
        for j, (item, c) in enumerate(zip(items, concepts)):
            raw = theta + concept_effects[:, c] + rng.normal(scale=cfg.noise_sd, size=cfg.n_participants)
            out[:, j] = np.searchsorted(cuts[item.item_id], raw)
        return out

    scores_a = scores_for(items_a, a_concepts, cuts_a)
    scores_b = scores_for(items_b, b_concepts, cuts_b)

    pid_width = len(str(cfg.n_participants))
    records = []
    for i in range(cfg.n_participants):
        pid = f"p{i + 1:0{pid_width}d}"
        admin_a = Administration(
            inventory_id=inventory_a.inventory_id,
            scores={item.item_id: int(scores_a[i, j]) for j, item in enumerate(items_a)},
            file_order=2 * i,
        )
        admin_b = Administration(
            inventory_id=inventory_b.inventory_id,
            scores={item.item_id: int(scores_b[i, j]) for j, item in enumerate(items_b)},
            file_order=2 * i + 1,
        )
        records.append(
            ParticipantRecord(
                participant_id=pid,
                administrations=(admin_a, admin_b),
                age=float(ages[i]),
                sex=str(sexes[i]),
            )
        )
    cohort = Cohort(records=tuple(records), provenance=f"synthetic(seed={cfg.seed})")

    concept_vecs = _concept_vectors(n_concepts, cfg.embedding_dim, rng)

    def embedding_set(inventory, items, concepts) -> EmbeddingSet:
        vectors = {}
        for item, c in zip(items, concepts):
            noisy = concept_vecs[c] + rng.normal(scale=0.02, size=cfg.embedding_dim)
            vectors[item.item_id] = EmbeddingVector(values=noisy)
        return EmbeddingSet(
            inventory_id=inventory.inventory_id,
            vectors=vectors,
            backend_tag=f"synthetic-concepts(seed={cfg.seed})",
        )

    return SyntheticStudy(
        config=cfg,
        inventory_a=inventory_a,
        inventory_b=inventory_b,
        cohort=cohort,
        embeddings_a=embedding_set(inventory_a, items_a, a_concepts),
        embeddings_b=embedding_set(inventory_b, items_b, b_concepts),
        shared_pairs=shared_pairs,
    )


def hashed_text_embedding(text: str, dim: int = 64) -> EmbeddingVector:
    """Deterministic character-trigram hash embedding of a text.

    Not semantically meaningful, but identical texts map to identical
    vectors on every platform, which is all structural tests and fixtures
    need from a backend.
    """
    padded = f"  {text.lower().strip()}  "
    counts = np.zeros(dim, dtype=np.float64)
    for i in range(len(padded) - 2):
        gram = padded[i : i + 3].encode("utf-8")
        digest = hashlib.sha256(gram).digest()
        bucket = int.from_bytes(digest[:4], "big") % dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        counts[bucket] += sign
    if not np.any(counts):
        counts[0] = 1.0
    return EmbeddingVector(values=counts)


def hashed_embedding_set(inventory: Inventory, dim: int = 64) -> EmbeddingSet:
    """Hash-backend embeddings for every item of an inventory."""
    vectors = {
        item.item_id: hashed_text_embedding(item.text, dim=dim) for item in inventory.items
    }
    return EmbeddingSet(
        inventory_id=inventory.inventory_id,
        vectors=vectors,
        backend_tag=f"hashed-trigrams(dim={dim})",
    )
