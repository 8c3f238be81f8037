"""Item-text embeddings and cross-inventory semantic similarity.

Embeddings come from a pluggable provider: either a precomputed vector
file or an HTTP embedding service. The engine itself never loads a text
encoder in-process; it only consumes vectors. Similarity is cosine,
clamped to [0, 1] so that 0 reads as "no meaningful similarity".
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import httpx
import numpy as np

from .errors import EmbeddingServiceError, FormatError, ValidationError
from .inventory import Inventory
from .jsonio import read_json

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """Fixed-length real vector with its norm cached at construction."""

    values: np.ndarray
    norm: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError(f"embedding must be a 1-d vector of dimension >= 2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("embedding contains non-finite values")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ValidationError("zero-norm embedding vector")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "norm", norm)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class EmbeddingSet:
    inventory_id: str
    vectors: Mapping[str, EmbeddingVector]
    backend_tag: str

    def __post_init__(self):
        object.__setattr__(self, "vectors", dict(self.vectors))
        dims = {v.dimension for v in self.vectors.values()}
        if len(dims) > 1:
            raise ValidationError(f"mixed embedding dimensions in set: {sorted(dims)}")

    @property
    def dimension(self) -> int:
        return next(iter(self.vectors.values())).dimension

    def matrix(self, item_ids: Iterable[str]) -> np.ndarray:
        return np.stack([self.vectors[i].values for i in item_ids])


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Clamped cosine similarity in [0, 1]; symmetric and scale invariant."""
    if u.dimension != v.dimension:
        raise ValidationError(f"dimension mismatch: {u.dimension} vs {v.dimension}")
    if u.norm == 0.0 or v.norm == 0.0:
        raise ValidationError("cosine similarity of a zero vector is undefined")
    raw = float(np.dot(u.values, v.values)) / (u.norm * v.norm)
    return min(1.0, max(0.0, raw))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Complete |source| x |target| matrix of clamped cosine similarities."""

    source_inventory_id: str
    target_inventory_id: str
    source_item_ids: tuple[str, ...]
    target_item_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_item_ids", tuple(self.source_item_ids))
        object.__setattr__(self, "target_item_ids", tuple(self.target_item_ids))
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (len(self.source_item_ids), len(self.target_item_ids)):
            raise ValidationError(
                f"matrix shape {arr.shape} does not match "
                f"{len(self.source_item_ids)}x{len(self.target_item_ids)} items"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("similarity matrix has non-finite entries")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValidationError("similarity matrix entries must lie in [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def entry(self, source_item: str, target_item: str) -> float:
        i = self.source_item_ids.index(source_item)
        j = self.target_item_ids.index(target_item)
        return float(self.values[i, j])


def similarity_matrix(ea: EmbeddingSet, eb: EmbeddingSet) -> SimilarityMatrix:
    """All-pairs clamped cosine similarity between two embedding sets."""
    if ea.dimension != eb.dimension:
        raise ValidationError(
            f"dimension mismatch between sets: {ea.dimension} vs {eb.dimension}"
        )
    a_ids = tuple(ea.vectors.keys())
    b_ids = tuple(eb.vectors.keys())
    a = ea.matrix(a_ids)
    b = eb.matrix(b_ids)
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    sims = np.clip(a @ b.T, 0.0, 1.0)
    return SimilarityMatrix(
        source_inventory_id=ea.inventory_id,
        target_inventory_id=eb.inventory_id,
        source_item_ids=a_ids,
        target_item_ids=b_ids,
        values=sims,
    )


class ClosestPair(NamedTuple):
    item_id: str
    match_item_id: str
    similarity: float


def closest_pairs(
    m: SimilarityMatrix, direction: str = "source->target"
) -> list[ClosestPair]:
    """Best match per item, sorted by descending similarity (stable).

    "source->target" yields one entry per target item (its most similar
    source item); "target->source" yields one entry per source item.
    Ties take the lowest matching index.
    """
    if direction == "source->target":
        per_item = m.target_item_ids
        match_pool = m.source_item_ids
        best = np.argmax(m.values, axis=0)  # argmax returns lowest index on ties
        sims = m.values[best, np.arange(len(per_item))]
    elif direction == "target->source":
        per_item = m.source_item_ids
        match_pool = m.target_item_ids
        best = np.argmax(m.values, axis=1)
        sims = m.values[np.arange(len(per_item)), best]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    pairs = [
        ClosestPair(item_id=pid, match_item_id=match_pool[b], similarity=float(s))
        for pid, b, s in zip(per_item, best, sims)
    ]
    pairs.sort(key=lambda p: -p.similarity)  # stable: equal scores keep item order
    return pairs


class PairRow(NamedTuple):
    pair_tag: str
    source_item: str
    target_item: str
    similarity: float


def pair_report(matrices: Iterable[SimilarityMatrix]) -> list[PairRow]:
    """All item pairs of all matrices, sorted descending by S within pair tag."""
    rows: list[PairRow] = []
    for m in matrices:
        tag = f"{m.source_inventory_id}->{m.target_inventory_id}"
        block = [
            PairRow(tag, a, b, float(m.values[i, j]))
            for i, a in enumerate(m.source_item_ids)
            for j, b in enumerate(m.target_item_ids)
        ]
        block.sort(key=lambda r: -r.similarity)
        rows.extend(block)
    return rows


def format_pair_report(rows: Iterable[PairRow]) -> str:
    lines = ["pair_tag,source_item,target_item,similarity"]
    for row in rows:
        lines.append(f"{row.pair_tag},{row.source_item},{row.target_item},{row.similarity:.4f}")
    return "\n".join(lines) + "\n"


def load_embeddings(path: str | Path, inventory: Inventory) -> EmbeddingSet:
    """Load an embedding vector file and check it against the inventory."""
    try:
        doc = read_json(path)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("backend_tag", "dimension", "vectors"):
        if key not in doc:
            raise FormatError(f"{path}: missing field {key!r}")
    dimension = int(doc["dimension"])
    raw_vectors = doc["vectors"]
    vectors: dict[str, EmbeddingVector] = {}
    for item_id in inventory.item_ids:
        if item_id not in raw_vectors:
            raise ValidationError(f"{path}: missing embedding for item {item_id!r}")
        vec = EmbeddingVector(values=np.asarray(raw_vectors[item_id], dtype=np.float64))
        if vec.dimension != dimension:
            raise ValidationError(
                f"{path}: item {item_id!r} has dimension {vec.dimension}, expected {dimension}"
            )
        vectors[item_id] = vec
    return EmbeddingSet(
        inventory_id=inventory.inventory_id,
        vectors=vectors,
        backend_tag=str(doc["backend_tag"]),
    )


def serialize_embeddings(es: EmbeddingSet) -> dict:
    return {
        "backend_tag": es.backend_tag,
        "dimension": es.dimension,
        "vectors": {k: [float(x) for x in v.values] for k, v in es.vectors.items()},
    }


def fetch_embeddings(
    endpoint: str,
    inventory: Inventory,
    batch_size: int = 128,
    timeout: float = 60.0,
    max_workers: int = 1,
) -> EmbeddingSet:
    """Fetch one vector per item text from an embedding service.

    The service contract is POST {endpoint}/embed with {"texts": [...]}
    returning {"model": str, "vectors": [[...], ...]} in input order.
    Batches run concurrently when max_workers > 1; results keep item order.
    """
    texts = list(inventory.item_texts())
    batches = [texts[i : i + batch_size] for i in range(0, len(texts), batch_size)]
    url = endpoint.rstrip("/") + "/embed"

    def fetch_batch(batch: list[str]) -> tuple[str, list[list[float]]]:
        try:
            resp = httpx.post(url, json={"texts": batch}, timeout=timeout)
            resp.raise_for_status()
            body = resp.json()
        except httpx.HTTPError as exc:
            raise EmbeddingServiceError(f"embedding service request failed: {exc}") from exc
        if "model" not in body or "vectors" not in body:
            raise EmbeddingServiceError("embedding service response missing 'model'/'vectors'")
        if len(body["vectors"]) != len(batch):
            raise EmbeddingServiceError(
                f"partial response: sent {len(batch)} texts, got {len(body['vectors'])} vectors"
            )
        return str(body["model"]), body["vectors"]

    if max_workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(fetch_batch, batches))
    else:
        results = [fetch_batch(b) for b in batches]

    model = results[0][0] if results else "unknown"
    all_vectors: list[list[float]] = []
    for _, vecs in results:
        all_vectors.extend(vecs)

    dims = {len(v) for v in all_vectors}
    if len(dims) > 1:
        raise EmbeddingServiceError(f"dimension drift across batches: {sorted(dims)}")

    vectors = {
        item_id: EmbeddingVector(values=np.asarray(vec, dtype=np.float64))
        for item_id, vec in zip(inventory.item_ids, all_vectors)
    }
    log.info(
        "fetched %d vectors (dim %d) from %s via model %s",
        len(vectors),
        next(iter(dims)) if dims else 0,
        endpoint,
        model,
    )
    return EmbeddingSet(inventory_id=inventory.inventory_id, vectors=vectors, backend_tag=model)
