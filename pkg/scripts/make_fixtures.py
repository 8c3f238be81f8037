#!/usr/bin/env python3
"""Regenerate the committed demo fixtures under fixtures/.

Everything is deterministic: hashed-trigram embeddings, a seeded
latent-trait demo cohort for the two demo inventories, the crosswalk model
built from them, and golden request/response captures used by the CLI,
service, and web UI tests.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from symptom_crosswalk.crosswalk import build_model, save_model  # noqa: E402
from symptom_crosswalk.embedding import serialize_embeddings, similarity_matrix  # noqa: E402
from symptom_crosswalk.inventory import parse_inventory, parse_scores  # noqa: E402
from symptom_crosswalk.jsonio import atomic_write_json, atomic_write_text  # noqa: E402
from symptom_crosswalk.synthetic import hashed_embedding_set  # noqa: E402

FIXTURES = ROOT / "fixtures"
TAU = 0.3
COHORT_SEED = 1129
N_PARTICIPANTS = 60

GSS6 = {
    "inventory_id": "gss6",
    "name": "General Symptom Screen (6 items)",
    "reference_period": "past 7 days",
    "scale": {"labels": ["Not at all", "A little", "Moderately", "Quite a bit", "Extremely"]},
    "items": [
        {"item_id": "g01", "text": "Headaches or head pressure"},
        {"item_id": "g02", "text": "Feeling dizzy or lightheaded"},
        {"item_id": "g03", "text": "Trouble falling or staying asleep"},
        {"item_id": "g04", "text": "Feeling easily annoyed or irritable"},
        {"item_id": "g05", "text": "Difficulty concentrating on tasks"},
        {"item_id": "g06", "text": "Feeling sad or low in spirits"},
    ],
}

BCS5 = {
    "inventory_id": "bcs5",
    "name": "Brief Concussion Symptom Checklist (5 items)",
    "reference_period": "past 24 hours",
    "scale": {"labels": ["None", "Mild", "Moderate", "Severe", "Very severe"]},
    "items": [
        {"item_id": "c01", "text": "Head pain or pressure", "group": "Somatic"},
        {"item_id": "c02", "text": "Dizziness or faintness", "group": "Somatic"},
        {"item_id": "c03", "text": "Sleep disturbance", "group": "Somatic"},
        {"item_id": "c04", "text": "Irritability", "group": "Affective"},
        {"item_id": "c05", "text": "Poor concentration", "group": "Cognitive"},
    ],
}

# concept index per item: paired items share latent structure
CONCEPTS_A = {"g01": 0, "g02": 1, "g03": 2, "g04": 3, "g05": 4, "g06": 5}
CONCEPTS_B = {"c01": 0, "c02": 1, "c03": 2, "c04": 3, "c05": 4}

GOLDEN_RESPONSES = {"g01": 1, "g02": 2, "g03": 0, "g04": 3, "g05": 1, "g06": 4}


def make_cohort_csv() -> str:
    rng = np.random.default_rng(COHORT_SEED)
    n_concepts = 6
    theta = rng.normal(size=N_PARTICIPANTS)
    concept_effects = rng.normal(size=(N_PARTICIPANTS, n_concepts)) * 0.5
    base = np.array([-0.8, 0.0, 0.8, 1.6])

    def score(i, concept, shift):
        raw = theta[i] + concept_effects[i, concept] + rng.normal(scale=0.5)
        return int(np.searchsorted(base + shift, raw))

    lines = ["participant_id,inventory_id,item_id,score,age,sex,timestamp"]
    for i in range(N_PARTICIPANTS):
        pid = f"d{i + 1:03d}"
        age = f"{rng.uniform(19, 80):.0f}" if rng.random() > 0.1 else ""
        sex = rng.choice(["female", "male", ""], p=[0.4, 0.5, 0.1])
        for item, concept in CONCEPTS_A.items():
            lines.append(f"{pid},gss6,{item},{score(i, concept, 0.0)},{age},{sex},")
        for item, concept in CONCEPTS_B.items():
            lines.append(f"{pid},bcs5,{item},{score(i, concept, 0.3)},{age},{sex},")
    # one repeated administration to exercise dedup paths downstream
    dup = [f"d001,bcs5,{item},{(v + 1) % 5},{''},{''},2030-01-01"
           for item, v in (("c01", 1), ("c02", 2), ("c03", 3), ("c04", 4), ("c05", 0))]
    lines.extend(dup)
    return "\n".join(lines) + "\n"


def main() -> None:
    atomic_write_json(FIXTURES / "inventories" / "gss6.json", GSS6)
    atomic_write_json(FIXTURES / "inventories" / "bcs5.json", BCS5)
    inv_a = parse_inventory(FIXTURES / "inventories" / "gss6.json")
    inv_b = parse_inventory(FIXTURES / "inventories" / "bcs5.json")

    ea = hashed_embedding_set(inv_a)
    eb = hashed_embedding_set(inv_b)
    atomic_write_json(FIXTURES / "embeddings" / "gss6.json", serialize_embeddings(ea))
    atomic_write_json(FIXTURES / "embeddings" / "bcs5.json", serialize_embeddings(eb))

    scores_path = FIXTURES / "scores" / "demo_cohort.csv"
    atomic_write_text(scores_path, make_cohort_csv())
    cohort = parse_scores(scores_path, [inv_a, inv_b])

    model = build_model(
        similarity_matrix(ea, eb), cohort, inv_a, inv_b,
        tau=TAU, backend_tag=ea.backend_tag,
    )
    save_model(model, FIXTURES / "models" / "gss6_to_bcs5.json")
    print(f"model: {len(model.fallbacks)} fallback item(s): {sorted(model.fallbacks)}")

    # golden API capture for UI/CLI equivalence tests
    from fastapi.testclient import TestClient

    from symptom_crosswalk.service import build_state, create_app

    request = {
        "source": "gss6",
        "target": "bcs5",
        "mode": "deterministic",
        "responses": GOLDEN_RESPONSES,
    }
    app = create_app(build_state([inv_a, inv_b], [model]))
    with TestClient(app) as client:
        response = client.post("/v1/convert", json=request)
        response.raise_for_status()
        body = response.json()
        listing = client.get("/v1/inventories")
        listing.raise_for_status()
    atomic_write_json(FIXTURES / "golden" / "convert_request.json", request)
    atomic_write_json(FIXTURES / "golden" / "convert_response.json", body)
    atomic_write_json(FIXTURES / "golden" / "inventories_response.json", listing.json())

    # matching single-participant CLI conversion input and output
    lines = ["participant_id,inventory_id,item_id,score,age,sex,timestamp"]
    for item, value in GOLDEN_RESPONSES.items():
        lines.append(f"golden,gss6,{item},{value},,,")
    atomic_write_text(FIXTURES / "golden" / "convert_input.csv", "\n".join(lines) + "\n")

    from symptom_crosswalk.cli import run

    out = FIXTURES / "golden" / "cli_convert_output.csv"
    status = run([
        "convert",
        "--model", str(FIXTURES / "models" / "gss6_to_bcs5.json"),
        "--scores", str(FIXTURES / "golden" / "convert_input.csv"),
        "--mode", "det",
        "--out", str(out),
    ])
    if status != 0:
        raise SystemExit(f"cli convert failed with status {status}")
    print("fixtures written under", FIXTURES)


if __name__ == "__main__":
    main()
