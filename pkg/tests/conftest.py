import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

# wall-clock health checks flake under machine load; keep the assertions,
# drop the timing heuristics
hypothesis_settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
hypothesis_settings.load_profile("ci")

from symptom_crosswalk.inventory import (
    Administration,
    Cohort,
    Inventory,
    Item,
    LikertScale,
    ParticipantRecord,
)
from symptom_crosswalk.synthetic import hashed_text_embedding

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SCALE = LikertScale(("Not at all", "A little", "Moderately", "Quite a bit", "Extremely"))


def make_inventory(inventory_id: str, n_items: int, prefix: str = "q") -> Inventory:
    items = tuple(
        Item(item_id=f"{prefix}{k:02d}", text=f"symptom {prefix}{k:02d} description", scale=SCALE)
        for k in range(1, n_items + 1)
    )
    return Inventory(inventory_id, f"Inventory {inventory_id}", "past 7 days", items)


def make_record(pid, inventory_id, scores, age=None, sex="unknown", timestamp=None, order=0):
    return ParticipantRecord(
        participant_id=pid,
        administrations=(
            Administration(inventory_id=inventory_id, scores=scores,
                           timestamp=timestamp, file_order=order),
        ),
        age=age,
        sex=sex,
    )


def cohort_from_columns(inventory: Inventory, columns: dict[str, list[int]]) -> Cohort:
    """Build a complete cohort from per-item score columns of equal length."""
    n = len(next(iter(columns.values())))
    records = []
    for i in range(n):
        scores = {item: columns[item][i] for item in inventory.item_ids}
        records.append(make_record(f"p{i + 1:03d}", inventory.inventory_id, scores, order=i))
    return Cohort(records=tuple(records))


@pytest.fixture
def small_inventory():
    return make_inventory("inv_a", 3, prefix="a")


@pytest.fixture(scope="session")
def fixture_paths():
    """Paths of the committed demo fixtures used by CLI/service tests."""
    paths = {
        "inventory_a": FIXTURES / "inventories" / "gss6.json",
        "inventory_b": FIXTURES / "inventories" / "bcs5.json",
        "embeddings_a": FIXTURES / "embeddings" / "gss6.json",
        "embeddings_b": FIXTURES / "embeddings" / "bcs5.json",
        "scores": FIXTURES / "scores" / "demo_cohort.csv",
        "model": FIXTURES / "models" / "gss6_to_bcs5.json",
        "golden_request": FIXTURES / "golden" / "convert_request.json",
        "golden_response": FIXTURES / "golden" / "convert_response.json",
    }
    for p in paths.values():
        assert p.exists(), f"missing fixture {p}; run scripts/make_fixtures.py"
    return paths


class _EmbedHandler(BaseHTTPRequestHandler):
    behavior = "ok"  # ok | partial | drift
    calls = 0

    def do_POST(self):
        if self.path != "/embed":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        texts = body["texts"]
        type(self).calls += 1
        dim = 16 if type(self).behavior == "drift" and type(self).calls % 2 == 0 else 8
        vectors = [list(hashed_text_embedding(t, dim=dim).values) for t in texts]
        if type(self).behavior == "partial" and vectors:
            vectors = vectors[:-1]
        payload = json.dumps({"model": "test-hash-backend", "vectors": vectors}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def embed_server():
    """Local HTTP embedding service implementing the embed-batch contract."""
    handler = type("Handler", (_EmbedHandler,), {"behavior": "ok", "calls": 0})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_address[1]}"
    yield url, handler
    server.shutdown()
    thread.join()
