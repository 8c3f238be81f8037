"""HTTP API serving loaded crosswalk models for conversion.

State is loaded once at startup and never mutated; every conversion is a
pure call into the library, so responses are reproducible and the service
stores nothing about submitted scores.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .crosswalk import CrosswalkModel, convert_participant, load_model
from .errors import ValidationError
from .inventory import Inventory, parse_inventory

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServiceState:
    inventories: Mapping[str, Inventory]
    models: Mapping[tuple[str, str], CrosswalkModel]

    def __post_init__(self):
        object.__setattr__(self, "inventories", dict(self.inventories))
        object.__setattr__(self, "models", dict(self.models))
        for (source, target), model in self.models.items():
            for inv_id in (source, target):
                if inv_id not in self.inventories:
                    raise ValidationError(
                        f"model {source}->{target} references unloaded inventory {inv_id!r}"
                    )
            target_items = set(self.inventories[target].item_ids)
            if set(model.link_map.links.keys()) != target_items:
                raise ValidationError(
                    f"model {source}->{target} does not cover all items of {target!r}"
                )
            source_items = set(self.inventories[source].item_ids)
            if not set(model.source_item_ids) <= source_items:
                raise ValidationError(
                    f"model {source}->{target} references items outside {source!r}"
                )


def build_state(
    inventories: list[Inventory], models: list[CrosswalkModel]
) -> ServiceState:
    inv_map: dict[str, Inventory] = {}
    for inv in inventories:
        if inv.inventory_id in inv_map:
            raise ValidationError(f"duplicate inventory id {inv.inventory_id!r}")
        inv_map[inv.inventory_id] = inv
    model_map: dict[tuple[str, str], CrosswalkModel] = {}
    for model in models:
        key = (model.source_inventory_id, model.target_inventory_id)
        if key in model_map:
            raise ValidationError(f"duplicate crosswalk direction {key[0]}->{key[1]}")
        model_map[key] = model
    return ServiceState(inventories=inv_map, models=model_map)


def load_service_state(
    inventory_paths: list[str], model_paths: list[str]
) -> ServiceState:
    inventories = [parse_inventory(p) for p in inventory_paths]
    models = [load_model(p) for p in model_paths]
    return build_state(inventories, models)


class ConvertRequest(BaseModel):
    source: str
    target: str
    mode: str = "deterministic"
    seed: int | None = None
    responses: dict[str, int]


def _inventory_payload(inv: Inventory) -> dict:
    items = []
    for item in inv.items:
        entry = {
            "item_id": item.item_id,
            "text": item.text,
            "scale_labels": list(item.scale.labels),
        }
        if item.group is not None:
            entry["group"] = item.group
        items.append(entry)
    return {
        "inventory_id": inv.inventory_id,
        "name": inv.name,
        "reference_period": inv.reference_period,
        "items": items,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="symptom-crosswalk", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/v1/inventories")
    def list_inventories():
        return [_inventory_payload(inv) for inv in state.inventories.values()]

    @app.get("/v1/crosswalks")
    def list_crosswalks():
        return [
            {
                "source": source,
                "target": target,
                "tau": model.tau,
                "backend_tag": model.backend_tag,
            }
            for (source, target), model in state.models.items()
        ]

    @app.post("/v1/convert")
    def convert(request: ConvertRequest):
        model = state.models.get((request.source, request.target))
        if model is None:
            raise HTTPException(
                status_code=404,
                detail=f"no crosswalk loaded for {request.source}->{request.target}",
            )
        if request.mode not in ("deterministic", "stochastic"):
            raise HTTPException(
                status_code=422,
                detail={"message": f"unknown mode {request.mode!r}", "offending_items": []},
            )
        if request.mode == "stochastic" and request.seed is None:
            raise HTTPException(
                status_code=422,
                detail={
                    "message": "stochastic mode requires an explicit seed",
                    "offending_items": [],
                },
            )
        required = set(model.source_item_ids)
        provided = set(request.responses.keys())
        offending = sorted(required - provided) + sorted(provided - required)
        offending += sorted(
            item for item, score in request.responses.items()
            if item in required and score not in (0, 1, 2, 3, 4)
        )
        if offending:
            raise HTTPException(
                status_code=422,
                detail={
                    "message": "responses must cover every source item with scores 0..4",
                    "offending_items": offending,
                },
            )
        estimates = convert_participant(
            model, request.responses, mode=request.mode, seed=request.seed
        )
        return {
            "estimates": estimates,
            "method": {item: model.method_for(item) for item in estimates},
            "link_info": {
                item: {
                    "source_item": model.link_map.links[item].source_item_id,
                    "similarity": model.link_map.links[item].similarity,
                }
                for item in estimates
            },
        }

    return app


def run_service(state: ServiceState, bind: str = "127.0.0.1:8000") -> None:
    import uvicorn

    host, _, port = bind.partition(":")
    uvicorn.run(create_app(state), host=host or "127.0.0.1", port=int(port or 8000))
