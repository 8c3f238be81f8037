#!/usr/bin/env python3
"""Reference embedding service: wraps a sentence-transformers model behind
the engine's embed-batch contract (POST /embed {"texts": [...]} ->
{"model": ..., "vectors": [...]}).

Run:  python scripts/embed_service.py [--model NAME] [--bind HOST:PORT]
Needs the sentence-transformers package and downloadable model weights;
the engine itself never imports them.
"""
from __future__ import annotations

import argparse
import os


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--model",
        default=os.environ.get("CROSSWALK_ST_MODEL", "sentence-transformers/all-MiniLM-L6-v2"),
    )
    parser.add_argument("--bind", default="127.0.0.1:8900")
    args = parser.parse_args()

    from fastapi import FastAPI
    from pydantic import BaseModel
    from sentence_transformers import SentenceTransformer
    import uvicorn

    encoder = SentenceTransformer(args.model)

    class EmbedRequest(BaseModel):
        texts: list[str]

    app = FastAPI(title="embedding-service")

    @app.post("/embed")
    def embed(request: EmbedRequest):
        vectors = encoder.encode(request.texts, convert_to_numpy=True)
        return {"model": args.model, "vectors": [v.tolist() for v in vectors]}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    host, _, port = args.bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8900))


if __name__ == "__main__":
    main()
