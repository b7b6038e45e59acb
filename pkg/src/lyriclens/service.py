"""HTTP inference service: genre, success, and year predictions plus
sentiment for submitted lyrics.

The registry loads every artifact once at boot, validates that classifier
backbones came from the same base checkpoint as the shared encoder and that
the regressor matches its hidden size, and is immutable afterwards, so
concurrent identical requests produce identical bodies (modulo latency).

No postponed annotations here: the request model is function-local and
FastAPI must see real annotation objects to treat it as the body schema.
"""

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import load_lexicon, sentiment_score
from .classifier import ClassifierArtifact, NoContentError
from .corpus import clean_lyrics
from .encoder import LyricsEncoder
from .regressor import RegressorArtifact, predict_year

log = logging.getLogger(__name__)
access_log = logging.getLogger("lyriclens.service.access")

DEFAULT_MAX_BODY_BYTES = 64 * 1024
TASKS = ("genre", "success", "year")


class RegistryError(Exception):
    """Fatal boot problem: missing artifact, checkpoint or dimension mismatch."""


@dataclass
class ServiceConfig:
    model_dir: str | Path | None = None  # encoder checkpoint
    artifact_paths: dict = field(default_factory=dict)  # task -> artifact dir
    lexicon_path: str | Path | None = None
    max_len: int = 256
    max_body_bytes: int = DEFAULT_MAX_BODY_BYTES


class ModelRegistry:
    """Loaded artifacts plus the shared encoder, read-only after boot."""

    def __init__(
        self,
        encoder: LyricsEncoder,
        genre: ClassifierArtifact | None = None,
        success: ClassifierArtifact | None = None,
        year: RegressorArtifact | None = None,
        lexicon: dict | None = None,
    ):
        self.encoder = encoder
        self.genre = genre
        self.success = success
        self.year = year
        self.lexicon = lexicon or load_lexicon()
        # inference is serialized: the fast tokenizers mutate internal state
        # per call, and single-threaded model math keeps responses bit-stable
        self._infer_lock = threading.Lock()
        self._validate()

    def _validate(self) -> None:
        for task in ("genre", "success"):
            artifact = getattr(self, task)
            if artifact is None:
                continue
            if artifact.checkpoint_id != self.encoder.checkpoint_id:
                raise RegistryError(
                    f"{task} artifact was fine-tuned from checkpoint {artifact.checkpoint_id} "
                    f"but the encoder runs {self.encoder.checkpoint_id}"
                )
        if self.year is not None:
            if self.year.hidden_size != self.encoder.hidden_size:
                raise RegistryError(
                    f"year artifact expects {self.year.hidden_size}-dim embeddings "
                    f"but the encoder produces {self.encoder.hidden_size}-dim"
                )
            trained_on = getattr(self.year, "embedding_checkpoint_id", "")
            if trained_on and trained_on != self.encoder.checkpoint_id:
                raise RegistryError(
                    f"year artifact was trained on embeddings from checkpoint {trained_on} "
                    f"but the encoder runs {self.encoder.checkpoint_id}"
                )

    def missing(self) -> list[str]:
        return [task for task in TASKS if getattr(self, task) is None]

    def model_ids(self) -> dict:
        return {
            task: getattr(self, task).artifact_id
            for task in TASKS
            if getattr(self, task) is not None
        }

    def predict(self, lyrics: str) -> dict:
        """Run clean -> encode -> three predictions + sentiment."""
        missing = self.missing()
        if missing:
            raise RegistryError(f"models unavailable: {missing}")
        started = time.monotonic()
        cleaned = clean_lyrics(lyrics)
        if not cleaned:
            raise NoContentError("no content: lyrics empty after cleaning")
        with self._infer_lock:
            genre_dist = self.genre.predict(cleaned)
            success_dist = self.success.predict(cleaned)
            embedding = self.encoder.embed(self.encoder.encode(cleaned))
            year = predict_year(self.year, embedding.values)
        sentiment = sentiment_score(cleaned, self.lexicon)
        latency_ms = (time.monotonic() - started) * 1000.0
        return {
            "genre": {"label": genre_dist.label, "probs": genre_dist.probs},
            "success": {
                "label": success_dist.label,
                "prob_success": success_dist.probs.get("success", 0.0),
            },
            "year": {"raw_estimate": year.raw_estimate, "display_year": year.display_year},
            "sentiment": {"value": sentiment},
            "model_ids": self.model_ids(),
            "checkpoint_id": self.encoder.checkpoint_id,
            "latency_ms": latency_ms,
        }


def load_registry(config: ServiceConfig) -> ModelRegistry:
    """Boot-time artifact loading; any configured path that fails is fatal."""
    encoder = LyricsEncoder(model_dir=config.model_dir, max_len=config.max_len)
    loaded: dict = {"genre": None, "success": None, "year": None}
    for task, path in config.artifact_paths.items():
        if task not in TASKS:
            raise RegistryError(f"unknown task {task!r} in artifact config")
        path = Path(path)
        try:
            if task == "year":
                loaded[task] = RegressorArtifact.load(path)
            else:
                loaded[task] = ClassifierArtifact.load(path)
        except FileNotFoundError as exc:
            raise RegistryError(f"cannot load {task} artifact from {path}: {exc}") from exc
    lexicon = load_lexicon(config.lexicon_path) if config.lexicon_path else None
    return ModelRegistry(encoder=encoder, lexicon=lexicon, **loaded)


def create_app(registry: ModelRegistry | None, max_body_bytes: int = DEFAULT_MAX_BODY_BYTES):
    """FastAPI app over a loaded registry (None = still loading)."""
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    class PredictRequest(BaseModel):
        lyrics: str

    app = FastAPI(title="lyriclens", version="0.1.0")
    # the dashboard is served statically from another origin; no auth here
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    def error(status_code: int, code: str, message: str, **extra) -> JSONResponse:
        return JSONResponse(status_code=status_code, content={"code": code, "message": message, **extra})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return error(422, "invalid_request", "request body does not match the expected schema")

    @app.middleware("http")
    async def guard_and_log(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None:
            try:
                if int(length) > max_body_bytes:
                    return error(413, "payload_too_large", f"request body exceeds {max_body_bytes} bytes")
            except ValueError:
                pass
        started = time.monotonic()
        response = await call_next(request)
        access_log.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "duration_ms": round((time.monotonic() - started) * 1000.0, 3),
                }
            )
        )
        return response

    @app.get("/api/health")
    async def health():
        if registry is None:
            return error(503, "loading", "models are still loading", status="loading")
        missing = registry.missing()
        if missing:
            return error(
                503, "model_unavailable", f"missing artifacts: {missing}",
                status="unavailable", missing=missing,
            )
        return {
            "status": "ok",
            "loaded_models": registry.model_ids(),
            "checkpoint_id": registry.encoder.checkpoint_id,
        }

    @app.get("/api/models")
    async def models():
        if registry is None:
            return error(503, "loading", "models are still loading")
        return {
            "checkpoint_id": registry.encoder.checkpoint_id,
            "models": registry.model_ids(),
            "missing": registry.missing(),
        }

    @app.post("/api/predict")
    async def predict(request: PredictRequest):
        if registry is None:
            return error(503, "loading", "models are still loading")
        missing = registry.missing()
        if missing:
            return error(503, "model_unavailable", f"missing artifacts: {missing}", missing=missing)
        try:
            return registry.predict(request.lyrics)
        except NoContentError:
            return error(422, "no_content", "lyrics are empty after cleaning")

    return app
