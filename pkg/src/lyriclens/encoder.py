"""Text encoding on top of a pretrained distilled-transformer checkpoint.

Two products: token sequences (ids + attention mask) for fine-tuning, and
mean-pooled sentence embeddings for the regression bench. Pooling is
mask-aware, so padding never leaks into a vector. Corpus embeddings are
cached on disk as a raw float32 matrix with a JSON index sidecar, keyed by
(checkpoint id, max_len, text hash).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .corpus import CuratedDataset

log = logging.getLogger(__name__)

DEFAULT_MAX_LEN = 256
MODEL_DIR_ENV = "MODEL_DIR"


class EncoderError(Exception):
    pass


@dataclass(frozen=True)
class TokenSequence:
    input_ids: tuple
    attention_mask: tuple
    text_hash: str
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.input_ids)

    @property
    def real_length(self) -> int:
        return int(sum(self.attention_mask))


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray  # (H,) float32
    source_hash: str

    def __len__(self) -> int:
        return len(self.values)


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def resolve_model_dir(explicit: str | Path | None = None) -> str:
    """Checkpoint location: explicit argument, else $MODEL_DIR, else the
    published base checkpoint name (requires network/cache to resolve)."""
    if explicit:
        return str(explicit)
    env = os.environ.get(MODEL_DIR_ENV)
    if env:
        return env
    return "distilbert-base-uncased"


class LyricsEncoder:
    """Wraps a checkpoint (tokenizer + transformer) for encoding and pooling.

    The model is loaded once, put in eval mode, and shared read-only. The
    checkpoint id is a digest over the config and all weights, so two
    different checkpoints never alias in caches or artifact validation.
    """

    def __init__(self, model_dir: str | Path | None = None, max_len: int = DEFAULT_MAX_LEN, device: str = "cpu"):
        from transformers import AutoModel, AutoTokenizer

        self.model_dir = resolve_model_dir(model_dir)
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(self.model_dir)
            self.model = AutoModel.from_pretrained(self.model_dir)
        except Exception as exc:
            raise EncoderError(f"cannot load checkpoint {self.model_dir!r}: {exc}") from exc
        self.model.to(device)
        self.model.eval()
        self.device = device
        self.hidden_size = int(self.model.config.dim if hasattr(self.model.config, "dim") else self.model.config.hidden_size)
        self.model_max_len = int(getattr(self.model.config, "max_position_embeddings", 512))
        self._validate_max_len(max_len)
        self.max_len = max_len
        self.checkpoint_id = self._fingerprint()

    def _validate_max_len(self, max_len: int) -> None:
        ceiling = min(512, self.model_max_len)
        if not 8 <= max_len <= ceiling:
            raise ValueError(f"max_len must be in [8, {ceiling}], got {max_len}")

    def _fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.model.config.to_dict(), sort_keys=True, default=str).encode())
        for name, tensor in sorted(self.model.state_dict().items()):
            h.update(name.encode())
            h.update(tensor.detach().cpu().numpy().tobytes())
        return h.hexdigest()[:16]

    # -- tokenization -------------------------------------------------------

    def encode(self, text: str, max_len: int | None = None) -> TokenSequence:
        return self.encode_batch([text], max_len)[0]

    def encode_batch(self, texts: Sequence[str], max_len: int | None = None) -> list[TokenSequence]:
        max_len = max_len or self.max_len
        self._validate_max_len(max_len)
        enc = self.tokenizer(
            list(texts),
            truncation=True,
            max_length=max_len,
            padding="max_length",
        )
        # second pass truncated one token later reveals which inputs overflowed
        probe = self.tokenizer(list(texts), truncation=True, max_length=max_len + 1)
        out = []
        for text, ids, mask, longer in zip(texts, enc["input_ids"], enc["attention_mask"], probe["input_ids"]):
            out.append(
                TokenSequence(
                    input_ids=tuple(ids),
                    attention_mask=tuple(mask),
                    text_hash=text_digest(text),
                    truncated=len(longer) > max_len,
                )
            )
        return out

    # -- embedding ----------------------------------------------------------

    def token_embeddings(self, sequences: Sequence[TokenSequence]) -> np.ndarray:
        """Final-layer contextual embeddings, shape (B, L, H)."""
        ids = torch.tensor([s.input_ids for s in sequences], dtype=torch.long, device=self.device)
        mask = torch.tensor([s.attention_mask for s in sequences], dtype=torch.long, device=self.device)
        with torch.no_grad():
            hidden = self.model(input_ids=ids, attention_mask=mask).last_hidden_state
        return hidden.cpu().numpy().astype(np.float32)

    def embed(self, item: TokenSequence | Sequence[TokenSequence]) -> EmbeddingVector | list[EmbeddingVector]:
        """Mean-pool final-layer embeddings over attention-mask-1 positions."""
        single = isinstance(item, TokenSequence)
        sequences = [item] if single else list(item)
        if not sequences:
            raise ValueError("empty batch")
        hidden = self.token_embeddings(sequences)
        mask = np.array([s.attention_mask for s in sequences], dtype=np.float32)[:, :, None]
        pooled = (hidden * mask).sum(axis=1) / np.maximum(mask.sum(axis=1), 1.0)
        pooled = pooled.astype(np.float32)
        if not np.all(np.isfinite(pooled)):
            raise EncoderError("non-finite values in pooled embeddings")
        vectors = [EmbeddingVector(values=v, source_hash=s.text_hash) for v, s in zip(pooled, sequences)]
        return vectors[0] if single else vectors

    def embed_texts(self, texts: Sequence[str], batch_size: int = 32, max_len: int | None = None) -> np.ndarray:
        """Embed raw texts in batches; rows follow input order."""
        rows = []
        for start in range(0, len(texts), batch_size):
            chunk = texts[start : start + batch_size]
            seqs = self.encode_batch(chunk, max_len)
            rows.extend(v.values for v in self.embed(seqs))
        return np.vstack(rows) if rows else np.zeros((0, self.hidden_size), dtype=np.float32)


# ---------------------------------------------------------------------------
# embedding cache: <name>.f32 raw row-major matrix + <name>.index sidecar


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    forward_passes: int = 0
    rebuilt: bool = False


def _cache_paths(cache_path: str | Path) -> tuple[Path, Path]:
    base = Path(cache_path)
    return base.with_suffix(".f32"), base.with_suffix(".index")


def _load_cache(cache_path: Path, checkpoint_id: str, max_len: int, hidden_size: int) -> dict[str, np.ndarray]:
    """Map text_hash -> vector for a valid cache; {} when absent or stale."""
    matrix_path, index_path = _cache_paths(cache_path)
    if not (matrix_path.exists() and index_path.exists()):
        return {}
    try:
        index = json.loads(index_path.read_text(encoding="utf-8"))
        if index["checkpoint_id"] != checkpoint_id or index["max_len"] != max_len:
            return {}
        if index["hidden_size"] != hidden_size:
            return {}
        hashes = [row["text_hash"] for row in index["rows"]]
        matrix = np.fromfile(matrix_path, dtype=np.float32)
        if matrix.size != len(hashes) * hidden_size:
            raise ValueError("matrix size does not match index")
        matrix = matrix.reshape(len(hashes), hidden_size)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        log.warning("embedding cache at %s is corrupt (%s); rebuilding", cache_path, exc)
        return {"__corrupt__": np.zeros(0, dtype=np.float32)}
    return dict(zip(hashes, matrix))


def embed_corpus(
    encoder: LyricsEncoder,
    dataset: CuratedDataset,
    cache_path: str | Path,
    batch_size: int = 32,
) -> tuple[np.ndarray, list[str], CacheStats]:
    """One embedding row per dataset record, in dataset order, cached on disk.

    Cache hits skip the model entirely; a corrupt cache is rebuilt with a
    warning. Returns (matrix, record ids, stats).
    """
    stats = CacheStats()
    cached = _load_cache(Path(cache_path), encoder.checkpoint_id, encoder.max_len, encoder.hidden_size)
    if "__corrupt__" in cached:
        cached = {}
        stats.rebuilt = True

    texts = [r.lyrics for r in dataset.records]
    hashes = [text_digest(t) for t in texts]
    missing_idx = [i for i, h in enumerate(hashes) if h not in cached]
    stats.hits = len(texts) - len(missing_idx)
    stats.misses = len(missing_idx)

    fresh: dict[str, np.ndarray] = {}
    for start in range(0, len(missing_idx), batch_size):
        chunk = missing_idx[start : start + batch_size]
        seqs = encoder.encode_batch([texts[i] for i in chunk])
        vectors = encoder.embed(seqs)
        stats.forward_passes += 1
        for i, vec in zip(chunk, vectors):
            fresh[hashes[i]] = vec.values

    matrix = np.zeros((len(texts), encoder.hidden_size), dtype=np.float32)
    for i, h in enumerate(hashes):
        matrix[i] = fresh.get(h, cached.get(h))

    matrix_path, index_path = _cache_paths(Path(cache_path))
    matrix_path.parent.mkdir(parents=True, exist_ok=True)
    matrix.tofile(matrix_path)
    index = {
        "checkpoint_id": encoder.checkpoint_id,
        "hidden_size": encoder.hidden_size,
        "max_len": encoder.max_len,
        "dtype": "float32",
        "rows": [{"id": r.id, "text_hash": h} for r, h in zip(dataset.records, hashes)],
    }
    index_path.write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")
    return matrix, [r.id for r in dataset.records], stats


def load_embedding_matrix(cache_path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Read a cache written by embed_corpus; returns (matrix, record ids)."""
    matrix_path, index_path = _cache_paths(Path(cache_path))
    index = json.loads(index_path.read_text(encoding="utf-8"))
    ids = [row["id"] for row in index["rows"]]
    matrix = np.fromfile(matrix_path, dtype=np.float32).reshape(len(ids), index["hidden_size"])
    return matrix, ids
