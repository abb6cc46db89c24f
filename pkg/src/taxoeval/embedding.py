"""Text embedding providers and the clipped-cosine similarity primitive.

Every hierarchy-level metric in this package reduces label comparison to
``sim(x, y) = max(0, cos(e(x), e(y)))`` for some sentence encoder ``e``.
Two encoders are shipped: a deterministic offline hash encoder (the default
for tests and CI) and an HTTP client for a real sentence-encoder service.
Both produce unit-norm float32 vectors, so cosine is a plain dot product.
"""
from __future__ import annotations

import hashlib
import os
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence

import httpx
import numpy as np

__all__ = [
    "EmbeddingError",
    "TransportError",
    "EncoderProvider",
    "HashEncoder",
    "RemoteEncoder",
    "EmbeddingCache",
    "EmbeddingSimilarity",
    "TableSimilarity",
    "as_similarity",
    "embed",
    "sim",
    "renaming_cost",
    "normalize_text",
]

DEFAULT_REMOTE_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
ENDPOINT_ENV_VAR = "TAXOEVAL_ENDPOINT"


class EmbeddingError(RuntimeError):
    """Embedding could not be produced (bad input, bad response shape)."""


class TransportError(EmbeddingError):
    """Remote encoder unreachable or persistently failing; distinct from
    validation problems so callers can abort a batch run cleanly."""


def normalize_text(text: str) -> str:
    """Trim and collapse internal whitespace. Casing is preserved; label
    casing may carry signal for real encoders."""
    return " ".join(text.split())


class EncoderProvider(Protocol):
    """A deterministic batch text encoder producing unit-norm vectors."""

    identity: str

    @property
    def dimension(self) -> int: ...

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    return (matrix / safe).astype(np.float32)


class HashEncoder:
    """Offline test encoder: each whitespace token is hashed to a fixed
    pseudo-random unit direction, token vectors are averaged and the result
    renormalized.

    Identical texts therefore embed identically, texts with overlapping
    token sets get similarity strictly between 0 and 1, and disjoint token
    sets are nearly orthogonal. If averaging cancels exactly (degenerate),
    the zero vector is returned and cosine against it is defined as 0.
    """

    def __init__(self, dimension: int = 64, seed: int = 0):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self._dimension = dimension
        self._seed = seed
        self.identity = f"test-hash-v1-d{dimension}-s{seed}"
        self._token_vectors: dict[str, np.ndarray] = {}

    @property
    def dimension(self) -> int:
        return self._dimension

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_vectors.get(token)
        if vec is None:
            digest = hashlib.sha256(f"{self._seed}:{token}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            raw = rng.standard_normal(self._dimension)
            vec = (raw / np.linalg.norm(raw)).astype(np.float32)
            self._token_vectors[token] = vec
        return vec

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self._dimension), dtype=np.float32)
        for row, text in enumerate(texts):
            tokens = text.split()
            if not tokens:
                raise EmbeddingError("cannot embed empty text")
            acc = np.zeros(self._dimension, dtype=np.float32)
            for token in tokens:
                acc += self._token_vector(token)
            acc /= np.float32(len(tokens))
            norm = float(np.linalg.norm(acc))
            # degenerate cancellation keeps the zero vector; sim() maps it to 0
            out[row] = acc / np.float32(norm) if norm > 1e-12 else 0.0
        return out


class RemoteEncoder:
    """Client for the HTTP embedding protocol: POST /embed with
    ``{"model": id, "texts": [...]}`` returning ``{"dimension": d,
    "vectors": [[...], ...]}`` with order-preserving unit-norm rows."""

    def __init__(
        self,
        endpoint: str | None = None,
        model: str = DEFAULT_REMOTE_MODEL,
        timeout: float = 30.0,
        retries: int = 2,
        batch_size: int = 128,
        transport: httpx.BaseTransport | None = None,
    ):
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise ValueError(
                f"remote encoder needs an endpoint (flag or {ENDPOINT_ENV_VAR})"
            )
        self.endpoint = endpoint.rstrip("/")
        self.identity = model
        self.timeout = timeout
        self.retries = retries
        self.batch_size = batch_size
        self._dimension: int | None = None
        self._client = httpx.Client(timeout=timeout, transport=transport)

    @property
    def dimension(self) -> int:
        if self._dimension is None:
            # resolved lazily from the first /embed response
            self.encode(["dimension probe"])
        assert self._dimension is not None
        return self._dimension

    def _post_batch(self, texts: Sequence[str]) -> np.ndarray:
        payload = {"model": self.identity, "texts": list(texts)}
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(f"{self.endpoint}/embed", json=payload)
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt < self.retries:
                    time.sleep(0.2 * (attempt + 1))
                continue
            if response.status_code == 503 and attempt < self.retries:
                time.sleep(0.5 * (attempt + 1))
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"embedding service returned {response.status_code}: "
                    f"{response.text[:200]}"
                )
            body = response.json()
            vectors = np.asarray(body.get("vectors"), dtype=np.float32)
            if vectors.ndim != 2 or vectors.shape[0] != len(texts):
                raise EmbeddingError("embedding service returned a malformed batch")
            self._dimension = int(body.get("dimension", vectors.shape[1]))
            return _unit_rows(vectors)
        raise TransportError(f"embedding service unreachable: {last_exc}")

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        if any(not t.strip() for t in texts):
            raise EmbeddingError("cannot embed empty text")
        chunks = [
            self._post_batch(texts[i : i + self.batch_size])
            for i in range(0, len(texts), self.batch_size)
        ]
        return np.vstack(chunks) if chunks else np.zeros((0, 0), dtype=np.float32)

    def close(self) -> None:
        self._client.close()


_CACHE_MAGIC = b"TXEC"


class EmbeddingCache:
    """Vector cache keyed by (encoder identity, SHA-256 of normalized text).

    Optionally backed by an append-only file so batch runs never re-embed a
    label. Records hold little-endian float32 components; since providers
    emit float32, cached and fresh vectors are bitwise identical. Concurrent
    readers are safe; writers are serialized; duplicate writes of the same
    key are idempotent.
    """

    def __init__(self, path: str | os.PathLike[str] | None = None):
        self._store: dict[tuple[str, bytes], np.ndarray] = {}
        self._lock = threading.Lock()
        self._path = os.fspath(path) if path is not None else None
        if self._path is not None and os.path.exists(self._path):
            self._load_file()

    @staticmethod
    def _key(identity: str, text: str) -> tuple[str, bytes]:
        return identity, hashlib.sha256(text.encode("utf-8")).digest()

    def _load_file(self) -> None:
        assert self._path is not None
        with open(self._path, "rb") as fh:
            data = fh.read()
        pos = 0
        while pos < len(data):
            # stop at a truncated trailing record (interrupted append)
            if data[pos : pos + 4] != _CACHE_MAGIC:
                break
            pos += 4
            try:
                (id_len,) = struct.unpack_from("<H", data, pos)
                pos += 2
                identity = data[pos : pos + id_len].decode("utf-8")
                pos += id_len
                digest = data[pos : pos + 32]
                pos += 32
                (dim,) = struct.unpack_from("<I", data, pos)
                pos += 4
                vec = np.frombuffer(data, dtype="<f4", count=dim, offset=pos).copy()
                pos += 4 * dim
            except (struct.error, ValueError):
                break
            self._store[(identity, digest)] = vec

    def _append_record(self, identity: str, digest: bytes, vector: np.ndarray) -> None:
        assert self._path is not None
        ident = identity.encode("utf-8")
        record = b"".join(
            [
                _CACHE_MAGIC,
                struct.pack("<H", len(ident)),
                ident,
                digest,
                struct.pack("<I", vector.shape[0]),
                vector.astype("<f4").tobytes(),
            ]
        )
        with open(self._path, "ab") as fh:
            fh.write(record)

    def get(self, identity: str, text: str) -> np.ndarray | None:
        return self._store.get(self._key(identity, text))

    def put(self, identity: str, text: str, vector: np.ndarray) -> None:
        key = self._key(identity, text)
        with self._lock:
            if key in self._store:
                return
            vec = np.asarray(vector, dtype=np.float32).copy()
            self._store[key] = vec
            if self._path is not None:
                self._append_record(identity, key[1], vec)

    def __len__(self) -> int:
        return len(self._store)


def embed(
    provider: EncoderProvider, text: str, cache: EmbeddingCache | None = None
) -> np.ndarray:
    """Embed one text as a unit-norm float32 vector, via the cache if given."""
    normalized = normalize_text(text)
    if not normalized:
        raise EmbeddingError("cannot embed empty text")
    if cache is not None:
        hit = cache.get(provider.identity, normalized)
        if hit is not None:
            return hit
    vector = np.asarray(provider.encode([normalized])[0], dtype=np.float32)
    if cache is not None:
        cache.put(provider.identity, normalized, vector)
    return vector


def _cosine(x: np.ndarray, y: np.ndarray) -> float:
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x.astype(np.float64), y.astype(np.float64)) / (nx * ny))


def sim(
    x: str, y: str, provider: EncoderProvider, cache: EmbeddingCache | None = None
) -> float:
    """Clipped cosine similarity in [0, 1]; identical texts score exactly 1."""
    if normalize_text(x) == normalize_text(y):
        return 1.0
    value = _cosine(embed(provider, x, cache), embed(provider, y, cache))
    return min(1.0, max(0.0, value))


def renaming_cost(
    x: str, y: str, provider: EncoderProvider, cache: EmbeddingCache | None = None
) -> float:
    """1 - sim(x, y): the cost of renaming label x into label y."""
    return 1.0 - sim(x, y, provider, cache)


class EmbeddingSimilarity:
    """Similarity provider backing the metrics: an encoder plus caches.

    Pairwise results are memoized per instance, so repeated label
    comparisons inside tree recursions cost one dict lookup.
    """

    def __init__(self, provider: EncoderProvider, cache: EmbeddingCache | None = None):
        self.provider = provider
        self.cache = cache if cache is not None else EmbeddingCache()
        self._pair_memo: dict[tuple[str, str], float] = {}

    @property
    def identity(self) -> str:
        return self.provider.identity

    def warm(self, texts: Iterable[str]) -> None:
        """Batch-encode texts into the cache (one request for remote encoders)."""
        pending: list[str] = []
        seen: set[str] = set()
        for text in texts:
            normalized = normalize_text(text)
            if not normalized or normalized in seen:
                continue
            seen.add(normalized)
            if self.cache.get(self.provider.identity, normalized) is None:
                pending.append(normalized)
        if not pending:
            return
        vectors = self.provider.encode(pending)
        for text, vector in zip(pending, vectors):
            self.cache.put(self.provider.identity, text, vector)

    def sim(self, x: str, y: str) -> float:
        a, b = normalize_text(x), normalize_text(y)
        if a == b:
            return 1.0
        key = (a, b) if a <= b else (b, a)
        value = self._pair_memo.get(key)
        if value is None:
            value = sim(a, b, self.provider, self.cache)
            self._pair_memo[key] = value
        return value

    def cost(self, x: str, y: str) -> float:
        return 1.0 - self.sim(x, y)


@dataclass(frozen=True)
class TableSimilarity:
    """Similarity given by an explicit symmetric table; used for analytic
    tests whose similarity patterns no real embedding geometry can realize.

    Missing pairs fall back to ``default``; sim(x, x) is always 1.
    """

    table: Mapping[tuple[str, str], float] = field(default_factory=dict)
    default: float = 0.0

    def sim(self, x: str, y: str) -> float:
        if x == y:
            return 1.0
        value = self.table.get((x, y))
        if value is None:
            value = self.table.get((y, x), self.default)
        return min(1.0, max(0.0, float(value)))

    def cost(self, x: str, y: str) -> float:
        return 1.0 - self.sim(x, y)


def as_similarity(provider) -> EmbeddingSimilarity | TableSimilarity:
    """Accept either an encoder or a ready similarity provider."""
    if hasattr(provider, "sim") and hasattr(provider, "cost"):
        return provider
    if hasattr(provider, "encode"):
        return EmbeddingSimilarity(provider)
    raise TypeError(f"not an encoder or similarity provider: {provider!r}")
