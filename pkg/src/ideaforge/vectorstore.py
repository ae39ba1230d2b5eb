"""Recursive character splitting plus embedded vector collections.

Collections are exact: every query is a brute-force linear scan, ordered by
ascending distance with ties broken by ascending entry id. Persistence is a
manifest + raw float32 matrix + texts JSONL per collection, written
temp-then-rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    CorruptStore,
    DimensionMismatch,
    DuplicateId,
    EmptyCollection,
    ZeroVector,
)
from .providers import EmbeddingVector

DEFAULT_CHUNK_SIZE = 3000
DEFAULT_SEPARATORS = ("\n\n", "\n", ". ", " ", "")


@dataclass(frozen=True)
class ChunkingPolicy:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = 0
    separators: tuple[str, ...] = DEFAULT_SEPARATORS

    def __post_init__(self):
        if self.chunk_size <= 0:
            raise ValueError("chunk_size must be positive")
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")


@dataclass(frozen=True)
class Chunk:
    text: str
    paper_id: str
    seq: int
    char_span: tuple[int, int]

    @property
    def entry_id(self) -> str:
        return f"{self.paper_id}:{self.seq}"


class Metric(str, Enum):
    """Distance conventions, all oriented lower = more similar."""

    COSINE = "cosine"          # 1 - cos(theta)
    EUCLIDEAN = "euclidean"    # L2 norm of the difference
    INNER_PRODUCT = "inner_product"  # negated dot product


def _split_keep_separator(text: str, sep: str) -> list[str]:
    # separator stays attached to the preceding piece so pieces rejoin exactly
    parts = text.split(sep)
    return [p + sep for p in parts[:-1]] + [parts[-1]]


def _merge_pieces(pieces: Iterable[str], size: int) -> list[str]:
    merged: list[str] = []
    buf: list[str] = []
    buf_len = 0
    for piece in pieces:
        if buf and buf_len + len(piece) > size:
            merged.append("".join(buf))
            buf, buf_len = [piece], len(piece)
        else:
            buf.append(piece)
            buf_len += len(piece)
    if buf:
        merged.append("".join(buf))
    return merged


def _split_recursive(text: str, separators: Sequence[str], size: int) -> list[str]:
    if len(text) <= size:
        return [text]
    for index, sep in enumerate(separators):
        if sep == "":
            return [text[i:i + size] for i in range(0, len(text), size)]
        if sep not in text:
            continue
        pieces = _split_keep_separator(text, sep)
        remaining = separators[index + 1:]
        expanded: list[str] = []
        for piece in pieces:
            if len(piece) > size:
                expanded.extend(_split_recursive(piece, remaining, size))
            else:
                expanded.append(piece)
        return _merge_pieces(expanded, size)
    # no separator applies: hard slice
    return [text[i:i + size] for i in range(0, len(text), size)]


def split_text(text: str, policy: ChunkingPolicy = ChunkingPolicy(),
               paper_id: str = "") -> list[Chunk]:
    """Split recursively on the separator list; chunks never exceed chunk_size.

    With overlap=0 the chunk texts concatenate back to the input exactly.
    With overlap>0 each chunk after the first is prefixed with the tail of its
    predecessor, and the zero-overlap pass uses chunk_size - overlap so the
    size cap still holds.
    """
    if not text:
        raise ValueError("text must be non-empty")
    effective = policy.chunk_size - policy.overlap
    parts = _split_recursive(text, policy.separators, effective)

    chunks: list[Chunk] = []
    pos = 0
    for seq, part in enumerate(parts):
        if policy.overlap and seq > 0:
            carry = parts[seq - 1][-policy.overlap:]
            chunks.append(Chunk(
                text=carry + part,
                paper_id=paper_id,
                seq=seq,
                char_span=(pos - len(carry), pos + len(part)),
            ))
        else:
            chunks.append(Chunk(
                text=part,
                paper_id=paper_id,
                seq=seq,
                char_span=(pos, pos + len(part)),
            ))
        pos += len(part)
    return chunks


def distance(a: EmbeddingVector, b: EmbeddingVector, metric: Metric) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} vs {b.dimension}")
    va = a.values.astype(np.float64)
    vb = b.values.astype(np.float64)
    if metric is Metric.COSINE:
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
        if na == 0.0 or nb == 0.0:
            raise ZeroVector("cosine distance is undefined for the zero vector")
        return 1.0 - float(np.dot(va, vb)) / (na * nb)
    if metric is Metric.EUCLIDEAN:
        return float(np.linalg.norm(va - vb))
    return -float(np.dot(va, vb))


@dataclass
class Hit:
    entry_id: str
    distance: float
    text: str
    metadata: dict


class Collection:
    """Named set of (id, vector, metadata, text) entries with one dimension."""

    def __init__(self, name: str, dimension: int, metric: Metric = Metric.COSINE):
        self.name = name
        self.dimension = dimension
        self.metric = metric
        self.ids: list[str] = []
        self.metadatas: list[dict] = []
        self.texts: list[str] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._index: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self._index

    def add(self, entries: Iterable[tuple[str, EmbeddingVector, dict, str]]) -> list[str]:
        added: list[str] = []
        for entry_id, vector, metadata, text in entries:
            if vector.dimension != self.dimension:
                raise DimensionMismatch(
                    f"entry {entry_id}: vector dim {vector.dimension}, "
                    f"collection dim {self.dimension}"
                )
            if entry_id in self._index:
                raise DuplicateId(entry_id)
            self._index[entry_id] = len(self.ids)
            self.ids.append(entry_id)
            self.metadatas.append(dict(metadata))
            self.texts.append(text)
            self._rows.append(vector.values)
            added.append(entry_id)
        self._matrix = None
        return added

    def add_chunks(self, chunks: Sequence[Chunk], vectors: Sequence[EmbeddingVector],
                   conference: str | None = None) -> list[str]:
        """Entry ids are paper_id:seq; metadata records paper_id, conference, seq."""
        if len(chunks) != len(vectors):
            raise ValueError("chunks and vectors must have equal length")
        entries = []
        for chunk, vector in zip(chunks, vectors):
            metadata = {"paper_id": chunk.paper_id, "seq": chunk.seq}
            if conference is not None:
                metadata["conference"] = conference
            entries.append((chunk.entry_id, vector, metadata, chunk.text))
        return self.add(entries)

    def get_vector(self, entry_id: str) -> EmbeddingVector:
        row = self._rows[self._index[entry_id]]
        return EmbeddingVector.of(row)

    def get_text(self, entry_id: str) -> str:
        return self.texts[self._index[entry_id]]

    def matrix(self) -> np.ndarray:
        if self._matrix is None or self._matrix.shape[0] != len(self._rows):
            if self._rows:
                self._matrix = np.vstack(self._rows).astype(np.float32)
            else:
                self._matrix = np.zeros((0, self.dimension), dtype=np.float32)
        return self._matrix

    def query(self, probe: EmbeddingVector, k: int, metric: Metric | None = None,
              where: Callable[[dict], bool] | None = None) -> list[Hit]:
        """Top-k by ascending distance, ties broken by ascending entry id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if probe.dimension != self.dimension:
            raise DimensionMismatch(
                f"probe dim {probe.dimension}, collection dim {self.dimension}"
            )
        if not self.ids:
            raise EmptyCollection(self.name)
        metric = metric or self.metric

        rows = self.matrix().astype(np.float64)
        p = probe.values.astype(np.float64)
        if metric is Metric.COSINE:
            pnorm = float(np.linalg.norm(p))
            if pnorm == 0.0:
                raise ZeroVector("cosine query probe is the zero vector")
            norms = np.linalg.norm(rows, axis=1)
            if np.any(norms == 0.0):
                raise ZeroVector("collection contains a zero vector under cosine")
            dists = 1.0 - (rows @ p) / (norms * pnorm)
        elif metric is Metric.EUCLIDEAN:
            dists = np.linalg.norm(rows - p, axis=1)
        else:
            dists = -(rows @ p)

        mask = np.ones(len(self.ids), dtype=bool)
        if where is not None:
            mask = np.array([where(m) for m in self.metadatas], dtype=bool)
        candidates = np.nonzero(mask)[0]
        if candidates.size == 0:
            return []
        id_arr = np.array(self.ids, dtype=object)[candidates]
        order = np.lexsort((id_arr, dists[candidates]))
        top = candidates[order[:k]]
        return [
            Hit(self.ids[i], float(dists[i]), self.texts[i], dict(self.metadatas[i]))
            for i in top
        ]


class VectorStore:
    """Directory of persisted collections: <root>/<name>/{manifest.json,vectors.f32,texts.jsonl}."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, name: str) -> Path:
        return self.root / name

    def exists(self, name: str) -> bool:
        return (self.path_for(name) / "manifest.json").is_file()

    def list_collections(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "manifest.json").is_file())

    def persist(self, collection: Collection) -> Path:
        target = self.path_for(collection.name)
        target.mkdir(parents=True, exist_ok=True)
        matrix = collection.matrix()

        manifest = {
            "name": collection.name,
            "dimension": collection.dimension,
            "count": len(collection),
            "metric": collection.metric.value,
            "ids": collection.ids,
            "metadata": collection.metadatas,
        }
        self._write_atomic(target / "vectors.f32",
                           matrix.astype("<f4").tobytes(order="C"))
        texts_payload = "".join(
            json.dumps({"id": i, "text": t}, ensure_ascii=False) + "\n"
            for i, t in zip(collection.ids, collection.texts)
        )
        self._write_atomic(target / "texts.jsonl", texts_payload.encode("utf-8"))
        # manifest last: its presence marks the collection as complete
        self._write_atomic(target / "manifest.json",
                           json.dumps(manifest, ensure_ascii=False).encode("utf-8"))
        return target

    def load(self, name: str) -> Collection:
        target = self.path_for(name)
        manifest_path = target / "manifest.json"
        if not manifest_path.is_file():
            raise CorruptStore(f"no manifest for collection {name!r}")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptStore(f"unreadable manifest for {name!r}: {exc}") from exc

        count = manifest["count"]
        dimension = manifest["dimension"]
        raw = (target / "vectors.f32").read_bytes()
        expected = count * dimension * 4
        if len(raw) != expected:
            raise CorruptStore(
                f"{name!r}: vectors.f32 holds {len(raw)} bytes, expected {expected}"
            )
        matrix = np.frombuffer(raw, dtype="<f4").reshape(count, dimension)

        texts_by_id: dict[str, str] = {}
        with open(target / "texts.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    texts_by_id[row["id"]] = row["text"]
        ids = manifest["ids"]
        if len(ids) != count or len(manifest["metadata"]) != count:
            raise CorruptStore(f"{name!r}: manifest id/metadata length mismatch")
        missing = [i for i in ids if i not in texts_by_id]
        if missing:
            raise CorruptStore(f"{name!r}: texts.jsonl missing ids {missing[:3]}")

        collection = Collection(name, dimension, Metric(manifest["metric"]))
        collection.add(
            (entry_id, EmbeddingVector.of(matrix[i]), manifest["metadata"][i],
             texts_by_id[entry_id])
            for i, entry_id in enumerate(ids)
        )
        return collection

    @staticmethod
    def _write_atomic(path: Path, payload: bytes):
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
