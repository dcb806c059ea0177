"""Level-2 approximate nearest-neighbor index over segment vectors.

Hierarchical navigable small-world graph with cosine similarity. Vectors are
unit-norm, so distance is computed as 1 - dot. Construction follows the
standard scheme: geometric level sampling, greedy descent through the upper
layers, beam search at each insertion layer, diversity-aware neighbor
selection with pruned-candidate backfill, and bidirectional links capped at M
per layer (2M at the base layer).

Level sampling uses a seeded RNG recorded in the manifest so graphs are
bit-reproducible. ``exact_knn`` is the exhaustive oracle against which the
graph search is verified; both score entries through the same per-node dot
product so their rankings are comparable float-for-float.
"""

from __future__ import annotations

import heapq
import json
import math
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DuplicateSegment, InvalidVector, PersistenceError
from .model import UNIT_NORM_TOL, VECTOR_DIM

FORMAT_VERSION = 1

SegmentKey = tuple[str, int]


@dataclass(frozen=True)
class HnswParams:
    """Graph construction and search parameters.

    Level assignment is geometric with factor 1/ln(M).
    """

    m: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    seed: int = 1318

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("M must be >= 2")
        if self.ef_construction < self.m:
            raise ValueError("ef_construction must be >= M")

    @property
    def m_base(self) -> int:
        """Doubled max degree at layer 0."""
        return 2 * self.m

    @property
    def level_factor(self) -> float:
        return 1.0 / math.log(self.m)


class HnswIndex:
    """Append-only HNSW graph over (doc_id, segment_ordinal) keyed vectors."""

    def __init__(self, params: HnswParams = HnswParams()):
        self.params = params
        self._rng = random.Random(params.seed)
        self._draws = 0
        self._keys: list[SegmentKey] = []
        self._key_to_idx: dict[SegmentKey, int] = {}
        self._vectors: list[np.ndarray] = []
        self._levels: list[int] = []
        # per node: list over layers 0..level of neighbor id lists
        self._neighbors: list[list[list[int]]] = []
        self._entry: Optional[int] = None
        self._max_level = -1

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: SegmentKey) -> bool:
        return key in self._key_to_idx

    @property
    def keys(self) -> list[SegmentKey]:
        return list(self._keys)

    # -- distance ------------------------------------------------------------

    def _dist_to_query(self, idx: int, query: np.ndarray) -> float:
        return 1.0 - float(np.dot(self._vectors[idx], query))

    def _dist_between(self, i: int, j: int) -> float:
        return 1.0 - float(np.dot(self._vectors[i], self._vectors[j]))

    # -- construction ----------------------------------------------------------

    def _sample_level(self) -> int:
        self._draws += 1
        u = self._rng.random()
        if u <= 0.0:
            u = 1e-300
        return int(-math.log(u) * self.params.level_factor)

    def insert_vector(self, key: SegmentKey, vector: np.ndarray) -> None:
        """Insert one unit vector; the entry stays reachable from the entry point."""
        if key in self._key_to_idx:
            raise DuplicateSegment(str(key))
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (VECTOR_DIM,):
            raise InvalidVector(f"expected {VECTOR_DIM} components, got {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > UNIT_NORM_TOL or not np.isfinite(vec).all():
            raise InvalidVector(f"vector must be unit-norm and finite, norm={norm}")

        idx = len(self._keys)
        level = self._sample_level()
        self._keys.append(key)
        self._key_to_idx[key] = idx
        self._vectors.append(vec)
        self._levels.append(level)
        self._neighbors.append([[] for _ in range(level + 1)])

        if self._entry is None:
            self._entry = idx
            self._max_level = level
            return

        ep = [self._entry]
        for layer in range(self._max_level, level, -1):
            ep = [e for _, e in self._search_layer(vec, ep, 1, layer)]

        for layer in range(min(level, self._max_level), -1, -1):
            candidates = self._search_layer(
                vec, ep, self.params.ef_construction, layer
            )
            m_max = self.params.m_base if layer == 0 else self.params.m
            selected = self._select_neighbors(candidates, self.params.m, from_idx=None)
            self._neighbors[idx][layer] = list(selected)
            for e in selected:
                links = self._neighbors[e][layer]
                links.append(idx)
                if len(links) > m_max:
                    pruned = self._select_neighbors(
                        [(self._dist_between(e, x), x) for x in links],
                        m_max,
                        from_idx=e,
                    )
                    self._neighbors[e][layer] = list(pruned)
            ep = [e for _, e in candidates]

        if level > self._max_level:
            self._entry = idx
            self._max_level = level

    def _select_neighbors(
        self,
        candidates: list[tuple[float, int]],
        m: int,
        from_idx: Optional[int],
    ) -> list[int]:
        """Diversity-aware selection: keep a candidate only if it is closer to
        the query than to every already-selected neighbor, then backfill with
        the nearest pruned candidates up to m."""
        ordered = sorted(candidates)
        selected: list[tuple[float, int]] = []
        discarded: list[tuple[float, int]] = []
        for d_e, e in ordered:
            if from_idx is not None and e == from_idx:
                continue
            if len(selected) >= m:
                discarded.append((d_e, e))
                continue
            diverse = True
            for _, r in selected:
                if self._dist_between(e, r) < d_e:
                    diverse = False
                    break
            if diverse:
                selected.append((d_e, e))
            else:
                discarded.append((d_e, e))
        for d_e, e in discarded:
            if len(selected) >= m:
                break
            selected.append((d_e, e))
        return [e for _, e in selected]

    def _search_layer(
        self, query: np.ndarray, entry_points: list[int], ef: int, layer: int
    ) -> list[tuple[float, int]]:
        """Beam search within one layer; returns up to ef (distance, id) pairs."""
        visited = set(entry_points)
        candidates: list[tuple[float, int]] = []
        results: list[tuple[float, int]] = []  # max-heap via negated distance
        for e in entry_points:
            d = self._dist_to_query(e, query)
            heapq.heappush(candidates, (d, e))
            heapq.heappush(results, (-d, e))
        while candidates:
            d_c, c = heapq.heappop(candidates)
            if d_c > -results[0][0]:
                break
            for e in self._neighbors[c][layer] if layer < len(self._neighbors[c]) else []:
                if e in visited:
                    continue
                visited.add(e)
                d_e = self._dist_to_query(e, query)
                if len(results) < ef or d_e < -results[0][0]:
                    heapq.heappush(candidates, (d_e, e))
                    heapq.heappush(results, (-d_e, e))
                    if len(results) > ef:
                        heapq.heappop(results)
        return [(-nd, e) for nd, e in results]

    # -- search ----------------------------------------------------------------

    def _ranked(self, scored: list[tuple[float, int]], k: int) -> list[tuple[SegmentKey, float]]:
        """Order by cosine descending, then key ascending; truncate to k."""
        by_key = sorted(
            ((1.0 - d, self._keys[i]) for d, i in scored),
            key=lambda pair: (-pair[0], pair[1]),
        )
        return [(key, cos) for cos, key in by_key[:k]]

    def knn_search(
        self, query: np.ndarray, k: int, ef: Optional[int] = None
    ) -> list[tuple[SegmentKey, float]]:
        """Approximate top-k (key, cosine) pairs via graph beam search."""
        if k <= 0 or self._entry is None:
            return []
        if ef is None:
            ef = max(self.params.ef_search, k)
        if ef < k:
            raise ValueError(f"ef ({ef}) must be >= k ({k})")
        q = np.asarray(query, dtype=np.float32)
        ep = [self._entry]
        for layer in range(self._max_level, 0, -1):
            ep = [e for _, e in self._search_layer(q, ep, 1, layer)]
        results = self._search_layer(q, ep, ef, 0)
        return self._ranked(results, k)

    def exact_knn(self, query: np.ndarray, k: int) -> list[tuple[SegmentKey, float]]:
        """Exhaustive-scan oracle under the same ordering rules as knn_search."""
        if k <= 0 or not self._keys:
            return []
        q = np.asarray(query, dtype=np.float32)
        scored = [(self._dist_to_query(i, q), i) for i in range(len(self._keys))]
        return self._ranked(scored, k)

    # -- introspection (graph invariants) ---------------------------------------

    def reachable_from_entry(self) -> int:
        """Number of nodes reachable from the entry point over layer-0 links."""
        if self._entry is None:
            return 0
        seen = {self._entry}
        frontier = [self._entry]
        while frontier:
            nxt = []
            for node in frontier:
                for nb in self._neighbors[node][0]:
                    if nb not in seen:
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt
        return len(seen)

    def check_graph_invariants(self) -> list[str]:
        """Degree caps, no dangling references, single entry point."""
        problems = []
        for idx, layers in enumerate(self._neighbors):
            for layer, links in enumerate(layers):
                cap = self.params.m_base if layer == 0 else self.params.m
                if len(links) > cap:
                    problems.append(f"node {idx} layer {layer} degree {len(links)} > {cap}")
                if len(set(links)) != len(links):
                    problems.append(f"node {idx} layer {layer} has duplicate links")
                for nb in links:
                    if not 0 <= nb < len(self._keys):
                        problems.append(f"node {idx} layer {layer} dangling link {nb}")
                    elif layer >= len(self._neighbors[nb]):
                        problems.append(
                            f"node {idx} links to {nb} above its top layer at {layer}"
                        )
        if self._keys and self._entry is None:
            problems.append("non-empty index without entry point")
        return problems

    # -- persistence -------------------------------------------------------------

    def save(self, directory: Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "format": FORMAT_VERSION,
            "m": self.params.m,
            "ef_construction": self.params.ef_construction,
            "ef_search": self.params.ef_search,
            "seed": self.params.seed,
            "count": len(self._keys),
            "entry": self._entry,
            "max_level": self._max_level,
            "draws": self._draws,
        }
        graph = {
            "manifest": manifest,
            "keys": [[d, o] for d, o in self._keys],
            "levels": self._levels,
            "neighbors": self._neighbors,
        }
        with open(directory / "hnsw.json", "w", encoding="utf-8") as fh:
            json.dump(graph, fh, sort_keys=True, separators=(",", ":"))
        with open(directory / "vectors.f32", "wb") as fh:
            for vec in self._vectors:
                fh.write(struct.pack(f"<{VECTOR_DIM}f", *vec.tolist()))

    @classmethod
    def load(cls, directory: Path) -> "HnswIndex":
        directory = Path(directory)
        graph_path = directory / "hnsw.json"
        if not graph_path.exists():
            raise PersistenceError(f"missing {graph_path}")
        with open(graph_path, encoding="utf-8") as fh:
            graph = json.load(fh)
        manifest = graph["manifest"]
        if manifest.get("format") != FORMAT_VERSION:
            raise PersistenceError(
                f"vector index format {manifest.get('format')} != {FORMAT_VERSION}"
            )
        params = HnswParams(
            m=manifest["m"],
            ef_construction=manifest["ef_construction"],
            ef_search=manifest["ef_search"],
            seed=manifest["seed"],
        )
        index = cls(params)
        index._keys = [(d, o) for d, o in graph["keys"]]
        index._key_to_idx = {key: i for i, key in enumerate(index._keys)}
        index._levels = graph["levels"]
        index._neighbors = graph["neighbors"]
        index._entry = manifest["entry"]
        index._max_level = manifest["max_level"]
        for _ in range(manifest["draws"]):
            index._rng.random()
        index._draws = manifest["draws"]
        row_bytes = VECTOR_DIM * 4
        with open(directory / "vectors.f32", "rb") as fh:
            data = fh.read()
        if len(data) != row_bytes * manifest["count"]:
            raise PersistenceError("vectors.f32 size does not match manifest count")
        for i in range(manifest["count"]):
            row = np.frombuffer(
                data, dtype="<f4", count=VECTOR_DIM, offset=i * row_bytes
            )
            index._vectors.append(np.ascontiguousarray(row, dtype=np.float32))
        return index
