"""Weighted undirected graphs, Laplacians and the random sensor-graph generator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from signcone.errors import DisconnectedGraph, GenerationFailure, InvalidEdge, ValidationError

Edge = tuple[int, int, float]

SIGMA_NEIGHBOR = 6
EDGE_TOLERANCE = 0.10
MAX_TUNING_ATTEMPTS = 20


@dataclass(frozen=True)
class Graph:
    """Connected undirected graph; edges stored once as ``(i, j, w)`` with ``i < j``."""

    n: int
    edges: tuple[Edge, ...]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            W[i, j] = w
            W[j, i] = w
        return W

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # attach larger root under smaller so component labels are deterministic
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _num_components(n: int, pairs) -> int:
    ds = _DisjointSet(n)
    count = n
    for i, j, *_ in pairs:
        if ds.union(i, j):
            count -= 1
    return count


def build_graph(n: int, edges) -> Graph:
    """Validate an edge list and return a :class:`Graph`.

    Edges may be given in either orientation; they are normalised to ``i < j``
    and sorted.
    """
    if n < 1:
        raise ValidationError(f"graph needs at least one vertex, got n={n}")
    seen = set()
    clean: list[Edge] = []
    for edge in edges:
        if len(edge) != 3:
            raise InvalidEdge(f"edge must be (i, j, w), got {edge!r}")
        i, j, w = int(edge[0]), int(edge[1]), float(edge[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidEdge(f"edge ({i}, {j}) has a vertex id outside [0, {n})")
        if i == j:
            raise InvalidEdge(f"self-loop at vertex {i}")
        if not np.isfinite(w) or w <= 0:
            raise InvalidEdge(f"edge ({i}, {j}) has non-positive weight {w}")
        a, b = min(i, j), max(i, j)
        if (a, b) in seen:
            raise InvalidEdge(f"duplicate edge ({a}, {b})")
        seen.add((a, b))
        clean.append((a, b, w))
    clean.sort(key=lambda e: (e[0], e[1]))
    if _num_components(n, clean) != 1:
        raise DisconnectedGraph(f"graph with n={n} and {len(clean)} edges is not connected")
    return Graph(n=n, edges=tuple(clean))


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - W``."""
    W = g.adjacency()
    return np.diag(W.sum(axis=1)) - W


def _count_below(dist_pairs: np.ndarray, cutoff: float) -> int:
    return int(np.count_nonzero(dist_pairs < cutoff))


def _bisect_cutoff(dist_pairs: np.ndarray, desired: int, iters: int = 200) -> float:
    """Cutoff whose edge count ``#(d < cutoff)`` is closest to ``desired``."""
    lo, hi = 0.0, float(dist_pairs.max()) * (1 + 1e-9) + 1e-12
    best, best_gap = hi, abs(_count_below(dist_pairs, hi) - desired)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        count = _count_below(dist_pairs, mid)
        gap = abs(count - desired)
        if gap < best_gap or (gap == best_gap and mid < best):
            best, best_gap = mid, gap
        if count == desired:
            break
        if count < desired:
            lo = mid
        else:
            hi = mid
    return best


def gen_sensor_graph(n: int, target_edges: int, seed: int) -> Graph:
    """Random geometric sensor graph on the unit square.

    Points are uniform in ``[0, 1]^2``.  Pairs closer than a cutoff are joined
    with Gaussian weight ``exp(-d^2 / (2 sigma^2))`` where ``sigma`` is the mean
    distance of a point to its 6th nearest neighbour.  The cutoff is bisected
    so that the final edge count (after joining components by their shortest
    inter-component edges) is within 10% of ``target_edges``.
    """
    if n < 2:
        raise ValidationError(f"sensor graph needs n >= 2, got {n}")
    max_pairs = n * (n - 1) // 2
    lo_ok = int(np.ceil(target_edges * (1 - EDGE_TOLERANCE)))
    hi_ok = int(np.floor(target_edges * (1 + EDGE_TOLERANCE)))
    if hi_ok < n - 1 or lo_ok > max_pairs or lo_ok > hi_ok:
        raise GenerationFailure(
            f"target of {target_edges} edges is unreachable for a connected graph on {n} vertices"
        )

    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    D = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))
    iu, ju = np.triu_indices(n, k=1)
    dist_pairs = D[iu, ju]

    k = min(SIGMA_NEIGHBOR, n - 1)
    kth = np.sort(D, axis=1)[:, k]  # column 0 is the point itself
    sigma = float(kth.mean())

    desired = target_edges
    for _ in range(MAX_TUNING_ATTEMPTS):
        cutoff = _bisect_cutoff(dist_pairs, desired)
        chosen = dist_pairs < cutoff
        pairs = [(int(a), int(b)) for a, b in zip(iu[chosen], ju[chosen])]
        pairs += _bridge_components(n, pairs, iu, ju, dist_pairs)
        total = len(pairs)
        if lo_ok <= total <= hi_ok:
            edges = [(a, b, float(np.exp(-D[a, b] ** 2 / (2 * sigma**2)))) for a, b in pairs]
            return build_graph(n, edges)
        # bridges overshot: aim lower and retry
        desired = max(0, desired - (total - target_edges))
    raise GenerationFailure(
        f"could not reach {target_edges} +/- 10% edges on {n} vertices (seed={seed})"
    )


def _bridge_components(n, pairs, iu, ju, dist_pairs) -> list[tuple[int, int]]:
    """Shortest pairs joining distinct components until the graph is connected."""
    ds = _DisjointSet(n)
    for a, b in pairs:
        ds.union(a, b)
    added = []
    for idx in np.argsort(dist_pairs, kind="stable"):
        a, b = int(iu[idx]), int(ju[idx])
        if ds.union(a, b):
            added.append((a, b))
    return added


def graph_to_json(g: Graph) -> dict:
    return {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges]}


def graph_from_json(obj: dict) -> Graph:
    try:
        n = int(obj["n"])
        edges = obj["edges"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"graph JSON must have 'n' and 'edges': {exc}") from exc
    for e in edges:
        if len(e) == 3 and int(e[0]) >= int(e[1]):
            raise InvalidEdge(f"graph JSON edges must satisfy i < j, got {e}")
    return build_graph(n, edges)


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_json(g), indent=1) + "\n")


def load_graph(path) -> Graph:
    return graph_from_json(json.loads(Path(path).read_text()))
