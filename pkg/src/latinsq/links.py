"""Colour-pattern templates and their embeddings in a coloured K_{n,n}.

A pattern is a small graph with designated start/end vertices whose edges
are grouped into colour classes.  An embedding (a "link") maps the pattern
injectively into the host so that all edges of one class receive a single
host colour, distinct across classes.  The repeating-colour path family
``repeat_pattern(k)`` (a path of length 2k whose k edge classes repeat in
order) is the workhorse: counting its embeddings reduces to forced colour
walks, which is what makes the censuses here near-linear per seed vertex.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction

from .core import LatinSquare, ProperColoring, to_coloring
from .rainbow import Vertex, same_side
from .sampler import SeededRng, enumerate_all, sample_squares

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Pattern:
    """Template graph: `edges` are (a, b, class_index) with vertices 0-based;
    `start`/`end` are the designated endpoints of an embedding."""

    num_vertices: int
    edges: tuple[tuple[int, int, int], ...]
    start: int
    end: int

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("start and end vertices must differ")
        seen = set()
        for (a, b, cls) in self.edges:
            if not (0 <= a < self.num_vertices and 0 <= b < self.num_vertices) or a == b:
                raise ValueError(f"bad edge ({a},{b})")
            if cls < 1:
                raise ValueError("class indices are positive")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge ({a},{b})")
            seen.add(key)

    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": self.num_vertices,
                "edges": [[a + 1, b + 1, cls] for (a, b, cls) in self.edges],
                "start": self.start + 1,
                "end": self.end + 1,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Pattern":
        data = json.loads(text)
        return cls(
            num_vertices=int(data["vertices"]),
            edges=tuple((a - 1, b - 1, c) for (a, b, c) in data["edges"]),
            start=int(data["start"]) - 1,
            end=int(data["end"]) - 1,
        )


def repeat_pattern(k: int) -> Pattern:
    """Path of length 2k: edge t gets class ((t-1) mod k) + 1, so the first k
    classes repeat once in the same order."""
    if k < 1:
        raise ValueError("k must be positive")
    edges = tuple((t, t + 1, (t % k) + 1) for t in range(2 * k))
    return Pattern(num_vertices=2 * k + 1, edges=edges, start=0, end=2 * k)


make_repeat_pattern = repeat_pattern


@dataclass(frozen=True)
class Link:
    """A single embedding of a pattern between two host vertices."""

    pattern: Pattern
    embedding: tuple[Vertex, ...]  # pattern vertex -> host vertex
    class_colors: tuple[tuple[int, int], ...]  # (class_index, host colour)


@dataclass
class CensusResult:
    params: dict
    count: int
    elapsed: float
    saturated: bool = False


def _bipartition_parity(pat: Pattern) -> tuple[bool, bool | None]:
    """(is_bipartite, same_side_forced) for start/end; None if either side
    assignment is realisable (disconnected endpoints)."""
    color: dict[int, int] = {}
    comp: dict[int, int] = {}
    adj: dict[int, list[int]] = {v: [] for v in range(pat.num_vertices)}
    for (a, b, _c) in pat.edges:
        adj[a].append(b)
        adj[b].append(a)
    cid = 0
    for v0 in range(pat.num_vertices):
        if v0 in color:
            continue
        color[v0] = 0
        comp[v0] = cid
        queue = [v0]
        while queue:
            v = queue.pop()
            for w in adj[v]:
                if w not in color:
                    color[w] = color[v] ^ 1
                    comp[w] = cid
                    queue.append(w)
                elif color[w] == color[v]:
                    return False, None
        cid += 1
    if comp[pat.start] != comp[pat.end]:
        return True, None
    return True, color[pat.start] == color[pat.end]


def _elimination_order(pat: Pattern) -> list[int]:
    """start, end, then greedily the vertex with most already-placed
    neighbours (most constrained first); ties by vertex index."""
    adj: dict[int, set[int]] = {v: set() for v in range(pat.num_vertices)}
    for (a, b, _c) in pat.edges:
        adj[a].add(b)
        adj[b].add(a)
    placed = [pat.start, pat.end]
    placed_set = set(placed)
    while len(placed) < pat.num_vertices:
        best = None
        best_score = -1
        for v in range(pat.num_vertices):
            if v in placed_set:
                continue
            score = len(adj[v] & placed_set)
            if score > best_score:
                best, best_score = v, score
        placed.append(best)
        placed_set.add(best)
    return placed


class _LinkSearch:
    """Shared backtracking core for enumerate/count."""

    def __init__(self, host: ProperColoring, u: Vertex, v: Vertex, pat: Pattern):
        if u == v:
            raise ValueError("endpoints must be distinct")
        self.host = host
        self.n = host.n
        self.pat = pat
        self.u = u
        self.v = v
        # colour lookups: partner on the other side via a given colour
        n = self.n
        self.col_by_rowcolor = [[0] * (n + 1) for _ in range(n + 1)]
        self.row_by_colcolor = [[0] * (n + 1) for _ in range(n + 1)]
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                c = host.edge_color(a, b)
                self.col_by_rowcolor[a][c] = b
                self.row_by_colcolor[b][c] = a
        self.order = _elimination_order(pat)
        self.adj: dict[int, list[tuple[int, int]]] = {w: [] for w in range(pat.num_vertices)}
        for (a, b, cls) in pat.edges:
            self.adj[a].append((b, cls))
            self.adj[b].append((a, cls))

    def _feasible(self) -> bool:
        ok, forced = _bipartition_parity(self.pat)
        if not ok:
            return False
        if forced is None:
            return True
        return forced == same_side(self.u, self.v)

    def _neighbor_via(self, w: Vertex, color: int) -> Vertex:
        if w[0] == "A":
            return ("B", self.col_by_rowcolor[w[1]][color])
        return ("A", self.row_by_colcolor[w[1]][color])

    def run(self, limit=None, count_only=False):
        links: list[Link] = []
        count = 0
        if not self._feasible():
            return (0, links)
        pat = self.pat
        psi: dict[int, Vertex] = {pat.start: self.u, pat.end: self.v}
        used = {self.u, self.v}
        class_color: dict[int, int] = {}
        color_class: dict[int, int] = {}
        order = self.order

        def close_edges(w: int) -> list[int] | None:
            # assign classes for edges from w into placed vertices; returns
            # the classes newly bound here, or None if inconsistent
            bound: list[int] = []
            for (z, cls) in self.adj[w]:
                if z not in psi:
                    continue
                pw, pz = psi[w], psi[z]
                if same_side(pw, pz):
                    for b in bound:
                        color_class.pop(class_color.pop(b))
                    return None
                a, b = (pw[1], pz[1]) if pw[0] == "A" else (pz[1], pw[1])
                c = self.host.edge_color(a, b)
                if cls in class_color:
                    if class_color[cls] != c:
                        for bb in bound:
                            color_class.pop(class_color.pop(bb))
                        return None
                else:
                    if c in color_class:
                        for bb in bound:
                            color_class.pop(class_color.pop(bb))
                        return None
                    class_color[cls] = c
                    color_class[c] = cls
                    bound.append(cls)
            return bound

        def unbind(bound: list[int]) -> None:
            for cls in bound:
                color_class.pop(class_color.pop(cls))

        def candidates(w: int) -> list[Vertex]:
            forced: set[Vertex] | None = None
            side_req: str | None = None
            for (z, cls) in self.adj[w]:
                if z not in psi:
                    continue
                pz = psi[z]
                side_req = "B" if pz[0] == "A" else "A"
                if cls in class_color:
                    cand = self._neighbor_via(pz, class_color[cls])
                    forced = {cand} if forced is None else (forced & {cand})
            if forced is not None:
                return sorted(forced)
            if side_req is not None:
                return [(side_req, t) for t in range(1, self.n + 1)]
            # disconnected component start: either side
            return [("A", t) for t in range(1, self.n + 1)] + [
                ("B", t) for t in range(1, self.n + 1)
            ]

        def rec(idx: int) -> bool:
            nonlocal count
            if idx == len(order):
                count += 1
                if not count_only:
                    links.append(
                        Link(
                            pattern=pat,
                            embedding=tuple(psi[w] for w in range(pat.num_vertices)),
                            class_colors=tuple(sorted(class_color.items())),
                        )
                    )
                return limit is not None and count >= limit
            w = order[idx]
            if w in psi:  # start/end preassigned
                bound = close_edges(w)
                if bound is None:
                    return False
                stop = rec(idx + 1)
                unbind(bound)
                return stop
            for cand in candidates(w):
                if cand in used:
                    continue
                psi[w] = cand
                used.add(cand)
                bound = close_edges(w)
                if bound is not None:
                    if rec(idx + 1):
                        unbind(bound)
                        used.discard(cand)
                        del psi[w]
                        return True
                    unbind(bound)
                used.discard(cand)
                del psi[w]
            return False

        rec(0)
        return (count, links)


def enumerate_links(
    host: ProperColoring, u: Vertex, v: Vertex, pat: Pattern, limit: int | None = None
):
    """Every embedding of pat with start at u and end at v, exactly once, in
    a fixed deterministic order.  Parity-impossible requests yield nothing."""
    _count, links = _LinkSearch(host, u, v, pat).run(limit=limit, count_only=False)
    return links


def count_links(host: ProperColoring, u: Vertex, v: Vertex, pat: Pattern) -> int:
    """Number of (u, v)-embeddings of pat, without materialising them."""
    count, _ = _LinkSearch(host, u, v, pat).run(count_only=True)
    return count


def closed_alternating_walks(host: ProperColoring, u: Vertex) -> int:
    """Closed 2-coloured alternating 4-walks from u (each 2x2 subsquare
    through u is seen once per direction).  Together with the length-4
    repeat-pattern counts these satisfy an exact identity:
    sum over v of count_links(u, v, repeat_pattern(2)) plus this quantity
    equals n(n-1)."""
    n = host.n
    # direct walk: u -> x1 (colour a) -> x2 (colour b) -> x3 (colour a) -> u?
    total = 0
    for x1_idx in range(1, n + 1):
        x1 = ("B", x1_idx) if u[0] == "A" else ("A", x1_idx)
        a = host.edge_color(u[1], x1_idx) if u[0] == "A" else host.edge_color(x1_idx, u[1])
        for x2 in _others(host, x1, u):
            b = _ecol(host, x1, x2)
            if b == a:
                continue
            x3 = _via(host, x2, a)
            back = _via(host, x3, b)
            if back == u:
                total += 1
    return total


def _ecol(host: ProperColoring, p: Vertex, q: Vertex) -> int:
    return host.edge_color(p[1], q[1]) if p[0] == "A" else host.edge_color(q[1], p[1])


def _others(host: ProperColoring, at: Vertex, exclude: Vertex):
    side = "B" if at[0] == "A" else "A"
    for t in range(1, host.n + 1):
        w = (side, t)
        if w != exclude:
            yield w


def _via(host: ProperColoring, at: Vertex, color: int) -> Vertex:
    n = host.n
    if at[0] == "A":
        for b in range(1, n + 1):
            if host.edge_color(at[1], b) == color:
                return ("B", b)
    else:
        for a in range(1, n + 1):
            if host.edge_color(a, at[1]) == color:
                return ("A", a)
    raise AssertionError("proper colouring must realise every colour at every vertex")


def census_path_pairs(
    host: ProperColoring,
    length: int,
    endpoints: tuple[Vertex, Vertex, Vertex, Vertex],
    limit: int | None = None,
) -> CensusResult:
    """Ordered pairs (P1, P2) of vertex-disjoint paths with the same colour
    sequence: P1 from x1 to y1, P2 from x2 to y2, both of the given odd
    length.  P1 is enumerated; P2 is the forced colour walk from x2.
    """
    if length < 1 or length % 2 == 0:
        raise ValueError("path length must be odd")
    x1, y1, x2, y2 = endpoints
    if len({x1, y1, x2, y2}) != 4:
        raise ValueError("the four endpoints must be distinct")
    t0 = time.perf_counter()
    params = {"length": length, "endpoints": [list(p) for p in endpoints]}
    if same_side(x1, y1) or same_side(x2, y2):
        return CensusResult(params=params, count=0, elapsed=time.perf_counter() - t0)
    n = host.n
    count = 0
    saturated = False
    path1: list[Vertex] = [x1]

    def walk_forced(colors: list[int], p1_set: frozenset[Vertex]) -> bool:
        if x2 in p1_set:
            return False
        cur = x2
        seen = {x2}
        for c in colors:
            cur = _via(host, cur, c)
            if cur in seen or cur in p1_set:
                return False
            seen.add(cur)
        return cur == y2

    def rec(cur: Vertex, depth: int, colors: list[int]) -> bool:
        nonlocal count, saturated
        if depth == length - 1:
            c = _ecol(host, cur, y1)
            colors.append(c)
            p1 = frozenset(path1) | {y1}
            if y1 not in path1 and walk_forced(colors, p1):
                if count >= INT64_MAX:
                    saturated = True
                else:
                    count += 1
            colors.pop()
            return limit is not None and count >= limit
        side = "B" if cur[0] == "A" else "A"
        for t in range(1, n + 1):
            nxt = (side, t)
            if nxt in path1 or nxt == y1:
                continue
            colors.append(_ecol(host, cur, nxt))
            path1.append(nxt)
            stop = rec(nxt, depth + 1, colors)
            path1.pop()
            colors.pop()
            if stop:
                return True
        return False

    rec(x1, 0, [])
    return CensusResult(
        params=params, count=count, elapsed=time.perf_counter() - t0, saturated=saturated
    )


@dataclass(frozen=True)
class ProbeResult:
    estimate: float
    stderr: float
    hits: int
    trials: int
    exact: Fraction | None = None


def _check_probe_graph(edges, n: int) -> None:
    if len(edges) > 6:
        raise ValueError("probe graphs are limited to 6 edges")
    seen = set()
    at_row: dict[tuple[int, int], int] = {}
    at_col: dict[tuple[int, int], int] = {}
    for (a, b, c) in edges:
        if not (1 <= a <= n and 1 <= b <= n and 1 <= c <= n):
            raise ValueError(f"edge ({a},{b},{c}) out of range for order {n}")
        if (a, b) in seen:
            raise ValueError(f"duplicate edge ({a},{b})")
        seen.add((a, b))
        if at_row.get((a, c)) is not None or at_col.get((b, c)) is not None:
            raise ValueError("probe graph is not properly coloured")
        at_row[(a, c)] = b
        at_col[(b, c)] = a


def subgraph_probability_probe(
    edges,
    n: int,
    trials: int,
    rng: SeededRng,
    exact: bool | None = None,
) -> ProbeResult:
    """Probability that a uniform square's colouring contains the given
    coloured edges (same endpoints, same colours).

    `edges` is a list of (row, column, colour) triples forming a small
    properly coloured bipartite graph.  At n = 4 an exact mode iterates all
    576 squares and returns the rational probability; otherwise the estimate
    comes with a binomial standard error.
    """
    edges = [tuple(e) for e in edges]
    _check_probe_graph(edges, n)
    if exact is None:
        exact = n == 4

    def contains(sq: LatinSquare) -> bool:
        return all(sq.cells[a - 1][b - 1] == c for (a, b, c) in edges)

    if exact:
        if n != 4:
            raise ValueError("exact mode is implemented by full enumeration only at n = 4")
        hits = 0
        total = 0
        for sq in enumerate_all(4):
            total += 1
            if contains(sq):
                hits += 1
        frac = Fraction(hits, total)
        return ProbeResult(estimate=float(frac), stderr=0.0, hits=hits, trials=total, exact=frac)

    hits = 0
    for sq in sample_squares(n, rng, trials):
        if contains(sq):
            hits += 1
    p = hits / trials
    stderr = (p * (1 - p) / trials) ** 0.5
    return ProbeResult(estimate=p, stderr=stderr, hits=hits, trials=trials)


def pattern_census(
    square: LatinSquare,
    k: int,
    pairs: list[tuple[Vertex, Vertex]],
) -> list[CensusResult]:
    """Repeat-pattern counts for a list of endpoint pairs on one square."""
    host = to_coloring(square)
    pat = repeat_pattern(k)
    out = []
    for (u, v) in pairs:
        t0 = time.perf_counter()
        raw = count_links(host, u, v, pat)
        saturated = raw > INT64_MAX
        out.append(
            CensusResult(
                params={"k": k, "u": list(u), "v": list(v), "n": square.n},
                count=min(raw, INT64_MAX),
                elapsed=time.perf_counter() - t0,
                saturated=saturated,
            )
        )
    return out
