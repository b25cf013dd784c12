"""Correction scheduling gadgets.

Two executable constructions live here.

`decompose_corrections` turns a balanced family of correction requirements
(for each index i: a set of vertices to switch out and an equal-sized set to
switch in, balanced as a multiset across indices) into a set of local pair
requests, each naming two indices and two vertices.  The pipeline: encode
the requirements as a coloured directed multigraph, split it into cycles,
repair repeated colours so every cycle is rainbow, triangulate long cycles
with fresh-coloured chords, and replace every rainbow triangle by a fixed
nine-edge gadget on three fresh vertices and one fresh colour, after which
the whole graph is a disjoint union of rainbow 2-cycles that read off as the
answer.  Greedy colour/vertex choices run under configurable caps with a
bounded randomised retry loop, replacing asymptotic slack with desk-scale
feasibility.

`build_connector` wires up a sparse routing graph: stacked levels of size
2^depth forming interleaved binary trees (max degree 4), plus one attachment
edge per root vertex.  `route_pairs` connects any disjoint pairing of the
roots by vertex-disjoint paths pruned around previously routed traffic.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .rainbow import make_pair
from .sampler import SeededRng


class InfeasibleError(RuntimeError):
    """A greedy stage ran out of admissible choices after all retries."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"infeasible at this scale ({stage}): {message}")
        self.stage = stage


@dataclass(frozen=True)
class CorrectionInstance:
    """Balanced correction requirements over a ground vertex set.

    For each index i: `surplus[i]` are vertices to switch out of matching i,
    `chosen[i]` (a subset of the reservoir) are vertices to switch in, with
    |chosen[i]| = |surplus[i]| and the union over i of chosen equal as a
    multiset to the union of surplus.
    """

    indices: tuple[int, ...]
    universe: tuple
    reservoir: dict
    surplus: dict
    chosen: dict

    def __post_init__(self):
        uni = set(self.universe)
        all_chosen: Counter = Counter()
        all_surplus: Counter = Counter()
        for i in self.indices:
            res = set(self.reservoir.get(i, ()))
            sur = set(self.surplus.get(i, ()))
            cho = set(self.chosen.get(i, ()))
            if not res <= uni or not sur <= uni:
                raise ValueError(f"index {i}: sets leave the universe")
            if res & sur:
                raise ValueError(f"index {i}: reservoir and surplus intersect")
            if not cho <= res:
                raise ValueError(f"index {i}: chosen vertices must come from the reservoir")
            if len(cho) != len(sur):
                raise ValueError(f"index {i}: |chosen| = {len(cho)} != |surplus| = {len(sur)}")
            all_chosen.update(cho)
            all_surplus.update(sur)
        if all_chosen != all_surplus:
            raise ValueError("chosen and surplus unions differ as multisets")

    def to_json(self) -> str:
        return json.dumps(
            {
                "indices": list(self.indices),
                "universe": list(self.universe),
                "reservoir": {str(i): sorted(self.reservoir.get(i, ())) for i in self.indices},
                "surplus": {str(i): sorted(self.surplus.get(i, ())) for i in self.indices},
                "chosen": {str(i): sorted(self.chosen.get(i, ())) for i in self.indices},
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CorrectionInstance":
        d = json.loads(text)
        idx = tuple(d["indices"])
        return cls(
            indices=idx,
            universe=tuple(d["universe"]),
            reservoir={i: frozenset(d["reservoir"][str(i)]) for i in idx},
            surplus={i: frozenset(d["surplus"][str(i)]) for i in idx},
            chosen={i: frozenset(d["chosen"][str(i)]) for i in idx},
        )


@dataclass(frozen=True)
class CorrectionSet:
    """The answer: unordered pairs {(i,u),(j,v)} with i != j, u != v."""

    pairs: frozenset

    def to_json(self) -> str:
        rows = sorted(sorted([[i, u] for (i, u) in p]) for p in self.pairs)
        return json.dumps({"pairs": rows}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CorrectionSet":
        d = json.loads(text)
        return cls(
            pairs=frozenset(
                make_pair(p[0][0], p[0][1], p[1][0], p[1][1]) for p in d["pairs"]
            )
        )


@dataclass
class DirectedColoredMultigraph:
    """Intermediate object: a multiset of coloured arcs (tail, head, colour)."""

    edges: Counter = field(default_factory=Counter)

    def add(self, tail, head, color, mult: int = 1) -> None:
        self.edges[(tail, head, color)] += mult

    def remove(self, tail, head, color) -> None:
        key = (tail, head, color)
        self.edges[key] -= 1
        if self.edges[key] == 0:
            del self.edges[key]
        elif self.edges[key] < 0:
            raise KeyError(f"arc {key} not present")

    def net_degree(self, vertex, color) -> int:
        out = sum(m for (t, _h, c), m in self.edges.items() if t == vertex and c == color)
        inc = sum(m for (_t, h, c), m in self.edges.items() if h == vertex and c == color)
        return out - inc

    def copy(self) -> "DirectedColoredMultigraph":
        return DirectedColoredMultigraph(edges=Counter(self.edges))


def check_conservation(graph: DirectedColoredMultigraph, inst: CorrectionInstance) -> list:
    """Violations of the per-colour net-degree contract: +1 on surplus
    vertices, -1 on chosen vertices, 0 elsewhere."""
    net: dict = {}
    for (t, h, c), m in graph.edges.items():
        net[(t, c)] = net.get((t, c), 0) + m
        net[(h, c)] = net.get((h, c), 0) - m
    bad = []
    for i in inst.indices:
        sur = inst.surplus.get(i, frozenset())
        cho = inst.chosen.get(i, frozenset())
        for u in inst.universe:
            want = 1 if u in sur else (-1 if u in cho else 0)
            if net.get((u, i), 0) != want:
                bad.append((i, u, net.get((u, i), 0), want))
    return bad


def _decompose_into_cycles(edges: list) -> list[list]:
    """Split balanced coloured arcs into simple directed cycles (edge lists)."""
    out_adj: dict = {}
    for e in sorted(edges):
        out_adj.setdefault(e[0], []).append(e)
    for lst in out_adj.values():
        lst.reverse()  # pop() takes the lexicographically smallest first
    cycles = []
    roots = sorted(out_adj)
    for root in roots:
        while out_adj.get(root):
            path: list = []
            pos: dict = {}
            v = root
            while True:
                if v in pos:
                    k = pos[v]
                    cycle = path[k:]
                    cycles.append(cycle)
                    for e in cycle:
                        del pos[e[0]]
                    del path[k:]
                    if not path:
                        break
                    v = path[-1][1]
                    continue
                stack = out_adj.get(v)
                if not stack:
                    if not path:
                        break
                    raise AssertionError("imbalanced multigraph cannot happen here")
                pos[v] = len(path)
                e = stack.pop()
                path.append(e)
                v = e[1]
    return cycles


def _repair_rainbow(cycles: list[list]) -> list[list]:
    """Rewire repeated-colour cycles until every cycle is rainbow.

    Two same-coloured arcs u1->u2, u3->u4 on one cycle are replaced by
    u1->u4, u3->u2, splitting the cycle in two; each step raises the cycle
    count, so this terminates.
    """
    queue = list(cycles)
    done: list[list] = []
    while queue:
        cyc = queue.pop()
        by_color: dict = {}
        split = None
        for k, e in enumerate(cyc):
            if e[2] in by_color:
                split = (by_color[e[2]], k)
                break
            by_color[e[2]] = k
        if split is None:
            done.append(cyc)
            continue
        a, b = split
        u1, u2, i = cyc[a]
        u3, u4, _ = cyc[b]
        cyc1 = cyc[b + 1:] + cyc[:a] + [(u1, u4, i)]
        cyc2 = cyc[a + 1:b] + [(u3, u2, i)]
        queue.append(cyc1)
        queue.append(cyc2)
    return done


def _zigzag_triangles(length: int) -> tuple[list[tuple[int, int]], list[tuple[int, int, int]]]:
    """Chords and triangles (as position triples) of the zigzag triangulation
    of a cycle 0..length-1; every vertex meets at most two chords."""
    seq = [0]
    lo, hi = 1, length - 1
    take_lo = True
    while lo <= hi:
        if take_lo:
            seq.append(lo)
            lo += 1
        else:
            seq.append(hi)
            hi -= 1
        take_lo = not take_lo
    chords = [tuple(sorted((seq[k], seq[k + 1]))) for k in range(1, length - 2)]
    triangles = [tuple(sorted((seq[k], seq[k + 1], seq[k + 2]))) for k in range(length - 2)]
    return chords, triangles


class _GreedyState:
    """Caps shared by the chord and gadget stages."""

    def __init__(self, inst: CorrectionInstance, color_cap: int, rng: SeededRng):
        self.inst = inst
        self.cap = color_cap
        self.rng = rng
        self.chord_cover: dict = {i: set() for i in inst.indices}  # colour -> vertices
        self.used_pairs: set = set()  # (colour, vertex) slots taken by chords/gadgets

    def blocked(self, i, v) -> bool:
        return (
            v in self.inst.reservoir.get(i, frozenset())
            or v in self.inst.surplus.get(i, frozenset())
            or v in self.chord_cover[i]
            or (i, v) in self.used_pairs
        )


def decompose_corrections(
    inst: CorrectionInstance,
    rng: SeededRng,
    color_cap: int | None = None,
    retries: int = 32,
    feasibility_factor: float = 4.0,
    collect_stages: bool = False,
):
    """Decompose balanced correction requirements into pair requests.

    Returns a CorrectionSet satisfying `verify_corrections`; with
    `collect_stages` also returns the intermediate multigraphs after each
    stage, for external conservation checks.  Raises InfeasibleError when a
    greedy stage exhausts its candidates in every retry.
    """
    if color_cap is None:
        biggest = max((len(inst.surplus.get(i, ())) for i in inst.indices), default=0)
        color_cap = max(8, 2 * biggest)
    demand = sum(len(inst.surplus.get(i, ())) for i in inst.indices)
    if inst.indices and demand:
        margin = feasibility_factor * demand / len(inst.indices)
        for i in inst.indices:
            free = (
                len(inst.universe)
                - len(inst.reservoir.get(i, frozenset()))
                - len(inst.surplus.get(i, frozenset()))
            )
            if free < margin:
                raise InfeasibleError(
                    "feasibility check",
                    f"index {i} leaves only {free} free vertices, below the margin {margin:.1f}",
                )

    last_error: InfeasibleError | None = None
    for attempt in range(retries + 1):
        try:
            return _decompose_once(inst, rng.derive(1000 + attempt), color_cap, attempt, collect_stages)
        except InfeasibleError as exc:
            last_error = exc
    raise last_error


def _decompose_once(
    inst: CorrectionInstance,
    rng: SeededRng,
    color_cap: int,
    attempt: int,
    collect_stages: bool,
):
    stages: list[tuple[str, DirectedColoredMultigraph]] = []

    def snapshot(name: str, edges) -> None:
        g = DirectedColoredMultigraph()
        for e in edges:
            g.add(*e)
        stages.append((name, g))

    # stage 1: one arc per requirement, surplus -> chosen in colour i
    arcs: list = []
    for i in inst.indices:
        sur = sorted(inst.surplus.get(i, ()))
        cho = sorted(inst.chosen.get(i, ()))
        if attempt > 0:
            rng.shuffle(cho)
        arcs.extend((u, v, i) for u, v in zip(sur, cho))
    snapshot("initial", arcs)

    # stage 2: cycle decomposition; stage 3: make every cycle rainbow
    cycles = _decompose_into_cycles(arcs)
    cycles = _repair_rainbow(cycles)
    snapshot("rainbow", [e for cyc in cycles for e in cyc])

    state = _GreedyState(inst, color_cap, rng)
    universe_sorted = sorted(inst.universe)
    colors_sorted = sorted(inst.indices)

    # stage 4: triangulate cycles of length >= 4 with fresh-coloured chords
    pairs: list = []
    triangles: list = []  # (x, y, z, a, b, c) directed x->y->z->x
    dprime_edges: list = []
    for cyc in sorted(cycles):
        L = len(cyc)
        dprime_edges.extend(cyc)
        if L == 2:
            (u, v, i), (_v, _u, j) = cyc
            pairs.append(make_pair(i, u, j, v))
            continue
        verts = [e[0] for e in cyc]  # position p holds the tail of edge p
        arc_color = {(p, (p + 1) % L): cyc[p][2] for p in range(L)}
        if L == 3:
            tri_list = [(0, 1, 2)]
            chords: list = []
        else:
            chords, tri_list = _zigzag_triangles(L)
        chord_color: dict = {}
        for (p, q) in chords:
            x, y = verts[p], verts[q]
            cands = list(colors_sorted)
            if attempt > 0:
                rng.shuffle(cands)
            chosen_color = None
            saw_space = False
            for i in cands:
                if (
                    x in inst.reservoir.get(i, frozenset())
                    or x in inst.surplus.get(i, frozenset())
                    or y in inst.reservoir.get(i, frozenset())
                    or y in inst.surplus.get(i, frozenset())
                ):
                    continue
                saw_space = True
                if (i, x) in state.used_pairs or (i, y) in state.used_pairs:
                    continue
                cover = state.chord_cover[i]
                if len(cover | {x, y}) > color_cap:
                    continue
                chosen_color = i
                break
            if chosen_color is None:
                if not saw_space:
                    raise InfeasibleError("chord colouring", "insufficient colour space")
                raise InfeasibleError(
                    "chord colouring", f"no admissible colour for chord ({x},{y})"
                )
            chord_color[(p, q)] = chosen_color
            state.used_pairs.add((chosen_color, x))
            state.used_pairs.add((chosen_color, y))
            state.chord_cover[chosen_color] |= {x, y}
            dprime_edges.append((x, y, chosen_color))
            dprime_edges.append((y, x, chosen_color))

        def edge_col(p: int, q: int) -> int:
            if (p, q) in arc_color:
                return arc_color[(p, q)]
            return chord_color[tuple(sorted((p, q)))]

        for (p, q, r) in tri_list:
            triangles.append(
                (verts[p], verts[q], verts[r], edge_col(p, q), edge_col(q, r), edge_col(r, p))
            )
    snapshot("triangulated", dprime_edges)

    # stage 5: replace each rainbow triangle by the 2-cycle gadget
    final_edges: list = []
    for p in pairs:
        (i, u), (j, v) = sorted(p)
        final_edges.append((u, v, i))
        final_edges.append((v, u, j))
    for (x, y, z, a, b, c) in triangles:
        fresh = []
        cands_v = list(universe_sorted)
        if attempt > 0:
            rng.shuffle(cands_v)
        for v in cands_v:
            if v in (x, y, z) or v in fresh:
                continue
            if any(state.blocked(i, v) for i in (a, b, c)):
                continue
            fresh.append(v)
            if len(fresh) == 3:
                break
        if len(fresh) < 3:
            raise InfeasibleError(
                "triangle gadget", f"no fresh vertices for triangle ({x},{y},{z})"
            )
        xp, yp, zp = fresh
        cands_c = list(colors_sorted)
        if attempt > 0:
            rng.shuffle(cands_c)
        fresh_color = None
        saw_space = False
        for i in cands_c:
            if i in (a, b, c):
                continue
            saw_space = True
            if any(state.blocked(i, v) for v in fresh):
                continue
            fresh_color = i
            break
        if fresh_color is None:
            if not saw_space:
                raise InfeasibleError("triangle gadget", "insufficient colour space")
            raise InfeasibleError(
                "triangle gadget", f"no fresh colour for triangle ({x},{y},{z})"
            )
        d = fresh_color
        for (i, v) in (
            (a, xp), (c, xp), (d, xp),
            (a, yp), (b, yp), (d, yp),
            (b, zp), (c, zp), (d, zp),
        ):
            state.used_pairs.add((i, v))
        gadget = [
            (x, xp, a), (xp, yp, a), (yp, y, a),
            (y, yp, b), (yp, zp, b), (zp, z, b),
            (z, zp, c), (zp, xp, c), (xp, x, c),
            (yp, xp, d), (xp, zp, d), (zp, yp, d),
        ]
        final_edges.extend(gadget)
        pairs.extend(
            [
                make_pair(a, x, c, xp),
                make_pair(a, xp, d, yp),
                make_pair(a, yp, b, y),
                make_pair(b, yp, d, zp),
                make_pair(b, zp, c, z),
                make_pair(c, zp, d, xp),
            ]
        )
    snapshot("two-cycles", final_edges)

    result = CorrectionSet(pairs=frozenset(pairs))
    if collect_stages:
        return result, stages
    return result


_RULES = ("membership", "A1-1", "A1-2", "A1-3", "A1-4")


def verify_corrections(inst: CorrectionInstance, cset: CorrectionSet) -> tuple[bool, list]:
    """Check all five conclusion groups; violations come back as
    (rule, index, vertex) triples."""
    violations: list = []
    uni = set(inst.universe)
    idx = set(inst.indices)
    for p in cset.pairs:
        (i, u), (j, v) = tuple(p)
        for (a, x), (b, y) in ((( i, u), (j, v)), ((j, v), (i, u))):
            if a not in idx or x not in uni:
                violations.append(("membership", a, x))
                continue
            # x plays "switch out of a, into b": x not in reservoir_a nor surplus_b
            if x in inst.reservoir.get(a, frozenset()) or x in inst.surplus.get(b, frozenset()):
                violations.append(("membership", a, x))
    out_count: Counter = Counter()
    in_count: Counter = Counter()
    for p in cset.pairs:
        (i, u), (j, v) = tuple(p)
        out_count[(i, u)] += 1
        out_count[(j, v)] += 1
        in_count[(j, u)] += 1
        in_count[(i, v)] += 1
    for i in inst.indices:
        for u in sorted(inst.surplus.get(i, ())):
            if out_count.get((i, u), 0) != 1:
                violations.append(("A1-1", i, u))
        cho = inst.chosen.get(i, frozenset())
        for u in sorted(cho):
            if in_count.get((i, u), 0) != 1:
                violations.append(("A1-2", i, u))
        for u in sorted(set(inst.reservoir.get(i, frozenset())) - set(cho)):
            if in_count.get((i, u), 0) != 0:
                violations.append(("A1-3", i, u))
        res_sur = inst.reservoir.get(i, frozenset()) | inst.surplus.get(i, frozenset())
        for u in inst.universe:
            if u in res_sur:
                continue
            if (out_count.get((i, u), 0), in_count.get((i, u), 0)) not in ((0, 0), (1, 1)):
                violations.append(("A1-4", i, u))
    return (not violations, violations)


# --- connector graph ---------------------------------------------------------


@dataclass
class ConnectorGraph:
    """Interleaved binary trees over shared levels, with attachable roots.

    Vertices are 1..size.  Levels 0..depth each hold 2**depth vertices; the
    tree below level-0 vertex j has level-i vertex block starting at index
    2**i * (j - 1), wrapped modulo 2**depth.  Each of the m root vertices
    (outside the levels) attaches by a single edge to a distinct level-0
    vertex.  Tree edges keep the maximum degree at 4; attachment edges add 1
    at level 0.
    """

    size: int
    depth: int
    spread: float
    levels: tuple[tuple[int, ...], ...]
    roots: tuple[int, ...]
    adj: dict
    certified_roots: int = 0

    @property
    def width(self) -> int:
        return 1 << self.depth

    def level_block(self, j: int, i: int) -> list[int]:
        """Level-i vertex set of the tree rooted at the j-th level-0 vertex."""
        w = self.width
        return sorted(
            self.levels[i][((1 << i) * (j - 1) + t) % w] for t in range(1 << i)
        )

    def tree_vertices(self, j: int) -> set[int]:
        out: set[int] = set()
        for i in range(self.depth + 1):
            out.update(self.level_block(j, i))
        return out

    def to_edge_list(self) -> list[tuple[int, int]]:
        seen = set()
        for v, nbrs in self.adj.items():
            for w in nbrs:
                seen.add((min(v, w), max(v, w)))
        return sorted(seen)


def connector_depth(size: int, spread: float) -> int:
    """Largest depth with 2**depth <= size / (spread * log2(size))."""
    if size < 4 or spread < 1:
        raise ValueError("need size >= 4 and spread >= 1")
    bound = size / (spread * math.log2(size))
    if bound < 1:
        raise ValueError(f"no feasible depth for size {size} and spread {spread}")
    return int(math.floor(math.log2(bound)))


def build_connector(
    size: int,
    roots: int,
    spread: float = 10.0,
    rng: SeededRng | None = None,
    certification_rounds: int = 100,
) -> ConnectorGraph:
    """Build the routing graph on vertex set [size] with the given number of
    attached roots, then certify (and record) the largest root count whose
    random maximal pairings all route in stress tests."""
    depth = connector_depth(size, spread)
    width = 1 << depth
    if roots < 1 or roots > width:
        raise ValueError(f"root count must be in 1..{width} for depth {depth}")
    need = (depth + 1) * width + roots
    if need > size:
        raise ValueError(f"levels plus roots need {need} vertices, only {size} available")

    levels = tuple(
        tuple(i * width + t + 1 for t in range(width)) for i in range(depth + 1)
    )
    root_ids = tuple((depth + 1) * width + t + 1 for t in range(roots))
    adj: dict = {v: [] for v in range(1, size + 1)}
    for i in range(depth):
        for j in range(width):
            v = levels[i][j]
            for r in (1, 2):
                s = (2 * j + r - 1) % width
                w = levels[i + 1][s]
                adj[v].append(w)
                adj[w].append(v)
    for t, u in enumerate(root_ids):
        v0 = levels[0][t]
        adj[u].append(v0)
        adj[v0].append(u)
    for v in adj:
        adj[v] = sorted(set(adj[v]))

    graph = ConnectorGraph(
        size=size, depth=depth, spread=spread, levels=levels, roots=root_ids, adj=adj
    )
    if rng is None:
        rng = SeededRng(0)
    graph.certified_roots = _certify(graph, rng, certification_rounds)
    return graph


def _random_maximal_pairing(items: list, rng: SeededRng) -> list[tuple]:
    pool = list(items)
    rng.shuffle(pool)
    return [(pool[2 * t], pool[2 * t + 1]) for t in range(len(pool) // 2)]


def _certify(graph: ConnectorGraph, rng: SeededRng, rounds: int) -> int:
    """Largest m such that `rounds` random maximal pairings of the first m
    roots all route, confirmed on a second independent stream."""
    for m in range(len(graph.roots), 0, -1):
        prefix = list(graph.roots[:m])
        ok = True
        for stream in (1, 2):
            sub = rng.derive(7000 + stream)
            for _ in range(rounds):
                pairs = _random_maximal_pairing(prefix, sub)
                try:
                    route_pairs(graph, pairs)
                except RoutingError:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return m
    return 0


class RoutingError(RuntimeError):
    def __init__(self, pair_index: int, pair: tuple, message: str):
        super().__init__(f"routing failed at pair {pair_index} {pair}: {message}")
        self.pair_index = pair_index
        self.pair = pair


def route_pairs(graph: ConnectorGraph, pairs: list[tuple]) -> list[list[int]]:
    """Vertex-disjoint paths connecting each pair of roots.

    Sequential: for each pair, prune both trees of vertices already used by
    earlier paths and take a shortest path in the surviving union.  Internal
    vertices stay outside the root set, and each path meets each level in at
    most two vertices; violations raise instead of returning overlap.
    """
    root_index = {u: t + 1 for t, u in enumerate(graph.roots)}
    flat = [u for p in pairs for u in p]
    if len(set(flat)) != len(flat):
        raise ValueError("pairs must be vertex-disjoint")
    for u in flat:
        if u not in root_index:
            raise ValueError(f"{u} is not a root vertex")

    used: set[int] = set()
    level_of = {}
    for i, level in enumerate(graph.levels):
        for v in level:
            level_of[v] = i
    paths: list[list[int]] = []
    for t, (ua, ub) in enumerate(pairs):
        ja, jb = root_index[ua], root_index[ub]
        comp_a = _pruned_component(graph, ja, used)
        comp_b = _pruned_component(graph, jb, used)
        if comp_a is None or comp_b is None:
            raise RoutingError(t, (ua, ub), "a tree root is already blocked")
        path = _shortest_union_path(graph, ja, jb, comp_a, comp_b)
        if path is None:
            raise RoutingError(t, (ua, ub), "pruned trees no longer meet")
        full = [ua] + path + [ub]
        for lev in range(graph.depth + 1):
            if sum(1 for v in path if level_of[v] == lev) > 2:
                raise AssertionError("path meets a level more than twice")
        if used & set(path):
            raise AssertionError("overlapping paths")
        used.update(path)
        paths.append(full)
    return paths


def _pruned_component(graph: ConnectorGraph, j: int, used: set[int]):
    """Vertices of tree j reachable from its level-0 root avoiding `used`."""
    root = graph.levels[0][j - 1]
    if root in used:
        return None
    members = graph.tree_vertices(j)
    comp = {root}
    queue = [root]
    while queue:
        v = queue.pop()
        for w in graph.adj[v]:
            if w in members and w not in used and w not in comp:
                comp.add(w)
                queue.append(w)
    return comp

def _shortest_union_path(graph: ConnectorGraph, ja: int, jb: int, comp_a: set, comp_b: set):
    """BFS shortest path between the two tree roots inside the union of the
    surviving tree components (tree edges only)."""
    allowed = comp_a | comp_b
    start = graph.levels[0][ja - 1]
    goal = graph.levels[0][jb - 1]
    if start == goal:
        return [start]
    prev = {start: None}
    queue = [start]
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for w in graph.adj[v]:
            if w in allowed and w not in prev:
                prev[w] = v
                if w == goal:
                    path = [w]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return path[::-1]
                queue.append(w)
    return None
