"""Transversal enumeration, maximum partial transversals, and decomposition.

Decomposing a square into n disjoint transversals is an exact cover problem:
the n^2 cells must be covered exactly once by cell sets of candidate
transversals.  The solver is a dancing-links search branching on the
uncovered cell with fewest remaining candidates; it answers with a definite
"some"/"none" or an explicit "undecided" when the node budget runs out, so
statistics never conflate timeouts with nonexistence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal, Optional

from .core import (
    Decomposition,
    LatinSquare,
    PartialTransversal,
    Transversal,
    check_transversal,
)

DEFAULT_NODE_BUDGET = 10**8
DEFAULT_CANDIDATE_THRESHOLD = 10**6
DEFAULT_EXACT_BOUND = 9


class ExactSearchRefused(ValueError):
    """Raised instead of silently falling back to a heuristic."""


@dataclass(frozen=True)
class ExactCoverProblem:
    """Cells of a square as the universe, candidate transversals as rows."""

    n: int
    rows: tuple[Transversal, ...]


@dataclass(frozen=True)
class DecomposeResult:
    status: Literal["some", "none", "undecided"]
    decomposition: Optional[Decomposition]
    nodes: int


def _symbol_bits(square: LatinSquare) -> list[list[int]]:
    return [[1 << s for s in row] for row in square.cells]


def iter_transversals(square: LatinSquare, limit: int | None = None) -> Iterator[Transversal]:
    """All transversals, lexicographic in the column chosen for rows 1..n."""
    n = square.n
    sym = _symbol_bits(square)
    full = (1 << n) - 1
    cols: list[int] = []

    def rec(r: int, colmask: int, symmask: int) -> Iterator[Transversal]:
        if r == n:
            yield Transversal(cells=tuple((i + 1, c + 1) for i, c in enumerate(cols)))
            return
        avail = full & ~colmask
        srow = sym[r]
        while avail:
            low = avail & -avail
            c = low.bit_length() - 1
            avail ^= low
            sb = srow[c]
            if not (symmask & sb):
                cols.append(c)
                yield from rec(r + 1, colmask | low, symmask | sb)
                cols.pop()

    count = 0
    for t in rec(0, 0, 0):
        yield t
        count += 1
        if limit is not None and count >= limit:
            return


def count_transversals(square: LatinSquare) -> int:
    """Number of transversals, without materialising them."""
    n = square.n
    sym = _symbol_bits(square)
    full = (1 << n) - 1

    def rec(r: int, colmask: int, symmask: int) -> int:
        if r == n:
            return 1
        total = 0
        avail = full & ~colmask
        srow = sym[r]
        while avail:
            low = avail & -avail
            avail ^= low
            sb = srow[low.bit_length() - 1]
            if not (symmask & sb):
                total += rec(r + 1, colmask | low, symmask | sb)
        return total

    return rec(0, 0, 0)


def max_partial_transversal(
    square: LatinSquare, exact_bound: int = DEFAULT_EXACT_BOUND
) -> PartialTransversal:
    """A maximum-size partial transversal, by branch and bound.

    Exact search only: orders above `exact_bound` are refused rather than
    answered heuristically.
    """
    n = square.n
    if n > exact_bound:
        raise ExactSearchRefused(
            f"exact search refused: order {n} exceeds the bound {exact_bound}"
        )
    sym = _symbol_bits(square)
    full = (1 << n) - 1
    best_cells: list[tuple[int, int]] = []
    chosen: list[tuple[int, int]] = []

    def rec(r: int, colmask: int, symmask: int) -> None:
        nonlocal best_cells
        if len(chosen) + (n - r) <= len(best_cells):
            return  # cannot beat the incumbent
        if r == n:
            if len(chosen) > len(best_cells):
                best_cells = chosen[:]
            return
        avail = full & ~colmask
        srow = sym[r]
        while avail:
            low = avail & -avail
            c = low.bit_length() - 1
            avail ^= low
            sb = srow[c]
            if not (symmask & sb):
                chosen.append((r + 1, c + 1))
                rec(r + 1, colmask | low, symmask | sb)
                chosen.pop()
        rec(r + 1, colmask, symmask)  # leave row r uncovered

    rec(0, 0, 0)
    return PartialTransversal(cells=tuple(best_cells))


class _Budget:
    __slots__ = ("left",)

    def __init__(self, nodes: int):
        self.left = nodes

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


class _DancingLinks:
    """Array-based dancing links over cell columns and transversal rows."""

    def __init__(self, n: int, rows: list[tuple[int, ...]]):
        ncols = n * n
        size = ncols + 1 + sum(len(r) for r in rows)
        self.L = list(range(-1, size - 1))
        self.R = list(range(1, size + 1))
        self.U = list(range(size))
        self.D = list(range(size))
        self.col = list(range(size))
        self.rowid = [-1] * size
        self.len = [0] * ncols
        head = ncols
        self.head = head
        self.L[0] = head
        self.R[head] = 0
        self.L[head] = ncols - 1
        self.R[ncols - 1] = head
        nxt = ncols + 1
        for rid, cells in enumerate(rows):
            first = None
            for cell in cells:
                node = nxt
                nxt += 1
                self.col[node] = cell
                self.rowid[node] = rid
                # insert at bottom of column
                up = self.U[cell]
                self.U[node] = up
                self.D[node] = cell
                self.D[up] = node
                self.U[cell] = node
                self.len[cell] += 1
                if first is None:
                    first = node
                    self.L[node] = self.R[node] = node
                else:
                    left = self.L[first]
                    self.L[node] = left
                    self.R[node] = first
                    self.R[left] = node
                    self.L[first] = node

    def cover(self, c: int) -> None:
        L, R, U, D = self.L, self.R, self.U, self.D
        R[L[c]] = R[c]
        L[R[c]] = L[c]
        i = D[c]
        while i != c:
            j = R[i]
            while j != i:
                D[U[j]] = D[j]
                U[D[j]] = U[j]
                self.len[self.col[j]] -= 1
                j = R[j]
            i = D[i]

    def uncover(self, c: int) -> None:
        L, R, U, D = self.L, self.R, self.U, self.D
        i = U[c]
        while i != c:
            j = L[i]
            while j != i:
                self.len[self.col[j]] += 1
                D[U[j]] = j
                U[D[j]] = j
                j = L[j]
            i = U[i]
        R[L[c]] = c
        L[R[c]] = c

    def search(self, budget: _Budget) -> list[int] | None:
        """One exact cover as a list of row ids, or None. Raises on budget."""
        R, D = self.R, self.D
        head = self.head
        solution: list[int] = []

        def rec() -> bool:
            if R[head] == head:
                return True
            # column-minimum branching; ties resolved by row-major cell order
            # because columns are threaded in that order
            best = R[head]
            c = R[best]
            while c != head:
                if self.len[c] < self.len[best]:
                    best = c
                c = R[c]
            if self.len[best] == 0:
                return False
            self.cover(best)
            i = D[best]
            while i != best:
                if not budget.spend():
                    raise _OutOfBudget
                solution.append(self.rowid[i])
                j = R[i]
                while j != i:
                    self.cover(self.col[j])
                    j = R[j]
                if rec():
                    return True
                j = self.L[i]
                while j != i:
                    self.uncover(self.col[j])
                    j = self.L[j]
                solution.pop()
                i = D[i]
            self.uncover(best)
            return False

        if rec():
            return solution
        return None


class _OutOfBudget(Exception):
    pass


def _cells_key(square: LatinSquare, t: Transversal) -> tuple[int, ...]:
    n = square.n
    return tuple((r - 1) * n + (c - 1) for (r, c) in t.cells)


def decompose(
    square: LatinSquare,
    node_budget: int = DEFAULT_NODE_BUDGET,
    candidate_threshold: int = DEFAULT_CANDIDATE_THRESHOLD,
) -> DecomposeResult:
    """Split the square into n disjoint transversals, if possible.

    Returns status "some" with a validated decomposition, a definite "none",
    or "undecided" when the node budget is exhausted.  When the candidate
    transversal count exceeds `candidate_threshold`, candidates are generated
    lazily during the search instead of being materialised.
    """
    n = square.n
    budget = _Budget(node_budget)

    candidates: list[Transversal] = []
    overflow = False
    for t in iter_transversals(square):
        candidates.append(t)
        if len(candidates) > candidate_threshold:
            overflow = True
            break
    if overflow:
        return _decompose_lazy(square, budget)

    if len(candidates) < n:
        return DecomposeResult(status="none", decomposition=None, nodes=0)
    rows = [_cells_key(square, t) for t in candidates]
    dlx = _DancingLinks(n, rows)
    try:
        picked = dlx.search(budget)
    except _OutOfBudget:
        return DecomposeResult(status="undecided", decomposition=None, nodes=node_budget)
    nodes = node_budget - budget.left
    if picked is None:
        return DecomposeResult(status="none", decomposition=None, nodes=nodes)
    parts = tuple(candidates[rid] for rid in sorted(picked))
    return DecomposeResult(status="some", decomposition=Decomposition(parts=parts), nodes=nodes)


def _decompose_lazy(square: LatinSquare, budget: _Budget) -> DecomposeResult:
    # Branches on the first uncovered cell in row-major order and generates
    # the transversals through it on demand; trades the column-minimum
    # heuristic for bounded memory.
    n = square.n
    sym = _symbol_bits(square)
    full = (1 << n) - 1
    covered = [0] * n  # column bitmask of covered cells per row
    parts: list[Transversal] = []

    def transversals_through(r0: int, c0: int) -> Iterator[Transversal]:
        cols: list[int] = []

        def rec(r: int, colmask: int, symmask: int) -> Iterator[Transversal]:
            if r == n:
                yield Transversal(cells=tuple((i + 1, c + 1) for i, c in enumerate(cols)))
                return
            if r == r0:
                options = 1 << c0
            else:
                options = full & ~colmask & ~covered[r]
            srow = sym[r]
            while options:
                low = options & -options
                c = low.bit_length() - 1
                options ^= low
                if colmask & low:
                    return
                sb = srow[c]
                if not (symmask & sb):
                    cols.append(c)
                    yield from rec(r + 1, colmask | low, symmask | sb)
                    cols.pop()

        yield from rec(0, 0, 0)

    def rec_cover() -> bool:
        target = None
        for r in range(n):
            free = full & ~covered[r]
            if free:
                target = (r, (free & -free).bit_length() - 1)
                break
        if target is None:
            return True
        r0, c0 = target
        for t in transversals_through(r0, c0):
            if not budget.spend():
                raise _OutOfBudget
            for (r, c) in t.cells:
                covered[r - 1] |= 1 << (c - 1)
            parts.append(t)
            if rec_cover():
                return True
            parts.pop()
            for (r, c) in t.cells:
                covered[r - 1] &= ~(1 << (c - 1))
        return False

    start = budget.left
    try:
        found = rec_cover()
    except _OutOfBudget:
        return DecomposeResult(status="undecided", decomposition=None, nodes=start)
    nodes = start - budget.left
    if not found:
        return DecomposeResult(status="none", decomposition=None, nodes=nodes)
    return DecomposeResult(
        status="some", decomposition=Decomposition(parts=tuple(parts)), nodes=nodes
    )


def verify_decomposition(square: LatinSquare, decomposition: Decomposition) -> tuple[bool, str]:
    """True plus "ok", or False plus the first violation found."""
    n = square.n
    parts = decomposition.parts
    if len(parts) != n:
        return False, f"{len(parts)} parts, expected {n}"
    seen = [[0] * n for _ in range(n)]
    for k, part in enumerate(parts, start=1):
        err = check_transversal(square, part.cells)
        if err is not None:
            return False, f"part {k}: {err}"
        for (r, c) in part.cells:
            seen[r - 1][c - 1] += 1
    for r in range(n):
        for c in range(n):
            if seen[r][c] > 1:
                return False, f"cell ({r + 1},{c + 1}) covered twice"
            if seen[r][c] == 0:
                return False, f"cell ({r + 1},{c + 1}) uncovered"
    return True, "ok"


def exact_cover_problem(square: LatinSquare) -> ExactCoverProblem:
    """Materialise the decomposition instance: all transversals as rows."""
    return ExactCoverProblem(n=square.n, rows=tuple(iter_transversals(square)))
