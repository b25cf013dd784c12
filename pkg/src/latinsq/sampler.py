"""Approximately uniform random Latin squares, and exhaustive small-order
enumeration.

The sampler walks the standard proper/improper incidence-cube chain: states
are n x n x n 0/1 arrays with all line sums 1, except that one cell may hold
-1 (the improper case).  A move picks a random 0-cell (or the forced -1
cell) and flips the associated 2x2x2 subcube.  The walk's proper states are
uniform over all Latin squares in the limit; burn-in and thinning are
counted in proper-state visits.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .core import LatinSquare, ValidationError, _trusted_square, cyclic_square

DEFAULT_BURNIN_FACTOR = 10  # burn-in = 10 * n^3 proper-state visits
_BUF = 8192


class SeededRng:
    """Counter-style reproducible stream: (master seed, stream index).

    Distinct stream indices give statistically independent draws; the same
    pair reproduces the same sequence.  Integer draws are buffered so the
    chain's hot loop amortises generator overhead.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed & (2**64 - 1), self.stream & (2**64 - 1)], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))
        self._buffers: dict[int, tuple[np.ndarray, int]] = {}

    def derive(self, stream: int) -> "SeededRng":
        """A fresh independent stream; nested derivation mixes the parent
        stream index so distinct derivation paths never collide."""
        mixed = (self.stream * 0x9E3779B97F4A7C15 + stream + 1) % 2**64
        return SeededRng(self.seed, mixed)

    def randint(self, k: int) -> int:
        """Uniform integer in [0, k), buffered."""
        buf = self._buffers.get(k)
        if buf is None or buf[1] >= len(buf[0]):
            arr = self.generator.integers(0, k, size=_BUF, dtype=np.int64)
            buf = (arr, 0)
        arr, pos = buf
        self._buffers[k] = (arr, pos + 1)
        return int(arr[pos])

    def random(self) -> float:
        return float(self.generator.random())

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates using this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]


class MarkovState:
    """Incidence-cube state of the walk; mutable, single-owner."""

    def __init__(self, n: int, flat: list[int], improper: tuple[int, int, int] | None):
        self.n = n
        self.flat = flat  # n^3 entries, value(-1/0/1) at index r*n*n + c*n + s
        self.improper = improper

    @classmethod
    def from_square(cls, square: LatinSquare) -> "MarkovState":
        n = square.n
        flat = [0] * (n * n * n)
        for r in range(n):
            row = square.cells[r]
            base = r * n * n
            for c in range(n):
                flat[base + c * n + (row[c] - 1)] = 1
        return cls(n, flat, None)

    @property
    def is_proper(self) -> bool:
        return self.improper is None

    def to_square(self) -> LatinSquare:
        if self.improper is not None:
            raise ValidationError("improper state does not project to a square")
        n = self.n
        flat = self.flat
        grid = [[0] * n for _ in range(n)]
        for r in range(n):
            base = r * n * n
            for c in range(n):
                off = base + c * n
                for s in range(n):
                    if flat[off + s] == 1:
                        grid[r][c] = s + 1
                        break
        return _trusted_square(grid)

    def line_sums_ok(self) -> bool:
        """All 3n^2 line sums equal 1 and values are in {-1, 0, 1}."""
        n = self.n
        flat = self.flat
        if any(v not in (-1, 0, 1) for v in flat):
            return False
        if sum(1 for v in flat if v == -1) != (0 if self.improper is None else 1):
            return False
        for r in range(n):
            for c in range(n):
                if sum(flat[r * n * n + c * n + s] for s in range(n)) != 1:
                    return False
        for r in range(n):
            for s in range(n):
                if sum(flat[r * n * n + c * n + s] for c in range(n)) != 1:
                    return False
        for c in range(n):
            for s in range(n):
                if sum(flat[r * n * n + c * n + s] for r in range(n)) != 1:
                    return False
        return True


def jm_step(state: MarkovState, rng: SeededRng) -> MarkovState:
    """One move of the chain, in place; returns the state for chaining."""
    n = state.n
    if n == 1:
        return state  # single square, nothing to move
    flat = state.flat
    n2 = n * n
    n3 = n2 * n
    if state.improper is None:
        while True:
            idx = rng.randint(n3)
            if flat[idx] == 0:
                break
        r, rest = divmod(idx, n2)
        c, s = divmod(rest, n)
        r1 = c1 = s1 = -1
        off = c * n + s
        for rr in range(n):
            if flat[rr * n2 + off] == 1:
                r1 = rr
                break
        base = r * n2
        for cc in range(n):
            if flat[base + cc * n + s] == 1:
                c1 = cc
                break
        off = base + c * n
        for ss in range(n):
            if flat[off + ss] == 1:
                s1 = ss
                break
    else:
        r, c, s = state.improper
        # each line through the -1 cell holds exactly two 1-entries; pick one
        # uniformly per axis (scan stops at the picked entry)
        off = c * n + s
        pick = rng.randint(2)
        rr = 0
        while True:
            if flat[rr * n2 + off] == 1:
                if pick == 0:
                    r1 = rr
                    break
                pick -= 1
            rr += 1
        base = r * n2
        pick = rng.randint(2)
        cc = 0
        while True:
            if flat[base + cc * n + s] == 1:
                if pick == 0:
                    c1 = cc
                    break
                pick -= 1
            cc += 1
        off = base + c * n
        pick = rng.randint(2)
        ss = 0
        while True:
            if flat[off + ss] == 1:
                if pick == 0:
                    s1 = ss
                    break
                pick -= 1
            ss += 1
    # flip the 2x2x2 subcube spanned by (r,c,s) and (r1,c1,s1)
    flat[r * n2 + c * n + s] += 1
    flat[r * n2 + c1 * n + s1] += 1
    flat[r1 * n2 + c * n + s1] += 1
    flat[r1 * n2 + c1 * n + s] += 1
    flat[r1 * n2 + c * n + s] -= 1
    flat[r * n2 + c1 * n + s] -= 1
    flat[r * n2 + c * n + s1] -= 1
    apex = r1 * n2 + c1 * n + s1
    flat[apex] -= 1
    state.improper = (r1, c1, s1) if flat[apex] == -1 else None
    return state


def _advance_to_proper_visits(state: MarkovState, rng: SeededRng, visits: int) -> None:
    seen = 0
    while seen < visits:
        jm_step(state, rng)
        if state.improper is None:
            seen += 1


def sample_uniform(
    n: int, rng: SeededRng, burnin: int | None = None
) -> LatinSquare:
    """One (approximately) uniform square of order n.

    Starts the walk at the cyclic square and runs `burnin` proper-state
    visits (default 10 * n^3); deterministic given (rng state, burnin).
    """
    if n < 1:
        raise ValidationError("order must be at least 1")
    if burnin is None:
        burnin = DEFAULT_BURNIN_FACTOR * n**3
    state = MarkovState.from_square(cyclic_square(n))
    _advance_to_proper_visits(state, rng, burnin)
    return state.to_square()


def sample_squares(
    n: int,
    rng: SeededRng,
    count: int,
    burnin: int | None = None,
    thin: int | None = None,
) -> Iterator[LatinSquare]:
    """A stream of `count` samples from one walk; thinned between samples."""
    if n < 1:
        raise ValidationError("order must be at least 1")
    if burnin is None:
        burnin = DEFAULT_BURNIN_FACTOR * n**3
    if thin is None:
        thin = n**3
    state = MarkovState.from_square(cyclic_square(n))
    if n == 1:
        for _ in range(count):
            yield state.to_square()
        return
    _advance_to_proper_visits(state, rng, burnin)
    yield state.to_square()
    for _ in range(count - 1):
        _advance_to_proper_visits(state, rng, thin)
        yield state.to_square()


# --- exhaustive enumeration of small orders ---------------------------------

REDUCED_LIMIT = 6
ALL_LIMIT = 5


def enumerate_reduced(n: int, row_prefix: list[list[int]] | None = None) -> Iterator[LatinSquare]:
    """All reduced squares (first row and column in natural order), n <= 6.

    `row_prefix` optionally restricts the output to squares whose leading
    rows equal the given ones (the prefix must itself be reduced-compatible).
    """
    if n > REDUCED_LIMIT:
        raise ValidationError(f"reduced enumeration refused for order {n} > {REDUCED_LIMIT}")
    if n < 1:
        raise ValidationError("order must be at least 1")
    if n == 1:
        sq = _trusted_square([[1]])
        if not row_prefix or list(row_prefix[0]) == [1]:
            yield sq
        return

    grid = [[0] * n for _ in range(n)]
    grid[0] = list(range(1, n + 1))
    for r in range(n):
        grid[r][0] = r + 1
    col_used = [0] * n
    for c in range(n):
        col_used[c] = 1 << (c + 1)
    for r in range(1, n):
        col_used[0] |= 1 << (r + 1)

    prefix = [list(row) for row in row_prefix] if row_prefix else None
    if prefix and list(prefix[0]) != grid[0]:
        return

    def emit() -> LatinSquare:
        return _trusted_square([row[:] for row in grid])

    def rec(r: int, c: int, row_used: int) -> Iterator[LatinSquare]:
        if r == n:
            yield emit()
            return
        if c == n:
            nxt = r + 1
            yield from rec(nxt, 1, (1 << grid[nxt][0]) if nxt < n else 0)
            return
        forced = prefix[r][c] if prefix and r < len(prefix) else None
        for s in range(1, n + 1):
            if forced is not None and s != forced:
                continue
            b = 1 << s
            if row_used & b or col_used[c] & b:
                continue
            grid[r][c] = s
            col_used[c] |= b
            yield from rec(r, c + 1, row_used | b)
            col_used[c] &= ~b
        grid[r][c] = 0

    yield from rec(1, 1, 1 << grid[1][0])


def enumerate_all(n: int) -> Iterator[LatinSquare]:
    """Every square of order n exactly once, n <= 5; row-major backtracking."""
    if n > ALL_LIMIT:
        raise ValidationError(f"full enumeration refused for order {n} > {ALL_LIMIT}")
    if n < 1:
        raise ValidationError("order must be at least 1")
    grid = [[0] * n for _ in range(n)]
    col_used = [0] * n

    def rec(pos: int, row_used: int) -> Iterator[LatinSquare]:
        if pos == n * n:
            yield _trusted_square([row[:] for row in grid])
            return
        r, c = divmod(pos, n)
        if c == 0:
            row_used = 0
        for s in range(1, n + 1):
            b = 1 << s
            if row_used & b or col_used[c] & b:
                continue
            grid[r][c] = s
            col_used[c] |= b
            yield from rec(pos + 1, row_used | b)
            col_used[c] &= ~b

    yield from rec(0, 0)
