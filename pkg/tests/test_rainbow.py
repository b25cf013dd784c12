import pytest

from latinsq.core import cyclic_square, from_grid, to_coloring
from latinsq.links import enumerate_links, repeat_pattern
from latinsq.rainbow import (
    SwitchRequestSet,
    apply_switcher,
    check_near_matching,
    family_from_json,
    find_switcher,
    is_le1_balanced,
    make_family,
    make_pair,
    pair_counts,
    validate_switcher,
)
from latinsq.sampler import SeededRng, sample_uniform
from latinsq.transversal import decompose


def perfect_family(square):
    res = decompose(square)
    assert res.status == "some"
    host = to_coloring(square)
    return make_family(host, [list(p.cells) for p in res.decomposition.parts])


def klein_power_square(bits):
    n = 1 << bits
    return from_grid([[(r ^ c) + 1 for c in range(n)] for r in range(n)])


def planted_family(square, x, y, k, seed_idx=0):
    """Family of two matchings carrying a repeat-pattern path from x to y."""
    host = to_coloring(square)
    links = enumerate_links(host, x, y, repeat_pattern(k), limit=seed_idx + 1)
    if len(links) <= seed_idx:
        return None
    emb = links[seed_idx].embedding
    edges = []
    for t in range(2 * k):
        pa, pb = emb[t], emb[t + 1]
        (a, b) = (pa[1], pb[1]) if pa[0] == "A" else (pb[1], pa[1])
        edges.append((a, b))
    return make_family(host, [edges[0::2], edges[1::2]])


def test_full_rainbow_matchings_family_is_valid():
    fam = perfect_family(klein_power_square(3))
    ok, report = check_near_matching(fam)
    assert ok and report == []


def test_repeated_colour_is_reported():
    sq = cyclic_square(4)
    host = to_coloring(sq)
    # edges (1,1) and (2,4) both have colour 1 in the cyclic square
    fam = make_family(host, [[(1, 1), (2, 4)]])
    ok, report = check_near_matching(fam)
    assert not ok
    assert any("repeated colour" in r[2] for r in report)


def test_exception_sets_checked():
    sq = klein_power_square(2)
    host = to_coloring(sq)
    full = perfect_family(sq).matchings[0]  # one rainbow perfect matching
    fam = make_family(host, [[(a, b) for (a, b, _c) in full]])
    ok, _ = check_near_matching(fam)
    assert ok
    # delete one edge and declare its two endpoints degree-0
    (da, db, _dc) = full[-1]
    edges = [(a, b) for (a, b, _c) in full[:-1]]
    fam2 = make_family(host, [edges], deg0=[[("A", da), ("B", db)]], deg2=[[]])
    ok2, rep2 = check_near_matching(fam2)
    assert ok2, rep2
    # wrong exception set: vertex has degree 1, required 0
    (ea, _eb, _ec) = full[0]
    fam3 = make_family(host, [edges], deg0=[[("A", ea)]], deg2=[[]])
    ok3, rep3 = check_near_matching(fam3)
    assert not ok3
    assert any(v == ("A", ea) for (_i, v, _m) in rep3)


def test_overlapping_matchings_reported():
    host = to_coloring(klein_power_square(2))
    fam = make_family(host, [[(1, 1)], [(1, 1)]])
    ok, report = check_near_matching(fam)
    assert not ok
    assert any("also in matching" in r[2] for r in report)


def test_find_switcher_length_two_impossible():
    fam = perfect_family(klein_power_square(3))
    assert find_switcher(fam, 1, 2, ("A", 1), ("A", 2), max_len=2) is None


def test_find_switcher_bad_arguments():
    fam = perfect_family(klein_power_square(3))
    with pytest.raises(ValueError):
        find_switcher(fam, 1, 1, ("A", 1), ("A", 2))
    with pytest.raises(ValueError):
        find_switcher(fam, 1, 2, ("A", 1), ("A", 1))
    with pytest.raises(ValueError):
        find_switcher(fam, 1, 2, ("A", 1), ("B", 2))


def test_planted_switcher_found_and_applied():
    sq = sample_uniform(8, SeededRng(17).derive(0), burnin=2000)
    fam = planted_family(sq, ("A", 1), ("A", 5), 3)
    assert fam is not None
    sw = find_switcher(fam, 1, 2, ("A", 1), ("A", 5), max_len=6)
    assert sw is not None
    assert validate_switcher(fam, sw) is None
    assert len(sw.path) == 6
    after = apply_switcher(fam, sw)
    # multiset of edges across both matchings preserved
    assert sorted(fam.matchings[0] + fam.matchings[1]) == sorted(
        after.matchings[0] + after.matchings[1]
    )
    # colour sets preserved per matching
    for k in range(2):
        assert {c for (_a, _b, c) in fam.matchings[k]} == {
            c for (_a, _b, c) in after.matchings[k]
        }
    # involution restores exactly
    again = apply_switcher(after, sw.transposed())
    assert again == fam


def test_apply_switcher_rejects_inconsistent():
    sq = sample_uniform(8, SeededRng(18).derive(0), burnin=2000)
    fam = planted_family(sq, ("A", 2), ("A", 6), 3)
    assert fam is not None
    sw = find_switcher(fam, 1, 2, ("A", 2), ("A", 6), max_len=6)
    assert sw is not None
    # a switcher planted in a different family does not validate here
    other = planted_family(sq, ("A", 2), ("A", 6), 3, seed_idx=1)
    if other is not None:
        sw_other = find_switcher(other, 1, 2, ("A", 2), ("A", 6), max_len=6)
        if sw_other is not None and sw_other.path != sw.path:
            with pytest.raises(ValueError, match="inconsistent"):
                apply_switcher(fam, sw_other)


def test_switcher_degree_shift():
    sq = sample_uniform(8, SeededRng(19).derive(0), burnin=2000)
    fam = planted_family(sq, ("B", 1), ("B", 4), 3)
    assert fam is not None
    sw = find_switcher(fam, 1, 2, ("B", 1), ("B", 4), max_len=6)
    assert sw is not None
    after = apply_switcher(fam, sw)

    def deg(edges, v):
        return sum(1 for (a, b, _c) in edges if ("A", a) == v or ("B", b) == v)

    x, y = ("B", 1), ("B", 4)
    assert deg(after.matchings[0], x) == deg(fam.matchings[0], x) - 1
    assert deg(after.matchings[1], x) == deg(fam.matchings[1], x) + 1
    assert deg(after.matchings[0], y) == deg(fam.matchings[0], y) + 1
    assert deg(after.matchings[1], y) == deg(fam.matchings[1], y) - 1
    # all other vertices keep their degrees
    for side in "AB":
        for t in range(1, 9):
            v = (side, t)
            if v in (x, y):
                continue
            for k in range(2):
                assert deg(after.matchings[k], v) == deg(fam.matchings[k], v)


def test_family_json_round_trip():
    sq = klein_power_square(3)
    fam = perfect_family(sq)
    text = fam.to_json()
    back = family_from_json(text, fam.base)
    assert back == fam


def test_le1_balance_cases():
    empty = SwitchRequestSet.of([])
    assert is_le1_balanced(empty, 1, "u")
    one = SwitchRequestSet.of([make_pair(1, "u", 2, "v")])
    assert not is_le1_balanced(one, 1, "u")
    assert not is_le1_balanced(one, 2, "v")
    both = SwitchRequestSet.of([make_pair(1, "u", 2, "v"), make_pair(1, "v", 2, "u")])
    assert is_le1_balanced(both, 1, "u")
    assert is_le1_balanced(both, 2, "v")
    assert is_le1_balanced(both, 1, "v")
    # unrelated slots stay balanced
    assert is_le1_balanced(both, 3, "u")


def test_pair_counts_orientation():
    pairs = [make_pair(1, "u", 2, "v")]
    assert pair_counts(pairs, 1, "u") == (1, 0)
    assert pair_counts(pairs, 2, "v") == (1, 0)
    assert pair_counts(pairs, 2, "u") == (0, 1)
    assert pair_counts(pairs, 1, "v") == (0, 1)


def test_make_pair_rejects_degenerate():
    with pytest.raises(ValueError):
        make_pair(1, "u", 1, "v")
    with pytest.raises(ValueError):
        make_pair(1, "u", 2, "u")
