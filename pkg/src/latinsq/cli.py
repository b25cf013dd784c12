"""Batch experiment harness.

Subcommands: sample, count-transversals, decompose, verify, tarry-check,
mc-decomposable, census-links, probe-subgraph, absorber-demo,
connector-demo.  All randomness flows from --seed through per-trial derived
streams, so identical invocations produce identical report bodies
(timing fields aside) regardless of --workers.

Exit codes: 0 success, 1 invalid input, 2 infeasible or undecided-dominated,
3 assertion failure (a reproduction claim was violated).
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .absorber import (
    CorrectionInstance,
    InfeasibleError,
    RoutingError,
    build_connector,
    decompose_corrections,
    route_pairs,
    verify_corrections,
)
from .core import (
    ValidationError,
    cyclic_square,
    decomposition_to_grid_text,
    decomposition_from_grid_text,
    square_from_text,
    square_to_text,
    to_coloring,
)
from .links import census_path_pairs, count_links, repeat_pattern, subgraph_probability_probe
from .sampler import SeededRng, enumerate_reduced, sample_squares, sample_uniform
from .transversal import count_transversals, decompose, verify_decomposition

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_ASSERTION = 3


@dataclass
class ExperimentReport:
    command: str
    params: dict
    seed: int | None
    trials: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": SCHEMA_VERSION,
                "artifact_version": __version__,
                "command": self.command,
                "params": self.params,
                "seed": self.seed,
                "trials": self.trials,
                "summary": self.summary,
                "elapsed_seconds": self.elapsed_seconds,
            },
            sort_keys=True,
        )

    def to_text(self) -> str:
        lines = [f"{self.command}: {json.dumps(self.params, sort_keys=True)}"]
        for key in sorted(self.summary):
            lines.append(f"  {key} = {self.summary[key]}")
        return "\n".join(lines) + "\n"


def _emit(report: ExperimentReport, args, csv_rows: list[str] | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        body = report.to_json() + "\n"
    elif fmt == "csv" and csv_rows is not None:
        body = "\n".join(csv_rows) + "\n"
    else:
        body = report.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _read_square(path: str):
    with open(path) as fh:
        return square_from_text(fh.read())


# --- mc-decomposable ----------------------------------------------------------


def _mc_trial(task) -> dict:
    seed, n, trial, budget = task
    rng = SeededRng(seed).derive(trial)
    square = sample_uniform(n, rng)
    res = decompose(square, node_budget=budget)
    record = {"trial": trial, "status": res.status, "nodes": res.nodes}
    if res.status == "some":
        ok, msg = verify_decomposition(square, res.decomposition)
        record["verified"] = ok
        if not ok:
            record["violation"] = msg
    return record


def cmd_mc_decomposable(args) -> int:
    t0 = time.perf_counter()
    tasks = [(args.seed, args.order, t, args.node_budget) for t in range(args.trials)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(_mc_trial, tasks))
    else:
        records = [_mc_trial(t) for t in tasks]
    records.sort(key=lambda r: r["trial"])
    some = sum(1 for r in records if r["status"] == "some")
    none = sum(1 for r in records if r["status"] == "none")
    undecided = sum(1 for r in records if r["status"] == "undecided")
    bad = [r for r in records if r["status"] == "some" and not r.get("verified")]
    frac = some / len(records)
    half_width = 1.96 * (frac * (1 - frac) / len(records)) ** 0.5
    report = ExperimentReport(
        command="mc-decomposable",
        params={"order": args.order, "trials": args.trials, "node_budget": args.node_budget},
        seed=args.seed,
        trials=records,
        summary={
            "some": some,
            "none": none,
            "undecided": undecided,
            "fraction_resolvable": frac,
            "ci95_half_width": round(half_width, 6),
        },
    )
    report.elapsed_seconds = time.perf_counter() - t0
    _emit(report, args)
    if bad:
        return EXIT_ASSERTION
    if undecided > some + none:
        return EXIT_INFEASIBLE
    return EXIT_OK


# --- tarry-check --------------------------------------------------------------


def cmd_tarry_check(args) -> int:
    t0 = time.perf_counter()
    n = args.order
    examined = 0
    resolvable = 0
    undecided = 0
    offender = None
    transversal_histogram: dict[int, int] = {}
    prefix = None
    if args.cyclic_prefix_rows:
        prefix = [list(cyclic_square(n).row(r)) for r in range(1, args.cyclic_prefix_rows + 1)]
    for square in enumerate_reduced(n, row_prefix=prefix):
        examined += 1
        tc = count_transversals(square)
        transversal_histogram[tc] = transversal_histogram.get(tc, 0) + 1
        res = decompose(square, node_budget=args.node_budget)
        if res.status == "some":
            resolvable += 1
            offender = offender or square
        elif res.status == "undecided":
            undecided += 1
            offender = offender or square
    report = ExperimentReport(
        command="tarry-check",
        params={"order": n, "cyclic_prefix_rows": args.cyclic_prefix_rows},
        seed=None,
        summary={
            "examined": examined,
            "resolvable": resolvable,
            "undecided": undecided,
            "transversal_counts": {str(k): v for k, v in sorted(transversal_histogram.items())},
        },
    )
    report.elapsed_seconds = time.perf_counter() - t0
    _emit(report, args)
    if resolvable or undecided:
        if offender is not None:
            sys.stderr.write("offending square:\n" + square_to_text(offender))
        return EXIT_ASSERTION
    return EXIT_OK


# --- census-links -------------------------------------------------------------


def cmd_census_links(args) -> int:
    t0 = time.perf_counter()
    rng = SeededRng(args.seed)
    square = sample_uniform(args.order, rng.derive(0), burnin=args.burnin)
    host = to_coloring(square)
    pick = rng.derive(1)
    n = args.order
    rows = ["n,param,u,v,count,seconds"]
    records = []
    counts = []
    for _ in range(args.pairs):
        if args.length is None:
            side = "A" if pick.randint(2) == 0 else "B"
            u = (side, pick.randint(n) + 1)
            while True:
                v = (side, pick.randint(n) + 1)
                if v != u:
                    break
            ts = time.perf_counter()
            count = count_links(host, u, v, repeat_pattern(args.k))
            dt = time.perf_counter() - ts
            param = f"k={args.k}"
            urep, vrep = f"{u[0]}{u[1]}", f"{v[0]}{v[1]}"
        else:
            x1, x2 = pick.randint(n) + 1, 0
            while True:
                x2 = pick.randint(n) + 1
                if x2 != x1:
                    break
            y1, y2 = pick.randint(n) + 1, 0
            while True:
                y2 = pick.randint(n) + 1
                if y2 != y1:
                    break
            ts = time.perf_counter()
            res = census_path_pairs(
                host, args.length, (("A", x1), ("B", y1), ("A", x2), ("B", y2))
            )
            dt = time.perf_counter() - ts
            count = res.count
            param = f"len={args.length}"
            urep, vrep = f"A{x1}:B{y1}", f"A{x2}:B{y2}"
        counts.append(count)
        rows.append(f"{n},{param},{urep},{vrep},{count},{dt:.6f}")
        records.append({"param": param, "u": urep, "v": vrep, "count": count})
    summary = {
        "mean": statistics.fmean(counts) if counts else 0.0,
        "variance": statistics.pvariance(counts) if len(counts) > 1 else 0.0,
        "min": min(counts, default=0),
        "max": max(counts, default=0),
    }
    report = ExperimentReport(
        command="census-links",
        params={
            "order": args.order,
            "k": args.k,
            "length": args.length,
            "pairs": args.pairs,
        },
        seed=args.seed,
        trials=records,
        summary=summary,
    )
    report.elapsed_seconds = time.perf_counter() - t0
    _emit(report, args, csv_rows=rows)
    return EXIT_OK


# --- probe-subgraph -----------------------------------------------------------


def cmd_probe_subgraph(args) -> int:
    t0 = time.perf_counter()
    with open(args.graph) as fh:
        data = json.load(fh)
    edges = [tuple(e) for e in data["edges"]]
    rng = SeededRng(args.seed)
    result = subgraph_probability_probe(edges, args.order, args.trials, rng.derive(0))
    summary = {
        "estimate": result.estimate,
        "stderr": result.stderr,
        "hits": result.hits,
        "trials": result.trials,
    }
    if result.exact is not None:
        summary["exact"] = f"{result.exact.numerator}/{result.exact.denominator}"
    report = ExperimentReport(
        command="probe-subgraph",
        params={"order": args.order, "trials": args.trials, "edges": [list(e) for e in edges]},
        seed=args.seed,
        summary=summary,
    )
    report.elapsed_seconds = time.perf_counter() - t0
    _emit(report, args)
    return EXIT_OK


# --- absorber-demo ------------------------------------------------------------


def random_correction_instance(
    rng: SeededRng, num_indices: int = 20, universe_size: int = 400, max_surplus: int = 3
) -> CorrectionInstance:
    """A random feasible instance: surpluses drawn freely, then the same
    multiset dealt back out as chosen reservoir vertices."""
    indices = tuple(range(1, num_indices + 1))
    universe = tuple(range(1, universe_size + 1))
    surplus = {}
    for i in indices:
        k = rng.randint(max_surplus + 1)
        surplus[i] = frozenset(rng.sample(list(universe), k))
    pool = [u for i in indices for u in sorted(surplus[i])]
    for _ in range(10000):
        rng.shuffle(pool)
        chosen: dict = {}
        pos = 0
        ok = True
        for i in indices:
            k = len(surplus[i])
            picks = pool[pos:pos + k]
            pos += k
            if len(set(picks)) != k or set(picks) & surplus[i]:
                ok = False
                break
            chosen[i] = frozenset(picks)
        if ok:
            break
    else:
        raise RuntimeError("could not deal a feasible chosen assignment")
    reservoir = {}
    for i in indices:
        extra = [
            u
            for u in rng.sample(list(universe), len(chosen[i]) + 4)
            if u not in surplus[i] and u not in chosen[i]
        ]
        reservoir[i] = frozenset(set(chosen[i]) | set(extra[:4]))
    return CorrectionInstance(
        indices=indices,
        universe=universe,
        reservoir=reservoir,
        surplus=surplus,
        chosen=chosen,
    )


def cmd_absorber_demo(args) -> int:
    t0 = time.perf_counter()
    rng = SeededRng(args.seed)
    records = []
    artifacts = []
    failures = 0
    if args.instance:
        with open(args.instance) as fh:
            instances = [CorrectionInstance.from_json(fh.read())]
    else:
        instances = [
            random_correction_instance(
                rng.derive(t),
                num_indices=args.indices,
                universe_size=args.universe,
                max_surplus=args.max_surplus,
            )
            for t in range(args.count)
        ]
    for t, inst in enumerate(instances):
        try:
            cset = decompose_corrections(inst, rng.derive(10_000 + t))
        except InfeasibleError as exc:
            records.append({"instance": t, "status": "infeasible", "stage": exc.stage})
            failures += 1
            continue
        ok, violations = verify_corrections(inst, cset)
        records.append({"instance": t, "status": "ok" if ok else "invalid", "pairs": len(cset.pairs)})
        if not ok:
            records[-1]["violations"] = [list(v) for v in violations[:10]]
            failures += 1
        artifacts.append({"instance": json.loads(inst.to_json()), "pairs": json.loads(cset.to_json())})
    report = ExperimentReport(
        command="absorber-demo",
        params={
            "count": len(instances),
            "indices": args.indices,
            "universe": args.universe,
            "max_surplus": args.max_surplus,
        },
        seed=args.seed,
        trials=records,
        summary={
            "verified": sum(1 for r in records if r["status"] == "ok"),
            "failed": failures,
        },
    )
    report.elapsed_seconds = time.perf_counter() - t0
    if args.dump:
        with open(args.dump, "w") as fh:
            json.dump(artifacts, fh, sort_keys=True)
    _emit(report, args)
    if failures:
        return EXIT_INFEASIBLE if all(r["status"] != "invalid" for r in records) else EXIT_ASSERTION
    return EXIT_OK


# --- connector-demo -----------------------------------------------------------


def cmd_connector_demo(args) -> int:
    t0 = time.perf_counter()
    rng = SeededRng(args.seed)
    try:
        graph = build_connector(args.size, args.roots, spread=args.spread, rng=rng.derive(0))
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    stress = rng.derive(1)
    routed = 0
    failed = 0
    prefix = list(graph.roots[: graph.certified_roots])
    for _ in range(args.pairings):
        pool = list(prefix)
        stress.shuffle(pool)
        pairs = [(pool[2 * t], pool[2 * t + 1]) for t in range(len(pool) // 2)]
        try:
            route_pairs(graph, pairs)
            routed += 1
        except RoutingError:
            failed += 1
    max_deg = max(len(v) for v in graph.adj.values()) if graph.adj else 0
    report = ExperimentReport(
        command="connector-demo",
        params={"size": args.size, "roots": args.roots, "spread": args.spread},
        seed=args.seed,
        summary={
            "depth": graph.depth,
            "level_width": graph.width,
            "certified_roots": graph.certified_roots,
            "stress_pairings_ok": routed,
            "stress_pairings_failed": failed,
            "max_degree": max_deg,
        },
    )
    report.elapsed_seconds = time.perf_counter() - t0
    _emit(report, args)
    return EXIT_OK if failed == 0 else EXIT_INFEASIBLE


# --- plain square commands ------------------------------------------------------


def cmd_sample(args) -> int:
    rng = SeededRng(args.seed)
    blocks = []
    for square in sample_squares(
        args.order, rng.derive(0), args.count, burnin=args.burnin, thin=args.thin
    ):
        blocks.append(square_to_text(square))
    body = "\n".join(blocks)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return EXIT_OK


def cmd_count_transversals(args) -> int:
    square = _read_square(args.square)
    sys.stdout.write(f"{count_transversals(square)}\n")
    return EXIT_OK


def cmd_decompose(args) -> int:
    square = _read_square(args.square)
    res = decompose(square, node_budget=args.node_budget)
    if res.status == "some":
        body = decomposition_to_grid_text(square, res.decomposition)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(body)
        else:
            sys.stdout.write(body)
        return EXIT_OK
    sys.stdout.write(res.status + "\n")
    return EXIT_INFEASIBLE if res.status == "undecided" else EXIT_OK


def cmd_verify(args) -> int:
    square = _read_square(args.square)
    with open(args.parts) as fh:
        decomposition = decomposition_from_grid_text(fh.read())
    ok, msg = verify_decomposition(square, decomposition)
    sys.stdout.write(("ok" if ok else f"invalid: {msg}") + "\n")
    return EXIT_OK if ok else EXIT_ASSERTION


# --- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latinsq", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    parser.add_argument("--out", default=None, help="write output to this file")
    parser.add_argument("--format", choices=("text", "json", "csv"), default="text")
    parser.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    parser.add_argument("--node-budget", type=int, default=10**8)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample random squares to the square text format")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("count-transversals", help="count transversals of a square file")
    p.add_argument("square")
    p.set_defaults(func=cmd_count_transversals)

    p = sub.add_parser("decompose", help="decompose a square file into transversals")
    p.add_argument("square")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="verify a decomposition grid against a square")
    p.add_argument("square")
    p.add_argument("parts", help="decomposition in the orthogonal-mate grid format")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tarry-check", help="exhaustive resolvability scan of reduced squares")
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--cyclic-prefix-rows", type=int, default=0,
                   help="restrict to squares whose leading rows match the cyclic square")
    p.set_defaults(func=cmd_tarry_check)

    p = sub.add_parser("mc-decomposable", help="Monte-Carlo resolvability of random squares")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_mc_decomposable)

    p = sub.add_parser("census-links", help="repeat-pattern or path-pair censuses")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--k", type=int, default=2, help="repeat-pattern parameter")
    p.add_argument("--length", type=int, default=None,
                   help="census same-coloured path pairs of this odd length instead")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--burnin", type=int, default=None)
    p.set_defaults(func=cmd_census_links)

    p = sub.add_parser("probe-subgraph", help="containment probability of a coloured subgraph")
    p.add_argument("graph", help="JSON file with an `edges` list of [row, column, colour]")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_probe_subgraph)

    p = sub.add_parser("absorber-demo", help="correction decomposition round trips")
    p.add_argument("--instance", default=None, help="JSON instance file")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--indices", type=int, default=20)
    p.add_argument("--universe", type=int, default=400)
    p.add_argument("--max-surplus", type=int, default=3)
    p.add_argument("--dump", default=None, help="write instance/answer artifacts to this JSON file")
    p.set_defaults(func=cmd_absorber_demo)

    p = sub.add_parser("connector-demo", help="build, certify and stress a connector graph")
    p.add_argument("--size", type=int, default=4096)
    p.add_argument("--roots", type=int, default=16)
    p.add_argument("--spread", type=float, default=10.0)
    p.add_argument("--pairings", type=int, default=100)
    p.set_defaults(func=cmd_connector_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
