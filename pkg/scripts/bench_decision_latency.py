#!/usr/bin/env python3
"""Measure single-query decision latency on a generated desk-scale model.

Builds a 10k-node graph with ~30k HAS_ATTR edges and 1000 policies, then
times `evaluate` over random queries and prints latency percentiles.
"""

import argparse
import random
import statistics
import time

from graphabac import CombiningAlgorithm, evaluate
from graphabac.graph import HAS_ATTR
from graphabac.randmodel import RandomModelConfig, random_model, random_query


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--queries", type=int, default=100)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--policies", type=int, default=1000)
    parser.add_argument(
        "--algorithm",
        choices=[a.value for a in CombiningAlgorithm],
        default=CombiningAlgorithm.DENY_OVERRIDES.value,
    )
    args = parser.parse_args()

    rng = random.Random(args.seed)
    cfg = RandomModelConfig(
        n_primitives=2000,
        n_attributes=8000,
        n_layers=5,
        edge_factor=3.2,
        n_policies=args.policies,
        anchored_fraction=0.5,
    )
    t0 = time.perf_counter()
    model = random_model(rng, cfg)
    build = time.perf_counter() - t0
    print(
        f"model: {model.graph.node_count()} nodes, "
        f"{model.graph.edge_count(HAS_ATTR)} HAS_ATTR edges, "
        f"{len(model.policies)} policies, depth {model.graph.attr_depth} "
        f"(built in {build:.2f}s)"
    )

    alg = CombiningAlgorithm(args.algorithm)
    timings = []
    for _ in range(args.queries):
        q = random_query(rng, model)
        t0 = time.perf_counter()
        evaluate(model.policies, q, alg)
        timings.append(time.perf_counter() - t0)
    timings.sort()
    ms = [t * 1000 for t in timings]
    print(
        f"{args.queries} queries ({alg.value}): "
        f"median {statistics.median(ms):.2f} ms, "
        f"p90 {ms[int(0.9 * len(ms)) - 1]:.2f} ms, "
        f"max {ms[-1]:.2f} ms"
    )


if __name__ == "__main__":
    main()
