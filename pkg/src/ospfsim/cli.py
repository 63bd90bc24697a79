"""Command-line front end: run simulations, explore the bounded model,
summarize traces.

Exit codes
    run:        0 converged, 1 timed out, 2 fault
    explore:    0 pass, 1 violation, 2 fault, 3 inconclusive
    summarize:  0 ok, 2 fault
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter, defaultdict

from .detailed import AdjPolicy
from .engine import (
    ConfigError,
    EngineConfig,
    MESSAGE_KINDS,
    parse_trace_line,
    render_trace,
    run,
)
from .explorer import ExploreConfig, counterexample_trace, explore
from .topology import TopologyError, load_topology


def _die(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _build_config(tf, args) -> EngineConfig:
    cfg = EngineConfig(model=args.model)
    cfg.boot_offsets = dict(tf.boot_offsets)
    if tf.adj_pairs is not None:
        cfg.adjacency = AdjPolicy(tf.adj_pairs)
    for key, value in tf.overrides.items():
        if key == "loss_prob":
            cfg.loss_prob = float(value)
        else:
            setattr(cfg, key, int(value))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.max_ticks is not None:
        cfg.max_ticks = args.max_ticks
    if args.loss_prob is not None:
        cfg.loss_prob = args.loss_prob
    if args.queue_capacity is not None:
        cfg.queue_capacity = args.queue_capacity
    return cfg


def cmd_run(args) -> int:
    try:
        tf = load_topology(args.topology)
    except TopologyError as exc:
        return _die(str(exc))
    except OSError as exc:
        return _die(str(exc))
    try:
        cfg = _build_config(tf, args)
        sim, trace, verdict = run(cfg, tf.topology)
    except ConfigError as exc:
        return _die(str(exc))

    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(render_trace(trace))
    if args.format == "full" and not args.trace:
        sys.stdout.write(render_trace(trace))
    print(verdict.line())
    if verdict.kind == "converged":
        return 0
    if verdict.kind == "timed_out":
        return 1
    return 2


def cmd_explore(args) -> int:
    try:
        tf = load_topology(args.topology)
    except (TopologyError, OSError) as exc:
        return _die(str(exc))
    cfg = ExploreConfig(topology=tf.topology)
    if args.queue_bound is not None:
        cfg.queue_bound = args.queue_bound
    if args.age_bound is not None:
        cfg.age_bound = args.age_bound
    if args.start_interval is not None:
        cfg.start_interval = args.start_interval
    if args.depth_bound is not None:
        cfg.depth_bound = args.depth_bound
    if args.max_states is not None:
        cfg.max_states = args.max_states
    for key, value in tf.overrides.items():
        if key in ("hellointvl", "rtdeadintvl", "time_sending"):
            setattr(cfg, key, int(value))
    try:
        cfg.validate()
    except ValueError as exc:
        return _die(str(exc))
    verdict = explore(cfg)
    for line in verdict.lines():
        print(line)
    ce = verdict.counterexample
    if ce is not None:
        choices = " ".join(
            "/".join(c) if c is not None else "-" for c in ce.choices
        )
        print(f"counterexample choices: {choices or '(delivery phase)'}")
        if args.trace:
            events = counterexample_trace(cfg, ce)
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write(render_trace(events))
    if verdict.status == "pass":
        return 0
    if verdict.status == "violation":
        return 1
    return 3


def cmd_summarize(args) -> int:
    try:
        with open(args.trace, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        return _die(str(exc))

    events = []
    for idx, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            events.append(parse_trace_line(line))
        except (json.JSONDecodeError, KeyError, TypeError):
            return _die(f"record {idx}: malformed trace record")

    per_node: dict[int, Counter] = defaultdict(Counter)
    totals: Counter = Counter()
    converged_tick = None
    timeline: dict[int, list] = defaultdict(list)
    for ev in events:
        if ev.kind == "send":
            kind = ev.detail.get("type")
            per_node[ev.node][kind] += 1
            totals[kind] += 1
        elif ev.kind == "converged":
            converged_tick = ev.tick
        elif ev.kind == "state_change":
            timeline[ev.node].append(
                (ev.tick, ev.detail.get("nbr"), ev.detail.get("ns"))
            )

    total = sum(totals.values())
    print(f"messages total={total} " + " ".join(
        f"{k}={totals.get(k, 0)}" for k in MESSAGE_KINDS))
    for node in sorted(per_node):
        counts = per_node[node]
        print(f"node {node}: total={sum(counts.values())} " + " ".join(
            f"{k}={counts.get(k, 0)}" for k in MESSAGE_KINDS))
    for node in sorted(timeline):
        steps = " ".join(
            f"[{tick}] {nbr}->{ns}" for tick, nbr, ns in timeline[node]
        )
        print(f"node {node} adjacency: {steps}")
    if converged_tick is not None:
        print(f"converged at tick {converged_tick}")
    else:
        print("no convergence recorded")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ospfsim",
        description="Link-state protocol simulation and bounded exploration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a topology until steady state")
    p_run.add_argument("topology", help="topology file")
    p_run.add_argument("--model", choices=("simple", "detailed"),
                       default="detailed")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--max-ticks", type=int, default=None)
    p_run.add_argument("--loss-prob", type=float, default=None)
    p_run.add_argument("--queue-capacity", type=int, default=None)
    p_run.add_argument("--trace", help="write the event trace to this file")
    p_run.add_argument("--format", choices=("full", "summary"),
                       default="summary",
                       help="'full' prints the trace to stdout when no "
                            "--trace file is given")
    p_run.set_defaults(func=cmd_run)

    p_exp = sub.add_parser("explore",
                           help="exhaustively explore a small topology")
    p_exp.add_argument("topology", help="topology file")
    p_exp.add_argument("--queue-bound", type=int, default=None)
    p_exp.add_argument("--age-bound", type=int, default=None)
    p_exp.add_argument("--start-interval", type=int, default=None)
    p_exp.add_argument("--depth-bound", type=int, default=None)
    p_exp.add_argument("--max-states", type=int, default=None)
    p_exp.add_argument("--trace",
                       help="write a counterexample record to this file")
    p_exp.set_defaults(func=cmd_explore)

    p_sum = sub.add_parser("summarize", help="summarize a trace file")
    p_sum.add_argument("trace", help="trace file in the engine format")
    p_sum.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
