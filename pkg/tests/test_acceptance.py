"""Acceptance suite.

One test per acceptance criterion, each at its stated tolerance, each
printing a single pass/fail line (run with ``pytest -s`` to see them
on passing runs).

Criterion 2 is implemented faithfully and currently fails for the two
largest star topologies under the detailed model; the analysis lives in
the repository notes and docs/two_node_reconciliation.md documents the
criterion-1 count.
"""

import itertools
import os
import random
import time

import pytest

from ospfsim.core import NeighborState
from ospfsim.detailed import dbd_branch
from ospfsim.engine import ConfigError, EngineConfig, render_trace, run
from ospfsim.explorer import ExploreConfig, explore
from ospfsim.lsdb import install, newer_age
from ospfsim.topology import line, ring, star

HERE = os.path.dirname(__file__)
DOCS = os.path.join(HERE, os.pardir, "docs")

TOPOLOGIES = (
    [(f"line{n}", line(n)) for n in range(2, 7)]
    + [(f"ring{n}", ring(n)) for n in range(3, 7)]
    + [(f"star{n}", star(n)) for n in range(4, 7)]
)


def _report(num, name, ok):
    print(f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'}")


def test_criterion_1_two_node_steady_state():
    started = time.time()
    sim, trace, verdict = run(EngineConfig(model="detailed"), line(2))
    elapsed = time.time() - started
    total = verdict.total_messages
    ok = verdict.kind == "converged" and elapsed < 1.0
    if total != 18:
        # the count differs from the quoted 18: the annotated trace and
        # the written reconciliation must ship with the build, and the
        # count must stay within the accepted window
        ok = ok and 14 <= total <= 22
        reconciliation = os.path.join(DOCS, "two_node_reconciliation.md")
        trace_file = os.path.join(DOCS, "two_node_trace.jsonl")
        ok = ok and os.path.exists(reconciliation) and os.path.exists(trace_file)
        with open(trace_file) as fh:
            ok = ok and fh.read() == render_trace(trace)
    _report(1, "two-node steady state", ok)
    assert ok, f"count={total} elapsed={elapsed:.3f}s"


@pytest.mark.parametrize("name,topo", TOPOLOGIES, ids=[n for n, _ in TOPOLOGIES])
@pytest.mark.parametrize("model", ("simple", "detailed"))
def test_criterion_2_convergence_suite(name, topo, model):
    cfg = EngineConfig(model=model, max_ticks=4000)
    sim, trace, verdict = run(cfg, topo)
    bound = 5 * topo.diameter() * cfg.hellointvl
    ok = verdict.kind == "converged" and verdict.at_tick <= bound
    links_ok = all(
        sim.nodes[ip].state.lsdb.get(j) is not None
        and sim.nodes[ip].state.lsdb.get(j).links == topo.neighbors(j)
        for ip in topo.nodes()
        for j in topo.nodes()
    )
    ok = ok and links_ok
    _report(2, f"convergence {name}/{model}", ok)
    assert ok, (
        f"{name}/{model}: verdict={verdict.kind}@{verdict.at_tick} "
        f"bound={bound} links_ok={links_ok}"
    )


def test_criterion_2_runtime_budget():
    started = time.time()
    for name, topo in TOPOLOGIES:
        for model in ("simple", "detailed"):
            run(EngineConfig(model=model, max_ticks=4000), topo)
    elapsed = time.time() - started
    ok = elapsed < 10.0
    _report(2, "convergence suite runtime", ok)
    assert ok, f"elapsed {elapsed:.1f}s"


def test_criterion_3_loss_tolerance():
    budget = 50 * EngineConfig().hellointvl
    failures = []
    for seed in range(20):
        cfg = EngineConfig(model="detailed", loss_prob=0.2, seed=seed,
                           max_ticks=budget + 1)
        sim, trace, verdict = run(cfg, line(3))
        if verdict.kind != "converged" or verdict.at_tick > budget:
            failures.append((seed, verdict.kind, verdict.at_tick))
    with pytest.raises(ConfigError):
        EngineConfig(model="simple", loss_prob=0.2).validate()
    ok = not failures
    _report(3, "loss tolerance", ok)
    assert ok, f"failures: {failures}"


def test_criterion_4_install_oracle_equivalence():
    from ospfsim.core import Lsa, Lsdb

    rng = random.Random(1234)

    def random_db():
        picks = {}
        for origin in rng.sample(range(1, 5), rng.randint(0, 4)):
            links = frozenset(
                l for l in range(1, 5) if l != origin and rng.random() < 0.4
            )
            picks[origin] = Lsa(origin, rng.randint(0, 8), links)
        return Lsdb.of(picks.values())

    def oracle(stored, incoming):
        best = {lsa.origin: lsa for lsa in stored}
        for lsa in incoming:
            cur = best.get(lsa.origin)
            if cur is None or lsa.stamp > cur.stamp:
                best[lsa.origin] = lsa
        return Lsdb.of(best.values())

    ok = True
    for _ in range(10_000):
        stored, incoming = random_db(), random_db()
        if install(stored, incoming) != oracle(stored, incoming):
            ok = False
            break
    _report(4, "install oracle equivalence", ok)
    assert ok


def test_criterion_5_newer_age_law():
    ok = True
    for bound in (8, 16):
        for a, b in itertools.permutations(range(1, bound + 1), 2):
            circ = min(abs(a - b), bound - abs(a - b))
            if circ < bound / 2:
                if newer_age(a, b, bound) == newer_age(b, a, bound):
                    ok = False
        for x in range(0, bound + 1):
            if newer_age(0, x, bound) is not False:
                ok = False
            if x and newer_age(x, 0, bound) is not True:
                ok = False
    _report(5, "wrap-around age law", ok)
    assert ok


def test_criterion_6_dbd_guard_partition():
    ok = True
    grid = itertools.product(
        list(NeighborState),
        range(-2, 3),
        (False, True),
        ("slave", "master", "non-adjacent", "unknown"),
        (-1, 1),
    )
    for ns, rel, ibit, relation, ddt_off in grid:
        known = relation != "unknown"
        held = dbd_branch(
            known=known,
            ns=ns if known else None,
            sqn=5 + rel,
            ddsqn=5,
            ibit=ibit,
            is_slave=relation == "slave",
            is_master=relation == "master",
            dd_deadline=30 + ddt_off,
            now=30,
        )
        if len(held) != 1:
            ok = False
            break
    _report(6, "guard partition", ok)
    assert ok, f"offending input: {(ns, rel, ibit, relation, ddt_off)} -> {held}"


def test_criterion_7_explorer_soundness():
    started = time.time()
    cfg = ExploreConfig(topology=line(3), queue_bound=10, start_interval=10)
    verdict = explore(cfg)
    elapsed = time.time() - started
    assert verdict.status != "inconclusive", (
        f"exploration budget exhausted: {verdict.message}"
    )
    ok = (
        verdict.status == "pass"
        and verdict.max_queue_occupancy <= cfg.queue_bound
        and elapsed < 300.0
    )
    _report(7, "explorer soundness", ok)
    assert ok, f"{verdict.status}: {verdict.message} ({elapsed:.0f}s)"


def test_criterion_7_engine_schedule_inclusion():
    from ospfsim.explorer import (
        _Ctx, deterministic_choice, initial_state, state_converged, successors,
    )

    cfg = ExploreConfig(topology=line(3), queue_bound=10, start_interval=10)
    ctx = _Ctx(cfg)
    tracker = {"max_occ": 0}
    canon = initial_state(cfg, {1: 0, 2: 0, 3: 0})
    ok = False
    for _ in range(100):
        if state_converged(canon, cfg.topology):
            ok = True
            break
        want = deterministic_choice(canon, ctx)
        step = {c: child for c, child, _ in successors(canon, ctx, tracker)}
        if want not in step:
            break
        canon = step[want]
    _report(7, "engine schedule inclusion", ok)
    assert ok


@pytest.mark.parametrize("name,topo", TOPOLOGIES, ids=[n for n, _ in TOPOLOGIES])
def test_criterion_8_model_agreement(name, topo):
    finals = {}
    for model in ("simple", "detailed"):
        sim, trace, verdict = run(EngineConfig(model=model, max_ticks=4000), topo)
        assert verdict.kind == "converged", f"{name}/{model} did not converge"
        finals[model] = {
            ip: {lsa.origin: lsa.links for lsa in sim.nodes[ip].state.lsdb}
            for ip in topo.nodes()
        }
    ok = finals["simple"] == finals["detailed"]
    _report(8, f"model agreement {name}", ok)
    assert ok


def test_criterion_9_determinism():
    ok = True
    for name, topo in TOPOLOGIES:
        for model in ("simple", "detailed"):
            cfg = lambda: EngineConfig(model=model, seed=5, max_ticks=4000)
            _, one, _ = run(cfg(), topo)
            _, two, _ = run(cfg(), topo)
            if render_trace(one) != render_trace(two):
                ok = False
    _report(9, "determinism", ok)
    assert ok
