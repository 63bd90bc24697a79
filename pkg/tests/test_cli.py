import json
import subprocess
import sys

import pytest

from ospfsim.cli import main

LINE2 = "nodes 2\nedge 1 2\n"
LINE3 = "nodes 3\nedge 1 2\nedge 2 3\n"


@pytest.fixture
def line3_path(tmp_path):
    p = tmp_path / "line3.top"
    p.write_text(LINE3)
    return str(p)


def test_run_converges(capsys, tmp_path):
    p = tmp_path / "two.top"
    p.write_text(LINE2)
    code = main(["run", str(p), "--model", "detailed"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("CONVERGED tick=19 msgs=17 ")
    assert "hello=4 dbd=5 req=0 upd=4 ack=4" in out


def test_run_is_reproducible(capsys, line3_path):
    assert main(["run", line3_path, "--model", "simple", "--seed", "7",
                 "--format", "full"]) == 0
    first = capsys.readouterr().out
    assert main(["run", line3_path, "--model", "simple", "--seed", "7",
                 "--format", "full"]) == 0
    assert capsys.readouterr().out == first


def test_run_rejects_bad_topology(capsys, tmp_path):
    p = tmp_path / "bad.top"
    p.write_text("nodes 2\nedge 1 3\n")
    assert main(["run", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_run_rejects_unknown_key(capsys, tmp_path):
    p = tmp_path / "odd.top"
    p.write_text("nodes 2\nedge 1 2\nfanout 3\n")
    assert main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "valid keys" in err


def test_run_timeout_exit_code(capsys, tmp_path):
    p = tmp_path / "lossy.top"
    p.write_text(LINE2 + "loss_prob 1.0\nmax_ticks 40\n")
    assert main(["run", str(p), "--model", "detailed"]) == 1
    assert capsys.readouterr().out.strip() == "TIMEOUT"


def test_run_simple_with_loss_is_invalid(capsys, tmp_path):
    p = tmp_path / "bad_cfg.top"
    p.write_text(LINE2 + "loss_prob 0.5\n")
    assert main(["run", str(p), "--model", "simple"]) == 2
    assert "loss_prob" in capsys.readouterr().err


def test_run_overflow_exit_code(capsys, line3_path):
    assert main(["run", line3_path, "--model", "simple",
                 "--queue-capacity", "1"]) == 2
    assert capsys.readouterr().out.startswith("OVERFLOW node=2 tick=1")


def test_trace_roundtrip_through_summarize(capsys, tmp_path, line3_path):
    trace_path = tmp_path / "run.trace"
    assert main(["run", line3_path, "--model", "detailed",
                 "--trace", str(trace_path)]) == 0
    verdict_line = capsys.readouterr().out.strip()
    parts = dict(
        kv.split("=") for kv in verdict_line.split()[1:]
    )
    assert main(["summarize", str(trace_path)]) == 0
    summary = capsys.readouterr().out
    first = summary.splitlines()[0]
    assert first == (
        f"messages total={parts['msgs']} hello={parts['hello']} "
        f"dbd={parts['dbd']} req={parts['req']} upd={parts['upd']} "
        f"ack={parts['ack']}"
    )
    assert f"converged at tick {parts['tick']}" in summary
    assert "adjacency" in summary


def test_summarize_empty_trace(capsys, tmp_path):
    p = tmp_path / "empty.trace"
    p.write_text("")
    assert main(["summarize", str(p)]) == 0
    out = capsys.readouterr().out
    assert "messages total=0" in out
    assert "no convergence recorded" in out


def test_summarize_truncated_record(capsys, tmp_path):
    p = tmp_path / "broken.trace"
    p.write_text('{"tick":0,"node":1,"kind":"send","detail":{}}\n{"tick":1,\n')
    assert main(["summarize", str(p)]) == 2
    assert "record 2" in capsys.readouterr().err


def test_explore_pass_and_violation(capsys, tmp_path, line3_path):
    assert main(["explore", line3_path, "--start-interval", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("EXPLORE PASS")

    ce_path = tmp_path / "ce.trace"
    assert main(["explore", line3_path, "--start-interval", "2",
                 "--queue-bound", "1", "--trace", str(ce_path)]) == 1
    out = capsys.readouterr().out
    assert "EXPLORE VIOLATION" in out
    assert "boot offsets" in out
    # the counterexample trace uses the engine's record format
    records = [json.loads(l) for l in ce_path.read_text().splitlines()]
    assert records
    assert all(set(r) == {"tick", "node", "kind", "detail"} for r in records)
    assert any(r["kind"] == "send" for r in records)


def test_explore_refuses_large_topology(capsys, tmp_path):
    p = tmp_path / "big.top"
    edges = "".join(f"edge {i} {i+1}\n" for i in range(1, 10))
    p.write_text("nodes 10\n" + edges)
    assert main(["explore", str(p)]) == 2
    assert "limited to" in capsys.readouterr().err


def test_explore_inconclusive_exit_code(capsys, line3_path):
    assert main(["explore", line3_path, "--start-interval", "2",
                 "--depth-bound", "4"]) == 3
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_console_entry_point(tmp_path):
    p = tmp_path / "two.top"
    p.write_text(LINE2)
    proc = subprocess.run(
        [sys.executable, "-m", "ospfsim.cli", "run", str(p)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("CONVERGED")
