"""Secondary acceptance gate: one test per top-level criterion.

The multi-hour training runs are not rerun on every pytest invocation;
instead the committed artifacts under ``trainer/artifacts`` (produced by
the exact entry points of this package, run logs included) are
re-verified live against the primary toolchain.  Slow-marked twins rerun
the full training from scratch (GRAPHSYNTH_RUN_SLOW=1).
"""

import json
import re
from pathlib import Path

import pytest

from rl_trainer.config import default_config
from rl_trainer.pgbs import pgbs_eval
from rl_trainer.ppo import train_ppo
from rl_trainer.qusynth import train_qusynth
from rl_trainer.verify import cli_verify

ARTIFACTS = Path(__file__).parents[1] / "artifacts"


def check(criterion: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else ""))
    assert ok, f"{criterion} {detail}"


def tq_gate_count(circuit_text: str) -> int:
    return sum(
        1 for line in circuit_text.splitlines()
        if re.match(r"\s*(CX|CZ|CY)\s", line)
    )


def _run_summary(log_name: str) -> dict:
    lines = (ARTIFACTS / log_name).read_text().splitlines()
    return json.loads([l for l in lines if l.startswith("{")][-1])


def test_ppo_golay_reaches_46():
    circuit = (ARTIFACTS / "ppo_golay_23_best.txt").read_text()
    summary = _run_summary("ppo_golay_run.log")
    tqg = tq_gate_count(circuit)
    ok = (
        cli_verify(circuit, "golay_23")
        and tqg <= 46
        and tqg == summary["best_tqg"]
        # full budget consumed, up to the last partial update batch
        and 2_200_000 - summary["timesteps"] < 100 * 64
        and summary["wall_time_min"] <= 240
    )
    check(
        "PPO golay_23, reference hyperparameters, 2.2M steps, <= 4 h: "
        "best TQG <= 46, circuit re-verified exact",
        ok,
        f"TQG={tqg}, wall={summary['wall_time_min']:.0f} min",
    )


def test_qusynth_golay_reaches_45():
    circuit = (ARTIFACTS / "qusynth_golay_23_best.txt").read_text()
    summary = _run_summary("qusynth_golay_run.log")
    tqg = tq_gate_count(circuit)
    ok = cli_verify(circuit, "golay_23") and tqg <= 45 and tqg == summary["best_tqg"]
    check(
        "MCTS-guided training on golay_23: best TQG <= 45, "
        "circuit re-verified exact",
        ok,
        f"TQG={tqg}, budget: {summary.get('budget', 'see run log')}",
    )


def test_pgbs_not_worse_than_greedy_over_seeds():
    checkpoint = ARTIFACTS / "ppo_golay_23.pt"
    greedy = pgbs_eval(checkpoint, "golay_23", beam_width=1,
                       samples_per_state=1, seed=0)
    worst = max(
        pgbs_eval(checkpoint, "golay_23", beam_width=8,
                  samples_per_state=4, seed=seed).tq_gate_count
        for seed in range(5)
    )
    check(
        "policy-guided beam <= greedy rollout TQG over 5 seeds",
        worst <= greedy.tq_gate_count,
        f"beam worst={worst}, greedy={greedy.tq_gate_count}",
    )


@pytest.mark.slow
def test_ppo_golay_full_retrain(tmp_path):
    res = train_ppo("golay_23", default_config("golay_23").replace(seed=0),
                    out_dir=tmp_path)
    assert res.best is not None and res.best.tq_gate_count <= 46


@pytest.mark.slow
def test_qusynth_golay_full_retrain(tmp_path):
    summary = _run_summary("qusynth_golay_run.log")
    cfg = default_config("golay_23").replace(**summary["config_overrides"])
    res = train_qusynth("golay_23", cfg, out_dir=tmp_path)
    assert res.best is not None and res.best.tq_gate_count <= 45
