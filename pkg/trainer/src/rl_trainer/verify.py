"""Re-verification of reported circuits through the primary toolchain.

Every circuit the trainer counts is compiled by the bridge (action log ->
circuit text) and then re-verified by the ``graphsynth verify`` command;
only ``exact`` verdicts are accepted.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .client import BridgeChannel, BridgeProtocolError, bridge_command


@dataclass
class VerifiedCircuit:
    tq_gate_count: int
    tq_depth: int
    actions: list
    circuit_text: str


def cli_verify(circuit_text: str, code: str) -> bool:
    """Run ``graphsynth verify`` on a circuit file; True iff exact."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "circuit.txt"
        path.write_text(circuit_text)
        proc = subprocess.run(
            bridge_command() + ["verify", "--circuit", str(path), "--code", code],
            capture_output=True, text=True,
        )
    if proc.returncode != 0:
        return False
    try:
        return json.loads(proc.stdout)["verification"] == "exact"
    except (json.JSONDecodeError, KeyError):
        return False


def compile_and_verify(channel: BridgeChannel, code: str,
                       action_log) -> VerifiedCircuit | None:
    """Compile an action log in a session already reset to ``code`` and
    re-verify the result independently; None if anything fails."""
    try:
        reply = channel.compile(action_log)
    except BridgeProtocolError:
        return None
    if reply.get("verification") != "exact":
        return None
    if not cli_verify(reply["circuit"], code):
        return None
    return VerifiedCircuit(
        tq_gate_count=int(reply["tq_gate_count"]),
        tq_depth=int(reply["tq_depth"]),
        actions=[list(a) for a in action_log],
        circuit_text=reply["circuit"],
    )
