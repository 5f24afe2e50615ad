"""Client side of the graphsynth-bridge/1 JSON-lines protocol.

Two transports: one ``graphsynth serve-bridge`` subprocess per session
(stdio), or a single TCP server process hosting many sessions (one per
connection) for vectorized training.
"""

from __future__ import annotations

import json
import os
import re
import socket
import subprocess

import numpy as np

from . import BRIDGE_PROTOCOL_VERSION
from .features import decode_observation


def bridge_command() -> list[str]:
    """The primary toolkit's CLI; override with GRAPHSYNTH_BIN."""
    return [os.environ.get("GRAPHSYNTH_BIN", "graphsynth")]


class BridgeProtocolError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class BridgeChannel:
    """One protocol session over a pair of line-buffered text streams."""

    def __init__(self, reader, writer, on_close=None):
        self._reader = reader
        self._writer = writer
        self._on_close = on_close
        self._next_id = 0

    # -- transport ----------------------------------------------------

    def _send(self, obj: dict):
        self._writer.write(json.dumps(obj) + "\n")
        self._writer.flush()

    def _recv(self) -> dict:
        line = self._reader.readline()
        if not line:
            raise BridgeProtocolError("peer_gone", "bridge closed the stream")
        return json.loads(line)

    def send_request(self, op: str, **payload) -> int:
        """Write a request without waiting; pair with receive_reply.
        Lets a caller pipeline one in-flight request per session."""
        rid = self._next_id
        self._next_id += 1
        self._send({"id": rid, "op": op,
                    "version": BRIDGE_PROTOCOL_VERSION, **payload})
        return rid

    def receive_reply(self, rid: int) -> dict:
        reply = self._recv()
        if reply.get("error"):
            raise BridgeProtocolError(reply["error"], reply.get("message", ""))
        if reply.get("id") != rid:
            raise BridgeProtocolError("bad_reply", "response id mismatch")
        return reply

    def request(self, op: str, **payload) -> dict:
        return self.receive_reply(self.send_request(op, **payload))

    def close(self):
        try:
            self.request("shutdown")
        except (BridgeProtocolError, OSError, ValueError):
            pass
        if self._on_close is not None:
            self._on_close()
            self._on_close = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- protocol operations ------------------------------------------

    def reset(self, code: str | None = None, graph: dict | None = None,
              masked: bool = True) -> dict:
        payload = {"masked": masked}
        if code is not None:
            payload["code"] = code
        if graph is not None:
            payload["graph"] = graph
        reply = self.request("reset", **payload)
        reply["bits"] = decode_observation(reply["observation"])
        return reply

    def step(self, action) -> dict:
        reply = self.request("step", action=list(action))
        reply["bits"] = decode_observation(reply["observation"])
        return reply

    def actions(self, masked: bool | None = None) -> list[tuple[str, int, int]]:
        payload = {} if masked is None else {"masked": masked}
        reply = self.request("actions", **payload)
        return [tuple(a) for a in reply["actions"]]

    def observe(self) -> np.ndarray:
        return decode_observation(self.request("observe")["observation"])

    def compile(self, action_log) -> dict:
        """Action log -> compiled circuit text, gate metrics, and the
        primary's verification verdict."""
        return self.request("compile", actions=[list(a) for a in action_log])

    def selfplay(self, *, code: str | None = None, graph: dict | None = None,
                 mcts: dict | None = None, guidance=None) -> dict:
        """One guided self-play episode.

        ``guidance`` answers the inverted-direction queries: it needs
        ``value_batch(list of bit vectors) -> values`` and
        ``policy(bit vector, action index array) -> probabilities``.
        With ``guidance=None`` the environment's own heuristic plays.
        """
        rid = self._next_id
        self._next_id += 1
        payload = {"id": rid, "op": "selfplay",
                   "version": BRIDGE_PROTOCOL_VERSION}
        if code is not None:
            payload["code"] = code
        if graph is not None:
            payload["graph"] = graph
        if mcts is not None:
            payload["mcts"] = mcts
        if guidance is not None:
            payload["guidance"] = "external"
        self._send(payload)
        while True:
            msg = self._recv()
            op = msg.get("op")
            if op == "value_request":
                obs = [decode_observation(o) for o in msg["observations"]]
                values = [float(v) for v in guidance.value_batch(obs)]
                self._send({"id": msg["id"], "values": values})
            elif op == "policy_request":
                bits = decode_observation(msg["observation"])
                idx = np.asarray(msg["actions"], dtype=np.int64)
                probs = [float(p) for p in guidance.policy(bits, idx)]
                self._send({"id": msg["id"], "policy": probs})
            elif msg.get("error"):
                raise BridgeProtocolError(msg["error"], msg.get("message", ""))
            else:
                if msg.get("id") != rid:
                    raise BridgeProtocolError("bad_reply", "response id mismatch")
                return msg


def spawn_stdio_channel() -> BridgeChannel:
    """One bridge session in its own subprocess over stdio."""
    proc = subprocess.Popen(
        bridge_command() + ["serve-bridge"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE,
        text=True, bufsize=1,
    )

    def _close():
        proc.stdin.close()
        proc.wait(timeout=10)

    return BridgeChannel(proc.stdout, proc.stdin, on_close=_close)


class BridgeServer:
    """One ``graphsynth serve-bridge --port 0`` process hosting many
    concurrent sessions over TCP."""

    def __init__(self):
        self.proc = subprocess.Popen(
            bridge_command() + ["serve-bridge", "--port", "0"],
            stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, text=True,
        )
        line = self.proc.stderr.readline()
        m = re.search(r"listening on (\S+):(\d+)", line)
        if not m:
            self.proc.kill()
            raise RuntimeError(f"bridge server did not report a port: {line!r}")
        self.host, self.port = m.group(1), int(m.group(2))

    def connect(self) -> BridgeChannel:
        conn = socket.create_connection((self.host, self.port), timeout=600)
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        fh = conn.makefile("rw", encoding="utf-8", newline="\n")

        def _close():
            fh.close()
            conn.close()

        return BridgeChannel(fh, fh, on_close=_close)

    def close(self):
        self.proc.terminate()
        try:
            self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ServerPool:
    """Several bridge server processes; sessions are sharded round-robin
    so pipelined batches run in parallel across processes."""

    def __init__(self, count: int):
        self.servers = [BridgeServer() for _ in range(max(count, 1))]
        self._next = 0

    def connect(self) -> BridgeChannel:
        server = self.servers[self._next % len(self.servers)]
        self._next += 1
        return server.connect()

    def close(self):
        for server in self.servers:
            server.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
