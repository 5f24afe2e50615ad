"""JSON-lines bridge exposing the decimation environment to external
processes (typically a trainer) over stdio or a local TCP socket.

One JSON object per line; every request gets exactly one response with a
matching ``id``.  Observations travel as base64-packed bitstrings with a
declared bit length.  During guided self-play the direction inverts: the
bridge emits ``value_request`` / ``policy_request`` lines and blocks for
the peer's reply.
"""

from __future__ import annotations

import base64
import functools
import json
import socket
import socketserver
import sys

import numpy as np

from . import BRIDGE_PROTOCOL_VERSION
from . import env
from .codes import CodeError, builtin, target_tableau
from .compile_passes import CompileError, peephole, reconstruct, relayer
from .conversion import to_graph, verify_circuit
from .env import EnvState
from .graphs import ACTION_KINDS, Action, Graph, action_from_index
from .mcts import GuidanceProvider, MctsConfig, self_play
from .tableau import StabilizerTableau


class BridgeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def encode_observation(bits: np.ndarray) -> dict:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8))
    return {
        "bits": base64.b64encode(packed.tobytes()).decode("ascii"),
        "bit_length": int(len(bits)),
    }


def decode_observation(obs: dict) -> np.ndarray:
    raw = np.frombuffer(base64.b64decode(obs["bits"]), dtype=np.uint8)
    return np.unpackbits(raw)[: obs["bit_length"]]


@functools.lru_cache(maxsize=64)
def _code_session_data(name: str) -> tuple[Graph, StabilizerTableau]:
    """Graph representative and target tableau of a built-in code; cached
    because vectorized trainers reset by code name on every episode."""
    target = target_tableau(builtin(name))
    g, _ = to_graph(target)
    return g, target


def _session_data(payload: dict) -> tuple[Graph, StabilizerTableau]:
    """(initial graph, target tableau) of a reset/selfplay payload."""
    if "code" in payload:
        try:
            return _code_session_data(payload["code"])
        except CodeError as exc:
            raise BridgeError("unknown_code", str(exc)) from exc
    if "graph" in payload:
        desc = payload["graph"]
        try:
            g = Graph.from_edges(int(desc["n"]), [tuple(e) for e in desc["edges"]])
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise BridgeError("bad_graph", str(exc)) from exc
        return g, StabilizerTableau.graph_state(g)
    raise BridgeError("bad_request", "reset needs a 'code' or 'graph' field")


def _graph_from_payload(payload: dict) -> Graph:
    return _session_data(payload)[0]


def _parse_action(payload) -> Action:
    try:
        kind, a, b = payload["action"]
        if kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {kind!r}")
        return Action(kind, int(a), int(b))
    except (KeyError, TypeError, ValueError) as exc:
        raise BridgeError("invalid_action", str(exc)) from exc


class _RemoteGuidance(GuidanceProvider):
    """Guidance that round-trips value/policy queries to the peer."""

    def __init__(self, session):
        self.session = session

    def value_batch(self, graphs):
        reply = self.session.query(
            {
                "op": "value_request",
                "observations": [
                    encode_observation(env.observe(EnvState.initial(g)))
                    for g in graphs
                ],
            }
        )
        values = reply.get("values")
        if not isinstance(values, list) or len(values) != len(graphs):
            raise BridgeError("bad_guidance", "values list has wrong length")
        return np.asarray(values, dtype=np.float64)

    def policy(self, graph, action_indices):
        reply = self.session.query(
            {
                "op": "policy_request",
                "observation": encode_observation(
                    env.observe(EnvState.initial(graph))
                ),
                "actions": [int(i) for i in action_indices],
            }
        )
        probs = reply.get("policy")
        if not isinstance(probs, list) or len(probs) != len(action_indices):
            raise BridgeError("bad_guidance", "policy list has wrong length")
        p = np.asarray(probs, dtype=np.float64)
        total = p.sum()
        if total <= 0:
            return np.full(len(action_indices), 1.0 / len(action_indices))
        return p / total


class BridgeSession:
    """One environment session over a pair of line streams."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self.state: EnvState | None = None
        self.target: StabilizerTableau | None = None
        self.initial_graph: Graph | None = None
        self.masked = True
        self.closed = False
        self._next_query_id = 0

    # -- transport helpers --------------------------------------------

    def _send(self, obj: dict):
        self.writer.write(json.dumps(obj, sort_keys=True) + "\n")
        self.writer.flush()

    def query(self, obj: dict) -> dict:
        """Emit a guidance request and block for the matching reply."""
        qid = f"q{self._next_query_id}"
        self._next_query_id += 1
        self._send({"id": qid, "version": BRIDGE_PROTOCOL_VERSION, **obj})
        line = self.reader.readline()
        if not line:
            raise BridgeError("peer_gone", "stream closed during guidance query")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError("parse_error", str(exc)) from exc
        if reply.get("id") != qid:
            raise BridgeError("bad_guidance", "guidance reply id mismatch")
        return reply

    # -- request handling ---------------------------------------------

    def _observation(self) -> dict:
        return encode_observation(env.observe(self.state))

    def _require_state(self):
        if self.state is None:
            raise BridgeError("no_session", "reset must come first")

    def handle(self, request: dict) -> dict:
        if "version" in request and request["version"] != BRIDGE_PROTOCOL_VERSION:
            raise BridgeError(
                "version_error",
                f"peer speaks {request['version']!r}, "
                f"server speaks {BRIDGE_PROTOCOL_VERSION!r}",
            )
        op = request.get("op")
        if op == "reset":
            g, target = _session_data(request)
            self.target = target
            self.initial_graph = g
            self.masked = bool(request.get("masked", True))
            self.state = EnvState.initial(g)
            return {
                "n": g.n,
                "edges": g.edge_count(),
                "observation": self._observation(),
            }
        if op == "step":
            self._require_state()
            action = _parse_action(request)
            before = self.state.graph.edge_count()
            try:
                self.state = env.step(self.state, action, masked=self.masked)
            except (env.TerminalStateError, ValueError, IndexError) as exc:
                raise BridgeError("invalid_action", str(exc)) from exc
            return {
                "edge_delta": before - self.state.graph.edge_count(),
                "done": env.is_terminal(self.state),
                "observation": self._observation(),
            }
        if op == "actions":
            self._require_state()
            masked = bool(request.get("masked", self.masked))
            acts = env.enumerate_actions(self.state.graph, masked=masked)
            return {"actions": [[a.kind, a.a, a.b] for a in acts]}
        if op == "observe":
            self._require_state()
            return {"observation": self._observation()}
        if op == "selfplay":
            return self._selfplay(request)
        if op == "compile":
            return self._compile(request)
        if op == "shutdown":
            self.closed = True
            return {"ok": True}
        raise BridgeError("bad_request", f"unknown op {op!r}")

    def _compile(self, request: dict) -> dict:
        """Turn a decimation action log (from the session's initial graph)
        into a fully compiled, verified circuit in textual form."""
        self._require_state()
        raw = request.get("actions")
        if not isinstance(raw, list):
            raise BridgeError("bad_request", "compile needs an 'actions' list")
        log = [_parse_action({"action": a}) for a in raw]
        try:
            circuit = reconstruct(self.initial_graph, log, self.target)
        except (CompileError, ValueError, IndexError) as exc:
            raise BridgeError("bad_request", str(exc)) from exc
        out = relayer(peephole(circuit))
        verdict, _ = verify_circuit(out, self.target)
        return {
            "circuit": out.to_text(),
            "tq_gate_count": out.tq_gate_count,
            "tq_depth": out.tq_depth,
            "verification": verdict,
        }

    def _selfplay(self, request: dict) -> dict:
        g = _graph_from_payload(request)
        cfg_fields = request.get("mcts", {})
        try:
            cfg = MctsConfig(**cfg_fields)
        except (TypeError, ValueError) as exc:
            raise BridgeError("bad_request", f"bad mcts config: {exc}") from exc
        gp = (
            _RemoteGuidance(self)
            if request.get("guidance") == "external"
            else None
        )
        result, records = self_play(g, cfg, gp)
        return {
            "tq_gate_count": result.tq_gate_count,
            "tq_depth": result.tq_depth,
            "actions": [[a.kind, a.a, a.b] for a in result.actions],
            "records": [
                {
                    "observation": encode_observation(obs),
                    "visits": {
                        str(i): float(p) for i, p in enumerate(pi) if p > 0
                    },
                    "remaining": int(remaining),
                }
                for obs, pi, remaining in records
            ],
        }

    def run(self):
        """Serve until shutdown or EOF."""
        while not self.closed:
            line = self.reader.readline()
            if not line:
                break
            line = line.strip()
            if not line:
                continue
            rid = None
            try:
                try:
                    request = json.loads(line)
                    if not isinstance(request, dict):
                        raise BridgeError("parse_error", "request is not an object")
                except json.JSONDecodeError as exc:
                    raise BridgeError("parse_error", str(exc)) from exc
                rid = request.get("id")
                response = self.handle(request)
                self._send({"id": rid, **response})
            except BridgeError as exc:
                self._send({"id": rid, "error": exc.code, "message": str(exc)})


def serve_stdio(reader=None, writer=None):
    session = BridgeSession(reader or sys.stdin, writer or sys.stdout)
    session.run()


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        # favor request/response latency over batching
        self.request.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        stream = self.request.makefile("rw", encoding="utf-8", newline="\n")
        try:
            BridgeSession(stream, stream).run()
        finally:
            stream.close()


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_socket(host: str = "127.0.0.1", port: int = 0) -> BridgeServer:
    """Bind a threaded server (one session per connection); caller runs
    serve_forever() or uses it as a context manager."""
    return BridgeServer((host, port), _Handler)
