"""Command-line pipeline: synthesize, convert, LC-optimize, verify,
serve the bridge, and enumerate LC orbits.

Reports are JSON with a stable field order so that identical seeds and
arguments produce byte-identical output (modulo the wall-time field).
Exit codes: 0 success/exact, 1 verification failure, 2 usage or I/O
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .circuit import Circuit, Gate
from .codes import (
    BUILTIN_NAMES,
    CodeError,
    PARITY_CHECK_CSS,
    PAULI_TEXT,
    builtin,
    load_code,
    target_tableau,
)
from .compile_passes import CompileError, css_cx_form, peephole, relayer
from .conversion import to_graph, verify_circuit
from .env import ScoreParams
from .graphs import Graph
from .lcopt import AnnealSchedule, OrbitCapExceeded, anneal, lc_orbit_bfs, replay_frame
from .local_clifford import LocalCliffordFrame
from .mcts import MctsConfig, self_play
from .search import BEAM, BEFS, SearchConfig, SearchFailure, run_search

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _fail(code: str, message: str) -> int:
    json.dump({"error": code, "message": message}, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_USAGE


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env_seed = os.environ.get("GRAPHSYNTH_SEED")
    if env_seed is not None:
        try:
            return int(env_seed)
        except ValueError as exc:
            raise CliError("bad_seed", f"GRAPHSYNTH_SEED: {exc}") from exc
    return 0


def _load_spec(args):
    if getattr(args, "code", None):
        try:
            return builtin(args.code)
        except CodeError as exc:
            raise CliError("unknown_code", str(exc)) from exc
    path = getattr(args, "stabilizers", None)
    if not path:
        raise CliError("bad_request", "need --code or --stabilizers")
    if not os.path.exists(path):
        raise CliError("io_error", f"no such file: {path}")
    try:
        return load_code(path, format=args.format)
    except (CodeError, OSError) as exc:
        raise CliError("io_error", str(exc)) from exc


def _load_graph_file(path: str) -> Graph:
    if not os.path.exists(path):
        raise CliError("io_error", f"no such file: {path}")
    try:
        with open(path) as fh:
            desc = json.load(fh)
        return Graph.from_edges(int(desc["n"]), [tuple(e) for e in desc["edges"]])
    except (OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise CliError("io_error", f"bad graph file: {exc}") from exc


def _graph_payload(g: Graph) -> dict:
    return {"n": g.n, "edges": [[i, j] for i, j in g.edges()]}


def _write_artifact(path: str | None, text: str):
    if path:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_report(report: dict, path: str | None):
    text = json.dumps(report, indent=2) + "\n"
    sys.stdout.write(text)
    _write_artifact(path, text)


def _worker_seed(seed: int, worker: int) -> int:
    return int(np.random.SeedSequence([seed, worker]).generate_state(1)[0])


# -- synth -------------------------------------------------------------


def _search_config(args, seed: int, bipartite: bool) -> SearchConfig:
    return SearchConfig(
        method=args.method,
        restarts=args.budget,
        beam_width=args.beam_width,
        sampled_actions=args.actions,
        tie_breaker=args.tie.replace("-", "_"),
        score_params=ScoreParams(layer_penalty=args.layer_penalty),
        seed=seed,
        target_tqg=args.target_tqg,
        bipartite_only=bipartite,
    )


def _run_workers(g, args, seed, bipartite):
    workers = max(1, args.workers)
    if workers == 1:
        return run_search(g, _search_config(args, seed, bipartite)), 0
    per = max(1, args.budget // workers)
    from concurrent.futures import ProcessPoolExecutor

    cfgs = []
    for w in range(workers):
        sub = argparse.Namespace(**vars(args))
        sub.budget = per
        cfgs.append(_search_config(sub, _worker_seed(seed, w), bipartite))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_search, [g] * workers, cfgs))
    best_w = min(
        range(workers),
        key=lambda w: (results[w].tq_gate_count, results[w].tq_depth, w),
    )
    return results[best_w], best_w


def cmd_synth(args) -> int:
    t0 = time.monotonic()
    seed = _default_seed(args)
    spec = _load_spec(args)
    target = target_tableau(spec)
    g0, frame = to_graph(target)

    total_frame = frame
    g_search = g0
    lc_moves: list[int] = []
    if args.lc_opt:
        move_set = "pivot" if args.cx_only else "single_lc"
        schedule = AnnealSchedule(
            steps=args.lc_steps, seed=seed, move_set=move_set
        )
        g_best, lc_moves = anneal(g0, schedule, return_moves=True)
        if g_best.edge_count() < g0.edge_count():
            # |G0> = E |G_best| via the reversed move sequence
            g_check, undo = replay_frame(g_best, list(reversed(lc_moves)))
            assert g_check == g0
            total_frame = frame.compose(undo)
            g_search = g_best
        else:
            lc_moves = []

    bipartite = bool(args.cx_only)
    if bipartite and g_search.bipartition() is None:
        raise CliError("not_bipartite", "graph is not bipartite; cannot --cx-only")

    if args.method == "mcts":
        if bipartite:
            raise CliError("bad_request", "--cx-only is not supported with mcts")
        cfg = MctsConfig(
            budget=args.budget, seed=seed, k=args.mcts_k, m=args.mcts_m
        )
        result, _records = self_play(g_search, cfg)
        worker_used = 0
    else:
        try:
            result, worker_used = _run_workers(g_search, args, seed, bipartite)
        except SearchFailure as exc:
            raise CliError("search_failure", str(exc)) from exc

    gates = list(result.circuit.gates)
    gates += [Gate(name, (q,)) for name, q in total_frame.gate_list()]
    circuit = relayer(peephole(Circuit(g_search.n, gates)))
    if bipartite:
        circuit = css_cx_form(circuit, g_search.bipartition())

    verdict, witness = verify_circuit(circuit, target)
    elapsed = time.monotonic() - t0

    report = {
        "code": spec.name,
        "method": args.method,
        "config": {
            "seed": seed,
            "budget": args.budget,
            "beam_width": args.beam_width,
            "actions": args.actions,
            "tie": args.tie,
            "layer_penalty": args.layer_penalty,
            "lc_opt": bool(args.lc_opt),
            "cx_only": bool(args.cx_only),
            "workers": args.workers,
            "worker_used": worker_used,
        },
        "tq_gate_count": circuit.tq_gate_count,
        "tq_depth": circuit.tq_depth,
        "iterations": result.iterations_used,
        "best_found_at": result.best_found_at,
        "lc_moves": len(lc_moves),
        "verification": verdict,
        "edge_profile": result.trajectory_edge_profile,
        "version": __version__,
        "wall_time_s": round(elapsed, 3),
    }
    _emit_report(report, args.report)
    _write_artifact(args.out, circuit.to_text())
    return EXIT_OK if verdict == "exact" else EXIT_VERIFY


# -- other commands ----------------------------------------------------


def cmd_convert(args) -> int:
    spec = _load_spec(args)
    g, frame = to_graph(target_tableau(spec))
    report = {
        "code": spec.name,
        "graph": _graph_payload(g),
        "edge_count": g.edge_count(),
        "max_degree": g.max_degree(),
        "bipartite": g.bipartition() is not None,
        "frame_gates": [[name, q] for name, q in frame.gate_list()],
        "version": __version__,
    }
    _emit_report(report, args.report)
    if args.out:
        _write_artifact(args.out, json.dumps(_graph_payload(g)) + "\n")
    return EXIT_OK


def cmd_lc_opt(args) -> int:
    seed = _default_seed(args)
    if args.graph:
        g = _load_graph_file(args.graph)
    else:
        spec = _load_spec(args)
        g, _ = to_graph(target_tableau(spec))
    schedule = AnnealSchedule(
        steps=args.steps,
        seed=seed,
        move_set=args.moves.replace("-", "_"),
        objective_weights=(args.w_edges, args.w_maxdeg),
    )
    best, moves = anneal(g, schedule, return_moves=True)
    report = {
        "edges_before": g.edge_count(),
        "edges_after": best.edge_count(),
        "max_degree_before": g.max_degree(),
        "max_degree_after": best.max_degree(),
        "lc_moves": moves,
        "graph": _graph_payload(best),
        "version": __version__,
    }
    _emit_report(report, args.report)
    if args.out:
        _write_artifact(args.out, json.dumps(_graph_payload(best)) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if not os.path.exists(args.circuit):
        raise CliError("io_error", f"no such file: {args.circuit}")
    try:
        with open(args.circuit) as fh:
            circuit = Circuit.from_text(fh.read())
    except (OSError, ValueError) as exc:
        raise CliError("io_error", f"bad circuit file: {exc}") from exc
    spec = _load_spec(args)
    verdict, witness = verify_circuit(circuit, target_tableau(spec))
    report = {
        "code": spec.name,
        "circuit": args.circuit,
        "tq_gate_count": circuit.tq_gate_count,
        "tq_depth": circuit.tq_depth,
        "verification": verdict,
        "witness": witness if isinstance(witness, (str, type(None))) else str(witness),
        "version": __version__,
    }
    _emit_report(report, args.report)
    return EXIT_OK if verdict == "exact" else EXIT_VERIFY


def cmd_orbit(args) -> int:
    g = _load_graph_file(args.graph)
    try:
        orbit = lc_orbit_bfs(g, node_cap=args.cap)
    except OrbitCapExceeded as exc:
        raise CliError("orbit_cap", str(exc)) from exc
    sizes = sorted(h.edge_count() for h in orbit)
    report = {
        "orbit_size": len(orbit),
        "min_edges": sizes[0],
        "max_edges": sizes[-1],
        "version": __version__,
    }
    _emit_report(report, args.report)
    return EXIT_OK


def cmd_serve_bridge(args) -> int:
    from . import bridge

    if args.port is None:
        bridge.serve_stdio()
        return EXIT_OK
    server = bridge.serve_socket(args.host, args.port)
    host, port = server.server_address
    sys.stderr.write(f"bridge listening on {host}:{port}\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# -- argument plumbing -------------------------------------------------


def _add_code_source(p: argparse.ArgumentParser):
    p.add_argument("--code", choices=BUILTIN_NAMES, help="built-in code name")
    p.add_argument("--stabilizers", help="code file path")
    p.add_argument(
        "--format",
        choices=(PAULI_TEXT, PARITY_CHECK_CSS),
        default=PAULI_TEXT,
        help="code file format",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsynth",
        description="Stabilizer-state preparation via graph decimation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a preparation circuit")
    _add_code_source(p)
    p.add_argument("--method", choices=(BEFS, BEAM, "mcts"), default=BEFS)
    p.add_argument("--budget", type=int, default=1000,
                   help="restarts (befs), iterations (beam), or evaluations (mcts)")
    p.add_argument("--beam-width", type=int, default=100)
    p.add_argument("--actions", type=float, default=1.0,
                   help="actions sampled per beam state (count or fraction)")
    p.add_argument("--tie", choices=("random", "min-degree"), default="random")
    p.add_argument("--layer-penalty", type=float, default=0.3)
    p.add_argument("--target-tqg", type=int, default=None)
    p.add_argument("--lc-opt", action="store_true",
                   help="anneal over the LC orbit before synthesis")
    p.add_argument("--lc-steps", type=int, default=2000)
    p.add_argument("--cx-only", action="store_true",
                   help="bipartite action set + CX-only output (CSS codes)")
    p.add_argument("--mcts-k", type=int, default=8)
    p.add_argument("--mcts-m", type=int, default=16)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write circuit text here")
    p.add_argument("--report", help="write JSON report here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("convert", help="code -> graph state + frame")
    _add_code_source(p)
    p.add_argument("--out", help="write graph JSON here")
    p.add_argument("--report", help="write JSON report here")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("lc-opt", help="anneal a graph over its LC orbit")
    _add_code_source(p)
    p.add_argument("--graph", help="graph JSON file (alternative to --code)")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--moves", choices=("single-lc", "pivot"), default="single-lc")
    p.add_argument("--w-edges", type=float, default=1.0)
    p.add_argument("--w-maxdeg", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="write optimized graph JSON here")
    p.add_argument("--report", help="write JSON report here")
    p.set_defaults(func=cmd_lc_opt)

    p = sub.add_parser("verify", help="check a circuit file against a code")
    p.add_argument("--circuit", required=True)
    _add_code_source(p)
    p.add_argument("--report", help="write JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit", help="enumerate an LC orbit")
    p.add_argument("--graph", required=True)
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--report", help="write JSON report here")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("serve-bridge", help="serve the JSON-lines bridge")
    p.add_argument("--port", type=int, default=None,
                   help="TCP port (default: stdio)")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve_bridge)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.code, str(exc))
    except (CodeError, CompileError, ValueError) as exc:
        return _fail(type(exc).__name__.lower(), str(exc))


if __name__ == "__main__":
    sys.exit(main())
