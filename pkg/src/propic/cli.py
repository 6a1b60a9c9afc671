"""Command-line front end.

Exit codes: 0 success or property holds, 1 property fails, 2 usage, parse or
type error, 3 numerical guard (element cap, solver breakdown).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import analysis, ctc, diagram, gates, protocols
from .morph import Morph, MorphError
from .network import DEFAULT_ELEMENT_CAP, ElementCapExceeded, PlanError
from .thick import Channel, depolarize_to_max_mixed, dephasing

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

STATES = ("zero", "one", "plus", "minus", "plus_i", "mixed")
UNITARIES = ("identity", "cnot", "swap", "cz", "control-x", "control-z", "control-h")
MAPS = ("identity", "transpose", "depolarize", "dephase", "negate")
MACHINES = ("identity", "depolarize", "collapse-zero", "collapse-mixed", "dephase")


class UsageError(Exception):
    pass


@dataclass
class Report:
    command: str
    config: dict
    result: dict = field(default_factory=dict)
    metrics: list = field(default_factory=list)
    passed: bool = True

    def metric(self, label: str, value: float, tol: float) -> bool:
        ok = bool(value <= tol)
        self.metrics.append({"label": label, "value": value, "tol": tol, "passed": ok})
        self.passed = self.passed and ok
        return ok


# -- serialization ----------------------------------------------------------


def _number(x: float):
    x = float(x)
    return x if math.isfinite(x) else None


def to_jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_number(obj.real), _number(obj.imag)]
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    return obj if obj is None or isinstance(obj, str) else str(obj)


def morph_json(m: Morph) -> dict:
    return {
        "legs": [
            {"space": str(leg.space), "dim": leg.dim, "direction": leg.direction.value, "essence": leg.essence.value}
            for leg in m.legs
        ],
        "shape": list(m.shape),
        "data": m.data.ravel(),
    }


def _pretty_value(v: Any, indent: str) -> str:
    if isinstance(v, np.ndarray):
        text = np.array2string(np.round(v, 12), precision=6, suppress_small=True, max_line_width=100)
        return "\n" + "\n".join(indent + "  " + line for line in text.splitlines())
    if isinstance(v, dict):
        return "".join(f"\n{indent}  {k}: {_pretty_value(x, indent + '  ')}" for k, x in v.items())
    if isinstance(v, list) and v and isinstance(v[0], (dict, np.ndarray)):
        return "".join(f"\n{indent}  -{_pretty_value(x, indent + '  ')}" for x in v)
    return str(v)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "command": report.command,
            "config": report.config,
            "result": report.result,
            "metrics": report.metrics,
            "passed": report.passed,
        }
        return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)
    lines = [f"{report.command}: {'PASS' if report.passed else 'FAIL'}"]
    for m in report.metrics:
        lines.append(f"  [{'ok' if m['passed'] else 'FAIL'}] {m['label']} = {m['value']:.3e} (tol {m['tol']:.1e})")
    for key, value in report.result.items():
        lines.append(f"  {key}: {_pretty_value(value, '  ')}")
    return "\n".join(lines)


# -- shared helpers ---------------------------------------------------------


def _config(args) -> dict:
    return {
        "seed": args.seed,
        "tol": args.tol,
        "plan": args.plan,
        "cap": args.cap,
        "trials": args.trials,
        "format": args.format,
    }


def _evaluate_file(path: str, args):
    d = diagram.load(path)
    return diagram.evaluate(d, strategy=args.plan, cap=args.cap)


def _pure_vector(name: str) -> np.ndarray:
    rho = gates.named_state(name)
    values, vectors = np.linalg.eigh(rho)
    if values[-1] < 1 - 1e-12:
        raise UsageError(f"state {name!r} is not pure")
    v = vectors[:, -1]
    return v * (abs(v[np.argmax(np.abs(v))]) / v[np.argmax(np.abs(v))])


def _named_map(name: str, d: int = 2) -> analysis.SuperOp:
    if name == "identity":
        return analysis.SuperOp.identity(d)
    if name == "transpose":
        return analysis.SuperOp.transpose(d)
    if name == "depolarize":
        return depolarize_to_max_mixed(d).superop
    if name == "dephase":
        return dephasing(d=d).superop
    return analysis.SuperOp.from_function(lambda a: -a, d)


def _machine(name: str) -> Channel:
    return {
        "identity": lambda: Channel.identity(2),
        "depolarize": lambda: depolarize_to_max_mixed(2),
        "collapse-zero": lambda: Channel.point_collapse(gates.named_state("zero")),
        "collapse-mixed": lambda: Channel.point_collapse(np.eye(2) / 2),
        "dephase": lambda: dephasing(),
    }[name]()


# -- commands ---------------------------------------------------------------


def cmd_eval(args, report: Report) -> int:
    result = _evaluate_file(args.file, args)
    report.result = {
        "file": args.file,
        "morph": morph_json(result.morph),
        "plan": {"strategy": result.plan.strategy, "steps": result.plan.describe()},
        "cost": result.cost,
        "peak": result.peak,
    }
    return EXIT_OK


def cmd_check(args, report: Report) -> int:
    tol = args.tol if args.tol is not None else analysis.DEFAULT_TOL
    if args.property == "cp":
        if args.map:
            lam = _named_map(args.map, args.dim)
            report.result["map"] = args.map
        elif args.file:
            lam = analysis.SuperOp(_evaluate_file(args.file, args).morph)
            report.result["file"] = args.file
        else:
            raise UsageError("check cp needs a diagram file or --map")
        verdict = analysis.is_completely_positive(lam, tol)
        report.result["choi_min_eigenvalue"] = verdict.min_eigenvalue
        report.result["choi"] = analysis.matrix_view(analysis.choi(lam))
        samples = args.trials or 100
        cone = analysis.cone_positive_sampled(lam, samples, args.seed, tol)
        report.result["cone_positive_sampled"] = {"samples": samples, "passed": cone.positive, "witness": cone.witness}
        if verdict:
            report.result["kraus"] = analysis.kraus_from_choi(lam, tol)
        report.metric("-min eig of Choi operator", -verdict.min_eigenvalue, tol)
        return EXIT_OK if report.passed else EXIT_FAIL
    if not args.file:
        raise UsageError(f"check {args.property} needs a diagram file")
    morph = _evaluate_file(args.file, args).morph
    report.result["file"] = args.file
    if args.property == "positive":
        verdict = analysis.is_positive(morph, tol)
        report.result["min_eigenvalue"] = verdict.min_eigenvalue
        report.result["hermitian"] = verdict.hermitian
        report.metric("-min eigenvalue", -verdict.min_eigenvalue, tol)
        report.metric("non-Hermitian", 0.0 if verdict.hermitian else 1.0, 0.0)
        return EXIT_OK if report.passed else EXIT_FAIL
    n = morph.rank // 2
    rho = analysis.DensityMatrix(morph, tuple(leg.dim for leg in morph.legs[:n]))
    k = args.subsystem - 1
    pt = analysis.partial_transpose(rho, k)
    verdict = analysis.is_positive(pt, tol)
    report.result["subsystem"] = args.subsystem
    report.result["min_eigenvalue"] = verdict.min_eigenvalue
    report.result["spectrum"] = np.linalg.eigvalsh(analysis.matrix_view(pt))
    report.metric("-min eig of partial transpose", -verdict.min_eigenvalue, tol)
    return EXIT_OK if report.passed else EXIT_FAIL


def _corpus_mismatch(temporal: str, channel: str, args) -> float:
    a = diagram.evaluate(diagram.parse(diagram.read_corpus(temporal)), strategy=args.plan, cap=args.cap).morph
    b = diagram.evaluate(diagram.parse(diagram.read_corpus(channel)), strategy=args.plan, cap=args.cap).morph
    if a.legs != b.legs:
        return math.inf
    return float(np.max(np.abs(a.data - b.data)))


def cmd_protocol(args, report: Report) -> int:
    name, seed = args.name, args.seed
    if name == "teleport":
        rep = protocols.check_teleportation(seed, args.trials or 50)
    elif name == "superdense":
        rep = protocols.check_superdense(seed)
    elif name == "swap":
        rep = protocols.check_entanglement_swap(seed)
    elif name == "coecke":
        rep = protocols.check_coecke(seed, args.trials or 100, args.dim)
    elif name == "nosignal":
        rep = protocols.check_no_signaling(seed, (args.dim,), args.trials or 100)
    else:
        rep = protocols.check_zigzag(args.dim)
    for m in rep.metrics:
        report.metric(m.label, m.value, m.tol)
    if name in ("superdense", "swap"):
        report.metric(
            "corpus temporal vs channel",
            _corpus_mismatch(f"{name}_temporal", f"{name}_channel", args),
            0.0,
        )
    report.result = {"name": rep.name, "info": rep.info, "witness": rep.witness}
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_ctc(args, report: Report) -> int:
    tol = args.tol if args.tol is not None else 1e-10
    solver = args.solver
    u = gates.named_unitary(args.builder)
    rho_in = gates.named_state(args.rho_in)
    if solver != "classify":
        report.result["builder"] = args.builder
    if solver not in ("classify", "universal"):
        report.result["rho_in"] = args.rho_in
    if solver == "deutsch":
        fp = ctc.deutsch_fixed_point(u, rho_in, args.loop_port, tol)
        report.result.update(
            {
                "loop_port": args.loop_port,
                "rho_ctc": fp.rho,
                "rho_out": ctc.deutsch_out(u, rho_in, fp.rho, args.loop_port),
                "multiplicity": fp.multiplicity,
            }
        )
        report.metric("fixed point residual", fp.residual, tol)
    elif solver == "thick":
        problem = ctc.CtcProblem(Channel.unitary(u), _machine(args.machine), rho_in, args.loop_port)
        sol = ctc.thick_ctc_solve(problem, tol)
        report.result.update(
            {
                "machine": args.machine,
                "loop_port": args.loop_port,
                "rho_ctc": sol.rho_ctc,
                "rho_ctc_prime": sol.rho_ctc_prime,
                "rho_out": sol.rho_out,
                "multiplicity": sol.multiplicity,
                "direct": sol.direct,
            }
        )
        dims = problem.dims
        loop = ctc.reduce(problem.direct(np.kron(rho_in, sol.rho_ctc_prime)), dims, args.loop_port)
        report.metric("fixed point residual", float(np.linalg.norm(loop - sol.rho_ctc)), tol)
    elif solver == "postselect":
        phi = _pure_vector(args.rho_in)
        ops, probs = {}, {}
        total = np.zeros((2, 2), dtype=np.complex128)
        for x, y in gates.BELL_LABELS:
            a, prob = ctc.post_selected_kraus(u, x, y)
            ops[f"{x}{y}"] = a
            probs[f"{x}{y}"] = prob(phi)
            total += a.conj().T @ a
        report.result.update({"kraus": ops, "probabilities": probs})
        report.metric("max |sum A^dag A - I|", float(np.max(np.abs(total - np.eye(2)))), tol)
        report.metric("|sum of probabilities - 1|", abs(sum(probs.values()) - 1), tol)
    elif solver == "classify":
        channel = _classify_channel(args.channel or args.machine)
        found = ctc.power_limit_classify(channel, 1e-9)
        report.result.update(
            {
                "channel": args.channel or args.machine,
                "kind": found.kind.value,
                "power": found.power,
                "limit": found.limit,
                "universal": found.universal,
            }
        )
        if found.rho0 is not None:
            report.result["rho0"] = found.rho0
        if found.projectors:
            report.result["projectors"] = list(found.projectors)
        report.metric("idempotency error |K^2 - K|", found.idempotency_error, 1e-9)
        report.metric("unclassified", float(found.kind is ctc.IdempotentKind.UNCLASSIFIED), 0.0)
    else:
        rng = np.random.default_rng(args.seed)
        n = args.trials or 20
        suite = [Channel.unitary(u)] + [_random_channel(rng) for _ in range(n - 1)]
        rep = ctc.is_universal_evidence(_machine(args.machine), suite, args.loop_port, tol, seed=args.seed)
        report.result.update(
            {
                "machine": args.machine,
                "point_collapse": rep.point_collapse,
                "sufficient": rep.sufficient,
                "entries": [
                    {
                        "index": e.index,
                        "fixed_point_ok": e.fixed_point_ok,
                        "linear_error": e.linear_error,
                        "cp_min_eigenvalue": e.cp_min_eigenvalue,
                        "passed": e.passed,
                    }
                    for e in rep.entries
                ],
            }
        )
        report.metric("max linearity error", max(e.linear_error for e in rep.entries), tol)
        report.metric("channels failing fixed-point or CP checks", sum(not (e.fixed_point_ok and e.cp_ok) for e in rep.entries), 0)
    return EXIT_OK if report.passed else EXIT_FAIL


def _classify_channel(name: str) -> Channel:
    if name == "unitary-x":
        return Channel.unitary(gates.X)
    if name == "amplitude-damping":
        g = 0.3
        return Channel((np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])))
    return _machine(name)


def _random_channel(rng: np.random.Generator, d: int = 4, k: int = 2) -> Channel:
    from .morph import haar_unitary

    v = haar_unitary(d * k, rng)[:, :d]
    return Channel(tuple(v[i * d : (i + 1) * d] for i in range(k)))


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="emit a JSON report")
    fmt.add_argument("--pretty", dest="format", action="store_const", const="pretty", help="human-readable report (default)")
    common.set_defaults(format="pretty")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--plan", choices=("greedy", "exhaustive"), default="greedy", help="contraction planner")
    common.add_argument("--cap", type=int, default=DEFAULT_ELEMENT_CAP, help="element cap for intermediates")
    common.add_argument("--trials", type=int, default=None, help="number of random trials")

    parser = argparse.ArgumentParser(prog="propic", description="Typed tensor networks for quantum information.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a diagram file")
    p.add_argument("file")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="positivity, complete positivity, PPT")
    p.add_argument("property", choices=("positive", "cp", "ppt"))
    p.add_argument("file", nargs="?")
    p.add_argument("--map", choices=MAPS, help="named superoperator for 'cp'")
    p.add_argument("--dim", type=int, default=2, help="dimension for --map (default 2)")
    p.add_argument("--subsystem", type=int, default=1, help="1-based subsystem for 'ppt' (default 1)")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("protocol", parents=[common], help="run a protocol verification")
    p.add_argument("name", choices=("teleport", "superdense", "swap", "coecke", "nosignal", "zigzag"))
    p.add_argument("--dim", type=int, default=2, help="space dimension for coecke, nosignal, zigzag")
    p.set_defaults(handler=cmd_protocol)

    p = sub.add_parser("ctc", parents=[common], help="closed-timelike-curve solvers")
    p.add_argument("solver", choices=("deutsch", "thick", "postselect", "classify", "universal"))
    p.add_argument("--builder", choices=UNITARIES, default="cnot", help="two-qubit unitary (default cnot)")
    p.add_argument("--rho-in", choices=STATES, default="plus", help="input state (default plus)")
    p.add_argument("--loop-port", type=int, choices=(0, 1), default=0, help="output subsystem fed back (default 0)")
    p.add_argument("--machine", choices=MACHINES, default="depolarize", help="time-machine channel")
    p.add_argument(
        "--channel",
        choices=MACHINES + ("unitary-x", "amplitude-damping"),
        help="channel to classify (default: --machine)",
    )
    p.set_defaults(handler=cmd_ctc)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    detail = {"check": "property", "protocol": "name", "ctc": "solver"}.get(args.command)
    command = f"{args.command} {getattr(args, detail)}" if detail else args.command
    report = Report(command, _config(args))
    try:
        code = args.handler(args, report)
    except (diagram.DiagramError, UsageError, PlanError, MorphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ElementCapExceeded, ctc.CtcError, np.linalg.LinAlgError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    print(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
