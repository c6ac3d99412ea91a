"""Command line front end.

Exit codes: 0 when every requested verdict is decided, 2 when any verdict is
Unknown, 1 on errors (bad input, failed invariant in ``verify``).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from .compression import BudgetExceeded, ContractionTuple, ScheduleParams, projection_test
from .conic import Verdict, unknown
from .correlations import (is_local, is_nonsignalling_direct, load_correlation, load_functional,
                           maximize_over_local, maximize_over_ns, ns_state_membership,
                           qc_outer_membership, validate)
from .linalg import Tolerance
from .nonsignalling import Scenario, build_ns_space, relation_matrix
from .ordered import DEFAULT_SCHEDULE, DiagonalCone, DiagonalModel
from .report import dumps
from .verify import SUITES, run_named_suite

EXIT_DECIDED, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    scenario: tuple | None = None
    eps_schedule: tuple = DEFAULT_SCHEDULE
    t_max: float = 1e6
    L_max: int = 1
    budget_rows: int = 4096
    output_path: str | None = None
    seed: int = 0
    tol: float = 1e-9
    suite: str = "all"

    @property
    def params(self) -> ScheduleParams:
        return ScheduleParams(eps=self.eps_schedule, t_max=self.t_max, budget_rows=self.budget_rows,
                              tol=Tolerance(psd_eps=self.tol, affine_eps=100 * self.tol))


@dataclass
class Report:
    lines: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    exit_code: int = EXIT_DECIDED

    def add(self, line: str):
        self.lines.append(line)

    def verdict(self, key: str, v: Verdict):
        self.payload[key] = v
        if v.is_unknown and self.exit_code == EXIT_DECIDED:
            self.exit_code = EXIT_UNKNOWN


def _mark(ok: bool) -> str:
    return "yes" if ok else "no"


# ---------------------------------------------------------------- commands


def _check_scenario(config: RunConfig, s: Scenario):
    if config.scenario is not None and tuple(config.scenario) != (s.n, s.k):
        raise ValueError(f"--scenario {config.scenario[0]} {config.scenario[1]} does not match "
                         f"file header scenario {s.n} {s.k}")


def cmd_classify(config: RunConfig) -> Report:
    rep = Report()
    p = load_correlation(config.input_path)
    s = p.scenario
    _check_scenario(config, s)
    ns = build_ns_space(s)
    rep.payload["scenario"] = s.as_dict()
    errors = validate(p)
    rep.payload["valid"] = dict(ok=not errors, errors=errors)
    rep.add(f"valid: {_mark(not errors)}" + (f" ({errors[0]})" if errors else ""))
    direct, worst = is_nonsignalling_direct(p, config.tol)
    rep.payload["nonsignalling_direct"] = dict(ok=direct, max_violation=worst)
    rep.add(f"nonsignalling (marginals): {_mark(direct)} (max violation {worst:.3g})")
    state = ns_state_membership(p, ns, config.tol)
    rep.verdict("nonsignalling_state", state)
    rep.add(f"nonsignalling (state on V_ns): {_mark(state.is_member)}" +
            ("" if state.is_member else f" ({state.note})"))
    if errors:
        rep.add("local: skipped (not a correlation)")
        rep.add("qc-outer: skipped (not a correlation)")
        return rep
    try:
        loc = is_local(p, config.tol)
    except BudgetExceeded as exc:
        loc = unknown(kind="budget", note=str(exc))
    rep.verdict("local", loc)
    if loc.is_non_member:
        d = loc.certificate.data
        rep.add(f"local: no (Bell witness {d['value']:.6g} > {d['local_max']:.6g})")
    else:
        rep.add("local: yes" if loc.is_member else f"local: Unknown ({loc.note})")
    if not direct:
        rep.add("qc-outer: no (signalling correlations are not quantum commuting)")
        return rep
    for L in range(1, config.L_max + 1):
        qc = qc_outer_membership(p, ns, L, config.params, tol=config.tol, seed=config.seed)
        rep.verdict(f"qc_outer_L{L}", qc)
        if qc.is_unknown:
            rep.add(f"qc-outer-L{L}: Unknown({qc.certificate.kind}) {qc.note}")
        elif qc.is_member:
            rep.add(f"qc-outer-L{L}: {qc.note}")
        else:
            rep.add(f"qc-outer-L{L}: NonMember ({qc.note})")
            break
    return rep


def cmd_space_info(config: RunConfig) -> Report:
    if config.scenario is None:
        raise ValueError("space-info needs --scenario N K")
    s = Scenario(*config.scenario)
    ns = build_ns_space(s)
    R = relation_matrix(s)
    rank = int(np.linalg.matrix_rank(R)) if R.size else 0
    rep = Report()
    rep.add(f"scenario: n={s.n} inputs, k={s.k} outputs")
    rep.add(f"generators: {s.n_generators}")
    rep.add(f"dimension: {ns.dim} (formula (n(k-1)+1)^2 = {s.ns_dim})")
    rep.add(f"relation rank: {ns.relation_rank} ({s.n_generators} - {ns.dim} = {s.n_generators - ns.dim}, "
            f"numerical rank {rank})")
    rep.add("basis: " + ", ".join(ns.space.labels))
    rep.payload.update(scenario=s.as_dict(), dimension=ns.dim, relation_rank=ns.relation_rank,
                       basis=list(ns.space.labels))
    if not (ns.dim == s.ns_dim and ns.relation_rank == rank == s.n_generators - ns.dim):
        rep.exit_code = EXIT_ERROR
        rep.add("inconsistent dimension or relation rank")
    return rep


def parse_model(text: str):
    """Diagonal model description.

    ``size m`` first, then optional ``basis v_1 .. v_m`` lines (diagonals
    spanning the space, unit included; default is all of ``D_m``) and one or
    more ``contraction d_1 .. d_m`` lines.  ``#`` starts a comment.
    """
    size, basis, contractions = None, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *fields = line.split()
        if size is None:
            if key != "size" or len(fields) != 1:
                raise ValueError(f"line {lineno}: expected header 'size m'")
            try:
                size = int(fields[0])
            except ValueError:
                raise ValueError(f"line {lineno}: size must be an integer") from None
            if size < 1:
                raise ValueError(f"line {lineno}: size must be positive")
            continue
        if key not in ("basis", "contraction"):
            raise ValueError(f"line {lineno}: unknown keyword {key!r}")
        if len(fields) != size:
            raise ValueError(f"line {lineno}: expected {size} numbers, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise ValueError(f"line {lineno}: could not parse numbers in {line!r}") from None
        (basis if key == "basis" else contractions).append(vals)
    if size is None:
        raise ValueError("empty model file")
    if not contractions:
        raise ValueError("model file has no 'contraction' line")
    if basis:
        model, _ = DiagonalModel.from_generators(np.array(basis))
    else:
        model = DiagonalModel.full(size)
    return model, contractions


def cmd_projection_test(config: RunConfig) -> Report:
    with open(config.input_path) as fh:
        model, diags = parse_model(fh.read())
    cone = DiagonalCone(model, config.params.tol)
    tup = ContractionTuple(model.space, [model.coords(d) for d in diags], cone)
    res = projection_test(cone, tup, L_max=config.L_max, params=config.params, seed=config.seed)
    rep = Report()
    rep.add(f"model: size {model.size}, dimension {model.space.dim}, {tup.N} contraction(s)")
    rep.add(f"probes: {len(res.probes)}")
    rep.add(f"verdict: {res.verdict}")
    rep.payload.update(verdict=res.verdict, probes=len(res.probes))
    if res.witness is not None:
        w = res.witness
        rep.add(f"witness: probe {w.label} = {(np.round(w.probe.coeffs, 6) + 0.0).tolist()} is rejected by the "
                f"ground cone but accepted by the compression hierarchy")
        rep.payload["witness"] = dict(label=w.label, probe=w.probe, ground=w.in_cone, lifted=w.lifted)
    if res.verdict == "Unknown":
        rep.exit_code = EXIT_UNKNOWN
        rep.payload["undecided"] = [r.label for r in res.probes if r.outcome == "unknown"]
    return rep


def cmd_bell_opt(config: RunConfig) -> Report:
    f = load_functional(config.input_path)
    _check_scenario(config, f.scenario)
    ns_val, ns_arg = maximize_over_ns(f)
    rep = Report()
    rep.add(f"nonsignalling maximum: {ns_val:.10g}")
    rep.payload.update(ns_max=ns_val, ns_maximizer=ns_arg.p)
    try:
        loc_val, loc_arg = maximize_over_local(f)
        rep.add(f"local maximum: {loc_val:.10g}")
        rep.payload.update(local_max=loc_val, local_maximizer=loc_arg.p)
    except BudgetExceeded as exc:
        rep.add(f"local maximum: Unknown ({exc})")
        rep.exit_code = EXIT_UNKNOWN
    return rep


def cmd_verify(config: RunConfig) -> Report:
    rep = Report()
    results = run_named_suite(config.suite, config.seed)
    for r in results:
        rep.add(r.line())
    passed = sum(r.passed for r in results)
    rep.add(f"{passed}/{len(results)} criteria passed")
    rep.payload.update(seed=config.seed, suite=config.suite,
                       criteria=[dict(number=r.number, name=r.name, payload=r.payload) for r in results])
    if passed != len(results):
        rep.exit_code = EXIT_ERROR
    return rep


COMMANDS = {"classify": cmd_classify, "space-info": cmd_space_info, "projection-test": cmd_projection_test,
            "bell-opt": cmd_bell_opt, "verify": cmd_verify}


def run(config: RunConfig, out=None) -> int:
    """Run one command, print the report and write the payload if asked."""
    out = sys.stdout if out is None else out
    needs_input = config.command in ("classify", "projection-test", "bell-opt")
    try:
        if needs_input and not config.input_path:
            raise ValueError(f"{config.command} needs --in PATH")
        rep = COMMANDS[config.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for line in rep.lines:
        print(line, file=out)
    if config.output_path:
        with open(config.output_path, "w") as fh:
            fh.write(dumps(dict(command=config.command, report=rep.payload)))
    return rep.exit_code


# ------------------------------------------------------------------ parsing


def _schedule(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad schedule {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", nargs=2, type=int, metavar=("N", "K"))
    common.add_argument("--in", dest="input_path", metavar="PATH")
    common.add_argument("--out", dest="output_path", metavar="PATH")
    common.add_argument("--eps-schedule", type=_schedule, default=DEFAULT_SCHEDULE, metavar="CSV")
    common.add_argument("--t-max", type=float, default=1e6, metavar="R")
    common.add_argument("--L-max", type=int, default=1, metavar="N")
    common.add_argument("--budget-rows", type=int, default=4096, metavar="N")
    common.add_argument("--seed", type=int, default=0, metavar="N")
    common.add_argument("--tol", type=float, default=1e-9, metavar="R")
    parser = argparse.ArgumentParser(prog="aouqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="classify a correlation file")
    sub.add_parser("space-info", parents=[common], help="describe the nonsignalling space")
    sub.add_parser("projection-test", parents=[common], help="test contractions in a diagonal model")
    sub.add_parser("bell-opt", parents=[common], help="maximize a Bell functional")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--suite", choices=sorted(SUITES), default="all")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(command=args.command, input_path=args.input_path,
                           scenario=tuple(args.scenario) if args.scenario else None,
                           eps_schedule=args.eps_schedule, t_max=args.t_max, L_max=args.L_max,
                           budget_rows=args.budget_rows, output_path=args.output_path, seed=args.seed,
                           tol=args.tol, suite=getattr(args, "suite", "all"))
        config.params  # validates schedule and tolerances
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
