"""``mixfair`` command-line driver.

Exit codes: 0 success, 1 usage error, 2 infeasible or failed verification,
3 intractable case refused (no ``--allow-oracle``) or oracle caps exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from dataclasses import replace
from fractions import Fraction

from . import flow, oracle, solver
from .instance import (
    DIVISIBLE,
    INDIVISIBLE,
    Allocation,
    InstanceError,
    allocation_from_dict,
    allocation_to_dict,
    format_rational,
    instance_to_dict,
    parse_instance,
    parse_rational,
    utilities_from_dict,
    utilities_to_dict,
    utility_vector,
    validate_allocation,
)
from .objective import objective_value, parse_objective
from .partition import canonical_partition, discrete_minimizer, principal_partition, relaxed_minimizer
from .polymatroid import coverage

log = logging.getLogger("mixfair")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_HARD = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}", EXIT_USAGE)


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from exc


def _json_file(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON: {exc}", EXIT_USAGE) from exc


def _emit(data, path: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _caps(args, base: oracle.OracleCaps = oracle.DEFAULT_CAPS) -> oracle.OracleCaps:
    caps = base
    if args.cap_assignments is not None:
        caps = replace(caps, assignments=args.cap_assignments)
    return caps


def _tol(args) -> float:
    tol = parse_rational(args.tol)
    if tol <= 0:
        raise CliError("--tol must be positive", EXIT_USAGE)
    return float(tol)


def _utilities(data) -> tuple[Fraction, ...]:
    if isinstance(data, list):
        data = {"utilities": data}
    return utilities_from_dict(data)


def _allocation(data) -> Allocation:
    # accept the full output of `solve`/`oracle` as well as a bare allocation
    if isinstance(data, dict) and "allocation" in data:
        data = data["allocation"]
    return allocation_from_dict(data)


def _solution_dict(inst, obj, alloc, utilities, examined, method) -> dict:
    value = objective_value(obj, utilities)
    return {
        "objective": str(obj),
        "method": method,
        "utilities": utilities_to_dict(utilities)["utilities"],
        "objective_value": None if value is None else format_rational(value),
        "allocation": allocation_to_dict(alloc),
        "candidates_examined": examined,
    }


# ------------------------------------------------------------ commands


def cmd_solve(args) -> dict:
    inst = parse_instance(_read(args.input))
    obj = parse_objective(args.objective)
    try:
        sol = solver.solve(inst, obj)
    except solver.NotTractableError:
        if not args.allow_oracle:
            raise CliError(
                "mixed instance with non-identical divisible goods: no polynomial algorithm applies; "
                "rerun with --allow-oracle for exhaustive search",
                EXIT_HARD,
            ) from None
        res = oracle.brute_force_optimal(inst, obj, _caps(args), tol=_tol(args))
        return _solution_dict(inst, obj, res.allocation, res.utilities, res.examined, "oracle")
    method = "essential-block" if inst.indivisible and inst.divisible else "pure"
    return _solution_dict(inst, obj, sol.allocation, sol.utilities, sol.candidates_examined, method)


def cmd_oracle(args) -> dict:
    inst = parse_instance(_read(args.input))
    obj = parse_objective(args.objective)
    res = oracle.brute_force_optimal(inst, obj, _caps(args), inner=args.inner, tol=_tol(args))
    return _solution_dict(inst, obj, res.allocation, res.utilities, res.examined, f"oracle/{res.inner}")


def cmd_partition(args) -> dict:
    inst = parse_instance(_read(args.input))
    kind = None if args.kind == "all" else args.kind
    f = coverage(inst, kind)
    cp = canonical_partition(f)
    pp = principal_partition(f)
    return {
        "kind": args.kind,
        "canonical": {"blocks": [list(b) for b in cp.blocks], "values": list(cp.essential_values)},
        "principal": {"blocks": [list(b) for b in pp.blocks], "values": [format_rational(v) for v in pp.critical_values]},
        "relaxed_minimizer": [format_rational(v) for v in relaxed_minimizer(pp)],
        "discrete_minimizer": list(discrete_minimizer(f, cp)),
    }


def cmd_realize(args) -> dict:
    inst = parse_instance(_read(args.input))
    split = args.target_indivisible is not None or args.target_divisible is not None
    if split and args.target is not None:
        raise CliError("give either --target or the --target-indivisible/--target-divisible pair", EXIT_USAGE)
    if split:
        if args.target_indivisible is None or args.target_divisible is None:
            raise CliError("--target-indivisible and --target-divisible go together", EXIT_USAGE)
        parts = [
            (INDIVISIBLE, _utilities(_json_file(args.target_indivisible))),
            (DIVISIBLE, _utilities(_json_file(args.target_divisible))),
        ]
    elif args.target is None:
        raise CliError("realize needs --target", EXIT_USAGE)
    else:
        target = _utilities(_json_file(args.target))
        if inst.indivisible and inst.divisible:
            if not args.allow_oracle:
                raise CliError(
                    "bare utility target on a mixed instance: deciding whether it can be achieved by an "
                    "allocation is intractable in general; pass the indivisible/divisible split "
                    "or --allow-oracle",
                    EXIT_HARD,
                )
            alloc = oracle.realize_mixed_target(inst, target, _caps(args, oracle.UNCAPPED))
            if alloc is None:
                raise CliError("target utility vector is not achievable", EXIT_INFEASIBLE)
            return {"utilities": utilities_to_dict(utility_vector(inst, alloc))["utilities"], "allocation": allocation_to_dict(alloc)}
        parts = [(DIVISIBLE if inst.divisible else INDIVISIBLE, target)]

    alloc = Allocation({})
    for kind, target in parts:
        if len(target) != inst.n_agents:
            raise CliError(f"{kind} target has {len(target)} entries for {inst.n_agents} agents", EXIT_USAGE)
        if sum(target) != len(inst.indivisible if kind == INDIVISIBLE else inst.divisible):
            raise CliError(f"{kind} target does not sum to the number of {kind} goods", EXIT_INFEASIBLE)
        part = flow.realize_from_utilities(inst, kind, target)
        if part is None:
            raise CliError(f"{kind} target is not achievable", EXIT_INFEASIBLE)
        alloc = alloc.merge(part)
    return {"utilities": utilities_to_dict(utility_vector(inst, alloc))["utilities"], "allocation": allocation_to_dict(alloc)}


def cmd_verify(args) -> dict:
    inst = parse_instance(_read(args.input))
    if args.allocation is None:
        raise CliError("verify needs --allocation", EXIT_USAGE)
    alloc = _allocation(_json_file(args.allocation))
    problems = validate_allocation(inst, alloc)
    reports = [oracle.Report("valid", not problems, problems)]
    if not problems:
        utilities = utility_vector(inst, alloc)
        reports.append(oracle.check_structure(inst, alloc))
        obj = parse_objective(args.objective)
        reports.append(oracle.check_proximity(inst, obj, utilities=utilities))
    out = {"pass": all(r.ok for r in reports), "checks": [r.to_dict() for r in reports]}
    if not out["pass"]:
        raise _Failed(out)
    return out


class _Failed(Exception):
    """Carries a report that must still be written before exiting with code 2."""

    def __init__(self, data):
        super().__init__("verification failed")
        self.data = data


def cmd_gen(args) -> dict:
    if args.kind == "random":
        if args.seed is None:
            raise CliError("gen random needs --seed", EXIT_USAGE)
        rng = random.Random(args.seed)
        inst = oracle.random_instance(rng, args.agents, args.indivisible, args.divisible, args.identical)
        return instance_to_dict(inst)
    if args.input is None:
        raise CliError(f"gen {args.kind} needs --input with a 3DM instance", EXIT_USAGE)
    try:
        dm = oracle.parse_3dm(_read(args.input))
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed 3DM JSON: {exc}", EXIT_USAGE) from exc
    if args.kind == "3dm":
        return instance_to_dict(oracle.gen_3dm_hardness(dm))
    inst, target = oracle.gen_realization_hardness(dm)
    if args.target_output is not None:
        _emit(utilities_to_dict(target), args.target_output)
    return instance_to_dict(inst)


# ------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mixfair", description="Fair allocation of mixed divisible and indivisible goods.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, objective=False, objective_required=False):
        sp.add_argument("--input", help="instance JSON (default: stdin)")
        sp.add_argument("--output", help="result JSON (default: stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--dump-network", metavar="PATH", help="write every flow network solved, as DOT")
        if objective:
            sp.add_argument(
                "--objective",
                required=objective_required,
                default=None if objective_required else "square-sum",
                help="square-sum | power:<p> | dec-min | inc-max | nash",
            )

    def oracle_flags(sp):
        sp.add_argument("--allow-oracle", action="store_true", help="permit exhaustive search on hard cases")
        sp.add_argument("--cap-assignments", type=int, help="cap on indivisible assignments the oracle may enumerate")
        sp.add_argument("--tol", default="1/100000000", help="duality-gap tolerance p/q for the continuous solver")

    sp = sub.add_parser("solve", help="solve an instance")
    common(sp, objective=True, objective_required=True)
    oracle_flags(sp)

    sp = sub.add_parser("oracle", help="exhaustive optimum (small instances only)")
    common(sp, objective=True, objective_required=True)
    oracle_flags(sp)
    sp.add_argument("--inner", default="auto", choices=["auto", "water-fill", "exhaustive", "partition", "continuous"])

    sp = sub.add_parser("partition", help="canonical and principal partitions")
    common(sp)
    sp.add_argument("--kind", default="all", choices=["all", INDIVISIBLE, DIVISIBLE])

    sp = sub.add_parser("realize", help="find an allocation with the given utilities")
    common(sp)
    oracle_flags(sp)
    sp.add_argument("--target", help="utility vector JSON")
    sp.add_argument("--target-indivisible", help="utilities from indivisible goods (mixed instances)")
    sp.add_argument("--target-divisible", help="utilities from divisible goods (mixed instances)")

    sp = sub.add_parser("verify", help="check an allocation")
    common(sp, objective=True)
    sp.add_argument("--allocation", help="allocation JSON, or the output of solve")

    sp = sub.add_parser("gen", help="generate instances")
    sp.add_argument("kind", choices=["3dm", "realization", "random"])
    common(sp)
    sp.add_argument("--target-output", help="where gen realization writes the target utilities")
    sp.add_argument("--agents", type=int, default=4)
    sp.add_argument("--indivisible", type=int, default=3)
    sp.add_argument("--divisible", type=int, default=2)
    sp.add_argument("--identical", action="store_true", help="all divisible goods share one desire-set")
    return p


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "partition": cmd_partition,
    "realize": cmd_realize,
    "verify": cmd_verify,
    "gen": cmd_gen,
}


def _dump_networks(nets, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label, net in nets:
            fh.write(f"// {label}\n{net.to_dot()}\n")


def run(argv: list[str] | None = None) -> int:
    level = os.environ.get("MIXFAIR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        with flow.recording() as nets:
            try:
                result = COMMANDS[args.command](args)
                code = EXIT_OK
            except _Failed as failed:
                result, code = failed.data, EXIT_INFEASIBLE
        if args.dump_network:
            _dump_networks(nets, args.dump_network)
        _emit(result, args.output)
        return code
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except oracle.CapExceeded as exc:
        print(f"oracle caps exceeded: {exc}", file=sys.stderr)
        return EXIT_HARD
    except (InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except solver.InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
