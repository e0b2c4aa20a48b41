"""witt-lab: command-line front end with stable JSON output.

Subcommands: ring-info, diagonalize, chain, verify, gw, kmw, witt, compare,
steinberg-check, oracle.  Every run echoes its resolved configuration, and
all output is deterministic for fixed flags.  Exit codes: 0 success or
verified, 1 verification failure / unreachable endpoints, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import chains, groups
from .bilinear import (
    BilinearError,
    BilinearSpace,
    CongruenceWitness,
    diagonalize,
)
from .rings import DEFAULT_SIZE_CAP, RingError, parse_ring

SCHEMA = "witt-lab/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="witt-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ring_required=True):
        p.add_argument("--ring", required=ring_required, help="ring spec, e.g. 'GF(2)[x]/(x^4)'")
        p.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="also write the JSON result to this path")

    p = sub.add_parser("ring-info", help="carrier, units, residue field, square classes")
    common(p)

    p = sub.add_parser("diagonalize", help="split a Gram matrix into unit lines and residual blocks")
    common(p)
    p.add_argument("--gram", required=True, help="Gram matrix as JSON or a file path")

    p = sub.add_parser("chain", help="produce a chain certificate between two orthogonal bases")
    common(p)
    p.add_argument("--gram", required=True)
    p.add_argument("--from", dest="from_basis", required=True, help="basis as JSON or a file path")
    p.add_argument("--to", dest="to_basis", required=True)
    p.add_argument("--bfs-budget", type=int, default=None)
    p.add_argument("--allow-unreachable", action="store_true")

    p = sub.add_parser("verify", help="verify a chain certificate or a congruence witness")
    common(p, ring_required=False)
    p.add_argument("--cert", required=True, help="certificate file path or inline JSON")

    for name, helptext in (
        ("gw", "Grothendieck-Witt group structure"),
        ("kmw", "Milnor-Witt K-group structure"),
        ("witt", "Witt group structure"),
        ("compare", "comparison map K0MW -> GW with kernel"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--rank-cap", type=int, default=None)

    p = sub.add_parser("steinberg-check", help="Steinberg-consequence identities in the Steinberg-only quotient")
    common(p)

    p = sub.add_parser("oracle", help="stable isometry classification of diagonal tuples")
    common(p)
    p.add_argument("--rank-cap", type=int, default=3)
    p.add_argument("--stab-cap", type=int, default=2)

    return parser


def _load_payload(text: str):
    """Inline JSON, or a path to a JSON file."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if os.path.exists(text):
        with open(text, "r", encoding="utf-8") as fh:
            return json.load(fh)
    raise UsageError(f"cannot parse {text!r} as JSON and no such file exists")


def _vectors_from_json(ring, obj):
    return tuple(tuple(ring.element_from_json(c) for c in v) for v in obj)


def _config_of(args) -> dict:
    skip = {"command", "output"}
    return {
        k.replace("_", "-"): v
        for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    }


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": str(exc)}, sort_keys=True))
        print(f"witt-lab: {exc}", file=sys.stderr)
        return 2

    out = {"schema": SCHEMA, "command": args.command, "config": _config_of(args)}
    try:
        code = _dispatch(args, out)
    except UsageError as exc:
        print(json.dumps({"error": str(exc), "schema": SCHEMA}, sort_keys=True))
        print(f"witt-lab: {exc}", file=sys.stderr)
        return 2
    except (RingError, BilinearError, chains.NotOrthogonalError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc), "schema": SCHEMA}, sort_keys=True))
        print(f"witt-lab: {exc}", file=sys.stderr)
        return 2
    except (chains.BudgetExceededError, groups.GroupsError) as exc:
        print(json.dumps({"error": str(exc), "schema": SCHEMA}, sort_keys=True))
        print(f"witt-lab: {exc}", file=sys.stderr)
        return 1

    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return code


def _dispatch(args, out) -> int:
    cmd = args.command
    ring = parse_ring(args.ring, args.size_cap) if args.ring else None

    if cmd == "ring-info":
        sc = ring.square_classes()
        F = ring.residue_field()
        out["ring"] = {
            "spec": ring.spec,
            "size": ring.size,
            "is_field": ring.is_field,
            "units": len(ring.units()),
            "maximal_ideal_size": ring.size - len(ring.units()),
            "residue_field": F.spec,
            "residue_field_size": F.size,
            "squares": [repr(s) for s in sc.squares],
            "square_class_representatives": [repr(r) for r in sc.reps],
        }
        return 0

    if cmd == "diagonalize":
        space = BilinearSpace.from_json(ring, _load_payload(args.gram))
        report, witness = diagonalize(space)
        out["units"] = [u.to_json() for u in report.units]
        out["blocks"] = [[a.to_json(), b.to_json()] for a, b in report.blocks]
        out["witness"] = witness.to_json()
        return 0

    if cmd == "chain":
        space = BilinearSpace.from_json(ring, _load_payload(args.gram))
        b = chains.OrthogonalBasis(space, _vectors_from_json(ring, _load_payload(args.from_basis)))
        c = chains.OrthogonalBasis(space, _vectors_from_json(ring, _load_payload(args.to_basis)))
        try:
            chain = chains.chain_local(b, c, bfs_budget=args.bfs_budget)
        except chains.ChainUnreachableError as exc:
            out["unreachable"] = True
            out["detail"] = str(exc)
            return 0 if args.allow_unreachable else 1
        out["certificate"] = chain.to_json()
        out["length"] = len(chain)
        return 0

    if cmd == "verify":
        payload = _load_payload(args.cert)
        if "certificate" in payload:
            payload = payload["certificate"]
        if "bases" in payload:
            chain = chains.Chain.from_json(payload, size_cap=args.size_cap)
            ok, msg = chains.verify_chain(chain, chain.bases[0], chain.bases[-1])
            out["kind"] = "chain"
        elif "matrix" in payload:
            if ring is None:
                raise UsageError("--ring is required to verify a congruence witness")
            try:
                CongruenceWitness.from_json(ring, payload)
                ok, msg = True, "ok"
            except BilinearError as exc:
                ok, msg = False, str(exc)
            out["kind"] = "congruence"
        else:
            raise UsageError("certificate is neither a chain ('bases') nor a witness ('matrix')")
        out["valid"] = ok
        out["diagnostic"] = msg
        return 0 if ok else 1

    if cmd in ("gw", "kmw", "witt"):
        if cmd == "gw":
            structure = groups.gw_structure(ring, args.rank_cap)
            notes = groups.gw_presentation(ring, args.rank_cap).notes
        elif cmd == "kmw":
            structure = groups.kmw_structure(ring)
            notes = {}
        else:
            structure = groups.witt_structure(ring, args.rank_cap)
            notes = {}
        out.update(structure.to_json())
        if notes.get("undecided"):
            out["undecided_isometry_pairs"] = len(notes["undecided"])
        return 0

    if cmd == "compare":
        report = groups.comparison_map(ring, args.rank_cap)
        out.update(report.to_json())
        out["kmw"] = report.kmw.to_json()
        out["gw"] = report.gw.to_json()
        return 0

    if cmd == "steinberg-check":
        report = groups.verify_steinberg_consequences(ring)
        out.update(report.to_json())
        out["ok"] = report.ok
        return 0 if (report.ok or not report.asserted) else 1

    if cmd == "oracle":
        classification = groups.stable_isometry_oracle(ring, args.rank_cap, args.stab_cap)
        out.update(classification.to_json())
        return 0

    raise UsageError(f"unknown command {cmd!r}")  # pragma: no cover


def main():  # pragma: no cover - thin wrapper
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()
