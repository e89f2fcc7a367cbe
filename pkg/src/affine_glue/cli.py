"""Command-line entry point: check, embed, shadows, verify, demo.

Exit codes: 0 success, 1 rejected instance or failed verification, 2 bad
input (I/O, parse or structural errors).  Results go to stdout and
diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from fractions import Fraction

from . import fixtures
from .embedder import FAULTS, affinize
from .errors import AffineGlueError, CriterionRejected, MappingDomainMismatch, ParseError, ValidationError
from .oracle import brute_force_shadows, verify
from .serialize import parse_embedding, parse_instance, serialize_embedding, serialize_instance
from .space import shadow_set
from .unbounded import ExtendedSpace, affinize_unbounded
from .verifier import check_condition_2

OK, REJECTED, MALFORMED = 0, 1, 2

DEMOS = {**fixtures.BOUNDED, **fixtures.UNBOUNDED, **fixtures.REJECTED}


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _show(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


def _read(name: str) -> bytes:
    try:
        if name == "-":
            return sys.stdin.buffer.read()
        with open(name, "rb") as fh:
            return fh.read()
    except OSError as exc:
        _err(f"error: cannot read {name}: {exc.strerror}")
        raise _Exit(MALFORMED) from None


def _write(name: str, data: bytes) -> None:
    try:
        if name == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
            return
        with open(name, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        _err(f"error: cannot write {name}: {exc.strerror}")
        raise _Exit(MALFORMED) from None


def _parse(name: str, parser):
    data = _read(name)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            doc = parser(data)
        except ParseError as exc:
            _err(f"error: {name}: {exc}")
            raise _Exit(MALFORMED) from None
    for w in caught:
        _err(f"warning: {name}: {w.message}")
    return doc


def _report_structural(exc: ValidationError) -> None:
    for v in exc.report.structural:
        _err(f"error: {v.code}: {v.message}")


def _report_witnesses(witnesses, stream) -> None:
    for pid, msg in witnesses:
        print(f"witness {pid}: {msg}", file=stream)


# --------------------------------------------------------------------------


def cmd_check(args) -> int:
    space = _parse(args.file, parse_instance)
    try:
        rep = check_condition_2(space)
    except ValidationError as exc:
        _report_structural(exc)
        return MALFORMED
    print(f"{'accepted' if rep.ok else 'rejected'} K={rep.K}")
    _report_witnesses(rep.witnesses, sys.stdout)
    return OK if rep.ok else REJECTED


def cmd_embed(args) -> int:
    space = _parse(args.file, parse_instance)
    faults = frozenset(args.fault or ())
    try:
        if isinstance(space, ExtendedSpace):
            result = affinize_unbounded(space, faults=faults)
        else:
            result = affinize(space, faults=faults)
    except ValidationError as exc:
        _report_structural(exc)
        return MALFORMED
    except CriterionRejected as exc:
        _err("rejected: the affineness criterion fails")
        _report_witnesses(exc.report.witnesses, sys.stderr)
        return REJECTED
    except AffineGlueError as exc:
        _err(f"error: {exc}")
        return MALFORMED
    _write(args.output, serialize_embedding(result))
    cert = result.certificate
    _err(f"embedded into dimension {cert.dimension} (K={cert.K}, N={cert.N}, "
         f"{len(cert.repairs)} repair{'s' if len(cert.repairs) != 1 else ''})")
    return OK


def cmd_shadows(args) -> int:
    space = _parse(args.file, parse_instance)
    try:
        space.point(args.point)
    except KeyError:
        _err(f"error: no point {args.point!r}")
        return MALFORMED
    schedule = [Fraction(1, 2 ** j) for j in range(1, args.depth + 1)]
    try:
        exact = shadow_set(space, args.point)
        brute = brute_force_shadows(space, args.point, schedule)
    except AffineGlueError as exc:
        _err(f"error: {exc}")
        return MALFORMED
    left = sorted(_show(v) for v in exact)
    right = sorted(_show(v) for v in brute)
    width = max([len("shadow_set")] + [len(s) for s in left])
    print(f"{'shadow_set':<{width}}  brute_force")
    for j in range(max(len(left), len(right))):
        a = left[j] if j < len(left) else ""
        b = right[j] if j < len(right) else ""
        print(f"{a:<{width}}  {b}")
    print("agree" if exact == brute else "DISAGREE")
    return OK if exact == brute else REJECTED


def cmd_verify(args) -> int:
    space = _parse(args.file, parse_instance)
    doc = _parse(args.embedding, parse_embedding)
    try:
        rep = verify(space, doc.result(), args.density, args.seed)
    except MappingDomainMismatch as exc:
        print(f"FAIL mapping: {exc}")
        return REJECTED
    except AffineGlueError as exc:
        _err(f"error: {exc}")
        return MALFORMED
    for c in rep.checks:
        line = f"{'PASS' if c.ok else 'FAIL'} {c.name}"
        print(line + (f": {c.witness}" if c.witness else ""))
    print(f"{'verified' if rep.ok else 'not verified'} at density {args.density}")
    return OK if rep.ok else REJECTED


def cmd_demo(args) -> int:
    _write(args.output, serialize_instance(DEMOS[args.name]()))
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affine-glue",
                                description="Embed curve complexes with re-glued ends into affine space.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide whether an instance can be embedded")
    c.add_argument("file", help="instance JSON ('-' for stdin)")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("embed", help="compute the embedding and its certificate")
    e.add_argument("file", help="instance JSON ('-' for stdin)")
    e.add_argument("-o", "--output", default="-", help="where to write the embedding ('-' for stdout)")
    e.add_argument("--fault", action="append", choices=sorted(FAULTS),
                   help="switch off one safeguard (for experiments)")
    e.set_defaults(func=cmd_embed)

    s = sub.add_parser("shadows", help="compare exact and brute-force shadow sets at a point")
    s.add_argument("file")
    s.add_argument("--point", required=True, help="point id")
    s.add_argument("--depth", type=int, default=12, help="radii 2^-1 .. 2^-depth (default 12)")
    s.set_defaults(func=cmd_shadows)

    v = sub.add_parser("verify", help="run the oracle suite on an embedding")
    v.add_argument("file", help="instance JSON")
    v.add_argument("embedding", help="embedding JSON written by 'embed'")
    v.add_argument("--density", type=int, default=12, help="radii 2^-1 .. 2^-D (default 12)")
    v.add_argument("--seed", type=int, default=0, help="seed for sample points")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("demo", help="write a built-in instance")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("-o", "--output", default="-")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return MALFORMED if exc.code else OK
    try:
        return args.func(args)
    except _Exit as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
