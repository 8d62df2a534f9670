"""Command line: ``nilkex check | exchange | attack | bench``.

Exit codes: 0 success; 1 failed check or invalid parameters; 2 unreadable,
malformed or unsupported input; 3 attack failed (nothing recovered).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import List, Optional

from . import bench
from .cryptanalysis import SOLVERS, AttackFailed, UnsupportedSolver, break_exchange
from .groups import PcGroup
from .matrix import format_ut, heisenberg_hom
from .platforms import PlatformError, default_params, load_platform, resolve_fixture
from .presentation import (PresentationError, check_consistency, heisenberg_presentation,
                           nilpotency_class, parse_presentation, verify_class_at_most)
from .protocols import (IncompleteTranscript, InvalidParameters, MalformedTranscript, is_complete,
                        run_exchange, transcript_from_json, transcript_to_json)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ATTACK = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_check(args) -> int:
    try:
        path = resolve_fixture(args.presentation)
        pres = parse_presentation(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"error: {args.presentation}: no such file", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, PresentationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = check_consistency(pres)
    print(f"{path.name}: {pres.n} generators, {report.checked} overlap identities")
    for f in report.failures:
        print(f"FAIL {f}")
    if not report.ok:
        print("inconsistent")
        return EXIT_FAIL
    if args.cls is not None:
        if not verify_class_at_most(pres, args.cls):
            print(f"consistent, but class <= {args.cls} FAILS")
            return EXIT_FAIL
        c = args.cls
    else:
        c = nilpotency_class(pres)
    print(f"consistent, class ≤ {c} confirmed")
    return EXIT_OK


def _parse_keys(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidParameters(f"--keys must be comma-separated integers, got {text!r}") from None


def cmd_exchange(args) -> int:
    try:
        platform = load_platform(args.platform)
    except (PlatformError, PresentationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        params = default_params(platform, args.protocol)
        keys = _parse_keys(args.keys) if args.keys else None
        if keys is not None and len(keys) != params.parties:
            raise InvalidParameters(f"{params.parties} parties need {params.parties} keys, got {len(keys)}")
        if keys is not None and 0 in keys:
            raise InvalidParameters("private keys must be nonzero")
        with warnings.catch_warnings():
            # surfaced through the report's "warnings" field instead
            warnings.simplefilter("ignore")
            result = run_exchange(params, keys=keys, seed=args.seed, bound=args.bound)
    except InvalidParameters as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_FAIL
    grp = params.group
    report = {
        "protocol": params.protocol,
        "platform": params.platform,
        "parties": params.parties,
        "all_roles_agree": result.agreed,
        "shared_key": grp.encode(result.shared_key),
        "trivial_key": result.trivial_key,
        "warnings": result.report.warnings,
    }
    if isinstance(grp, PcGroup) and grp.pres == heisenberg_presentation(grp.pres.orders[0]):
        report["matrix_image"] = format_ut(heisenberg_hom(result.shared_key, grp.pres))
    _write(args.out, transcript_to_json(result.transcript))
    _write(args.report, _dump(report))
    return EXIT_OK if result.agreed else EXIT_FAIL


def cmd_attack(args) -> int:
    try:
        text = Path(args.transcript).read_text(encoding="utf-8")
        transcript = transcript_from_json(text)
        if not is_complete(transcript):
            raise MalformedTranscript("transcript is missing messages")
    except (OSError, MalformedTranscript, PlatformError, PresentationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        rep = break_exchange(transcript, args.solver, args.budget)
    except (UnsupportedSolver, IncompleteTranscript) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AttackFailed as exc:
        out = {"success": False, "solver": args.solver, "reason": exc.reason, "ops": exc.ops}
        if args.timing:
            out["elapsed"] = round(exc.elapsed, 6)
        _write(args.out, _dump(out))
        print(f"attack failed after {exc.ops} group operations ({exc.elapsed:.3f}s): {exc.reason}",
              file=sys.stderr)
        return EXIT_ATTACK
    out = rep.to_dict(transcript.params.group)
    if not args.timing:
        out.pop("elapsed")
    _write(args.out, _dump(out))
    print(f"key recovered with {rep.ops} group operations in {rep.elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    suites = [s for s in (args.suite or "").split(",") if s.strip()]
    try:
        rows = bench.run_suites(suites, cap=args.cap, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(bench.format_table(rows, timing=True))
    if args.out:
        _write(args.out, _dump([r.as_dict(timing=args.timing) for r in rows]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilkex", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse a presentation and run the consistency checks")
    c.add_argument("presentation")
    c.add_argument("--class", dest="cls", type=int, default=None,
                   help="class bound to verify (default: smallest that holds)")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("exchange", help="run an honest key exchange")
    e.add_argument("--protocol", choices=("I", "II"), default="I")
    e.add_argument("--platform", default="heisenberg")
    e.add_argument("--keys", help="comma-separated private keys, one per party")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--bound", type=int, default=None, help="bound for sampled private keys")
    e.add_argument("--out", default="transcript.json", help="transcript path ('-' for stdout)")
    e.add_argument("--report", default="-", help="key report path (default stdout)")
    e.set_defaults(func=cmd_exchange)

    a = sub.add_parser("attack", help="recover the shared key from a transcript")
    a.add_argument("transcript")
    a.add_argument("--solver", choices=SOLVERS, default="ut-reduce")
    a.add_argument("--budget", type=int, default=None, help="maximum group multiplications")
    a.add_argument("--out", default="-")
    a.add_argument("--timing", action="store_true", help="include wall time in the report file")
    a.set_defaults(func=cmd_attack)

    b = sub.add_parser("bench", help="operation-count ladders")
    b.add_argument("--suite", default="bsgs,ut-reduce",
                   help=f"comma-separated subset of {','.join(bench.SUITES)}; empty for none")
    b.add_argument("--cap", type=int, default=20, help="largest log2(q) on the BSGS ladder")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None, help="also write rows as JSON")
    b.add_argument("--timing", action="store_true", help="include wall time in the JSON rows")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
