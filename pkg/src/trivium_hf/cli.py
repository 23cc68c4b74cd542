"""Command line: keystream, detect, attack, campaign and verify.

Exit codes: 0 success, 1 attack or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .campaign import CampaignConfig, attack_report, detect_one, write_campaign
from .core import MAX_KEYSTREAM_BITS, ZERO_IV, Iv, Key, faulted_keystream
from .detector import FaultedMachine, detect_case
from .faults import CaseLabel, FaultMask, MaskError, parse_model
from .verify import CATALOG, run_check

SEED_ENV = "TRIVIUM_HF_SEED"


class UsageError(ValueError):
    pass


def _key(args) -> Key:
    if args.key is None:
        raise UsageError("--key is required")
    return Key.from_hex(args.key)


def _iv(args) -> Iv:
    return ZERO_IV if args.iv is None else Iv.from_hex(args.iv)


def _mask(args) -> FaultMask:
    return FaultMask.parse(args.mask or "")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"--seed or {SEED_ENV} is required")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_keystream(args) -> int:
    if not 0 <= args.bits <= MAX_KEYSTREAM_BITS:
        raise UsageError(f"--bits must lie in 0..{MAX_KEYSTREAM_BITS}")
    print(faulted_keystream(_key(args), _iv(args), _mask(args), args.bits).hex())
    return 0


def cmd_detect(args) -> int:
    _emit(detect_one(_key(args), _mask(args), args.resolve_case5))
    return 0


def cmd_attack(args) -> int:
    key, mask = _key(args), _mask(args)
    det = detect_case(FaultedMachine(key, mask), args.resolve_case5)
    report = {"detection": det.record(), **attack_report(key, mask, det.label)}
    _emit(report)
    return 0 if report["success"] else 1


def _attack_cases(spec: str | None) -> frozenset[CaseLabel]:
    if not spec:
        return frozenset()
    if spec == "all":
        return frozenset(CaseLabel)
    out = set()
    for part in spec.split(","):
        part = part.strip()
        try:
            out.add(CaseLabel(part if part.startswith("Case") else f"Case{part}"))
        except ValueError:
            raise UsageError(f"unknown case {part!r}") from None
    return frozenset(out)


def cmd_campaign(args) -> int:
    if args.trials is None or args.trials < 1:
        raise UsageError("--trials must be >= 1")
    config = CampaignConfig(
        trials=args.trials,
        seed=_seed(args),
        model=parse_model(args.model),
        attack_cases=_attack_cases(args.attack),
        resolve_case5=args.resolve_case5,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            summary = write_campaign(config, fh)
    else:
        summary = write_campaign(config, sys.stdout)
    if args.format == "csv":
        sys.stdout.write(summary.to_csv())
    else:
        _emit({"summary": summary.to_dict()})
    return 0


def cmd_verify(args) -> int:
    if args.list:
        for cid, (summary, _) in CATALOG.items():
            print(f"{cid}\t{summary}")
        return 0
    if not args.check:
        raise UsageError("name a check, or pass --list")
    ids = list(CATALOG) if args.check == ["all"] else args.check
    unknown = [c for c in ids if c not in CATALOG]
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}; see --list")
    trials = args.trials if args.trials is not None else 10
    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    ok = True
    for cid in ids:
        res = run_check(cid, trials, seed)
        ok &= res.passed
        if args.format == "json":
            _emit(res.to_dict())
        else:
            line = f"{'PASS' if res.passed else 'FAIL'} {cid}: {res.detail}"
            if res.counterexample:
                line += f" | counterexample {json.dumps(res.counterexample, sort_keys=True)}"
            print(line)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--key", help="80-bit key, 20 hex digits, k1 first")
    common.add_argument("--iv", help="80-bit IV, 20 hex digits (default zero)")
    common.add_argument("--mask", default="", help="fault positions, e.g. 100 or 200,250 or 1-5")
    common.add_argument("--resolve-case5", action="store_true", help="report Case5or6 as Case5")

    p = argparse.ArgumentParser(prog="trivium-hf", description="Hard-fault analysis of Trivium.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keystream", parents=[common], help="print faulted keystream as hex")
    s.add_argument("--bits", type=int, default=128)
    s.set_defaults(func=cmd_keystream)

    s = sub.add_parser("detect", parents=[common], help="run the case detector")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("attack", parents=[common], help="detect, attack and score against the key")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("campaign", parents=[common], help="seeded Monte Carlo campaign")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--model", default="single", help="single | k:<n> | bernoulli:<p>")
    s.add_argument("--attack", help="cases to attack: all, or a list such as 1,2,3")
    s.add_argument("--out", help="file for per-trial records (default stdout)")
    s.add_argument("--format", choices=("json", "csv"), default="json", help="summary format")
    s.set_defaults(func=cmd_campaign)

    s = sub.add_parser("verify", help="run checks from the catalog")
    s.add_argument("check", nargs="*", help="check ids, or 'all'")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--list", action="store_true")
    s.add_argument("--format", choices=("json", "text"), default="text")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MaskError, ValueError) as exc:
        print(f"trivium-hf: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
