"""Command-line front end: ``ibltstash <verb> ...``.

Exit codes: 0 ok, 1 I/O or usage trouble, 2 reconciliation failed, 3 malformed
sketch file, 4 bad key, 5 incompatible sketches.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import net
from .errors import FormatError, IncompatibleSketch, KeyRangeError, KeyZero
from .hashing import HashSeeds
from .serialize import deserialize, load, save, serialize
from .signed import SignedSketch
from .sketch import Sketch, Status

EXIT_OK = 0
EXIT_IO = 1
EXIT_FAILED = 2
EXIT_FORMAT = 3
EXIT_BAD_KEY = 4
EXIT_INCOMPATIBLE = 5

JSON_SCHEMA = 1


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_key(text: str) -> int:
    """Decimal, or hex with a 0x prefix."""
    t = text.strip().lower()
    try:
        value = int(t, 16) if t.startswith("0x") else int(t, 10)
    except ValueError:
        raise CliError(EXIT_BAD_KEY, f"not a key: {text!r}") from None
    if value == 0:
        raise CliError(EXIT_BAD_KEY, "key 0 is reserved")
    if value < 0:
        raise CliError(EXIT_BAD_KEY, f"negative key: {text}")
    return value


def _read_keys(args) -> list:
    keys = [parse_key(k) for k in args.keys]
    if args.keys_from:
        fh = sys.stdin if args.keys_from == "-" else open(args.keys_from)
        with fh:
            keys.extend(parse_key(tok) for line in fh for tok in line.split())
    return keys


def _load(path):
    try:
        return load(path)
    except FormatError as exc:
        raise CliError(EXIT_FORMAT, f"{path}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"{path}: {exc.strerror or exc}") from None


def _save(sk, path):
    try:
        save(sk, path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"{path}: {exc.strerror or exc}") from None


def render_report(outcome, signed: bool, as_json: bool) -> str:
    """Text printed by ``report`` and ``fetch``; shared so both match byte for byte."""
    trusted = outcome.status is not Status.FAILED
    if signed:
        items = sorted(outcome.keys.items())
    else:
        items = [(x, None) for x in outcome.sorted_keys()]
    if as_json:
        if signed:
            keys = [{"key": x, "sign": "+" if s == 1 else "-"} for x, s in items]
        else:
            keys = [x for x, _ in items]
        doc = {
            "schema": JSON_SCHEMA,
            "keys": keys if trusted else [],
            "status": outcome.status.value,
            "used_stash": outcome.used_stash,
        }
        return json.dumps(doc) + "\n"
    if not trusted:
        return ""
    if signed:
        return "".join(f"{'+' if s == 1 else '-'}{x}\n" for x, s in items)
    return "".join(f"{x}\n" for x, _ in items)


def _emit_report(outcome, signed, as_json) -> int:
    sys.stdout.write(render_report(outcome, signed, as_json))
    if outcome.status is Status.FAILED:
        print("reconciliation failed: difference exceeds what the sketch can recover", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _diff(a, b):
    try:
        return a.diff(b)
    except IncompatibleSketch as exc:
        raise CliError(EXIT_INCOMPATIBLE, str(exc)) from None


def cmd_create(args) -> int:
    seeds = HashSeeds.from_int(int(args.seed, 16)) if args.seed else HashSeeds()
    cls = SignedSketch if args.signed else Sketch
    try:
        sk = cls(args.capacity, args.stash, args.width, seeds, Fraction(args.epsilon))
    except (KeyRangeError, ValueError) as exc:
        raise CliError(EXIT_IO, f"bad parameters: {exc}") from None
    _save(sk, args.out)
    return EXIT_OK


def cmd_insert(args) -> int:
    sk = _load(args.file)
    keys = _read_keys(args)
    try:
        if isinstance(sk, SignedSketch):
            for x in keys:
                sk.delete(x) if args.delete else sk.insert(x)
        else:
            sk.insert_many(keys)
    except (KeyZero, KeyRangeError) as exc:
        raise CliError(EXIT_BAD_KEY, str(exc)) from None
    _save(sk, args.file)
    return EXIT_OK


def cmd_diff(args) -> int:
    out = _diff(_load(args.a), _load(args.b))
    _save(out, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    sk = _load(args.file)
    return _emit_report(sk.report(), sk.signed, args.json)


def cmd_stats(args) -> int:
    sk = _load(args.file)
    nonzero = sk.iblt.nonzero_cells()
    lines = [
        ("variant", "signed" if sk.signed else "unsigned"),
        ("capacity", sk.capacity),
        ("cells", sk.n),
        ("key_width", sk.w),
        ("stash", sk.r),
        ("epsilon", f"{float(sk.epsilon):g}"),
        ("nonzero_cells", nonzero),
        ("fill_ratio", f"{nonzero / sk.n:.4f}"),
        ("checksum", f"{sk.checksum:#x}"),
        ("bytes", len(serialize(sk))),
    ]
    if sk.signed:
        lines.insert(4, ("trits_per_cell", sk.nu))
    for k, v in lines:
        print(f"{k}: {v}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        with open(args.file, "rb") as fh:
            payload = fh.read()
    except OSError as exc:
        raise CliError(EXIT_IO, f"{args.file}: {exc.strerror or exc}") from None
    try:
        deserialize(payload)
    except FormatError as exc:
        raise CliError(EXIT_FORMAT, f"{args.file}: {exc}") from None
    limit = 1 if args.once else args.max_requests
    with net.listen(args.listen) as srv:
        host, port = srv.getsockname()[:2]
        print(f"listening on {host}:{port}", file=sys.stderr, flush=True)
        try:
            net.serve(srv, payload, max_requests=limit)
        except KeyboardInterrupt:
            pass
    return EXIT_OK


def cmd_fetch(args) -> int:
    local = _load(args.file)
    try:
        data = net.fetch(args.connect, timeout=args.timeout)
    except (OSError, net.ProtocolError) as exc:
        raise CliError(EXIT_IO, f"fetch from {args.connect} failed: {exc}") from None
    try:
        remote = deserialize(data)
    except FormatError as exc:
        raise CliError(EXIT_FORMAT, f"peer sent a bad sketch: {exc}") from None
    out = _diff(local, remote)
    return _emit_report(out.report(), out.signed, args.json)


def cmd_bench(args) -> int:
    from .harness import experiments as ex

    if args.experiment == "failure-rate":
        recs = ex.run_failure_rate(args.capacity, args.ratio, args.trials, args.seed, args.width)
        summary = ex.summarize(recs)
        lo, hi = summary["iblt_success_ci"]
        print(f"D={args.capacity} ratio={args.ratio} trials={args.trials} "
              f"success={summary['iblt_success_rate']:.4f} ci95=[{lo:.4f}, {hi:.4f}]")
    elif args.experiment == "residual-tail":
        res, recs = ex.run_residual_tail(args.capacity, args.ratio, args.trials, args.seed, args.width,
                                         min_failures=args.min_failures, keep_records=True)
        summary = ex.summarize(recs)
        print(f"D={args.capacity} ratio={args.ratio} trials={res.trials} failures={res.failures} "
              f"median_residual={res.median()}")
        for r in res.thresholds:
            print(f"  Pr[residual > {r} | failure] = {res.tail(r):.4f}")
    else:
        recs = ex.run_stash_pipeline(args.capacity, args.stash, args.trials, args.seed, args.width)
        summary = ex.summarize(recs)
        lo, hi = summary["final_exact_ci"]
        print(f"D={args.capacity} r={args.stash} trials={args.trials} "
              f"exact={summary['final_exact_rate']:.4f} ci95=[{lo:.4f}, {hi:.4f}] "
              f"stash_activation={summary['stash_activation_rate']:.4f} "
              f"mean_report_s={summary['mean_report_time']:.6f}")
    if args.csv:
        ex.write_csv(args.csv, recs, summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ibltstash", description="IBLT set reconciliation sketches with a BCH stash.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("create", help="write a new empty sketch")
    c.add_argument("--capacity", "-D", type=int, required=True, help="largest set difference to recover")
    c.add_argument("--stash", "-r", type=int, default=None, help="stash capacity (default min(D, max(8, w)))")
    c.add_argument("--width", "-w", type=int, default=32, choices=(8, 16, 24, 32), help="key width in bits")
    c.add_argument("--epsilon", default="0.1", help="table slack over the peeling threshold")
    c.add_argument("--signed", action="store_true", help="signed variant: differences carry their side")
    c.add_argument("--seed", help="hex seed for the hash functions (default: fixed constant)")
    c.add_argument("--out", "-o", required=True)
    c.set_defaults(func=cmd_create)

    for name in ("insert", "toggle"):
        i = sub.add_parser(name, help="toggle keys into a sketch file (in place)")
        i.add_argument("file")
        i.add_argument("keys", nargs="*", help="decimal or 0x-prefixed hex keys")
        i.add_argument("--keys-from", metavar="PATH", help="read whitespace-separated keys ('-' for stdin)")
        i.add_argument("--delete", action="store_true", help="signed sketches: remove instead of add")
        i.set_defaults(func=cmd_insert)

    d = sub.add_parser("diff", help="combine two sketches into a difference sketch")
    d.add_argument("a")
    d.add_argument("b")
    d.add_argument("--out", "-o", required=True)
    d.set_defaults(func=cmd_diff)

    r = sub.add_parser("report", help="list the keys stored in a sketch")
    r.add_argument("file")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)

    s = sub.add_parser("stats", help="print sketch parameters and fill")
    s.add_argument("file")
    s.set_defaults(func=cmd_stats)

    sv = sub.add_parser("serve", help="answer fetch requests with a sketch file")
    sv.add_argument("--listen", required=True, metavar="HOST:PORT")
    sv.add_argument("--once", action="store_true", help="exit after one request")
    sv.add_argument("--max-requests", type=int, default=None)
    sv.add_argument("file")
    sv.set_defaults(func=cmd_serve)

    f = sub.add_parser("fetch", help="pull a peer's sketch and report the difference")
    f.add_argument("--connect", required=True, metavar="HOST:PORT")
    f.add_argument("--json", action="store_true")
    f.add_argument("--timeout", type=float, default=30.0)
    f.add_argument("file")
    f.set_defaults(func=cmd_fetch)

    b = sub.add_parser("bench", help="Monte-Carlo experiments")
    b.add_argument("experiment", choices=("failure-rate", "residual-tail", "stash-pipeline"))
    b.add_argument("--capacity", "-D", type=int, default=1000)
    b.add_argument("--ratio", default="1.32", help="cells per key (failure-rate, residual-tail)")
    b.add_argument("--stash", "-r", type=int, default=16)
    b.add_argument("--width", "-w", type=int, default=None)
    b.add_argument("--min-failures", type=int, default=None, help="residual-tail: stop after this many failures")
    b.add_argument("--trials", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", help="write per-trial rows and a summary row")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench" and args.width is None:
        args.width = 16 if args.experiment == "stash-pipeline" else 32
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ibltstash: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
