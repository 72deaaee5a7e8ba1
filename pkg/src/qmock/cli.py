"""Command-line front end: list, verify, radial, conjecture, series, report.

Exit codes: 0 when everything selected passes, 1 on any failure or error,
2 for usage and configuration problems (unknown ids, bad flags, a root
outside a case's class).
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import math
import os
import sys
from fractions import Fraction

import mpmath

from . import __version__
from .errors import DSLError, QSeriesError, RootClassMismatch, UnknownIdentity
from .identities import evaluate, load_registry, default_registry, verify_all
from .mocktheta import MOCK_THETA_IDS, build
from .radial import (
    CONJECTURES,
    DEFAULT_BITS,
    RADIAL_CASES,
    PrimitiveRoot,
    admissible_roots,
    conjecture_check,
    get_case,
    radial_probe,
)

ENV_BITS = "QMOCK_PRECISION_BITS"
DEFAULT_ORDER = Fraction(60)
DIGITS = 40


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
# configuration


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


_CONFIG_KEYS = {"order", "precision_bits", "bits", "filter", "json", "parallelism", "radii", "registry"}


def resolve(args) -> argparse.Namespace:
    """Defaults < config file < environment < flags."""
    conf = read_config(args.config) if args.config else {}
    unknown = set(conf) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg = argparse.Namespace()

    bits = conf.get("precision_bits", conf.get("bits"))
    if os.environ.get(ENV_BITS):
        bits = os.environ[ENV_BITS]
    if getattr(args, "bits", None) is not None:
        bits = args.bits
    try:
        cfg.bits = int(bits) if bits is not None else DEFAULT_BITS
    except ValueError:
        raise UsageError(f"precision must be an integer, got {bits!r}") from None
    if cfg.bits < 64:
        raise UsageError("precision must be at least 64 bits")

    order = getattr(args, "order", None) or conf.get("order")
    try:
        cfg.order = Fraction(order) if order is not None else None
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"order must be a rational number, got {order!r}") from None
    if cfg.order is not None and cfg.order <= 0:
        raise UsageError("order must be positive")

    par = getattr(args, "parallelism", None)
    if par is None:
        par = conf.get("parallelism", 1)
    try:
        cfg.parallelism = int(par)
    except ValueError:
        raise UsageError(f"parallelism must be an integer, got {par!r}") from None
    if cfg.parallelism < 1:
        raise UsageError("parallelism must be at least 1")

    cfg.filter = getattr(args, "filter", None) or conf.get("filter")
    cfg.json = getattr(args, "json", None) or conf.get("json")
    cfg.registry = getattr(args, "registry", None) or conf.get("registry")
    radii = getattr(args, "radii", None) or conf.get("radii")
    cfg.radii = None
    if radii:
        try:
            cfg.radii = [Fraction(x.strip()) for x in radii.split(",") if x.strip()]
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse radii {radii!r}") from None
    return cfg


def _registry(cfg):
    if cfg.registry is None:
        return default_registry()
    if not os.path.exists(cfg.registry):
        raise UsageError(f"registry not found: {cfg.registry}")
    return load_registry(cfg.registry)


# ----------------------------------------------------------------------
# output


def dec(x, digits=DIGITS) -> str:
    """Real number as a decimal string with fixed significant digits."""
    if isinstance(x, Fraction):
        ctx = mpmath.MPContext()
        ctx.dps = digits + 10
        x = ctx.mpf(x.numerator) / x.denominator
    return mpmath.nstr(x, digits) if x else "0"


def cdec(z, digits=DIGITS) -> dict:
    return {"re": dec(z.real, digits), "im": dec(z.imag, digits)}


def _emit(cfg, payload, text_lines):
    if cfg.json:
        blob = json.dumps(payload, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
        if cfg.json == "-":
            sys.stdout.write(blob)
        else:
            with open(cfg.json, "w", encoding="utf-8") as fh:
                fh.write(blob)
            for line in text_lines:
                print(line)
    else:
        for line in text_lines:
            print(line)


# ----------------------------------------------------------------------
# commands


def cmd_list(args, cfg) -> int:
    reg = _registry(cfg)
    entries = [{"kind": "identity", "id": r.id, "ref": r.ref, "section": r.section, "mode": r.mode} for r in reg]
    if cfg.registry is None:
        for c in RADIAL_CASES.values():
            entries.append({"kind": "radial", "id": c.id, "ref": c.ref, "section": c.section, "roots": c.root_class_text})
        for c in CONJECTURES.values():
            entries.append({"kind": "conjecture", "id": c.id, "ref": c.ref, "label": "CONJECTURE"})
    if cfg.filter:
        entries = [e for e in entries if fnmatch.fnmatchcase(e["id"], cfg.filter)]
    entries.sort(key=lambda e: e["id"])
    lines = [f"{e['id']:<20} {e['kind']:<10} {e['ref']}" for e in entries]
    _emit(cfg, entries, lines)
    return 0


def cmd_verify(args, cfg) -> int:
    reg = _registry(cfg)
    if args.id:
        for i in args.id:
            if i not in reg:
                raise UnknownIdentity(i)
        selected = sorted(set(args.id))
    elif cfg.filter:
        selected = [i for i in reg.ids() if fnmatch.fnmatchcase(i, cfg.filter)]
    elif args.all:
        selected = reg.ids()
    else:
        raise UsageError("verify needs --all, --id or --filter")
    perturb = ("add", Fraction(args.perturb)) if args.perturb is not None else None
    reports = verify_all(cfg.order, selected, cfg.parallelism, reg, perturb) if selected else []
    runs = [r.to_json(timing=not args.no_timing) for r in reports]
    summary = {s: sum(1 for r in reports if r.status == s) for s in ("pass", "fail", "error")}
    lines = []
    for r in reports:
        line = f"{r.status.upper():<5} {r.id} (order {r.order}, {r.mode})"
        if r.firstMismatch is not None:
            e, a, b = r.firstMismatch
            line += f": first mismatch at q^{e}: lhs {a}, rhs {b}"
        if r.message:
            line += f": {r.message}"
        lines.append(line)
    lines.append(f"{summary['pass']} passed, {summary['fail']} failed, {summary['error']} errors")
    _emit(cfg, {"runs": runs, "summary": summary}, lines)
    return 0 if summary["fail"] == 0 and summary["error"] == 0 else 1


def _probe_json(res) -> dict:
    return {
        "case": res.case,
        "root": {"order": res.root.order, "index": res.root.index},
        "bits": res.bits,
        "radii": [dec(t) for t in res.radii],
        "differences": [cdec(d) if d is not None else None for d in res.differences],
        "target": cdec(res.target),
        "final_residual": dec(res.final_residual, 6) if res.final_residual is not None else None,
        "trend": res.trend,
        "errors": {str(k): v for k, v in sorted(res.errors.items())},
        "cross_check": [{"radius": dec(t), "deviation": dec(d, 6)} for t, d in res.cross_check],
    }


def _probe_lines(res) -> list[str]:
    fr = mpmath.nstr(res.final_residual, 6) if res.final_residual is not None else "n/a"
    return [
        f"{res.case} at exp(2 pi i {res.root.index}/{res.root.order}): target {mpmath.nstr(res.target, 15)}",
        f"  final residual {fr}, trend {res.trend}, {len(res.radii)} radii, {len(res.errors)} errors",
    ]


def cmd_radial(args, cfg) -> int:
    case = get_case(args.case)
    if args.root_order is None:
        raise UsageError("radial needs --root-order")
    try:
        root = PrimitiveRoot(args.root_order, args.root_index)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = radial_probe(case, root, cfg.radii, cfg.bits)
    _emit(cfg, _probe_json(res), _probe_lines(res))
    return 0 if res.converged and not res.errors else 1


def _conj_rows(ident, max_k, bits):
    rows = conjecture_check(ident, max_k, bits)
    data = [
        {
            "root": {"order": r.order, "index": r.index},
            "lhs": cdec(r.lhs),
            "rhs": cdec(r.rhs),
            "residual": dec(r.residual, 6),
            "agree": r.agree,
        }
        for r in rows
    ]
    return rows, data


def cmd_conjecture(args, cfg) -> int:
    if args.id not in CONJECTURES:
        raise UnknownIdentity(args.id)
    if args.max_k < 0:
        raise UsageError("--max-k must be non-negative")
    rows, data = _conj_rows(args.id, args.max_k, cfg.bits)
    ok = all(r.agree for r in rows)
    payload = {"label": "CONJECTURE", "id": args.id, "max_k": args.max_k, "bits": cfg.bits, "rows": data,
               "consistent": ok}
    lines = [f"CONJECTURE {args.id} (numerical evidence only, not a proof)"]
    for r in rows:
        lines.append(f"  order {r.order} index {r.index}: residual {mpmath.nstr(r.residual, 3)} agree={r.agree}")
    lines.append("consistent with the conjecture" if ok else "NOT consistent with the conjecture")
    _emit(cfg, payload, lines)
    return 0 if ok else 1


def cmd_series(args, cfg) -> int:
    order = cfg.order if cfg.order is not None else DEFAULT_ORDER
    if args.name:
        if args.name not in MOCK_THETA_IDS:
            raise UnknownIdentity(args.name)
        s = build(args.name, order)
        label = args.name
    elif args.expr:
        s = evaluate(args.expr, order)
        label = args.expr
    else:
        raise UsageError("series needs --name or --expr")
    if s.denom_hint == 1:
        lo = min(0, math.floor(s.valuation)) if s.terms() else 0
        rows = [(Fraction(e), s.coefficient(e)) for e in range(lo, math.ceil(order))]
    else:
        rows = s.items()
    payload = {"series": label, "order": str(order), "coefficients": [[str(e), str(c)] for e, c in rows]}
    lines = [f"# {label} to O(q^{order})"] + [f"{str(e):>6}  {c}" for e, c in rows]
    _emit(cfg, payload, lines)
    return 0


def cmd_report(args, cfg) -> int:
    reg = _registry(cfg)
    reports = verify_all(cfg.order, None, cfg.parallelism, reg)
    ident = [r.to_json(timing=not args.no_timing) for r in reports]
    ok = all(r.passed for r in reports)
    lines = [f"identities: {sum(r.passed for r in reports)}/{len(reports)} pass"]
    radial = []
    if not args.skip_radial:
        for c in RADIAL_CASES.values():
            root = admissible_roots(c, 12)[0]
            res = radial_probe(c, root, cfg.radii, cfg.bits)
            radial.append(_probe_json(res))
            ok = ok and res.converged and not res.errors
            lines += _probe_lines(res)
    conj = []
    for cid in CONJECTURES:
        rows, data = _conj_rows(cid, args.max_k, cfg.bits)
        conj.append({"id": cid, "rows": data, "consistent": all(r.agree for r in rows)})
        lines.append(f"CONJECTURE {cid}: {'consistent' if conj[-1]['consistent'] else 'NOT consistent'}")
    payload = {"identities": ident, "radial": radial, "CONJECTURE": conj}
    _emit(cfg, payload, lines)
    # conjecture rows are evidence only and do not decide the exit code
    return 0 if ok else 1


# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file merged under the flags")
    common.add_argument("--registry", help="a .qid file or a directory of them")
    common.add_argument("--json", nargs="?", const="-", metavar="PATH", help="write JSON (stdout when no path)")
    common.add_argument("--bits", type=int, help=f"working precision (default {DEFAULT_BITS}, env {ENV_BITS})")
    common.add_argument("--order", help="truncation order (default 60)")
    common.add_argument("--parallelism", type=int)
    common.add_argument("--filter", help="glob on ids")

    p = _Parser(prog="qmock", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", parents=[common], help="registered identities, radial cases and conjectures")

    v = sub.add_parser("verify", parents=[common], help="verify identities exactly")
    v.add_argument("--all", action="store_true")
    v.add_argument("--id", action="append")
    v.add_argument("--perturb", help="add q^K to every right side (negative control)")
    v.add_argument("--no-timing", action="store_true", help="report elapsed_ms as 0")

    r = sub.add_parser("radial", parents=[common], help="probe a radial limit")
    r.add_argument("--case", required=True)
    r.add_argument("--root-order", type=int)
    r.add_argument("--root-index", type=int, default=1)
    r.add_argument("--radii", help="comma separated radii in (0, 1)")

    c = sub.add_parser("conjecture", parents=[common], help="check a conjectured finite-sum equality")
    c.add_argument("--id", required=True)
    c.add_argument("--max-k", type=int, default=4)

    s = sub.add_parser("series", parents=[common], help="print exact coefficients")
    s.add_argument("--name")
    s.add_argument("--expr")

    rep = sub.add_parser("report", parents=[common], help="identities, radial cases and conjectures")
    rep.add_argument("--max-k", type=int, default=4)
    rep.add_argument("--skip-radial", action="store_true")
    rep.add_argument("--no-timing", action="store_true")
    rep.add_argument("--radii", help="comma separated radii in (0, 1)")
    return p


COMMANDS = {
    "list": cmd_list,
    "verify": cmd_verify,
    "radial": cmd_radial,
    "conjecture": cmd_conjecture,
    "series": cmd_series,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnknownIdentity, RootClassMismatch, DSLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QSeriesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
