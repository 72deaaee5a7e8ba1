"""The identity registry and the coefficientwise verifier.

Registry files (``*.qid``) hold stanzas separated by blank lines::

    id: fine
    ref: Fine's identity for the sixth-order pair
    section: sixth-order
    mode: exact              # exact | sampled | cesaro
    cesaro: rhs              # sides regularized in cesaro mode: lhs, rhs or both
    lhs: sum(n=0..inf, ...)
    rhs: ...                 # continuation lines start with whitespace
    tuples:                  # sampled mode only, one binding list per line
      a=-q, b=i*q^2
    max_order: 21            # optional cap for entries printed only to a finite order

Records are immutable once loaded.  Every stored tuple must give formally
valid sums, which is checked at load time.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..errors import DSLError, QSeriesError, UnknownIdentity
from ..series import TruncatedSeries, as_fraction
from .ast import Node, Sum, free_vars, normalize
from .evaluator import Evaluator, _SumFamily
from .parser import parse

__all__ = [
    "IdentityRecord",
    "Registry",
    "RegistryError",
    "UnknownIdentity",
    "VerificationReport",
    "default_registry",
    "load_registry",
    "parse_registry",
    "verify",
    "verify_all",
    "verify_record",
]

DEFAULT_ORDER = Fraction(60)
SECTIONS = ("foundations", "third-order", "fifth-order", "sixth-order", "eighth-order")
_FIELDS = ("id", "ref", "section", "mode", "cesaro", "lhs", "rhs", "tuples", "max_order", "order")


class RegistryError(DSLError):
    pass


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    ref: str
    section: str
    mode: str
    lhs_text: str
    rhs_text: str
    lhs: Node = field(repr=False)
    rhs: Node = field(repr=False)
    cesaro_sides: frozenset = frozenset()
    tuples: tuple = ()  # tuple of tuples of (name, text)
    default_order: Fraction = DEFAULT_ORDER
    max_order: Fraction | None = None

    def bindings(self) -> list[dict]:
        return [dict(t) for t in self.tuples] if self.tuples else [{}]

    def effective_order(self, order=None) -> Fraction:
        o = self.default_order if order is None else as_fraction(order)
        if self.max_order is not None and o > self.max_order:
            return self.max_order
        return o


@dataclass(frozen=True)
class VerificationReport:
    id: str
    mode: str
    order: Fraction
    status: str  # pass | fail | error
    firstMismatch: tuple | None = None  # (exponent, lhs coefficient, rhs coefficient)
    elapsedMillis: int = 0
    parameters: tuple | None = None
    message: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self, timing: bool = True) -> dict:
        fm = None
        if self.firstMismatch is not None:
            e, a, b = self.firstMismatch
            fm = {"exponent": _num(e), "lhs": str(a), "rhs": str(b)}
        out = {
            "id": self.id,
            "mode": self.mode,
            "order": _num(self.order),
            "status": self.status,
            "first_mismatch": fm,
            "elapsed_ms": self.elapsedMillis if timing else 0,
            "tuples": None if self.parameters is None else [dict(t) for t in self.parameters],
        }
        if self.message:
            out["message"] = self.message
        return out


def _num(x):
    x = as_fraction(x)
    return int(x) if x.denominator == 1 else str(x)


class Registry:
    """Immutable, id-ordered collection of identity records."""

    def __init__(self, records: Iterable[IdentityRecord] = ()):
        recs = {}
        for r in records:
            if r.id in recs:
                raise RegistryError(f"duplicate identity id {r.id!r}")
            recs[r.id] = r
        self._records = dict(sorted(recs.items()))

    def __getitem__(self, ident: str) -> IdentityRecord:
        try:
            return self._records[ident]
        except KeyError:
            raise UnknownIdentity(ident) from None

    def __contains__(self, ident) -> bool:
        return ident in self._records

    def __iter__(self):
        return iter(self._records.values())

    def __len__(self) -> int:
        return len(self._records)

    def ids(self) -> list[str]:
        return list(self._records)

    def select(self, selector=None) -> list[IdentityRecord]:
        """All records (None), a section tag or id (str), or an explicit id collection."""
        if selector is None:
            return list(self)
        if isinstance(selector, str):
            if selector in SECTIONS:
                return [r for r in self if r.section == selector]
            return [self[selector]]
        return [self[i] for i in sorted(set(selector))]


# ----------------------------------------------------------------------
# loading


def _stanzas(text: str):
    block, start = [], None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw.strip() == "" or raw.lstrip().startswith("#") and not block:
            if block:
                yield start, block
                block = []
            continue
        if not block:
            start = lineno
        block.append((lineno, raw))
    if block:
        yield start, block


def _fields(block, source: str) -> tuple[dict, dict]:
    out: dict = {}
    where: dict = {}
    key = None
    for lineno, raw in block:
        if raw[:1].isspace():
            if key is None:
                raise RegistryError(f"{source}: continuation line before any field", lineno, 1)
            out[key] += "\n" + raw
            continue
        if raw.lstrip().startswith("#"):
            continue
        name, sep, value = raw.partition(":")
        name = name.strip()
        if not sep or name not in _FIELDS:
            raise RegistryError(f"{source}: unknown field {name!r}", lineno, 1)
        if name in out:
            raise RegistryError(f"{source}: repeated field {name!r}", lineno, 1)
        key = name
        out[name] = value
        where[name] = lineno
    return out, where


def _parse_tuples(text: str, lineno: int, source: str) -> tuple:
    tuples = []
    for k, line in enumerate(text.split("\n")):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        pairs = []
        for part in line.split(","):
            name, sep, value = part.partition("=")
            if not sep:
                raise RegistryError(f"{source}: tuple entries look like name=value", lineno + k, 1)
            pairs.append((name.strip(), value.strip()))
        tuples.append(tuple(sorted(pairs)))
    return tuple(tuples)


def _parse_side(text: str, lineno: int, source: str) -> Node:
    try:
        return normalize(parse(text))
    except DSLError as exc:
        line = None if exc.line is None else lineno + exc.line - 1
        raise type(exc)(f"{source}: {exc.args[0].split(' (line')[0]}", line, exc.column) from None


def parse_registry(text: str, source: str = "<registry>", check: bool = True) -> list[IdentityRecord]:
    records = []
    for start, block in _stanzas(text):
        f, where = _fields(block, source)
        for req in ("id", "lhs", "rhs"):
            if req not in f:
                raise RegistryError(f"{source}: stanza without {req!r}", start, 1)
        ident = f["id"].strip()
        mode = f.get("mode", "exact").split("#", 1)[0].strip()
        if mode not in ("exact", "sampled", "cesaro"):
            raise RegistryError(f"{source}: {ident}: unknown mode {mode!r}", where.get("mode"), 1)
        sides = f.get("cesaro", "").split("#", 1)[0].strip()
        cesaro = frozenset({"lhs", "rhs"} if sides == "both" else ({sides} if sides else ()))
        if mode == "cesaro" and not cesaro:
            raise RegistryError(f"{source}: {ident}: cesaro mode needs a 'cesaro:' side", start, 1)
        if not cesaro <= {"lhs", "rhs"}:
            raise RegistryError(f"{source}: {ident}: bad cesaro side {sides!r}", where.get("cesaro"), 1)
        section = f.get("section", "").strip()
        if section and section not in SECTIONS:
            raise RegistryError(f"{source}: {ident}: unknown section {section!r}", where.get("section"), 1)
        lhs = _parse_side(f["lhs"], where["lhs"], source)
        rhs = _parse_side(f["rhs"], where["rhs"], source)
        tuples = _parse_tuples(f.get("tuples", ""), where.get("tuples", start), source)
        free = free_vars(lhs) | free_vars(rhs)
        if mode == "sampled" and len(tuples) < 3:
            raise RegistryError(f"{source}: {ident}: sampled mode needs at least 3 tuples", start, 1)
        for t in tuples:
            if {k for k, _ in t} != free:
                raise RegistryError(
                    f"{source}: {ident}: tuple binds {sorted(k for k, _ in t)}, expected {sorted(free)}",
                    where.get("tuples"),
                    1,
                )
        if free and not tuples:
            raise RegistryError(f"{source}: {ident}: free variables {sorted(free)} need tuples", start, 1)
        order = f.get("order", "").strip()
        cap = f.get("max_order", "").strip()
        rec = IdentityRecord(
            id=ident,
            ref=f.get("ref", "").strip(),
            section=section,
            mode=mode,
            lhs_text=f["lhs"].strip(),
            rhs_text=f["rhs"].strip(),
            lhs=lhs,
            rhs=rhs,
            cesaro_sides=cesaro,
            tuples=tuples,
            default_order=Fraction(order) if order else DEFAULT_ORDER,
            max_order=Fraction(cap) if cap else None,
        )
        if check:
            check_record(rec)
        records.append(rec)
    return records


_CHECKED: set = set()


def _key(rec: IdentityRecord):
    return (rec.id, rec.lhs_text, rec.rhs_text, rec.tuples, rec.cesaro_sides)


def check_record(rec: IdentityRecord) -> None:
    """Every stored tuple must make each outermost sum formally valid (or flagged Cesàro)."""
    if _key(rec) in _CHECKED:
        return
    for b in rec.bindings():
        ev = Evaluator(b)
        for side, node in (("lhs", rec.lhs), ("rhs", rec.rhs)):
            if side in rec.cesaro_sides:
                continue
            for s in _outer_sums(node):
                for lo, hi in _halves(s):
                    v = _SumFamily(ev, s, {}, lo, hi).validity()
                    if not v.ok:
                        shown = ", ".join(f"{k}={x}" for k, x in sorted(b.items())) or "no parameters"
                        raise RegistryError(
                            f"{rec.id}: {side} sum over {s.var} is not formally valid at {shown} "
                            f"(direction {v.failingDirection})"
                        )
    _CHECKED.add(_key(rec))


def _outer_sums(node: Node):
    if isinstance(node, Sum):
        yield node
        return
    for child in _children(node):
        yield from _outer_sums(child)


def _children(node: Node):
    for name in getattr(node, "__dataclass_fields__", {}):
        v = getattr(node, name)
        if isinstance(v, Node):
            yield v
        elif isinstance(v, tuple):
            yield from (x for x in v if isinstance(x, Node))


def _halves(s: Sum):
    out = []
    if s.hi is None or s.hi >= 0:
        out.append((max(s.lo, 0) if s.lo is not None else 0, s.hi))
    if s.lo is None or s.lo < 0:
        out.append((s.lo, min(s.hi, -1) if s.hi is not None else -1))
    return out


def load_registry(path=None, check: bool | None = None) -> Registry:
    """The shipped registry, or the ``.qid`` file / directory at ``path``.

    User files are checked for formal validity while loading.  The shipped
    files are checked lazily, each record just before its first
    verification, unless ``check`` is true.
    """
    records = []
    if path is None:
        data = resources.files("qmock.identities") / "data"
        for entry in sorted(data.iterdir(), key=lambda p: p.name):
            if entry.name.endswith(".qid"):
                records += parse_registry(entry.read_text(encoding="utf-8"), entry.name, check=bool(check))
        return Registry(records)
    p = Path(path)
    files = sorted(p.glob("*.qid")) if p.is_dir() else [p]
    for f in files:
        records += parse_registry(f.read_text(encoding="utf-8"), str(f), check=check is not False)
    return Registry(records)


_DEFAULT: Registry | None = None


def default_registry() -> Registry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_registry()
    return _DEFAULT


# ----------------------------------------------------------------------
# verification


def _perturb(rhs: TruncatedSeries, perturb, order) -> TruncatedSeries:
    if perturb is None:
        return rhs
    kind, k = perturb
    bump = TruncatedSeries.monomial(1, k, order)
    if kind == "add":
        return (rhs + bump).truncate(order)
    if kind == "mul":
        return (rhs * (TruncatedSeries.constant(1) + bump)).truncate(order)
    raise ValueError(f"unknown perturbation {kind!r}")


def verify_record(rec: IdentityRecord, order=None, perturb=None) -> VerificationReport:
    """Compare both sides of ``rec`` exactly below ``order`` at every stored tuple.

    ``perturb`` is ``("add", k)`` for rhs + q^k or ``("mul", k)`` for
    rhs * (1 + q^k); it exists for negative controls.
    """
    order = rec.effective_order(order)
    t0 = time.perf_counter()
    params = rec.tuples if rec.tuples else None
    mismatch = None
    try:
        check_record(rec)
        for b in rec.bindings():
            lhs = Evaluator(b, cesaro="lhs" in rec.cesaro_sides).evaluate(rec.lhs, order)
            rhs = Evaluator(b, cesaro="rhs" in rec.cesaro_sides).evaluate(rec.rhs, order)
            rhs = _perturb(rhs, perturb, order)
            mismatch = lhs.first_mismatch(rhs, order)
            if mismatch is not None:
                if params is not None:
                    params = (tuple(sorted(b.items())),)
                break
    except (QSeriesError, ZeroDivisionError, ValueError, ArithmeticError) as exc:
        return VerificationReport(
            rec.id, rec.mode, order, "error", None, _ms(t0), params, f"{type(exc).__name__}: {exc}"
        )
    status = "pass" if mismatch is None else "fail"
    return VerificationReport(rec.id, rec.mode, order, status, mismatch, _ms(t0), params)


def _ms(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000))


def verify(ident: str, order=None, perturb=None, registry: Registry | None = None) -> VerificationReport:
    reg = registry if registry is not None else default_registry()
    return verify_record(reg[ident], order, perturb)


def _job(args):
    rec, order, perturb = args
    try:
        return verify_record(rec, order, perturb)
    except Exception as exc:  # a batch never aborts on one entry
        return VerificationReport(rec.id, rec.mode, rec.effective_order(order), "error", message=repr(exc))


def verify_all(
    order=None,
    selector=None,
    parallelism: int | None = None,
    registry: Registry | None = None,
    perturb=None,
) -> list[VerificationReport]:
    """One report per selected record, sorted by id."""
    reg = registry if registry is not None else default_registry()
    recs = reg.select(selector)
    jobs = [(r, order, perturb) for r in recs]
    workers = parallelism if parallelism is not None else min(len(jobs), os.cpu_count() or 1)
    if workers <= 1 or len(jobs) <= 1:
        reports = [_job(j) for j in jobs]
    else:
        # longest jobs tend to be the sampled ones; submission order does not affect results
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_job, jobs, chunksize=1))
    return sorted(reports, key=lambda r: r.id)
