"""Command line front end.

Declarative documents describe frames, families, columns, creatures, and
condition prefixes; subcommands compute norms, print the parameter growth
table, run registered verification suites, and apply the condition
operations.  Documents are line-oriented: ``[section]`` headers followed by
``key = token token ...`` entries, integers and ``num/den`` rationals only,
``#`` comments.  Unknown keys are rejected.  Graded cell contents are coded
as ordinals into the family's sorted possibility list so every value is an
integer.

Exit codes: 0 pass, 1 counterexample found, 2 usage or parse error,
3 precision/budget exhausted.
"""

from __future__ import annotations

import argparse
import itertools
import random
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from multiprocessing import Pool

from .atoms import Atom, atom_norm, split_index_sets
from .compound import (COLUMN, HITTING, VALUESET, CompoundCreature, Index,
                       compound_norm, glue, half, restrict, stacked_interval,
                       union_creature, validate_creature)
from .counting import (binom_quotient, binomial, log_norm, nor_divide,
                       nor_intersect, overlap_parameters, overlap_witness)
from .exactnum import (BudgetExceeded, DomainError, approx, as_fraction,
                       bounds, geq, leq, nmin, nsub, nv_str, rat, scale)
from .frame import (PER_INDEX, PER_SUBLEVEL, ConditionPrefix,
                    InsufficientPrefix, PreconditionError, ToyFrame,
                    cascade_table, curlywedge, decode, encode, format_table,
                    glue_condition, half_condition, iota, leq_check,
                    poss_count, poss_set, unhalve, validate_condition, wedge)
from .sacks import (Column, FiniteTree, column_cube, fat_nodes,
                    homogenize_columns, measure_hypothesis_holds, nor_sacks,
                    ramsey_bound, splitting_size)
from .subatoms import (Subatom, check_bigness, counting_family,
                       hitting_family, poss_sort_key, valueset_family)

EXIT_PASS = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3


# ---------------------------------------------------------------------------
# Spec documents
# ---------------------------------------------------------------------------

class SpecError(ValueError):
    """Malformed or out-of-contract spec document."""


_MISSING = object()
_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.:\-]*\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")
_FRAC_RE = re.compile(r"(-?[0-9]+)/([0-9]+)\Z")
_SECTION_RE = re.compile(r"\[([A-Za-z_][A-Za-z0-9_\-]*)\]\Z")


@dataclass
class Section:
    name: str
    entries: list = field(default_factory=list)   # ordered (key, value-tuple)

    def add(self, key, *values):
        self.entries.append((key, tuple(values)))
        return self

    def keys(self):
        return [k for k, _ in self.entries]

    def all(self, key):
        return [v for k, v in self.entries if k == key]

    def get(self, key, default=_MISSING):
        hits = self.all(key)
        if not hits:
            if default is _MISSING:
                raise SpecError(f"[{self.name}] is missing '{key}'")
            return default
        if len(hits) > 1:
            raise SpecError(f"[{self.name}] repeats '{key}'")
        return hits[0]

    def ints(self, key, default=_MISSING):
        vals = self.get(key, default)
        if vals is default and default is not _MISSING:
            return vals
        if not all(isinstance(v, int) for v in vals):
            raise SpecError(f"[{self.name}] '{key}' takes integers only")
        return list(vals)

    def one_int(self, key, default=_MISSING):
        vals = self.get(key, default if default is _MISSING else (default,))
        if len(vals) != 1 or not isinstance(vals[0], int):
            raise SpecError(f"[{self.name}] '{key}' takes a single integer")
        return vals[0]

    def one_word(self, key, default=_MISSING):
        vals = self.get(key, default if default is _MISSING else (default,))
        if len(vals) != 1 or not isinstance(vals[0], str):
            raise SpecError(f"[{self.name}] '{key}' takes a single word")
        return vals[0]


@dataclass
class SpecDocument:
    sections: list

    def first(self, name):
        for s in self.sections:
            if s.name == name:
                return s
        return None

    def all(self, name):
        return [s for s in self.sections if s.name == name]

    def require(self, name) -> Section:
        s = self.first(name)
        if s is None:
            raise SpecError(f"document has no [{name}] section")
        return s


def _parse_token(tok: str):
    if _INT_RE.match(tok):
        return int(tok)
    m = _FRAC_RE.match(tok)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise SpecError(f"zero denominator in '{tok}'")
        return Fraction(int(m.group(1)), den)
    if re.match(r"-?[0-9.]+(e-?[0-9]+)?\Z", tok, re.IGNORECASE):
        raise SpecError(f"'{tok}' is not an integer; floats are not "
                        "accepted, write rationals as num/den")
    if not _KEY_RE.match(tok):
        raise SpecError(f"unreadable token '{tok}'")
    return tok


def parse_document(text: str) -> SpecDocument:
    sections: list[Section] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            sections.append(Section(m.group(1)))
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = values'")
        if not sections:
            raise SpecError(f"line {lineno}: entry before any [section]")
        key, _, rest = line.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise SpecError(f"line {lineno}: bad key '{key}'")
        sections[-1].add(key, *(_parse_token(t) for t in rest.split()))
    if not sections:
        raise SpecError("empty document")
    return SpecDocument(sections)


def _token_str(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, str) and _KEY_RE.match(v):
        return v
    raise SpecError(f"value {v!r} has no document form")


def emit_document(doc: SpecDocument) -> str:
    out = []
    for sec in doc.sections:
        out.append(f"[{sec.name}]")
        for key, vals in sec.entries:
            out.append(f"{key} = " + " ".join(_token_str(v) for v in vals))
        out.append("")
    return "\n".join(out)


def _expect_keys(sec: Section, fixed, prefixes=()):
    for key in sec.keys():
        if key in fixed or any(key.startswith(p) for p in prefixes):
            continue
        raise SpecError(f"[{sec.name}] has unknown key '{key}'")


def _expect_sections(doc: SpecDocument, allowed):
    for sec in doc.sections:
        if sec.name not in allowed:
            raise SpecError(f"unknown section [{sec.name}]")


# ---------------------------------------------------------------------------
# Object builders and emitters
# ---------------------------------------------------------------------------

_FAMILY_MAKERS = {"valueset": valueset_family, "hitting": hitting_family,
                  "counting": counting_family}
_KINDS = (COLUMN, VALUESET, HITTING, "counting")


def _index_from(tok) -> Index:
    if not isinstance(tok, str) or ":" not in tok:
        raise SpecError(f"index token '{tok}' is not kind:name")
    kind, _, name = tok.partition(":")
    if kind not in _KINDS or not _INT_RE.match(name):
        raise SpecError(f"index token '{tok}' is not kind:name")
    return Index(kind, int(name))


def _index_str(x: Index) -> str:
    return f"{x.kind}:{x.name}"


def _make_family(kind: str, size: int, b: int, mode: str):
    maker = _FAMILY_MAKERS.get(kind)
    if maker is None:
        raise SpecError(f"unknown family kind '{kind}'")
    return maker(range(size), b, enforce_largeness=(mode == "exact"))


def _family_order(fam):
    return sorted(fam.poss, key=poss_sort_key)


def _members_from(fam, ordinals):
    order = _family_order(fam)
    out = []
    for i in ordinals:
        if not isinstance(i, int) or not 0 <= i < len(order):
            raise SpecError(f"member ordinal {i} outside 0..{len(order) - 1}")
        out.append(order[i])
    return frozenset(out)


def _ordinals_of(fam, members):
    pos = {m: i for i, m in enumerate(_family_order(fam))}
    return sorted(pos[m] for m in members)


def frame_from_doc(doc: SpecDocument, mode: str = "toy") -> ToyFrame:
    sec = doc.require("frame")
    _expect_keys(sec, {"widths", "caps", "colors", "bits", "sublevels"},
                 prefixes=("family.",))
    fams = {}
    for key, vals in sec.entries:
        if not key.startswith("family."):
            continue
        kind = key[len("family."):]
        if len(vals) != 2 or not all(isinstance(v, int) for v in vals):
            raise SpecError(f"family.{kind} takes 'index_size b'")
        fams[kind] = _make_family(kind, vals[0], vals[1], mode)
    try:
        return ToyFrame(widths=sec.ints("widths"),
                        poss_caps=sec.ints("caps"),
                        colors=sec.ints("colors"),
                        bits=sec.ints("bits"),
                        sublevel_counts=sec.ints("sublevels"),
                        families=fams)
    except DomainError as e:
        raise SpecError(f"bad frame: {e}") from e


def column_from_section(sec: Section) -> tuple[Column, int, int, int | None]:
    _expect_keys(sec, {"interval", "branches", "colors", "m", "width"})
    interval = tuple(sec.ints("interval"))
    branches = frozenset(sec.ints("branches"))
    colors = sec.one_int("colors", 2)
    m = sec.one_int("m", 1)
    width = sec.get("width", None)
    width = width[0] if width else None
    return Column(interval, branches), colors, m, width


_CELL_KEY_RE = re.compile(
    r"cell\.([a-z]+):(-?[0-9]+)\.([0-9]+)\.([0-9]+)\Z")


def _cell_key(key: str):
    m = _CELL_KEY_RE.match(key)
    if not m or m.group(1) not in _KINDS:
        raise SpecError(f"bad cell key '{key}', want cell.kind:name.h.j")
    return Index(m.group(1), int(m.group(2))), int(m.group(3)), int(m.group(4))


def block_from_section(sec: Section, frame) -> CompoundCreature:
    _expect_keys(sec, {"span", "supp", "halving"},
                 prefixes=("column.", "cell."))
    span = sec.ints("span")
    if len(span) != 2:
        raise SpecError(f"[{sec.name}] span takes two levels")
    a, b = span
    supp = tuple(_index_from(t) for t in sec.get("supp"))
    halving = tuple(Fraction(v) for v in sec.get("halving"))
    cols, grid = {}, {}
    for key, vals in sec.entries:
        if key.startswith("column."):
            name = key[len("column."):]
            if not _INT_RE.match(name):
                raise SpecError(f"bad column key '{key}'")
            cols[Index(COLUMN, int(name))] = Column(
                stacked_interval(frame, a, b),
                frozenset(v for v in vals if isinstance(v, int)))
        elif key.startswith("cell."):
            x, h, j = _cell_key(key)
            fam = frame.family(x, h, j)
            grid[(x, h, j)] = Subatom(fam, _members_from(fam, vals))
    try:
        return CompoundCreature(a, b, supp, cols, grid, halving)
    except DomainError as e:
        raise SpecError(f"bad creature: {e}") from e


def block_section(c: CompoundCreature, frame, name="block") -> Section:
    sec = Section(name)
    sec.add("span", c.m_dn, c.m_up)
    sec.add("supp", *(_index_str(x) for x in c.supp))
    sec.add("halving", *(Fraction(d) for d in c.halving))
    for x in sorted(c.columns, key=lambda x: x.name):
        sec.add(f"column.{x.name}", *sorted(c.columns[x].branches))
    for (x, h, j) in sorted(c.grid, key=lambda k: (k[0].kind, k[0].name,
                                                   k[1], k[2])):
        fam = frame.family(x, h, j)
        sec.add(f"cell.{x.kind}:{x.name}.{h}.{j}",
                *_ordinals_of(fam, c.grid[(x, h, j)].poss))
    return sec


_TRUNK_COL_RE = re.compile(r"column\.(-?[0-9]+)\.([0-9]+)\Z")
_TRUNK_CELL_RE = re.compile(
    r"cell\.([a-z]+):(-?[0-9]+)\.([0-9]+)\.([0-9]+)\Z")


def trunk_from_section(sec: Section, frame) -> dict:
    trunk = {}
    for key, vals in sec.entries:
        m = _TRUNK_COL_RE.match(key)
        if m:
            if len(vals) != 1 or not isinstance(vals[0], int):
                raise SpecError(f"trunk '{key}' takes one branch mask")
            trunk[(Index(COLUMN, int(m.group(1))), int(m.group(2)))] = vals[0]
            continue
        m = _TRUNK_CELL_RE.match(key)
        if m and m.group(1) in _KINDS:
            x = Index(m.group(1), int(m.group(2)))
            h, j = int(m.group(3)), int(m.group(4))
            fam = frame.family(x, h, j)
            (member,) = _members_from(fam, vals) or (None,)
            if member is None or len(vals) != 1:
                raise SpecError(f"trunk '{key}' takes one member ordinal")
            trunk[(x, (h, j))] = member
            continue
        raise SpecError(f"[trunk] has unknown key '{key}'")
    return trunk


def trunk_section(trunk: dict, frame) -> Section:
    sec = Section("trunk")

    def rank(item):
        (x, at), _ = item
        h, j = (at, -1) if isinstance(at, int) else at
        return (h, j, x.kind, x.name)

    for (x, at), value in sorted(trunk.items(), key=rank):
        if isinstance(at, int):
            sec.add(f"column.{x.name}.{at}", value)
        else:
            h, j = at
            fam = frame.family(x, h, j)
            sec.add(f"cell.{x.kind}:{x.name}.{h}.{j}",
                    *_ordinals_of(fam, [value]))
    return sec


def condition_from_doc(doc: SpecDocument, frame) -> ConditionPrefix:
    cond = doc.require("condition")
    _expect_keys(cond, {"w"})
    w = tuple(cond.ints("w"))
    blocks = tuple(block_from_section(sec, frame) for sec in doc.all("block"))
    tsec = doc.first("trunk")
    trunk = trunk_from_section(tsec, frame) if tsec else {}
    try:
        return ConditionPrefix(w, blocks, trunk)
    except DomainError as e:
        raise SpecError(f"bad condition: {e}") from e


def condition_sections(p: ConditionPrefix, frame) -> list[Section]:
    cond = Section("condition").add("w", *p.w)
    out = [cond]
    out += [block_section(c, frame) for c in p.creatures]
    out.append(trunk_section(p.trunk, frame))
    return out


def condition_doc(p: ConditionPrefix, frame, frame_sec: Section) -> str:
    return emit_document(SpecDocument([frame_sec] + condition_sections(p, frame)))


# ---------------------------------------------------------------------------
# Shared output helpers
# ---------------------------------------------------------------------------

def _dec(f: Fraction) -> str:
    try:
        return f"{float(f):.12g}"
    except OverflowError:
        return f"{f.numerator}/{f.denominator}"


def _show_norm(label: str, value, precision: int, out) -> None:
    lo, hi = bounds(value, precision)
    print(f"{label} = {nv_str(value)}  in [{_dec(lo)}, {_dec(hi)}]", file=out)


def _load_doc(path: str) -> SpecDocument:
    if path == "-":
        return parse_document(sys.stdin.read())
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_document(fh.read())
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e}") from e


# ---------------------------------------------------------------------------
# norm
# ---------------------------------------------------------------------------

def cmd_norm(ns, out=sys.stdout) -> int:
    doc = _load_doc(ns.path)
    _expect_sections(doc, {"frame", "column", "family", "subatom", "atom",
                           "creature", "block"})
    if doc.first("column"):
        col, colors, m, width = column_from_section(doc.require("column"))
        width_fn = (lambda _: width) if width else (lambda m: m)
        print(f"splittingSize = {splitting_size(col)}", file=out)
        print(f"norSacks = {nor_sacks(col, colors, m, width_fn)}", file=out)
        return EXIT_PASS
    if doc.first("subatom"):
        fsec = doc.require("family")
        _expect_keys(fsec, {"kind", "index", "base"})
        fam = _make_family(fsec.one_word("kind"), fsec.one_int("index"),
                           fsec.one_int("base"), ns.mode)
        ssec = doc.require("subatom")
        _expect_keys(ssec, {"members"})
        poss = _members_from(fam, ssec.get("members"))
        _show_norm("nor", fam.nor_of(poss), ns.precision, out)
        return EXIT_PASS
    if doc.first("atom"):
        sec = doc.require("atom")
        _expect_keys(sec, {"level", "family", "slot"})
        kind, size, b = sec.get("family")
        fam = _make_family(kind, size, b, ns.mode)
        parts = tuple(Subatom(fam, _members_from(fam, vals))
                      for vals in sec.all("slot"))
        value, witness = atom_norm(Atom(sec.one_int("level"), parts),
                                   budget=ns.budget)
        _show_norm("norAtom", value, ns.precision, out)
        print(f"witness = {len(witness)} of {len(parts)} slots", file=out)
        return EXIT_PASS
    sec = doc.first("creature") or doc.first("block")
    if sec is None:
        raise SpecError("norm wants a [column], [subatom], [atom], "
                        "or [creature] section")
    frame = frame_from_doc(doc, ns.mode)
    c = block_from_section(sec, frame)
    try:
        validate_creature(c, frame)
    except DomainError as e:
        raise SpecError(f"invalid creature: {e}") from e
    n = compound_norm(c, frame, budget=ns.budget)
    _show_norm("width", n.width, ns.precision, out)
    for x in sorted(n.per_column, key=lambda x: x.name):
        print(f"norSacks[{_index_str(x)}] = {n.per_column[x]}", file=out)
    for x in sorted(n.per_row, key=lambda x: (x.kind, x.name)):
        _show_norm(f"norRow[{_index_str(x)}]", n.per_row[x], ns.precision, out)
    for h in sorted(n.per_level):
        _show_norm(f"norLevel[{h}]", n.per_level[h], ns.precision, out)
    _show_norm("total", n.total, ns.precision, out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# cascade
# ---------------------------------------------------------------------------

def cmd_cascade(ns, out=sys.stdout) -> int:
    if ns.mode != "exact":
        raise SpecError("cascade reports the exact-mode growth table; "
                        "run with --mode exact")
    table = cascade_table(up_to=(ns.up_to[0], ns.up_to[1]))
    print(format_table(table), file=out)
    if table.partial:
        print("warning: growth table is partial past the descriptor range",
              file=sys.stderr)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Condition subcommands: glue, half, unhalve, poss, leq
# ---------------------------------------------------------------------------

def _condition_and_frame(path: str, mode: str):
    doc = _load_doc(path)
    _expect_sections(doc, {"frame", "condition", "block", "trunk"})
    frame = frame_from_doc(doc, mode)
    return condition_from_doc(doc, frame), frame, doc.require("frame")


def cmd_glue(ns, out=sys.stdout) -> int:
    p, frame, fsec = _condition_and_frame(ns.path, ns.mode)
    q = glue_condition(p, tuple(ns.at), frame)
    print(condition_doc(q, frame, fsec), file=out, end="")
    return EXIT_PASS


def cmd_half(ns, out=sys.stdout) -> int:
    p, frame, fsec = _condition_and_frame(ns.path, ns.mode)
    q = half_condition(p, frame, ns.at)
    print(condition_doc(q, frame, fsec), file=out, end="")
    return EXIT_PASS


def cmd_unhalve(ns, out=sys.stdout) -> int:
    q, frame, fsec = _condition_and_frame(ns.path, ns.mode)
    rdoc = _load_doc(ns.strengthening)
    r = condition_from_doc(rdoc, frame)
    m = _parse_token(ns.norm)
    if not isinstance(m, (int, Fraction)):
        raise SpecError("--norm takes an integer or num/den rational")
    s = unhalve(q, ns.at, r, frame, Fraction(m))
    print(condition_doc(s, frame, fsec), file=out, end="")
    return EXIT_PASS


def cmd_poss(ns, out=sys.stdout) -> int:
    p, frame, fsec = _condition_and_frame(ns.path, ns.mode)
    u = (ns.at[0], ns.at[1])
    variant = PER_SUBLEVEL if ns.variant == "per-sublevel" else PER_INDEX
    count = poss_count(p, frame, u, variant)
    print(f"poss = {count}", file=out)
    if ns.list:
        ps = poss_set(p, frame, u, variant, budget=ns.budget)
        for eta in ps.entries():
            print("", file=out)
            print(emit_document(SpecDocument(
                [_extension_section(eta, frame)])), file=out, end="")
    return EXIT_PASS


def _extension_section(eta: dict, frame) -> Section:
    sec = trunk_section(eta, frame)
    sec.name = "extension"
    return sec


def cmd_leq(ns, out=sys.stdout) -> int:
    q, frame, _ = _condition_and_frame(ns.candidate, ns.mode)
    p, _, _ = _condition_and_frame(ns.reference, ns.mode)
    verdict = leq_check(q, p, frame)
    if verdict.ok:
        print("leq: yes", file=out)
        return EXIT_PASS
    print("leq: no", file=out)
    for clause in verdict.failures:
        print(f"fails: {clause}", file=out)
    return EXIT_COUNTEREXAMPLE


# ---------------------------------------------------------------------------
# Verification suites: shared generators
# ---------------------------------------------------------------------------

_VS4 = valueset_family(range(4), 2, enforce_largeness=False)
_HT4 = hitting_family(range(4), 3, enforce_largeness=False)
_C0 = Index(COLUMN, 0)
_C3 = Index(COLUMN, 3)
_V1, _V4 = Index(VALUESET, 1), Index(VALUESET, 4)
_H2, _H3, _H5 = Index(HITTING, 2), Index(HITTING, 3), Index(HITTING, 5)
_SUPP = (_C0, _V1, _H2)
_MASTER = (_C0, _V1, _H2, _H3, _V4)


class _GridFrame:
    """Constant-parameter frame for generated verification instances."""

    def __init__(self, n_j=9, mw=1, mp=1, colors_=2, bits=2, base=3):
        self.n_j, self.mw, self.mp = n_j, mw, mp
        self.B, self.bits, self.base = colors_, bits, base

    def maxwidth(self, m):
        return self.mw

    def maxposs_below(self, m):
        return self.mp

    def colors(self, m):
        return self.B

    def sacks_interval(self, h):
        lo = (h - self.base) * self.bits
        return tuple(range(lo, lo + self.bits))

    def sublevels(self, h):
        return self.n_j

    def family(self, x, h, j):
        return _VS4 if x.kind == VALUESET else _HT4


def _least_singleton(fam):
    return Subatom(fam, frozenset({min(fam.poss, key=poss_sort_key)}))


def _creature(frame, m_dn, m_up, supp, bigs=None, d=0):
    bigs = bigs or {}
    cols, grid = {}, {}
    for x in supp:
        if x.kind == COLUMN:
            cols[x] = column_cube(stacked_interval(frame, m_dn, m_up))
            continue
        fam = frame.family(x, None, None)
        big, small = fam.full(), _least_singleton(fam)
        mine = bigs.get(x, {})
        for h in range(m_dn, m_up):
            wide = mine.get(h, ())
            for j in range(frame.sublevels(h)):
                grid[(x, h, j)] = big if j in wide else small
    if isinstance(d, (int, Fraction)):
        halving = tuple(Fraction(d) for _ in range(m_dn, m_up))
    else:
        halving = tuple(Fraction(v) for v in d)
    return CompoundCreature(m_dn, m_up, tuple(supp), cols, grid, halving)


def _random_creature(rng, frame, m_dn, m_up, supp, d=0):
    rows = [x for x in supp if x.kind != COLUMN]
    bigs = {x: {} for x in rows}
    for h in range(m_dn, m_up):
        n_j = frame.sublevels(h)
        marks = sorted(rng.sample(range(n_j + 1), 2 * len(rows)))
        for x, lo, hi in zip(rows, marks[::2], marks[1::2]):
            if hi > lo:
                bigs[x][h] = range(lo, hi)
    return _creature(frame, m_dn, m_up, supp, bigs, d=d)


def _random_stack(rng, frame, parts):
    supp = rng.sample(_MASTER, rng.randint(1, 3))
    out = []
    for i in range(parts):
        base = frame.base + i
        d = Fraction(rng.randrange(4), 2)
        out.append(_random_creature(rng, frame, base, base + 1,
                                    tuple(supp), d=d))
        for x in _MASTER:
            if x not in supp and rng.random() < 0.4:
                supp.append(x)
    return out


# Condition-prefix toys: frames anchored at level 0, one graded row wide
# per sublevel.

_CVS = valueset_family(range(2), 2, enforce_largeness=False)
_CHT = hitting_family(range(2), 2, enforce_largeness=False)
_RICH_VS = valueset_family(range(5), 2, enforce_largeness=False)
_CV1, _CH2 = Index(VALUESET, 1), Index(HITTING, 2)
_CSUPP = (_C0, _CV1, _CH2)
_RICH_N_J = (1, 324, 2916, 26244)
_RICH_WIDE = {1: 243, 2: 2187, 3: 19683}


def _cond_frame(height, n_j=(1, 2, 2, 2), caps=None, vs=_CVS, ht=_CHT):
    return ToyFrame(widths=[0] + [1] * (height - 1),
                    poss_caps=list(caps or [1] * height),
                    colors=[2] * height,
                    bits=[2] * height,
                    sublevel_counts=list(n_j[:height]),
                    families={"valueset": vs, "hitting": ht})


def _cond_block(frame, a, b, supp=_CSUPP, wide_of=None, d=0):
    if wide_of is None:
        def wide_of(x, h, j):
            return (x.kind == VALUESET) == (j % 2 == 0)
    cols = {x: column_cube(stacked_interval(frame, a, b))
            for x in supp if x.kind == COLUMN}
    grid = {}
    for x in supp:
        if x.kind == COLUMN:
            continue
        for h in range(a, b):
            for j in range(frame.sublevels(h)):
                fam = frame.family(x, h, j)
                grid[(x, h, j)] = (fam.full() if wide_of(x, h, j)
                                  else _least_singleton(fam))
    if isinstance(d, (int, Fraction)):
        d = [Fraction(d)] * (b - a)
    return CompoundCreature(a, b, tuple(supp), cols, grid, tuple(d))


def _cond_trunk(frame, w0, supp=_CSUPP):
    t = {}
    for x in supp:
        for h in range(w0):
            if x.kind == COLUMN:
                t[(x, h)] = 0
                continue
            for j in range(frame.sublevels(h)):
                fam = frame.family(x, h, j)
                t[(x, (h, j))] = min(fam.poss, key=poss_sort_key)
    return t


def _make_condition(frame, w, supp=_CSUPP, wide_of=None):
    blocks = tuple(_cond_block(frame, a, b, supp, wide_of)
                   for a, b in zip(w, w[1:]))
    return ConditionPrefix(tuple(w), blocks, _cond_trunk(frame, w[0], supp))


def _shrink_cell(p, i, key, size):
    c = p.creatures[i]
    grid = dict(c.grid)
    vals = sorted(grid[key].poss, key=poss_sort_key)[:size]
    grid[key] = Subatom(grid[key].family, frozenset(vals))
    block = CompoundCreature(c.m_dn, c.m_up, c.supp, c.columns, grid,
                             c.halving)
    return ConditionPrefix(p.w, p.creatures[:i] + (block,)
                           + p.creatures[i + 1:], dict(p.trunk))


def _random_strengthen(rng, p, frame, budget=1 << 14):
    ops = ["curly", "halving", "shrink", "thin", "glue", "wedge"]
    for _ in range(8):
        op = rng.choice(ops)
        try:
            if op == "curly":
                m = rng.choice(p.w[:-1])
                u = (m, rng.randrange(-1, frame.sublevels(m)))
                if poss_count(p, frame, u) > budget:
                    continue
                etas = list(poss_set(p, frame, u, budget=budget).entries())
                return curlywedge(p, frame, rng.choice(etas), u)
            if op == "wedge" and len(p.w) > 2:
                ell = rng.choice(p.w[1:-1])
                if poss_count(p, frame, (ell, -1)) > budget:
                    continue
                etas = list(poss_set(p, frame, (ell, -1),
                                     budget=budget).entries())
                return wedge(p, frame, rng.choice(etas), ell)
            if op == "halving":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                k = rng.choice(list(c.levels()))
                halving = list(c.halving)
                halving[k - c.m_dn] += Fraction(1, 1 << rng.randrange(1, 4))
                block = CompoundCreature(c.m_dn, c.m_up, c.supp, c.columns,
                                         c.grid, tuple(halving))
                return ConditionPrefix(p.w, p.creatures[:i] + (block,)
                                       + p.creatures[i + 1:], dict(p.trunk))
            if op == "shrink":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                wide = [k for k, sub in c.grid.items() if len(sub.poss) > 1]
                if not wide:
                    continue
                key = rng.choice(sorted(wide, key=repr))
                size = rng.randrange(1, len(c.grid[key].poss))
                return _shrink_cell(p, i, key, size)
            if op == "thin":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                if not c.column_indices():
                    continue
                x = rng.choice(c.column_indices())
                branches = sorted(c.columns[x].branches)
                if len(branches) < 2:
                    continue
                keep = rng.sample(branches, rng.randrange(1, len(branches)))
                cols = dict(c.columns)
                cols[x] = Column(c.columns[x].interval, frozenset(keep))
                block = CompoundCreature(c.m_dn, c.m_up, c.supp, cols,
                                         c.grid, c.halving)
                return ConditionPrefix(p.w, p.creatures[:i] + (block,)
                                       + p.creatures[i + 1:], dict(p.trunk))
            if op == "glue" and len(p.w) > 2:
                drop = rng.choice(p.w[1:-1])
                return glue_condition(p, tuple(a for a in p.w if a != drop),
                                      frame)
        except ValueError:
            continue
    return p


@lru_cache(maxsize=4)
def _rich_frame(height):
    return _cond_frame(height, n_j=_RICH_N_J, vs=_RICH_VS, ht=_CHT)


@lru_cache(maxsize=4)
def _rich_condition(height):
    def wide_of(x, h, j):
        split = _RICH_WIDE[h]
        return j < split if x.kind == VALUESET else j >= split

    frame = _rich_frame(height)
    return _make_condition(frame, tuple(range(1, height + 1)),
                           wide_of=wide_of)


# ---------------------------------------------------------------------------
# Verification suites: registry
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    lemma: str
    instance_count: int
    mode: str
    counterexamples: list
    runtime: float
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return not self.counterexamples


@dataclass(frozen=True)
class Lemma:
    name: str
    summary: str
    params: tuple            # (name, default) pairs; bools emit as 0/1
    count: callable          # params -> instance count
    check: callable          # (params, index) -> failure detail or None
    mode: callable           # params -> "exhaustive" | "sampled"


LEMMAS: dict[str, Lemma] = {}


def _lemma(name, summary, params, count, mode):
    def wrap(fn):
        LEMMAS[name] = Lemma(name, summary, tuple(params), count, fn, mode)
        return fn
    return wrap


def _sampled(P):
    return "sampled"


def _exhaustive(P):
    return "exhaustive"


def _rng(P, index, tag):
    return random.Random((P.get("seed", 0), index, tag))


# -- bigness ----------------------------------------------------------------

_BIGNESS_ALIASES = {"nm": "valueset", "nn": "hitting", "cn": "counting"}


@lru_cache(maxsize=8)
def _bigness_family(kind, i_size, b):
    return _make_family(kind, i_size, b, "toy")


@lru_cache(maxsize=8)
def _bigness_members(kind, i_size, b):
    fam = _bigness_family(kind, i_size, b)
    return sorted(fam.all_subatoms(),
                  key=lambda s: (len(s), sorted(map(poss_sort_key, s))))


def _bigness_setup(P):
    kind = _BIGNESS_ALIASES.get(P["family"], P["family"])
    if kind not in _FAMILY_MAKERS:
        raise SpecError(f"unknown family '{P['family']}'")
    return kind, P["I"], P["b"]


@_lemma("bigness",
        "strong bigness of a subatomic family over every subatom and "
        "every coloring",
        (("family", "nm"), ("I", 2), ("b", 2)),
        lambda P: len(_bigness_members(*_bigness_setup(P))),
        _exhaustive)
def _check_bigness_lemma(P, index):
    kind, i_size, b = _bigness_setup(P)
    member = _bigness_members(kind, i_size, b)[index]
    v = check_bigness(_bigness_family(kind, i_size, b), colors=b,
                      mode="strong", members=[member])
    if v.passed and v.exhaustive:
        return None
    if not v.exhaustive:
        return "coloring space exceeded the exhaustive budget"
    bad = v.counterexamples[0]
    return f"coloring {bad['coloring']} of {sorted(map(str, member))}"


# -- ramsey -----------------------------------------------------------------

@lru_cache(maxsize=8)
def _ramsey_cube(j, n, c):
    f = ramsey_bound(j, n, c)
    if not f.exact:
        raise SpecError("ramsey bound too large to enumerate")
    cube = column_cube(tuple(range(f.n)))
    return cube, sorted(cube.branches)


def _ramsey_count(P):
    _, branches = _ramsey_cube(P["j"], P["n"], P["c"])
    return P["c"] ** len(branches)


@_lemma("ramsey",
        "every coloring of the full binary cube at the Ramsey bound has a "
        "homogeneous sub-column of the requested splitting size",
        (("j", 1), ("n", 1), ("c", 2)),
        _ramsey_count,
        _exhaustive)
def _check_ramsey(P, index):
    n, c = P["n"], P["c"]
    cube, branches = _ramsey_cube(P["j"], n, c)
    digits = {}
    for br in branches:
        index, digits[br] = divmod(index, c)
    subs, color = homogenize_columns([cube], lambda br: digits[br], n, c)
    sub = subs[0]
    if not sub.branches <= cube.branches:
        return "homogeneous column escaped the cube"
    if splitting_size(sub) < n:
        return f"splitting size {splitting_size(sub)} < {n}"
    if any(digits[br] != color for br in sub.branches):
        return "homogeneous column is not monochromatic"
    return None


# -- splitJ -----------------------------------------------------------------

def _split_defect(level, srcs, outs):
    small = 3 ** (level + 1)
    for i, (src, kept) in enumerate(zip(srcs, outs)):
        if not kept <= src:
            return "output escapes its source"
        for j in range(i + 1, len(outs)):
            if outs[i] & outs[j]:
                return "outputs overlap"
    if len(outs) > 1:
        for src, kept in zip(srcs, outs):
            if kept and len(src) > small * len(kept):
                return "measure dropped by more than one"
            if not kept and len(src) > small:
                return "a large set was emptied"
    return None


@lru_cache(maxsize=8)
def _split_small_grid(ell, j_cap):
    # Nested worst-overlap instances: all size pairs, plus uniform size
    # tuples at every legal set count.
    grid = []
    for level in range(ell + 1):
        for k in range(1, level + 2):
            if k == 1:
                grid += [(level, (s,)) for s in range(1, j_cap + 1)]
            elif k == 2:
                grid += [(level, (s1, s2))
                         for s1 in range(1, j_cap + 1)
                         for s2 in range(1, j_cap + 1)]
            else:
                grid += [(level, (s,) * k) for s in range(1, j_cap + 1)]
    return grid


def _split_count(P):
    if P["exhaustive-small"]:
        return len(_split_small_grid(P["ell"], P["J"]))
    return P["count"]


@_lemma("splitJ",
        "disjointified index sets stay inside their sources and lose at "
        "most one unit of measure",
        (("ell", 5), ("J", 729), ("count", 1000), ("seed", 0),
         ("exhaustive-small", False)),
        _split_count,
        lambda P: "exhaustive" if P["exhaustive-small"] else "sampled")
def _check_split(P, index):
    if P["exhaustive-small"]:
        level, sizes = _split_small_grid(P["ell"], P["J"])[index]
        srcs = [frozenset(range(s)) for s in sizes]
    else:
        rng = _rng(P, index, "splitJ")
        level = rng.randint(0, P["ell"])
        k = rng.randint(0, level)
        universe = range(P["J"])
        srcs = [frozenset(rng.sample(universe, rng.randint(1, P["J"])))
                for _ in range(k + 1)]
    outs = split_index_sets(level, srcs)
    defect = _split_defect(level, srcs, outs)
    if defect:
        return f"level {level}, sizes {[len(s) for s in srcs]}: {defect}"
    return None


# -- norm arithmetic: glue, union, half, restrict ---------------------------

@_lemma("glue-min",
        "gluing a stack of creatures keeps the norm at least the minimum "
        "of the parts",
        (("count", 500), ("seed", 0), ("parts", 4)),
        lambda P: P["count"],
        _sampled)
def _check_glue_min(P, index):
    rng = _rng(P, index, "glue")
    frame = _GridFrame(n_j=9)
    stack = _random_stack(rng, frame, rng.randint(2, max(2, P["parts"])))
    totals = [compound_norm(c, frame).total for c in stack]
    glued = glue(stack, frame)
    validate_creature(glued, frame)
    floor = reduce(nmin, totals)
    if leq(floor, compound_norm(glued, frame).total) is False:
        return f"glued norm fell below the minimum of {len(stack)} parts"
    return None


@_lemma("union-norm",
        "the union creature keeps at least half the smaller norm minus one",
        (("count", 120), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_union(P, index):
    rng = _rng(P, index, "union")
    frame = _GridFrame(n_j=729)
    split = rng.randrange(100, 629)
    bigs1 = {_V1: {3: range(split)}, _H2: {3: range(split, 729)}}
    u1 = _creature(frame, 3, 4, _SUPP, bigs1)
    if index % 2:
        # disjoint supports
        supp2 = (_C3, _V4, _H5)
        bigs2 = {_V4: {3: range(split)}, _H5: {3: range(split, 729)}}
    else:
        # overlapping valueset witness, union must re-disjointify
        supp2 = (_C0, _V1, _H5)
        bigs2 = {_V1: {3: range(split)}, _H5: {3: range(split, 729)}}
    u2 = _creature(frame, 3, 4, supp2, bigs2)
    t1 = compound_norm(u1, frame).total
    t2 = compound_norm(u2, frame).total
    u = union_creature(u1, u2, frame)
    validate_creature(u, frame)
    nu = compound_norm(u, frame)
    bound = nsub(scale(nmin(t1, t2), 2), rat(1))
    if leq(bound, nu.total) is False:
        return "union norm fell below min/2 - 1"
    return None


@_lemma("half-drop",
        "halving costs at most 1/maxposs of the norm, exactly hitting the "
        "midpoint drop on clean inputs",
        (("count", 120), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_half(P, index):
    if index % 5 == 0:
        # midpoint instance: liminf is the unique minimum and N - d >= 2,
        # so the drop is exactly 1/maxposs
        frame = _GridFrame(n_j=6804, mp=4)
        bigs = {_V1: {3: range(6561)}, _H2: {3: range(6561, 6804)}}
        c = _creature(frame, 3, 4, _SUPP, bigs)
        drop = (as_fraction(compound_norm(c, frame).total)
                - as_fraction(compound_norm(half(c, frame), frame).total))
        if drop != Fraction(1, 4):
            return f"midpoint drop {drop} != 1/4"
        return None
    rng = _rng(P, index, "half")
    mp = rng.choice((1, 2, 4))
    frame = _GridFrame(n_j=rng.choice((9, 81, 729)), mp=mp)
    c = _random_creature(rng, frame, 3, 4, _SUPP,
                         d=Fraction(rng.randrange(3), 4))
    h = half(c, frame)
    if h.grid != c.grid or h.columns != c.columns:
        return "halving touched the grid"
    if any(b < a for a, b in zip(c.halving, h.halving)):
        return "halving parameter decreased"
    before = compound_norm(c, frame).total
    after = compound_norm(h, frame).total
    if leq(nsub(before, rat(Fraction(1, mp))), after) is False:
        return "norm dropped by more than 1/maxposs"
    return None


@_lemma("restrict-monotone",
        "restricting the support never decreases the norm",
        (("count", 120), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_restrict(P, index):
    rng = _rng(P, index, "restrict")
    frame = _GridFrame(n_j=81)
    c = _random_creature(rng, frame, 3, 4, _MASTER,
                         d=Fraction(rng.randrange(2), 2))
    u = {_C0, rng.choice((_V1, _V4)), rng.choice((_H2, _H3))}
    for x in _MASTER:
        if rng.random() < 0.3:
            u.add(x)
    r = restrict(c, tuple(sorted(u, key=lambda x: (x.kind, x.name))), frame)
    before = compound_norm(c, frame).total
    after = compound_norm(r, frame).total
    if leq(before, after) is False:
        return "restriction lowered the norm"
    return None


# -- unhalving --------------------------------------------------------------

@_lemma("unhalving",
        "unhalving recovers a large-norm condition from any strengthening "
        "of the halved condition",
        (("count", 50), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_unhalving(P, index):
    rng = _rng(P, index, "unhalve")
    height = 4 if index % 10 == 9 else 3
    frame = _rich_frame(height)
    q = _rich_condition(height)
    h = 1
    r = half_condition(q, frame, h)
    # random strengthening: shrink wide valueset cells, keeping them large
    for i, c in enumerate(r.creatures):
        for lvl in c.levels():
            picks = rng.sample(range(_RICH_WIDE[lvl]),
                               rng.randrange(0, min(24, _RICH_WIDE[lvl])))
            for j in picks:
                r = _shrink_cell(r, i, (_CV1, lvl, j), rng.randrange(24, 32))
    if height == 4 and rng.random() < 0.5:
        r = glue_condition(r, (1, 3, 4), frame)
    m_target = Fraction(1, 8)
    s = unhalve(q, h, r, frame, m_target)
    mp = frame.maxposs_below(h)
    clauses = []
    v = validate_condition(s, frame)
    if not v.valid:
        clauses.append(f"output invalid: {v.failures}")
    if s.w[0] != h or s.w[-1] != r.w[-1] or not set(s.w) <= set(r.w) | {h}:
        clauses.append(f"w-set {s.w} does not refit {r.w} at {h}")
    if not leq_check(s, q, frame).ok:
        clauses.append("output is not a strengthening of the source")
    by_span = {c.m_dn: c for c in r.creatures}
    for c in s.creatures[1:]:
        if by_span.get(c.m_dn) != c:
            clauses.append(f"block at {c.m_dn} differs from the "
                           "strengthening")
    floor = nsub(rat(m_target), rat(Fraction(1, mp)))
    total = compound_norm(s.creatures[0], frame).total
    if geq(total, floor) is False:
        clauses.append("recovered norm fell below M - 1/maxposs")
    d = s.creatures[0]
    for key, sub in d.grid.items():
        offered = r.creature_on(key[1]).grid[key]
        if not sub.poss <= offered.poss:
            clauses.append(f"recovered cell {key} escapes the "
                           "strengthening")
            break
    h1 = s.w[1]
    ps = poss_set(s, frame, (h1, -1))
    pr = poss_set(r, frame, (h1, -1))
    if any(not pr.contains(eta) for eta in ps.entries()):
        clauses.append("possibilities below the second level escape the "
                       "strengthening")
    if clauses:
        return "; ".join(clauses)
    return None


# -- counting suite ---------------------------------------------------------

@_lemma("cap-witness",
        "large families of measure-1/b sets contain a nearly-as-large "
        "subfamily with a common intersection of certified mass",
        (("count", 500), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_cap_witness(P, index):
    rng = _rng(P, index, "cap")
    b = rng.randint(2, 4)
    omega = rng.randint(2, 16)
    masses = {p: Fraction(1, omega) for p in range(omega)}
    need = -(-omega // b)
    sets = []
    for _ in range(rng.randint(1, 24)):
        k = rng.randint(need, omega)
        sets.append(frozenset(rng.sample(range(omega), k)))
    idx, mass = overlap_witness(sets, masses, b)
    n = nor_intersect(b, len(sets))
    if nor_intersect(b, len(idx)) < n - 1:
        return f"witness of {len(idx)} sets drops the norm below {n - 1}"
    common = frozenset.intersection(*(sets[i] for i in idx))
    if sum(masses[p] for p in common) < mass:
        return "reported intersection mass overstates the witness"
    _m, eps = overlap_parameters(Fraction(1, b), len(sets))
    if mass < eps:
        return f"witness mass {mass} below the guaranteed {eps}"
    return None


def _unrank_combination(index, n, k):
    # combinatorial number system, lexicographic over sorted k-subsets
    out, lo = [], 0
    for slot in range(k, 0, -1):
        for v in range(lo, n):
            block = binomial(n - v - 1, slot - 1)
            if index < block:
                out.append(v)
                lo = v + 1
                break
            index -= block
    return out


def _cover_geometry(P):
    i, b = P["I"], P["b"]
    universe = 1 << i
    t_size = universe // 2
    x_size = (1 << (i - 1)) + (1 << (i - b))
    return i, b, universe, t_size, x_size


@_lemma("cover-count",
        "every half-sized target has exactly as many covering "
        "possibilities as the covering-norm denominator",
        (("I", 4), ("b", 3), ("samples", 200), ("seed", 0)),
        lambda P: binomial(_cover_geometry(P)[2], _cover_geometry(P)[3]),
        _exhaustive)
def _check_cover_count(P, index):
    i, b, universe, t_size, x_size = _cover_geometry(P)
    t = frozenset(_unrank_combination(index, universe, t_size))
    rest = sorted(set(range(universe)) - t)
    denominator = binomial(1 << (i - 1), 1 << (i - b))
    covers = [t | frozenset(extra)
              for extra in itertools.combinations(rest, x_size - t_size)]
    if len(covers) != denominator:
        return f"cover count {len(covers)} != {denominator}"
    # the covering norm must see exactly that denominator
    if nor_divide(i, b, denominator) != 1 or nor_divide(i, b, denominator - 1) != 0:
        return "covering norm disagrees with the denominator"
    if index % 64 == 0:
        # independent brute count over the whole possibility space
        brute = sum(1 for x in itertools.combinations(range(universe), x_size)
                    if t <= frozenset(x))
        if brute != denominator:
            return f"brute cover count {brute} != {denominator}"
    rng = _rng(P, index, "cover")
    chosen = [frozenset(rng.sample(range(universe), x_size))
              for _ in range(P["samples"])]
    kept = [x for x in chosen if not t <= x]
    if nor_divide(i, b, len(kept)) < nor_divide(i, b, len(chosen)) - 1:
        return "removing the covers dropped the norm by more than one"
    return None


_LOGNOR_PIN = (0, 1, 2, 2, 3)


@lru_cache(maxsize=4)
def _lognor_table(x_max):
    ident = lambda x: x
    return [log_norm(ident, ident, x) for x in range(x_max + 1)]


@_lemma("log-norm",
        "the inductive norm combinator is 2-big on identity oracles",
        (("x-max", 2048),),
        lambda P: P["x-max"] + 1,
        _exhaustive)
def _check_log_norm(P, index):
    vals = _lognor_table(P["x-max"])
    x = index
    if x < len(_LOGNOR_PIN) and vals[x] != _LOGNOR_PIN[x]:
        return f"lognor({x}) = {vals[x]} != {_LOGNOR_PIN[x]}"
    for a in range(x + 1):
        if max(vals[a], vals[x - a]) < vals[x] - 1:
            return f"split {a} + {x - a} drops the norm by more than one"
    return None


@_lemma("combi-growth",
        "the binomial quotient grows at least like (2 - 1/k)^N",
        (("n-max", 64), ("k-max", 8)),
        lambda P: (P["k-max"] - 1) * P["n-max"],
        _exhaustive)
def _check_combi(P, index):
    k = 2 + index // P["n-max"]
    n = 1 + index % P["n-max"]
    if binom_quotient(n, k) < (2 - Fraction(1, k)) ** n:
        return f"quotient at N={n}, k={k} undercuts the bound"
    return None


# -- fat nodes --------------------------------------------------------------

@lru_cache(maxsize=4)
def _fat_grid(depth):
    # Every depth-d tree acts on the fat-node statement only through its
    # multiset of level-m leaf counts, so enumerating count multisets is
    # exhaustive for all trees of depth <= the cap.
    grid = []
    for d in range(1, depth + 1):
        for m in range(1, d + 1):
            cap = 1 << (d - m)
            for counts in itertools.combinations_with_replacement(
                    range(cap + 1), 1 << m):
                grid.append((d, m, counts))
    return grid


def _fat_count(P):
    if P["count"]:
        return P["count"]
    return len(_fat_grid(P["depth"]))


@_lemma("fat-nodes",
        "dense trees keep a near-full share of measure-fat nodes at "
        "every level",
        (("depth", 6), ("count", 0), ("min-depth", 7), ("seed", 0)),
        _fat_count,
        lambda P: "sampled" if P["count"] else "exhaustive")
def _check_fat_nodes(P, index):
    eps = Fraction(1, 4)
    if P["count"]:
        rng = _rng(P, index, "fat")
        d = rng.randint(P["min-depth"], P["depth"])
        n_leaves = rng.randint((1 << d) // 2, 1 << d)
        leaves = frozenset(rng.sample(range(1 << d), n_leaves))
        m = rng.randint(1, d)
    else:
        d, m, counts = _fat_grid(P["depth"])[index]
        if 2 * sum(counts) < (1 << d) or not any(counts):
            return None
        leaves = frozenset(slot | (x << m)
                           for slot, c in enumerate(counts)
                           for x in range(c))
    t = FiniteTree(d, leaves)
    if not measure_hypothesis_holds(t, m, eps):
        return None
    fat, verdict = fat_nodes(t, m, eps)
    if not verdict["hypothesis_holds"]:
        return "verdict contradicts the checked hypothesis"
    if not verdict["bound_holds"]:
        return (f"depth {d}, level {m}: {len(fat)} fat nodes miss the "
                "count bound")
    return None


# -- slalom -----------------------------------------------------------------

@_lemma("slalom",
        "block coding of bounded sequences is a bijection with one mark "
        "per block",
        (("count", 10000), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_slalom(P, index):
    rng = _rng(P, index, "slalom")
    g = [rng.randint(0, 8) for _ in range(rng.randint(1, 12))]
    f = [rng.randint(0, bound) for bound in g]
    bits = encode(f, g)
    if list(decode(bits, g)) != f:
        return f"decode(encode({f})) != {f}"
    cuts = [0]
    for bound in g:
        cuts.append(cuts[-1] + bound + 1)
    if len(bits) != cuts[-1]:
        return "code length misses the block layout"
    for n, (lo, hi) in enumerate(zip(cuts, cuts[1:])):
        if sum(bits[lo:hi]) != 1:
            return f"block {n} does not hold exactly one mark"
    return None


# -- condition algebra ------------------------------------------------------

@_lemma("condition-algebra",
        "the condition order is reflexive and transitive; wedges "
        "strengthen their source; possibility counts respect the caps and "
        "the index correspondence",
        (("count", 200), ("seed", 0)),
        lambda P: P["count"],
        _sampled)
def _check_condition_algebra(P, index):
    rng = _rng(P, index, "alg")
    caps = [1, 1, 64, 4096] if index % 2 else None
    height = 4 if index % 2 else rng.choice((3, 4))
    frame = _cond_frame(height, caps=caps)
    p0 = _make_condition(frame, tuple(range(1, height + 1)))
    p1 = _random_strengthen(rng, p0, frame)
    p2 = _random_strengthen(rng, p1, frame)
    for q in (p0, p1, p2):
        if not leq_check(q, q, frame).ok:
            return "order is not reflexive"
    if leq_check(p1, p0, frame).ok and leq_check(p2, p1, frame).ok:
        if not leq_check(p2, p0, frame).ok:
            return "order is not transitive along a strengthening chain"
    ell = rng.choice(p0.w[:-1])
    u = (ell, -1)
    etas = list(poss_set(p0, frame, u).entries())
    eta = rng.choice(etas)
    cq = curlywedge(p0, frame, eta, u)
    if not leq_check(cq, p0, frame).ok:
        return "curlywedge output is not a strengthening"
    if len(p0.w) > 2:
        interior = rng.choice(p0.w[1:-1])
        eta2 = rng.choice(list(poss_set(p0, frame, (interior, -1)).entries()))
        wq = wedge(p0, frame, eta2, interior)
        if not leq_check(wq, p0, frame).ok:
            return "wedge output is not a strengthening"
    for m in p2.w[:-1]:
        if poss_count(p2, frame, (m, -1)) > frame.maxposs_below(m):
            return f"possibility count at {m} escapes the declared cap"
    per_index = poss_set(p0, frame, u, PER_INDEX)
    per_sub = poss_set(p0, frame, u, PER_SUBLEVEL)
    images = set()
    for eta in per_index.entries():
        img = iota(p0, frame, u, eta)
        if not per_sub.contains(img):
            return "index correspondence left the sublevel indexing"
        images.add(tuple(sorted(img.items(), key=repr)))
    if not len(images) == per_index.count == per_sub.count:
        return "index correspondence is not a bijection"
    return None


# -- cascade values ---------------------------------------------------------

@lru_cache(maxsize=2)
def _cascade_default():
    return cascade_table()


def _cascade_checks():
    def named(label):
        def wrap(fn):
            checks.append((label, fn))
            return fn
        return wrap

    checks = []
    named("seed possibility bound is 1")(
        lambda t: t.row(0, -1).maxposs_below.n == 1
        and t.row(0, -1).maxposs_below.exact)
    named("declared height seed is 3, raised to 4")(
        lambda t: t.h_seed_declared == 3 and t.h_seed_used == 4
        and any("raised" in n for n in t.row(0, -1).notes))
    named("seed color count is 2")(
        lambda t: (t.row(0, -1).big.n, t.row(0, -1).big.exact) == (2, True))
    named("column row carries three graded slots")(
        lambda t: t.row(0, -1).sublevel_count.n == 3)
    named("slot-zero norm target is the measure identity")(
        lambda t: t.row(0, -1).norm_target.n == 1)
    named("first graded anchor equals its color count")(
        lambda t: t.row(0, 0).anchor.n == t.row(0, 0).big.n == 32)
    named("anchors strictly increase across graded rows")(
        lambda t: _check_named(t, "anchors strictly increasing across "
                                  "graded rows"))
    named("color counts nondecreasing")(
        lambda t: _check_named(t, "color counts nondecreasing"))
    named("possibility bounds nondecreasing")(
        lambda t: _check_named(t, "possibility bounds nondecreasing"))
    named("slot count measures the possibility power")(
        lambda t: _check_named(t, "graded-slot count measures exactly the "
                                  "possibility power"))
    named("no growth requirement fails")(
        lambda t: all(c.passed is not False for c in t.checks))
    named("tower row is flagged as a lower bound")(
        lambda t: not t.row(0, 1).exact
        and any("lower bound" in n for n in t.row(0, 1).notes))
    named("tower descriptors keep exact bit lengths")(
        lambda t: t.row(0, 0).poss_bound.exp.n.bit_length() == 5126)
    named("family blocks split the index line at exact thresholds")(
        lambda t: t.row(0, 0).families[0].threshold.n == 2 ** 5122
        and t.row(0, 0).families[1].threshold.n == 10274
        and t.row(0, 0).families[2].threshold.exp.n == 2 ** 65 - 2 ** 32)
    named("deeper tables go partial instead of guessing")(
        lambda t: cascade_table(up_to=(0, 2)).partial and not t.partial)
    return checks


def _check_named(t, name):
    for c in t.checks:
        if c.name == name:
            return c.passed is True
    return False


@_lemma("cascade-values",
        "the growth table reproduces its seed values, monotonicity, and "
        "tower descriptors",
        (),
        lambda P: len(_cascade_checks()),
        _exhaustive)
def _check_cascade_values(P, index):
    label, fn = _cascade_checks()[index]
    try:
        ok = fn(_cascade_default())
    except DomainError as e:
        return f"{label}: {e}"
    if not ok:
        return label
    return None


# ---------------------------------------------------------------------------
# Verification runner
# ---------------------------------------------------------------------------

def _params_for(spec: Lemma, overrides: dict) -> dict:
    params = dict(spec.params)
    for key, value in overrides.items():
        if key not in params:
            raise SpecError(f"lemma '{spec.name}' has no parameter '{key}'")
        if isinstance(params[key], bool):
            value = bool(value)
        params[key] = value
    return params


def _run_chunk(args):
    name, params, lo, hi = args
    spec = LEMMAS[name]
    return [(i, d) for i in range(lo, hi)
            if (d := spec.check(params, i)) is not None]


def run_lemma(name: str, overrides: dict | None = None, jobs: int = 1,
              only_index: int | None = None) -> Verdict:
    spec = LEMMAS.get(name)
    if spec is None:
        raise SpecError(f"unknown lemma '{name}'")
    params = _params_for(spec, overrides or {})
    count = spec.count(params)
    mode = spec.mode(params)
    started = time.perf_counter()
    if only_index is not None:
        if not 0 <= only_index < count:
            raise SpecError(f"index {only_index} outside 0..{count - 1}")
        spans = [(only_index, only_index + 1)]
        count = 1
    else:
        spans = [(0, count)]
    failures = []
    if jobs > 1 and count > 1:
        step = max(1, count // (jobs * 8))
        work = [(name, params, lo, min(lo + step, spans[0][1]))
                for lo in range(spans[0][0], spans[0][1], step)]
        with Pool(jobs) as pool:
            for part in pool.imap(_run_chunk, work):
                failures.extend(part)
        failures.sort()
    else:
        for lo, hi in spans:
            failures.extend(_run_chunk((name, params, lo, hi)))
    runtime = time.perf_counter() - started
    seed = params.get("seed") if mode == "sampled" else None
    return Verdict(name, count, mode, failures, runtime, seed)


def _job_section(name: str, params: dict, index: int) -> Section:
    sec = Section("verify")
    sec.add("lemma", name)
    sec.add("index", index)
    for key, value in params.items():
        sec.add(key, int(value) if isinstance(value, bool) else value)
    return sec


def print_verdict(v: Verdict, params: dict, out=sys.stdout,
                  limit: int = 5) -> None:
    print(f"lemma: {v.lemma}", file=out)
    print(f"mode: {v.mode}", file=out)
    if v.seed is not None:
        print(f"seed: {v.seed}", file=out)
    print(f"instances: {v.instance_count}", file=out)
    print(f"counterexamples: {len(v.counterexamples)}", file=out)
    print(f"runtime: {v.runtime:.2f}s", file=out)
    print(f"verdict: {'PASS' if v.passed else 'FAIL'}", file=out)
    for index, detail in v.counterexamples[:limit]:
        print(f"\n# instance {index}: {detail}", file=out)
        print(emit_document(SpecDocument(
            [_job_section(v.lemma, params, index)])), file=out, end="")
    if len(v.counterexamples) > limit:
        print(f"\n# ... {len(v.counterexamples) - limit} more", file=out)


def cmd_verify(ns, out=sys.stdout) -> int:
    if ns.list:
        for name in sorted(LEMMAS):
            print(f"{name}: {LEMMAS[name].summary}", file=out)
        return EXIT_PASS
    if ns.job:
        doc = _load_doc(ns.job)
        sec = doc.require("verify")
        name = sec.one_word("lemma")
        if name not in LEMMAS:
            raise SpecError(f"unknown lemma '{name}'")
        index = sec.one_int("index", None)
        overrides = {k: v[0] for k, v in
                     ((k, v) for k, v in sec.entries
                      if k not in ("lemma", "index"))}
        params = _params_for(LEMMAS[name], overrides)
        v = run_lemma(name, overrides, jobs=ns.jobs, only_index=index)
    elif ns.lemma:
        name = ns.lemma
        if name not in LEMMAS:
            raise SpecError(f"unknown lemma '{name}'")
        overrides = {key: value for key, value in ns.overrides}
        if ns.seed is not None:
            if any(k == "seed" for k, _ in LEMMAS[name].params):
                overrides["seed"] = ns.seed
        params = _params_for(LEMMAS[name], overrides)
        v = run_lemma(name, overrides, jobs=ns.jobs)
    else:
        raise SpecError("verify wants a lemma name, --job FILE, or --list")
    print_verdict(v, params, out)
    return EXIT_PASS if v.passed else EXIT_COUNTEREXAMPLE


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="creatures",
        description="norms, growth tables, and verification suites for "
                    "finite creature combinatorics")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, mode_default="toy"):
        p.add_argument("--mode", choices=("toy", "exact"),
                       default=mode_default)
        p.add_argument("--precision", type=int, default=64,
                       metavar="BITS")
        p.add_argument("--budget", type=int, default=1 << 12,
                       metavar="BITS")

    p = sub.add_parser("norm", help="norms of one declared object")
    p.add_argument("path", help="spec document path, or - for stdin")
    common(p)

    p = sub.add_parser("cascade", help="parameter growth table")
    p.add_argument("--up-to", type=int, nargs=2, default=(0, 1),
                   metavar=("LEVEL", "SLOT"))
    common(p, mode_default="exact")

    p = sub.add_parser("verify", help="run a registered verification suite")
    p.add_argument("lemma", nargs="?", help="registered lemma id")
    p.add_argument("--job", metavar="FILE",
                   help="re-run a printed counterexample document")
    p.add_argument("--list", action="store_true",
                   help="list registered lemmas")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    defaults = {}
    for spec in LEMMAS.values():
        for name, value in spec.params:
            defaults.setdefault(name, value)
    for name, value in sorted(defaults.items()):
        if name == "seed":
            continue
        if isinstance(value, bool):
            p.add_argument(f"--{name}", dest=name, action="store_true",
                           default=None)
        else:
            p.add_argument(f"--{name}", dest=name, type=type(value),
                           default=None)

    p = sub.add_parser("glue", help="glue consecutive blocks of a condition")
    p.add_argument("path")
    p.add_argument("--at", type=int, nargs="+", required=True,
                   metavar="LEVEL")
    common(p)

    p = sub.add_parser("half", help="halve a condition from a level up")
    p.add_argument("path")
    p.add_argument("--at", type=int, required=True, metavar="LEVEL")
    common(p)

    p = sub.add_parser("unhalve",
                       help="recover a large-norm condition from a "
                            "strengthening of a halved one")
    p.add_argument("path", help="the original (unhalved) condition")
    p.add_argument("strengthening",
                   help="a condition below the halved original")
    p.add_argument("--at", type=int, required=True, metavar="LEVEL")
    p.add_argument("--norm", required=True, metavar="NUM/DEN")
    common(p)

    p = sub.add_parser("poss", help="possibility count below a sublevel")
    p.add_argument("path")
    p.add_argument("--at", type=int, nargs=2, required=True,
                   metavar=("LEVEL", "SLOT"))
    p.add_argument("--variant", choices=("per-index", "per-sublevel"),
                   default="per-index")
    p.add_argument("--list", action="store_true",
                   help="print each extension as a document")
    common(p)

    p = sub.add_parser("leq", help="decide the condition order")
    p.add_argument("candidate", help="the allegedly stronger condition")
    p.add_argument("reference")
    common(p)

    return top


_COMMANDS = {"norm": cmd_norm, "cascade": cmd_cascade, "verify": cmd_verify,
             "glue": cmd_glue, "half": cmd_half, "unhalve": cmd_unhalve,
             "poss": cmd_poss, "leq": cmd_leq}


def main(argv=None) -> int:
    parser = _parser()
    ns = parser.parse_args(argv)
    if ns.command == "verify":
        known = {name for spec in LEMMAS.values() for name, _ in spec.params}
        ns.overrides = [(name, getattr(ns, name))
                        for name in sorted(known)
                        if getattr(ns, name, None) is not None]
    try:
        return _COMMANDS[ns.command](ns)
    except BudgetExceeded as e:
        print(f"undecided: {e}; raise --budget or --precision",
              file=sys.stderr)
        return EXIT_PRECISION
    except (SpecError, DomainError, PreconditionError,
            InsufficientPrefix) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
