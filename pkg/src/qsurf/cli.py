"""Command-line front end for the quantum-surface toolkit.

Subcommands
-----------
mutate       Mutate a seed file at one or more nodes and print the result.
trace        Evaluate a web's trace value and print its canonical rendering.
flip-check   Compare trace values across a diagonal flip, with full detail.
tables       Print per-term exponent and commutation tables for open webs.
consistency  Check composed-mutation relations on a seed file.
verify-all   Run the complete verification suite against the golden files.

Surface and web arguments name either filesystem paths or one of the
packaged sample inputs (``quadrilateral.surf``, ``six_webs.web``,
``punctured_square.surf``, ``peripheral_loops.web``).

All stdout output is byte-deterministic; timing lines go to stderr.
Exit status: 0 success, 1 verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import difflib
import random
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .balance import random_balanced_vector, transform_exponents
from .coeff import OmegaPoly, format_half, format_third
from .mutation import (
    NormalizationError,
    QuantumRational,
    check_relation,
    classical_seed,
    is_laurent,
    normalize,
    nu_omega,
    relabel_poly,
    theta_flip,
)
from .qtorus import (
    ExponentVector,
    LaurentPoly,
    WeylMonomial,
    classicalize,
    commutation_exponent,
    is_multiplicity_free,
    mono_mul,
    poly_add,
    poly_mul,
    star,
    weyl_quantize,
)
from .quiver import Seed, mutate_sequence, parse_seed, render_seed
from .surface import (
    Triangulation,
    build_3triangulation_quiver,
    build_triangulation,
    cut,
    cutting_map,
    edge_node,
    face_node,
    flip,
)
from .trace import (
    StatePair,
    WebPath,
    classical_determinant,
    classical_product,
    edge_trace,
    loop_trace,
    parse_web,
    path_matrices,
    peripheral_highest_term,
    single_triangle_trace,
    verify_trace_balanced,
)

STATES = tuple((e1, e2) for e1 in (1, 2, 3) for e2 in (1, 2, 3))
RENDER_STYLES = ("canonical", "latex-like")

GOLDEN_TABLES = "tables.txt"
GOLDEN_TRACES = "traces.txt"


class InputError(Exception):
    """A problem with user-supplied input (exit status 2)."""


# -- input loading ------------------------------------------------------------


def _packaged(kind: str, name: str):
    return resources.files("qsurf").joinpath(kind).joinpath(name)


def read_input_text(path: str) -> str:
    """Read a file, falling back to the packaged sample inputs by name."""
    p = Path(path)
    if p.is_file():
        return p.read_text()
    sample = _packaged("data", path)
    if sample.is_file():
        return sample.read_text()
    raise InputError(f"no such file: {path}")


@dataclass(frozen=True)
class SurfaceInput:
    """A triangulated surface plus the display numbering of its quiver nodes."""

    T: Triangulation
    aliases: dict[str, int]  # node name -> 1-based display number

    @property
    def alias_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.aliases, key=self.aliases.get))


def parse_surface_input(text: str) -> SurfaceInput:
    """Parse a surface description with an optional ``nodes`` numbering line."""
    kept: list[str] = []
    alias_names: list[str] | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("nodes ") or line == "nodes":
            if alias_names is not None:
                raise InputError("duplicate nodes line")
            alias_names = line.split()[1:]
            continue
        kept.append(raw)
    T = build_triangulation("\n".join(kept) + "\n")
    order = T.node_order()
    if alias_names is None:
        alias_names = list(order)
    if sorted(alias_names) != sorted(order):
        raise InputError("nodes line must list every quiver node exactly once")
    return SurfaceInput(T, {n: i + 1 for i, n in enumerate(alias_names)})


def load_surface(path: str) -> SurfaceInput:
    return parse_surface_input(read_input_text(path))


@dataclass
class WebEntry:
    """One web from a web file: its description before and (optionally) after
    the flip under study."""

    wid: str
    pre: str
    post: str | None = None


def parse_web_entries(text: str) -> list[WebEntry]:
    entries: list[WebEntry] = []
    by_id: dict[str, WebEntry] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        is_post = line.startswith("flipped ")
        body = line[len("flipped "):] if is_post else line
        head = body.split()
        if len(head) < 2 or head[0] not in ("web", "loop"):
            raise InputError(f"unrecognized web line: {raw.strip()!r}")
        wid = head[1]
        if is_post:
            if wid not in by_id:
                raise InputError(f"flipped description before web {wid!r}")
            if by_id[wid].post is not None:
                raise InputError(f"duplicate flipped description for {wid!r}")
            by_id[wid].post = body
        else:
            if wid in by_id:
                raise InputError(f"duplicate web id {wid!r}")
            entry = WebEntry(wid, body)
            entries.append(entry)
            by_id[wid] = entry
    if not entries:
        raise InputError("web file contains no webs")
    return entries


def load_webs(path: str) -> list[WebEntry]:
    return parse_web_entries(read_input_text(path))


def parse_state(text: str) -> StatePair:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"state must look like 1,2 (got {text!r})")
    try:
        e1, e2 = (int(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"state must be a pair of integers (got {text!r})") from exc
    if not (1 <= e1 <= 3 and 1 <= e2 <= 3):
        raise InputError("state entries must be 1, 2 or 3")
    return StatePair(e1, e2)


# -- rendering ----------------------------------------------------------------


def path_node_sequence(path: WebPath) -> list[str]:
    """Quiver nodes in path-traversal order; used to order rendered factors."""
    seq: list[str] = []
    if not path.closed:
        first = path.steps[0]
        seq += [edge_node(first.entry, 1), edge_node(first.entry, 2)]
        for s in path.steps:
            seq.append(face_node(s.triangle))
            seq += [edge_node(s.exit, 1), edge_node(s.exit, 2)]
    else:
        for s in path.steps:
            seq += [edge_node(s.entry, 1), edge_node(s.entry, 2)]
            seq.append(face_node(s.triangle))
    return seq


def table_node_sequence(T: Triangulation, path: WebPath) -> list[str]:
    """Row order for exponent tables: each crossed arc's nodes in display
    order (trailing node first for the entry arc), interleaved with faces."""
    seq: list[str] = []
    steps = path.steps
    if not path.closed:
        tri = T.triangle(steps[0].triangle)
        pair = tri.node_pair(tri.sides.index(steps[0].entry))
        seq += [pair[1], pair[0]]
    for s in steps:
        tri = T.triangle(s.triangle)
        seq.append(face_node(s.triangle))
        exit_pair = tri.node_pair(tri.sides.index(s.exit))
        if path.closed:
            seq += [exit_pair[1], exit_pair[0]]
        else:
            seq += [exit_pair[0], exit_pair[1]]
    return seq


def dense_term_key(aliases: dict[str, int]) -> Callable[[ExponentVector], tuple]:
    order = tuple(sorted(aliases, key=aliases.get))

    def key(e: ExponentVector) -> tuple:
        return tuple(-e.z(n) for n in order)

    return key


def _factor(alias: int, z: int, style: str) -> str:
    if style == "latex-like":
        return f"\\widehat{{X}}_{{{alias}}}^{{{format_third(z)}}}"
    return f"X{alias}^{{{format_third(z)}}}"


def render_value(
    p: LaurentPoly,
    node_seq: Sequence[str],
    aliases: dict[str, int],
    style: str = "canonical",
    omega_one: bool = False,
) -> str:
    """Canonical one-line rendering of a trace-style Laurent element.

    Terms are sorted by descending exponents in display-number order; the
    factors of each term follow the traversal order ``node_seq`` with any
    remaining nodes appended by display number.
    """
    if style not in RENDER_STYLES:
        raise InputError(f"unknown render style {style!r}")
    if omega_one:
        p = classicalize(p)
    if not p.terms:
        return "0"
    order: list[str] = []
    for n in list(node_seq) + list(sorted(aliases, key=aliases.get)):
        if n not in order:
            order.append(n)
    key = dense_term_key(aliases)
    parts: list[str] = []
    for e in sorted(p.terms, key=key):
        c = p.terms[e]
        factors = [_factor(aliases[n], e.z(n), style) for n in order if e.z(n)]
        if c.is_single_term():
            phase2, k = c.single_term()
            sign = "+" if k > 0 else "-"
            head: list[str] = []
            if not omega_one:
                w = "\\omega" if style == "latex-like" else "w"
                head.append(f"{w}^{{{format_half(phase2)}}}")
            if abs(k) != 1 or not (factors or head):
                head.append(str(abs(k)))
            parts.append(sign + " ".join(head + factors))
        else:
            parts.append("+(" + c.render() + ")" + ("" if not factors else " " + " ".join(factors)))
    return " ".join(parts)


# -- exponent tables ----------------------------------------------------------


@dataclass
class TableColumn:
    header: str
    exps: ExponentVector
    alpha: int
    alphap: int


def web_table_columns(fx: "QuadFixture", wid: str) -> list[TableColumn]:
    """Term columns for an open web: all states with a nonzero value, terms in
    canonical order, subscripted when a state contributes several terms."""
    cols: list[TableColumn] = []
    for e1, e2 in STATES:
        value = fx.lhs(wid, (e1, e2))
        terms = sorted(value.terms, key=fx.dense_key)
        for k, e in enumerate(terms, start=1):
            header = f"({e1},{e2})" + (f"_{k}" if len(terms) > 1 else "")
            a = commutation_exponent(fx.S1, fx.n3, e).as_int()
            ap = commutation_exponent(fx.S2, fx.n4, e).as_int()
            cols.append(TableColumn(header, e, a, ap))
    return cols


def format_table(
    wid: str,
    cols: Sequence[TableColumn],
    row_nodes: Sequence[str],
    aliases: dict[str, int],
) -> str:
    lines = [f"table {wid}"]
    lines.append("state | " + " ".join(c.header for c in cols))
    for n in row_nodes:
        row = " ".join(format_third(c.exps.z(n)) for c in cols)
        lines.append(f"a{aliases[n]} | {row}")
    lines.append("alpha | " + " ".join(str(c.alpha) for c in cols))
    lines.append("alphap | " + " ".join(str(c.alphap) for c in cols))
    return "\n".join(lines) + "\n"


def web_table_text(fx: "QuadFixture", wid: str) -> str:
    return format_table(
        wid,
        web_table_columns(fx, wid),
        table_node_sequence(fx.T, fx.pre_path(wid)),
        fx.aliases,
    )


def all_tables_text(fx: "QuadFixture") -> str:
    blocks = [web_table_text(fx, e.wid) for e in fx.entries if not fx.pre_path(e.wid).closed]
    return "\n".join(blocks)


def all_traces_text(fx: "QuadFixture") -> str:
    """Golden rendering of every packaged trace value, both sides of the flip."""
    lines: list[str] = []
    for entry in fx.entries:
        pre = fx.pre_path(entry.wid)
        if pre.closed:
            lines.append(f"trace {entry.wid} pre | "
                         + render_value(fx.loop_lhs(entry.wid),
                                        path_node_sequence(pre), fx.aliases))
            if entry.post is not None:
                post = fx.post_path(entry.wid)
                lines.append(f"trace {entry.wid} flipped | "
                             + render_value(fx.loop_rhs(entry.wid),
                                            path_node_sequence(post), fx.faliases))
            continue
        for st in STATES:
            lines.append(f"trace {entry.wid} pre ({st[0]},{st[1]}) | "
                         + render_value(fx.lhs(entry.wid, st),
                                        path_node_sequence(pre), fx.aliases))
        post = fx.post_path(entry.wid)
        for st in STATES:
            lines.append(f"trace {entry.wid} flipped ({st[0]},{st[1]}) | "
                         + render_value(fx.rhsp(entry.wid, st),
                                        path_node_sequence(post), fx.faliases))
    return "\n".join(lines) + "\n"


# -- verification reports -----------------------------------------------------


class Report:
    """Accumulates CHECK/INFO lines for one suite, machine-parsable."""

    def __init__(self, suite: str):
        self.suite = suite
        self.lines: list[str] = []
        self.nchecks = 0
        self.failures: list[str] = []

    def check(self, label: str, ok: bool, detail: str = "") -> bool:
        self.nchecks += 1
        line = f"CHECK {label} {'PASS' if ok else 'FAIL'}"
        if detail and not ok:
            line += f" | {detail}"
        self.lines.append(line)
        if not ok:
            self.failures.append(line)
        return ok

    def info(self, text: str) -> None:
        self.lines.append(f"INFO {text}")

    def raw(self, line: str) -> None:
        self.lines.append(line)

    @property
    def ok(self) -> bool:
        return not self.failures

    def result_line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"RESULT {self.suite} {status} checks={self.nchecks}"

    def finish(self, out=print) -> bool:
        for line in self.lines:
            out(line)
        out(self.result_line())
        return self.ok


# -- shared fixtures ----------------------------------------------------------


class QuadFixture:
    """The packaged quadrilateral, its diagonal flip, and cached trace values."""

    def __init__(self) -> None:
        self.S = parse_surface_input(_packaged("data", "quadrilateral.surf").read_text())
        self.entries = parse_web_entries(_packaged("data", "six_webs.web").read_text())
        self.T = self.S.T
        self.aliases = self.S.aliases
        self.seed0, self.L = build_3triangulation_quiver(self.T)
        self.flipped, self.ctx, self.iota = flip(self.T, "D")
        self.inv_iota = {w: v for v, w in self.iota.items()}
        self.fseed, self.fL = build_3triangulation_quiver(self.flipped)
        self.faliases = {self.iota[v]: k for v, k in self.aliases.items()}
        self.stage_nodes = list(self.ctx.mutation_nodes)
        self.stages = [self.seed0]
        for u in self.stage_nodes:
            self.stages.append(mutate_sequence(self.stages[-1], [u]))
        self.n3, self.n4 = self.stage_nodes[0], self.stage_nodes[1]
        self.S1, self.S2 = self.stages[1], self.stages[2]
        self.dense_key = dense_term_key(self.aliases)
        self._paths: dict[tuple[str, bool], WebPath] = {}
        self._values: dict[tuple, LaurentPoly] = {}

    def entry(self, wid: str) -> WebEntry:
        for e in self.entries:
            if e.wid == wid:
                return e
        raise InputError(f"no web {wid!r}")

    def pre_path(self, wid: str) -> WebPath:
        key = (wid, False)
        if key not in self._paths:
            _, path = parse_web(self.T, self.entry(wid).pre)
            self._paths[key] = path
        return self._paths[key]

    def post_path(self, wid: str) -> WebPath:
        key = (wid, True)
        if key not in self._paths:
            post = self.entry(wid).post
            if post is None:
                raise InputError(f"web {wid!r} has no flipped description")
            _, path = parse_web(self.flipped, post)
            self._paths[key] = path
        return self._paths[key]

    def lhs(self, wid: str, st: tuple[int, int]) -> LaurentPoly:
        key = ("lhs", wid, st)
        if key not in self._values:
            self._values[key] = edge_trace(self.T, self.L, self.pre_path(wid), StatePair(*st))
        return self._values[key]

    def rhsp(self, wid: str, st: tuple[int, int]) -> LaurentPoly:
        key = ("rhsp", wid, st)
        if key not in self._values:
            self._values[key] = edge_trace(
                self.flipped, self.fL, self.post_path(wid), StatePair(*st))
        return self._values[key]

    def loop_lhs(self, wid: str) -> LaurentPoly:
        key = ("loop-lhs", wid)
        if key not in self._values:
            self._values[key] = loop_trace(self.T, self.L, self.pre_path(wid))
        return self._values[key]

    def loop_rhs(self, wid: str) -> LaurentPoly:
        key = ("loop-rhs", wid)
        if key not in self._values:
            self._values[key] = loop_trace(self.flipped, self.fL, self.post_path(wid))
        return self._values[key]

    def theta(self, p: LaurentPoly) -> LaurentPoly | None:
        """Transport a flipped-side Laurent element back across the flip."""
        return is_laurent(self.seed0, normalize(self.seed0, theta_flip(self.T, self.ctx, p)))

    def step1(self, p: LaurentPoly) -> LaurentPoly | None:
        """Image under the first two forward mutations, normalized."""
        y = nu_omega(self.S1, self.n3, p)
        z = nu_omega(self.S2, self.n4, y)
        return is_laurent(self.S2, normalize(self.S2, z))


_FIXTURES: dict[str, object] = {}


def quad_fixture() -> QuadFixture:
    if "quad" not in _FIXTURES:
        _FIXTURES["quad"] = QuadFixture()
    return _FIXTURES["quad"]


# -- criterion 1: flip compatibility on the six open webs ---------------------


def criterion_flip_theorem(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    for entry in fx.entries:
        for st in STATES:
            lhs = fx.lhs(entry.wid, st)
            image = fx.theta(fx.rhsp(entry.wid, st))
            rep.check(
                f"theta {entry.wid} ({st[0]},{st[1]})",
                image == lhs,
                "transported value differs from the direct one",
            )


# -- criterion 2: golden tables and renderings --------------------------------


def _golden_source_path(name: str) -> Path:
    return Path(__file__).resolve().parent / "golden" / name


def _compare_golden(rep: Report, name: str, generated: str, regen: bool) -> None:
    if regen:
        path = _golden_source_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(generated)
        rep.info(f"golden {name} regenerated ({len(generated.splitlines())} lines)")
        rep.check(f"golden {name}", True)
        return
    res = _packaged("golden", name)
    if not res.is_file():
        rep.check(f"golden {name}", False, "golden file missing; run verify-all --regen-golden")
        return
    stored = res.read_text()
    if stored == generated:
        rep.check(f"golden {name}", True)
        return
    rep.check(f"golden {name}", False, "output differs from golden file")
    diff = difflib.unified_diff(
        stored.splitlines(), generated.splitlines(),
        fromfile=f"golden/{name}", tofile="generated", lineterm="")
    for line in diff:
        rep.info(line)


def criterion_tables_golden(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    for entry in fx.entries:
        cols = web_table_columns(fx, entry.wid)
        rep.check(
            f"alpha-range {entry.wid}",
            all(c.alpha in (-1, 0, 1) and c.alphap in (-1, 0, 1) for c in cols),
            "a commutation exponent falls outside {-1,0,1}",
        )
    _compare_golden(rep, GOLDEN_TABLES, all_tables_text(fx), regen)
    _compare_golden(rep, GOLDEN_TRACES, all_traces_text(fx), regen)


# -- criterion 3: intermediate Laurentness and term counts --------------------


def _step1_column_groups(fx: QuadFixture, value: LaurentPoly):
    """Group a trace value's terms for the two-mutation image count.

    Returns (columns, groups) where each group is ((indices...), alpha, alphap);
    None when the expected pairing structure is violated.
    """
    cols = []
    for e in sorted(value.terms, key=fx.dense_key):
        a = commutation_exponent(fx.S1, fx.n3, e)
        ap = commutation_exponent(fx.S2, fx.n4, e)
        if not (a.is_integer and ap.is_integer):
            return None
        cols.append((e, a.as_int(), ap.as_int()))
    used = [False] * len(cols)
    groups = []
    for i, (e, a, ap) in enumerate(cols):
        if used[i]:
            continue
        used[i] = True
        if a >= 0 and ap >= 0:
            groups.append(((i,), a, ap))
            continue
        if a == -1:
            merge = fx.n3
        elif ap == -1:
            merge = fx.n4
        else:
            return None
        partner = None
        for j, (e2, b, bp) in enumerate(cols):
            if used[j] or (b, bp) != (a, ap):
                continue
            diff = {
                v: e2.z(v) - e.z(v)
                for v in set(e.support) | set(e2.support)
                if e2.z(v) != e.z(v)
            }
            if set(diff) == {merge} and abs(diff[merge]) == 3:
                partner = j
                break
        if partner is None:
            return None
        used[partner] = True
        groups.append(((i, partner), a, ap))
    return cols, groups


def _group_weight(group) -> int:
    indices, a, ap = group
    return 2 ** (a + ap + 1) if len(indices) == 2 else 2 ** (a + ap)


def criterion_step1_laurent(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    for entry in fx.entries:
        for st in STATES:
            label = f"{entry.wid} ({st[0]},{st[1]})"
            value = fx.lhs(entry.wid, st)
            grouping = _step1_column_groups(fx, value)
            if grouping is None:
                rep.check(f"step1 {label}", False, "unexpected pairing structure")
                continue
            cols, groups = grouping
            image = fx.step1(value)
            predicted = sum(_group_weight(g) for g in groups)
            ok = (
                image is not None
                and is_multiplicity_free(image)
                and all(c.is_single_term() for c in image.terms.values())
                and len(image.terms) == predicted
            )
            rep.check(
                f"step1 {label}",
                ok,
                f"image has {'no normal form' if image is None else len(image.terms)} "
                f"terms, predicted {predicted}",
            )
            group_ok = True
            for indices, a, ap in groups:
                sub = LaurentPoly({cols[i][0]: value.terms[cols[i][0]] for i in indices})
                gi = fx.step1(sub)
                want = _group_weight((indices, a, ap))
                if gi is None or len(gi.terms) != want:
                    group_ok = False
            rep.check(
                f"step1-groups {label}",
                group_ok,
                "a term group's image has the wrong size",
            )


# -- criterion 4: composed-mutation relations ---------------------------------


def criterion_mutation_consistency(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    pair = Seed(("v", "w"), (), {("v", "w"): 2, ("w", "v"): -2})
    rep.check("relation involution 2-node", check_relation(pair, ["v", "v"]))
    rep.check(
        "relation involution quad face",
        check_relation(fx.seed0, [face_node("t7"), face_node("t7")]),
    )
    square = Seed(
        ("v", "w", "x", "y"),
        (),
        {
            ("v", "x"): 2, ("x", "v"): -2,
            ("w", "y"): -2, ("y", "w"): 2,
            ("x", "y"): 2, ("y", "x"): -2,
        },
    )
    rep.check(
        "relation commuting square", check_relation(square, ["v", "w", "v", "w"])
    )
    pent = Seed(
        ("v", "w", "x"),
        (),
        {("v", "w"): 2, ("w", "v"): -2, ("w", "x"): 2, ("x", "w"): -2},
    )
    rep.check(
        "relation pentagon",
        check_relation(pent, ["v", "w", "v", "w", "v"], {"v": "w", "w": "v"}),
    )

    rng = random.Random(471203)
    mutable = [v for v in fx.seed0.nodes if v not in fx.seed0.frozen]
    done = 0
    bad = 0
    while done < 100:
        u = mutable[done % len(mutable)]
        exps = random_balanced_vector(fx.T, rng)
        if not commutation_exponent(fx.seed0, u, exps).is_integer:
            continue
        done += 1
        m = LaurentPoly({exps: OmegaPoly.one()})
        post = mutate_sequence(fx.seed0, [u])
        y = nu_omega(post, u, m)
        z = nu_omega(fx.seed0, u, y)
        if is_laurent(fx.seed0, z) != m:
            bad += 1
    rep.check(
        "balanced involution 100 monomials",
        bad == 0,
        f"{bad} of 100 balanced monomials not restored",
    )


# -- criterion 5: product law vs. brute-force normal ordering -----------------


def _normal_order(seed: Seed, word: list[tuple[str, int]]) -> tuple[int, tuple[int, ...]]:
    word = [(v, a) for v, a in word if a]
    phase2 = 0
    changed = True
    while changed:
        changed = False
        for i in range(len(word) - 1):
            (v, a), (w, b) = word[i], word[i + 1]
            if seed.index(v) > seed.index(w):
                phase2 += 2 * seed.eps2(v, w) * a * b
                word[i], word[i + 1] = (w, b), (v, a)
                changed = True
    dense = [0] * len(seed.nodes)
    for v, a in word:
        dense[seed.index(v)] += a
    return phase2, tuple(dense)


def _weyl_phase2(seed: Seed, exps: ExponentVector) -> int:
    nodes = seed.nodes
    return -sum(
        seed.eps2(nodes[i], nodes[j]) * exps.z(nodes[i]) * exps.z(nodes[j])
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
    )


def _expand_weyl(seed: Seed, m: WeylMonomial) -> tuple[int, tuple[int, ...], int]:
    word = [(v, m.exps.z(v)) for v in seed.nodes]
    phase2, dense = _normal_order(seed, word)
    return m.phase2 + _weyl_phase2(seed, m.exps) + phase2, dense, m.sign


def criterion_product_law(rep: Report, regen: bool = False) -> None:
    rng = random.Random(987001)
    trials = 1000
    bad = 0
    for _ in range(trials):
        n = rng.randrange(2, 13)
        nodes = tuple(f"n{i}" for i in range(n))
        frozen = tuple(v for v in nodes if rng.random() < 0.3)
        eps2: dict[tuple[str, str], int] = {}
        for i in range(n):
            for j in range(i + 1, n):
                # half-integer interactions need both endpoints frozen
                if nodes[i] in frozen and nodes[j] in frozen:
                    v = rng.randrange(-2, 3)
                else:
                    v = 2 * rng.randrange(-1, 2)
                if v:
                    eps2[(nodes[i], nodes[j])] = v
                    eps2[(nodes[j], nodes[i])] = -v
        seed = Seed(nodes, frozen, eps2)

        def sample() -> WeylMonomial:
            exps = ExponentVector(
                {v: rng.randrange(-6, 7) for v in nodes if rng.random() < 0.5}
            )
            return WeylMonomial(exps, rng.randrange(-8, 9), rng.choice((1, -1)))

        m1, m2 = sample(), sample()
        prod = mono_mul(seed, m1, m2)
        p1, _, s1 = _expand_weyl(seed, m1)
        p2, _, s2 = _expand_weyl(seed, m2)
        word = [(v, m1.exps.z(v)) for v in nodes] + [(v, m2.exps.z(v)) for v in nodes]
        swap_phase2, dense = _normal_order(seed, word)
        got_phase2, got_dense, got_sign = _expand_weyl(seed, prod)
        if not (
            got_dense == dense
            and got_sign == s1 * s2
            and got_phase2 == p1 + p2 + swap_phase2
        ):
            bad += 1
    rep.check(
        f"product law {trials} random pairs",
        bad == 0,
        f"{bad} products disagree with normal ordering",
    )


# -- criterion 6: balancedness and exponent integrality -----------------------


def criterion_balance(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    for entry in fx.entries:
        bad = []
        for st in STATES:
            if verify_trace_balanced(fx.T, fx.L, fx.lhs(entry.wid, st)).failures:
                bad.append(f"pre {st}")
            if verify_trace_balanced(fx.flipped, fx.fL, fx.rhsp(entry.wid, st)).failures:
                bad.append(f"flipped {st}")
        rep.check(
            f"balanced {entry.wid}", not bad, f"unbalanced values: {', '.join(bad)}"
        )

    alias_node = {k: n for n, k in fx.aliases.items()}
    expected_rows = {
        (0, fx.stage_nodes[0]): {2: 1, 7: -1, 8: -1, 12: 1},
        (1, fx.stage_nodes[1]): {5: -1, 12: -1, 7: 1, 11: 1},
        (2, fx.stage_nodes[2]): {1: 1, 4: 1, 3: -1, 6: -1},
        (3, fx.stage_nodes[3]): {3: 1, 10: 1, 4: -1, 9: -1},
    }
    for (si, u), want in expected_rows.items():
        got = {
            fx.aliases[v]: fx.stages[si].eps2(u, v) // 2
            for v in fx.stages[si].nodes
            if fx.stages[si].eps2(u, v)
        }
        label = f"mutation-row stage {si} at node {fx.aliases[u]}"
        rep.check(label, got == want, f"row {got} expected {want}")

    rng = random.Random(55100)
    trials = 1000
    bad_int: list[int] = []
    bad_closed: list[int] = []
    bad_exit: list[int] = []
    for trial in range(trials):
        sample = random_balanced_vector(fx.flipped, rng)
        a4 = ExponentVector({fx.inv_iota[n]: z for n, z in sample.items()})
        ap = {j: a4.z(alias_node[j]) for j in range(1, 13)}
        chain = {4: a4}
        alphas = {}
        for r in (4, 3, 2, 1):
            pre = fx.stages[r - 1]
            u = fx.stage_nodes[r - 1]
            chain[r - 1] = transform_exponents(pre, u, chain[r])
            alphas[r] = commutation_exponent(pre, u, chain[r - 1])
        closed = {
            4: ap[3] + ap[10] - ap[4] - ap[9],
            3: ap[1] + ap[4] - ap[3] - ap[6],
            2: -ap[5] - ap[4] - ap[9] + ap[12] - ap[7] + ap[3] + ap[6] + ap[11],
            1: ap[2] + ap[4] + ap[9] - ap[12] + ap[7] - ap[3] - ap[6] - ap[8],
        }
        if not all(alphas[r].is_integer for r in (1, 2, 3, 4)):
            bad_int.append(trial)
            continue
        if any(3 * alphas[r].as_int() != closed[r] for r in (1, 2, 3, 4)):
            bad_closed.append(trial)
        if chain[0].z(fx.stage_nodes[0]) != -ap[7] + ap[6] + ap[8]:
            bad_exit.append(trial)
    rep.check(
        f"stage exponents integral on {trials} balanced vectors",
        not bad_int,
        f"non-integral at trials {bad_int[:5]}",
    )
    rep.check(
        "stage exponent closed forms",
        not bad_closed,
        f"closed-form mismatch at trials {bad_closed[:5]}",
    )
    rep.check(
        "first-stage exit exponent closed form",
        not bad_exit,
        f"mismatch at trials {bad_exit[:5]}",
    )


# -- criterion 7: classical structure -----------------------------------------


def _pow_poly(seed: Seed, p: LaurentPoly, n: int) -> LaurentPoly:
    out = LaurentPoly.one()
    for _ in range(n):
        out = poly_mul(seed, out, p)
    return out


def _classical_nu_poly(pre: Seed, u: str, p: LaurentPoly) -> tuple[LaurentPoly, int]:
    """Classical single-mutation image of a commutative polynomial.

    Returns (numerator, d) with the image equal to numerator/(1+X_u)^d over
    the target algebra.
    """
    cpre = classical_seed(pre)
    one_plus = poly_add(LaurentPoly.one(), LaurentPoly.x_var(u))
    moved = []
    for e, c in p.terms.items():
        e2 = transform_exponents(pre, u, e)
        alpha = commutation_exponent(pre, u, e2).as_int()
        moved.append((e2, c, alpha))
    d = max((-a for _, _, a in moved if a < 0), default=0)
    num = LaurentPoly.zero()
    for e2, c, a in moved:
        term = poly_mul(cpre, LaurentPoly.monomial(e2, c), _pow_poly(cpre, one_plus, a + d))
        num = poly_add(num, term)
    return num, d


def classical_flip_transport(fx: QuadFixture, p: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    """Commutative counterpart of the four-stage flip transport.

    Input: a classical Laurent polynomial over the flipped quiver's nodes.
    Output: (numerator, denominator) over the original quiver at q = 1.
    """
    num = relabel_poly(p, fx.inv_iota)
    den = LaurentPoly.one()
    for r in (4, 3, 2, 1):
        pre = fx.stages[r - 1]
        u = fx.stage_nodes[r - 1]
        cpre = classical_seed(pre)
        one_plus = poly_add(LaurentPoly.one(), LaurentPoly.x_var(u))
        n2, dn = _classical_nu_poly(pre, u, num)
        d2, dd = _classical_nu_poly(pre, u, den)
        num = poly_mul(cpre, n2, _pow_poly(cpre, one_plus, dd))
        den = poly_mul(cpre, d2, _pow_poly(cpre, one_plus, dn))
    return num, den


def criterion_structure(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()
    cseed0 = classical_seed(fx.seed0)
    one_poly = LaurentPoly.one()
    for entry in fx.entries:
        pre = fx.pre_path(entry.wid)
        names = [("pre", fx.T, fx.L, pre)]
        if entry.post is not None:
            names.append(("flipped", fx.flipped, fx.fL, fx.post_path(entry.wid)))
        for side, T, L, path in names:
            m = classical_product(path_matrices(T, L, path))
            rep.check(
                f"determinant {entry.wid} {side}",
                classical_determinant(m) == one_poly,
                "classical determinant is not 1",
            )
        if pre.closed:
            value = fx.loop_lhs(entry.wid)
            rep.check(f"star-invariant {entry.wid}", star(fx.seed0, value) == value)
            cl = classicalize(value)
            rep.check(
                f"weyl-lift {entry.wid}",
                weyl_quantize(cl) == value and classicalize(weyl_quantize(cl)) == cl,
            )
            continue
        star_ok = True
        lift_ok = True
        classical_ok = True
        for st in STATES:
            value = fx.lhs(entry.wid, st)
            if star(fx.seed0, value) != value:
                star_ok = False
            cl = classicalize(value)
            if weyl_quantize(cl) != value or classicalize(weyl_quantize(cl)) != cl:
                lift_ok = False
            num, den = classical_flip_transport(
                fx, classicalize(fx.rhsp(entry.wid, st)))
            if poly_mul(cseed0, cl, den) != num:
                classical_ok = False
        rep.check(f"star-invariant {entry.wid}", star_ok)
        rep.check(f"weyl-lift {entry.wid}", lift_ok)
        rep.check(
            f"classical-transport {entry.wid}",
            classical_ok,
            "commutative transport disagrees with the direct value",
        )


# -- criterion 8: cutting compatibility ---------------------------------------

PENTAGON_TEXT = """triangle u1 P Q G
triangle u2 G R H
triangle u3 H S Tt
boundary P Q R S Tt
"""


def _u_balanced_sample(seed: Seed, u: str, rng: random.Random) -> ExponentVector:
    """Random integer-unit vector whose commutation exponent at u is integral."""
    while True:
        z = {v: rng.randint(-4, 4) for v in seed.nodes if rng.random() < 0.7}
        e = ExponentVector(z)
        r0 = commutation_exponent(seed, u, e).tripled % 3
        if r0:
            fixed = False
            for w in seed.nodes:
                s = seed.eps2(u, w) // 2
                if s in (1, -1):
                    e = ExponentVector(dict(e.items()) | {w: e.z(w) - r0 * s})
                    fixed = True
                    break
            if not fixed:
                continue
        if commutation_exponent(seed, u, e).is_integer:
            return e


def criterion_cutting(rep: Report, regen: bool = False) -> None:
    fx = quad_fixture()

    # quadrilateral: state sum over the cut diagonal
    cut_T, _ = cut(fx.T, "D")
    cmap = cutting_map(fx.T, "D")
    cut_seed, cut_L = build_3triangulation_quiver(cut_T)
    for entry in fx.entries:
        path = fx.pre_path(entry.wid)
        if path.closed or all(s.entry != "D" and s.exit != "D" for s in path.steps):
            continue
        sum_ok = True
        for e1, e2 in STATES:
            lhs = cmap(fx.lhs(entry.wid, (e1, e2)))
            rhs = LaurentPoly.zero()
            for m in (1, 2, 3):
                mids = (e1, m, e2)
                halves = []
                for i, s in enumerate(path.steps):
                    entry_arc = s.entry
                    if entry_arc == "D":
                        entry_arc = "D.1" if s.triangle == "t7" else "D.2"
                    halves.append(
                        single_triangle_trace(
                            cut_T, cut_L, s.triangle, s.turn,
                            StatePair(mids[i], mids[i + 1]), entry=entry_arc))
                rhs = poly_add(rhs, poly_mul(cut_seed, halves[0], halves[1]))
            if lhs != rhs:
                sum_ok = False
        rep.check(
            f"cut state-sum {entry.wid}",
            sum_ok,
            "state sum over the cut arc disagrees",
        )

    # pentagon: cutting an off-flip arc commutes with the flip transport
    TP = build_triangulation(PENTAGON_TEXT)
    pent_seed, _ = build_3triangulation_quiver(TP)
    TPf, ctxP, _ = flip(TP, "H")
    TP_cut, _ = cut(TP, "G")
    cut_seed0, _ = build_3triangulation_quiver(TP_cut)
    TP_cut_f, ctxC, _ = flip(TP_cut, "H")
    TPf_cut, _ = cut(TPf, "G")
    rep.check(
        "cut/flip surface square",
        TPf_cut.triangles == TP_cut_f.triangles
        and TPf_cut.boundary == TP_cut_f.boundary
        and ctxP.mutation_nodes == ctxC.mutation_nodes,
        "cut-then-flip and flip-then-cut disagree on the surface",
    )
    iP = cutting_map(TP, "G")
    iPf = cutting_map(TPf, "G")

    stagesP = [pent_seed]
    stagesC = [cut_seed0]
    for u in ctxP.mutation_nodes:
        stagesP.append(mutate_sequence(stagesP[-1], [u]))
        stagesC.append(mutate_sequence(stagesC[-1], [u]))

    def cut_rat(x: QuantumRational) -> QuantumRational:
        return QuantumRational(
            [(iP.apply_poly(num), denoms) for num, denoms in x.terms])

    rng = random.Random(90807)
    for r in (4, 3, 2, 1):
        u = ctxP.mutation_nodes[r - 1]
        stage_ok = True
        for _ in range(25):
            e = _u_balanced_sample(stagesP[r], u, rng)
            mono = LaurentPoly.monomial(e)
            lhs = cut_rat(nu_omega(stagesP[r - 1], u, mono))
            rhs = nu_omega(stagesC[r - 1], u, iP.apply_poly(mono))
            if normalize(stagesC[r - 1], lhs) != normalize(stagesC[r - 1], rhs):
                stage_ok = False
        rep.check(
            f"cut/mutation square stage {r}",
            stage_ok,
            "cutting does not commute with this mutation",
        )

    done = tried = 0
    composite_ok = True
    while done < 10 and tried < 400:
        tried += 1
        a = random_balanced_vector(TPf, rng, integer_span=1)
        mono = LaurentPoly.monomial(a)
        try:
            lhs = cut_rat(theta_flip(TP, ctxP, mono))
            rhs = theta_flip(TP_cut, ctxC, iPf.apply_poly(mono))
            nl = normalize(cut_seed0, lhs)
            nr = normalize(cut_seed0, rhs)
        except NormalizationError:
            continue
        done += 1
        if nl != nr:
            composite_ok = False
    rep.check(
        f"cut/flip composite square ({done} transportable samples)",
        composite_ok and done >= 5,
        "composite transport does not commute with cutting",
    )


# -- criterion 9: peripheral loops on the punctured square --------------------


def criterion_peripheral_loop(rep: Report, regen: bool = False) -> None:
    S = parse_surface_input(_packaged("data", "punctured_square.surf").read_text())
    entries = parse_web_entries(_packaged("data", "peripheral_loops.web").read_text())
    T = S.T
    seed0, L = build_3triangulation_quiver(T)
    flipped, ctx, _ = flip(T, "s0")
    _, fL = build_3triangulation_quiver(flipped)
    for entry in entries:
        _, path = parse_web(T, entry.pre)
        value = loop_trace(T, L, path)
        positive = all(
            c.is_single_term() and c.single_term()[1] == 1
            for c in value.terms.values()
        )
        rep.check(
            f"loop {entry.wid} three positive terms",
            len(value.terms) == 3 and positive,
            f"{len(value.terms)} terms",
        )
        ht = peripheral_highest_term(value)
        rep.check(
            f"loop {entry.wid} dominant term trivial phase",
            ht.phase2 == 0 and ht.sign == 1,
            f"phase2={ht.phase2} sign={ht.sign}",
        )
        if entry.post is None:
            continue
        _, fpath = parse_web(flipped, entry.post)
        fvalue = loop_trace(flipped, fL, fpath)
        image = is_laurent(seed0, normalize(seed0, theta_flip(T, ctx, fvalue)))
        rep.check(
            f"loop {entry.wid} transported across flip",
            image == value,
            "transported loop value differs",
        )
        fht = peripheral_highest_term(fvalue)
        ht_image = is_laurent(seed0, theta_flip(T, ctx, fht.as_poly()))
        rep.check(
            f"loop {entry.wid} dominant term transported",
            ht_image == ht.as_poly(),
            "transported dominant term differs",
        )


# -- criteria registry --------------------------------------------------------

CRITERIA: list[tuple[int, str, Callable[[Report, bool], None]]] = [
    (1, "flip-theorem", criterion_flip_theorem),
    (2, "tables-golden", criterion_tables_golden),
    (3, "step1-laurent", criterion_step1_laurent),
    (4, "mutation-consistency", criterion_mutation_consistency),
    (5, "product-law", criterion_product_law),
    (6, "balance", criterion_balance),
    (7, "structure", criterion_structure),
    (8, "cutting", criterion_cutting),
    (9, "peripheral-loop", criterion_peripheral_loop),
]


def run_criterion(number: int, regen: bool = False) -> Report:
    for k, slug, fn in CRITERIA:
        if k == number:
            rep = Report(f"criterion-{k}")
            fn(rep, regen)
            return rep
    raise InputError(f"no criterion {number}")


def criterion_line(number: int, rep: Report) -> str:
    slug = next(s for k, s, _ in CRITERIA if k == number)
    status = "PASS" if rep.ok else f"FAIL ({len(rep.failures)}/{rep.nchecks} checks failed)"
    suffix = f" ({rep.nchecks} checks)" if rep.ok else ""
    return f"CRITERION {number} {slug}: {status}{suffix}"


def run_all_criteria(regen: bool = False, verbose: bool = False, out=print) -> bool:
    all_ok = True
    total = 0
    for k, slug, _ in CRITERIA:
        t0 = time.perf_counter()
        rep = run_criterion(k, regen)
        dt = time.perf_counter() - t0
        total += rep.nchecks
        if verbose or not rep.ok:
            for line in rep.lines:
                out(line)
        out(criterion_line(k, rep))
        print(f"# criterion {k} {slug} {dt:.2f}s", file=sys.stderr)
        all_ok = all_ok and rep.ok
    out(f"RESULT verify-all {'PASS' if all_ok else 'FAIL'} checks={total}")
    return all_ok


# -- flip-check command core --------------------------------------------------


def run_flip_check(
    S: SurfaceInput,
    arc: str,
    entries: list[WebEntry],
    style: str = "canonical",
    out=print,
) -> bool:
    T = S.T
    seed0, L = build_3triangulation_quiver(T)
    flipped, ctx, iota = flip(T, arc)
    _, fL = build_3triangulation_quiver(flipped)
    faliases = {iota[v]: k for v, k in S.aliases.items()}
    n3, n4 = ctx.mutation_nodes[0], ctx.mutation_nodes[1]
    S1 = mutate_sequence(seed0, [n3])
    S2 = mutate_sequence(S1, [n4])
    key = dense_term_key(S.aliases)

    rep = Report("flip-check")
    for entry in entries:
        rep.info(f"web {entry.wid}: {entry.pre}")
        if entry.post is None:
            rep.info(f"web {entry.wid} has no flipped description; skipped")
            continue
        _, pre = parse_web(T, entry.pre)
        _, post = parse_web(flipped, entry.post)
        pre_seq = path_node_sequence(pre)
        post_seq = path_node_sequence(post)

        if pre.closed:
            lhs = loop_trace(T, L, pre)
            rhs = loop_trace(flipped, fL, post)
            image = is_laurent(seed0, normalize(seed0, theta_flip(T, ctx, rhs)))
            rep.check(f"flip {entry.wid}", image == lhs)
            rep.info(f"{entry.wid} pre quantum | "
                     + render_value(lhs, pre_seq, S.aliases, style))
            rep.info(f"{entry.wid} flipped quantum | "
                     + render_value(rhs, post_seq, faliases, style))
            rep.info(f"{entry.wid} transported quantum | "
                     + ("(not Laurent)" if image is None
                        else render_value(image, pre_seq, S.aliases, style)))
            rep.info(f"{entry.wid} pre classical | "
                     + render_value(lhs, pre_seq, S.aliases, style, omega_one=True))
            rep.info(f"{entry.wid} transported classical | "
                     + ("(not Laurent)" if image is None
                        else render_value(image, pre_seq, S.aliases, style, omega_one=True)))
            continue

        alphas: list[int] = []
        alphaps: list[int] = []
        for e1, e2 in STATES:
            st = StatePair(e1, e2)
            label = f"{entry.wid} ({e1},{e2})"
            lhs = edge_trace(T, L, pre, st)
            rhs = edge_trace(flipped, fL, post, st)
            image = is_laurent(seed0, normalize(seed0, theta_flip(T, ctx, rhs)))
            rep.check(f"flip {label}", image == lhs)
            rep.info(f"{label} pre quantum | "
                     + render_value(lhs, pre_seq, S.aliases, style))
            rep.info(f"{label} flipped quantum | "
                     + render_value(rhs, post_seq, faliases, style))
            rep.info(f"{label} transported quantum | "
                     + ("(not Laurent)" if image is None
                        else render_value(image, pre_seq, S.aliases, style)))
            rep.info(f"{label} pre classical | "
                     + render_value(lhs, pre_seq, S.aliases, style, omega_one=True))
            rep.info(f"{label} transported classical | "
                     + ("(not Laurent)" if image is None
                        else render_value(image, pre_seq, S.aliases, style, omega_one=True)))

            y = nu_omega(S1, n3, lhs)
            z = nu_omega(S2, n4, y)
            half = is_laurent(S2, normalize(S2, z))
            rep.check(
                f"step1 {label}",
                half is not None and is_multiplicity_free(half),
                "two-mutation image is not a multiplicity-free Laurent element",
            )
            for e in sorted(lhs.terms, key=key):
                alphas.append(commutation_exponent(S1, n3, e).as_int())
                alphaps.append(commutation_exponent(S2, n4, e).as_int())
        rep.raw(f"ALPHA {entry.wid} | " + " ".join(str(a) for a in alphas))
        rep.raw(f"ALPHAP {entry.wid} | " + " ".join(str(a) for a in alphaps))
    return rep.finish(out)


# -- commands -----------------------------------------------------------------


def cmd_mutate(args: argparse.Namespace) -> int:
    seed = parse_seed(read_input_text(args.seed_file))
    for node in args.nodes:
        if node not in seed.nodes:
            raise InputError(f"unknown node {node!r}")
        if node in seed.frozen:
            raise InputError(f"cannot mutate frozen node {node!r}")
    out = mutate_sequence(seed, args.nodes)
    text = render_seed(out)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    S = load_surface(args.surface)
    entries = load_webs(args.webs)
    if args.web is None:
        if len(entries) > 1:
            raise InputError(
                "web file has several webs; pick one with --web "
                f"({', '.join(e.wid for e in entries)})")
        entry = entries[0]
    else:
        matches = [e for e in entries if e.wid == args.web]
        if not matches:
            raise InputError(f"no web {args.web!r} in {args.webs}")
        entry = matches[0]
    _, path = parse_web(S.T, entry.pre)
    _, L = build_3triangulation_quiver(S.T)
    if path.closed:
        if args.state is not None:
            raise InputError("closed webs take no --state")
        value = loop_trace(S.T, L, path)
    else:
        if args.state is None:
            raise InputError("open webs need --state E1,E2")
        value = edge_trace(S.T, L, path, parse_state(args.state))
    print(render_value(value, path_node_sequence(path), S.aliases,
                       args.render, args.omega_one))
    return 0


def cmd_tables(args: argparse.Namespace) -> int:
    S = load_surface(args.surface)
    entries = load_webs(args.webs)
    blocks = []
    for entry in entries:
        _, path = parse_web(S.T, entry.pre)
        if path.closed:
            continue
        blocks.append(_web_table_text_generic(S, args.arc, entry))
    sys.stdout.write("\n".join(blocks))
    return 0


def _web_table_text_generic(S: SurfaceInput, arc: str, entry: WebEntry) -> str:
    T = S.T
    seed0, L = build_3triangulation_quiver(T)
    _, ctx, _ = flip(T, arc)
    n3, n4 = ctx.mutation_nodes[0], ctx.mutation_nodes[1]
    S1 = mutate_sequence(seed0, [n3])
    S2 = mutate_sequence(S1, [n4])
    key = dense_term_key(S.aliases)
    _, path = parse_web(T, entry.pre)
    cols: list[TableColumn] = []
    for e1, e2 in STATES:
        value = edge_trace(T, L, path, StatePair(e1, e2))
        terms = sorted(value.terms, key=key)
        for k, e in enumerate(terms, start=1):
            header = f"({e1},{e2})" + (f"_{k}" if len(terms) > 1 else "")
            cols.append(TableColumn(
                header, e,
                commutation_exponent(S1, n3, e).as_int(),
                commutation_exponent(S2, n4, e).as_int()))
    return format_table(entry.wid, cols, table_node_sequence(T, path), S.aliases)


def cmd_flip_check(args: argparse.Namespace) -> int:
    S = load_surface(args.surface)
    entries = load_webs(args.webs)
    t0 = time.perf_counter()
    ok = run_flip_check(S, args.arc, entries, args.render)
    print(f"# flip-check {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0 if ok else 1


def cmd_consistency(args: argparse.Namespace) -> int:
    seed = parse_seed(read_input_text(args.seed_file))
    for node in args.nodes:
        if node not in seed.nodes:
            raise InputError(f"unknown node {node!r}")
    rep = Report("consistency")
    if args.relation == "involution":
        if len(args.nodes) != 1:
            raise InputError("involution takes one node")
        (u,) = args.nodes
        rep.check(f"involution {u}", check_relation(seed, [u, u]))
    elif args.relation == "square":
        if len(args.nodes) != 2:
            raise InputError("square takes two nodes")
        u, v = args.nodes
        if seed.eps2(u, v) != 0:
            raise InputError("square relation needs a non-interacting node pair")
        rep.check(f"square {u} {v}", check_relation(seed, [u, v, u, v]))
    elif args.relation == "pentagon":
        if len(args.nodes) != 2:
            raise InputError("pentagon takes two nodes")
        u, v = args.nodes
        if seed.eps2(u, v) == -2:
            u, v = v, u
        if seed.eps2(u, v) != 2:
            raise InputError("pentagon relation needs a unit-interaction node pair")
        rep.check(
            f"pentagon {u} {v}",
            check_relation(seed, [u, v, u, v, u], {u: v, v: u}))
    elif args.relation == "word":
        if not args.nodes:
            raise InputError("word takes at least one node")
        rep.check(
            "word " + " ".join(args.nodes),
            check_relation(seed, list(args.nodes)))
    else:
        raise InputError(f"unknown relation {args.relation!r}")
    ok = rep.finish()
    return 0 if ok else 1


def cmd_verify_all(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    ok = run_all_criteria(regen=args.regen_golden, verbose=args.verbose)
    print(f"# verify-all {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0 if ok else 1


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsurf",
        description="Exact quantum coordinate computations on triangulated surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mutate", help="mutate a seed file at the given nodes")
    p.add_argument("seed_file")
    p.add_argument("nodes", nargs="+")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("trace", help="print a web's trace value")
    p.add_argument("surface")
    p.add_argument("webs")
    p.add_argument("--web", help="web id when the file has several")
    p.add_argument("--state", help="edge states E1,E2 for an open web")
    p.add_argument("--render", choices=RENDER_STYLES, default="canonical")
    p.add_argument("--omega-one", action="store_true",
                   help="render the classical specialization")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("tables", help="print per-term exponent tables")
    p.add_argument("surface")
    p.add_argument("arc", help="arc whose flip defines the two mutations")
    p.add_argument("webs")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("flip-check", help="compare trace values across a flip")
    p.add_argument("surface")
    p.add_argument("arc")
    p.add_argument("webs")
    p.add_argument("--render", choices=RENDER_STYLES, default="canonical")
    p.set_defaults(func=cmd_flip_check)

    p = sub.add_parser("consistency", help="check a composed-mutation relation")
    p.add_argument("seed_file")
    p.add_argument("relation", choices=("involution", "square", "pentagon", "word"))
    p.add_argument("nodes", nargs="*")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("verify-all", help="run the full verification suite")
    p.add_argument("--regen-golden", action="store_true",
                   help="rewrite the golden files from the current computation")
    p.add_argument("--verbose", action="store_true",
                   help="print every check line, not only failures")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
