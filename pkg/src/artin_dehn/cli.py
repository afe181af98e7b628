"""Command-line front end and the batch experiment runner."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .analysis import Shape, c4t4_corpus, greendlinger, layer_structure, one_layer_decompose, theoremC_cases
from .bands_moves import (
    MoveError,
    Prism,
    cancelling_corners,
    cube,
    cube_corner,
    cube_corner_with_flap,
    diamond_move,
    extract_bands,
    i_move,
    identity_sequence_check,
    make_prism,
    random_bouquet,
    random_imove_instance,
    reduced_boundary,
    same_cyclic_word,
    transfer_region,
)
from .diagram import (
    SPHERICAL,
    Diagram,
    DiagramError,
    classify_regions,
    deserialize,
    diagram_C4T4,
    free_reduce_diagram,
    serialize,
    to_dot,
    validate,
)
from .presentation import (
    GraphError,
    LabeledGraph,
    artin_relator,
    check_Cp,
    check_Tq,
    compute_pieces,
    load_graph,
    presentation_from_graph,
    subgraph,
)
from .quotients import (
    AdequacyError,
    QuotientError,
    build_coarse,
    build_howie,
    build_tilde,
    howie_square_example,
    lemma_checks,
    octagon,
    psi_t,
    random_chain,
    t_set,
    two_friendly_octagons,
    two_octagons_with_band,
    ht_solver_for,
    verify_howie,
)
from .solver import (
    ClassError,
    SearchCaps,
    Status,
    bfs_verdicts,
    bounded_diagram_search,
    decide,
    diagram_from_trace,
    dihedral_decide,
    min_area,
    pile_decide,
    sample_with_witness,
)
from .words import Word, WordParseError, cyclic_classes, cyclic_syllables, format_word, is_cyclically_reduced

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def worker_count() -> int:
    raw = os.environ.get("ARTIN_DEHN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ARTIN_DEHN_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over worker processes (sequential for one worker)."""
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ----------------------------------------------------------------------
# experiment suites


@dataclass
class SuiteResult:
    suite: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    passed: bool = True
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def fail(self, note: str) -> None:
        self.passed = False
        if len(self.notes) < 50:
            self.notes.append(note)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteResult":
        return cls(**data)

    def to_text(self) -> str:
        cells = [self.columns] + [[_cell(c) for c in r] for r in self.rows]
        widths = [max(len(str(r[i])) for r in cells) for i in range(len(self.columns))]
        lines = [f"suite {self.suite}"]
        for r in cells:
            lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())
        for k in sorted(self.summary):
            lines.append(f"{k}: {_cell(self.summary[k])}")
        lines += [f"note: {n}" for n in self.notes]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


def _cell(c) -> str:
    if isinstance(c, bool):
        return "yes" if c else "no"
    return str(c)


def suite_relators(seed: int = 0) -> SuiteResult:
    res = SuiteResult("relators", ["m", "relator", "length", "cyclically reduced", "formula"])
    for m in (2, 4, 5, 6, 7, 8):
        r = artin_relator("a", "b", m)
        if m % 2 == 0:
            k = m // 2
            expected = Word.parse(" ".join(["a b"] * k + ["a^-1 b^-1"] * k))
            formula = r == expected
        else:
            formula = None
        ok = len(r) == 2 * m and is_cyclically_reduced(r) and formula is not False
        res.rows.append([m, format_word(r), len(r), is_cyclically_reduced(r), "-" if formula is None else formula])
        if not ok:
            res.fail(f"m={m}")
    return res


def suite_small_cancellation(seed: int = 0) -> SuiteResult:
    res = SuiteResult("small-cancellation", ["m", "max piece length", "C(4)", "T(4)"])
    for m in (2, 4, 5, 6, 7):
        p = presentation_from_graph(LabeledGraph.build("ab", [("a", "b", m)]))
        table = compute_pieces(p)
        cp, tq = check_Cp(p, 4, table), check_Tq(p, 4)
        res.rows.append([m, table.max_piece_length, cp, tq])
        if table.max_piece_length != 1:
            res.fail(f"m={m}: max piece length {table.max_piece_length}")
        if not (cp and tq):
            res.fail(f"m={m}: C(4)={cp} T(4)={tq}")
    return res


def _family(name: str) -> str:
    return name.split()[0]


def suite_greendlinger(seed: int = 0, count: int = 200) -> SuiteResult:
    res = SuiteResult("greendlinger", ["family", "diagrams", "min sum defect", "two-region cases", "one-layer"])
    stats: dict[str, list] = {}
    for name, d in c4t4_corpus(count, seed):
        r = greendlinger(d)
        s = stats.setdefault(_family(name), [0, None, 0, 0])
        s[0] += 1
        s[1] = r.sum_defect if s[1] is None else min(s[1], r.sum_defect)
        if r.sum_defect < 4 or r.problems:
            res.fail(f"{name}: sum defect {r.sum_defect} {r.problems}")
        if len(r.regions) == 2:
            s[2] += 1
            if r.shape == Shape.ONE_LAYER and one_layer_decompose(d) is not None:
                s[3] += 1
            else:
                res.fail(f"{name}: two Greendlinger regions but shape {r.shape.value}")
    for fam in sorted(stats):
        res.rows.append([fam] + stats[fam])
    res.summary["diagrams"] = sum(s[0] for s in stats.values())
    return res


def suite_layers(seed: int = 0, count: int = 200) -> SuiteResult:
    res = SuiteResult("layers", ["family", "base vertices", "max alpha", "max beta", "convex", "violations"])
    stats: dict[str, list] = {}
    for name, d in c4t4_corpus(count, seed):
        s = stats.setdefault(_family(name), [0, 0, 0, True, 0])
        for v in sorted(d.vertices):
            ls = layer_structure(d, v)
            s[0] += 1
            s[1] = max(s[1], max(ls.alpha.values(), default=0))
            s[2] = max(s[2], max(ls.beta.values(), default=0))
            s[3] = s[3] and ls.convex
            s[4] += len(ls.violations)
            if not ls.convex or ls.violations:
                res.fail(f"{name} at {v}: {ls.violations[:2]}")
    for fam in sorted(stats):
        res.rows.append([fam] + stats[fam])
    return res


def _move_graph() -> LabeledGraph:
    return LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 4), ("a", "c", 2)])


def suite_moves(seed: int = 0, diamonds: int = 1000, imoves: int = 100) -> SuiteResult:
    res = SuiteResult("moves", ["move", "applied", "boundary kept", "area kept", "Reg4+ not increased"])
    rng = random.Random(seed)
    p = presentation_from_graph(_move_graph())
    done = kept = area_kept = 0
    while done < diamonds:
        d = random_bouquet(p, rng)
        while done < diamonds:
            corners = cancelling_corners(d)
            if not corners:
                break
            a = rng.choice(corners)
            try:
                new, rec = diamond_move(d, d.head(a), a, presentation=p)
            except MoveError as exc:
                res.fail(f"diamond move refused: {exc}")
                break
            done += 1
            kept += same_cyclic_word(reduced_boundary(d), reduced_boundary(new)) and validate(new).ok
            area_kept += rec.before.area == rec.after.area
            d = new
    res.rows.append(["diamond", done, kept, area_kept, "-"])
    if kept != done or area_kept != done:
        res.fail("a diamond move changed the boundary or the area")

    # the cube-corner instances first, then random prism instances
    cases = []
    c = cube()
    m0 = cube_corner()
    cases.append(("cube corner", m0, m0.inner_faces(), c))
    flap = cube_corner_with_flap()
    cases.append(("cube corner with flap", flap, [1, 2, 3], c))
    while len(cases) < imoves:
        d, faces, prism = random_imove_instance(rng)
        cases.append(("random", d, faces, prism))
    applied = kept = not_more = 0
    for name, d, faces, prism in cases:
        before = len(classify_regions(d).reg4plus)
        try:
            new, rec, _ = i_move(d, faces, prism)
        except MoveError as exc:
            res.fail(f"{name}: I-move refused: {exc}")
            continue
        applied += 1
        ok = validate(new).ok and same_cyclic_word(reduced_boundary(d), reduced_boundary(new))
        kept += ok
        not_more += len(classify_regions(new).reg4plus) <= before
        if name == "cube corner":
            res.summary["cube corner area"] = f"{d.area()} -> {new.area()}"
            res.summary["cube corner boundary"] = format_word(new.boundary_word())
        if name == "cube corner with flap":
            a0 = d.area()
            free_reduce_diagram(new)
            res.summary["flap area after free reduction"] = f"{a0} -> {new.area()}"
            if (a0, new.area()) != (4, 2):
                res.fail(f"flap instance: area {a0} -> {new.area()}, expected 4 -> 2")
    res.rows.append(["I-move", applied, kept, "-", not_more])
    if kept != len(cases) or not_more != len(cases):
        res.fail("an I-move changed the boundary or increased Reg4+")
    return res


def suite_prisms(seed: int = 0) -> SuiteResult:
    res = SuiteResult("prisms", ["m", "faces", "expected", "euler", "identity sequence"])
    for m in (4, 5, 6):
        g = LabeledGraph.build("ijk", [("i", "j", 2), ("j", "k", 2), ("i", "k", m)])
        s = make_prism(g, "i", "j", "k").sphere
        n = len(s.inner_faces())
        idc = identity_sequence_check(s)
        res.rows.append([m, n, 2 * m + 2, s.euler(), idc])
        if n != 2 * m + 2 or s.euler() != 2 or s.kind != SPHERICAL or not idc:
            res.fail(f"m={m}")
    return res


def quotient_corpus(seed: int = 0, count: int = 60) -> list[tuple[str, Diagram, LabeledGraph | None]]:
    out: list[tuple[str, Diagram, LabeledGraph | None]] = [("octagon", octagon(), None)]
    for k in (1, 2, 3, 4):
        out.append((f"two octagons, band {k}", two_octagons_with_band(k), None))
    out.append(("friendly octagons", two_friendly_octagons(), None))
    out.append(("howie square", howie_square_example(), None))
    rng = random.Random(seed)
    while len(out) < count:
        d, g = random_chain(rng)
        out.append((f"chain {len(out)}", d, g))
    return out


def suite_quotients(seed: int = 0, count: int = 60) -> SuiteResult:
    res = SuiteResult("quotients", ["diagram", "t", "Reg4+ classes", "tilde area", "equal", "preimage checks"])
    for name, d, g in quotient_corpus(seed, count):
        p = presentation_from_graph(g) if g is not None else None
        for t in sorted(t_set(d, p)):
            ps = psi_t(d, t, p)
            lhs, rhs = len(ps.coarse.reg4plus), ps.tilde.diagram.area()
            bad = lemma_checks(ps)
            res.rows.append([name, t, lhs, rhs, lhs == rhs, "ok" if not bad else len(bad)])
            if lhs != rhs:
                res.fail(f"{name}, t={t}: {lhs} != {rhs}")
            for b in bad[:3]:
                res.fail(f"{name}, t={t}: {b}")
    res.summary["instances"] = len(res.rows)
    return res


MINIMAL_GRAPHS = {
    "triangle 4,2,2": LabeledGraph.build("abc", [("a", "b", 4), ("b", "c", 2), ("a", "c", 2)]),
    "path 4,4": LabeledGraph.build("abc", [("a", "b", 4), ("b", "c", 4)]),
    "triangle 4,4,2": LabeledGraph.build("abc", [("a", "b", 4), ("b", "c", 4), ("a", "c", 2)]),
}


def suite_minimal_quotients(seed: int = 0, target: int = 30, node_cap: int = 20_000) -> SuiteResult:
    """Minimal diagrams of sampled words; the bigon-collapsed quotient
    should satisfy C(4)&T(4) for every generator of a big region."""
    res = SuiteResult("minimal-quotients", ["graph", "seed", "|W|", "area", "T(M)", "C4T4 for all t"])
    diagrams = tried = 0
    skipped: dict[str, int] = {}
    names = sorted(MINIMAL_GRAPHS)
    s = seed
    while diagrams < target and tried < 40 * target:
        gname = names[tried % len(names)]
        g = MINIMAL_GRAPHS[gname]
        p = presentation_from_graph(g)
        tried += 1
        s += 1
        sample = sample_with_witness(p, 2 + s % 2, 2, s)
        v = bounded_diagram_search(sample.word, p, SearchCaps(area_cap=sample.witness_area, node_cap=node_cap))
        if v.status != Status.TRIVIAL:
            skipped["search cap"] = skipped.get("search cap", 0) + 1
            continue
        d = diagram_from_trace(v.word, v.trace)
        d.prune_spines()
        ts = sorted(t_set(d, p))
        if not ts:
            skipped["no big region"] = skipped.get("no big region", 0) + 1
            continue
        verdicts = []
        for t in ts:
            try:
                verdicts.append(diagram_C4T4(psi_t(d, t, p).tilde.diagram))
            except AdequacyError:
                verdicts.append(None)
        if None in verdicts:
            skipped["class not a disc"] = skipped.get("class not a disc", 0) + 1
            continue
        diagrams += 1
        ok = all(verdicts)
        res.rows.append([gname, s, len(v.word), d.area(), "".join(ts), ok])
        if not ok:
            res.fail(f"{gname} seed {s}: quotient not C(4)&T(4)")
    res.summary["diagrams"] = diagrams
    res.summary["skipped"] = dict(sorted(skipped.items()))
    if diagrams < target:
        res.fail(f"only {diagrams} diagrams with big regions")
    return res


WP_GRAPHS = {
    "edge m=4": LabeledGraph.build("ab", [("a", "b", 4)]),
    "path 2,4": LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 4)]),
    "triangle 2,2,2": LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 2), ("a", "c", 2)]),
}


def exact_verdict(w: Word, g: LabeledGraph) -> Status | None:
    """Verdict of the exact normal-form algorithms when one applies."""
    supp = sorted(w.support())
    if len(supp) <= 2:
        a, b = (supp + ["\0", "\0"])[:2]
        m = g.label(a, b) if len(supp) == 2 else 2
        return dihedral_decide(w, m, (a, b))
    sub = subgraph(g, supp)
    if all(m == 2 for _, _, m in sub.edges):
        return pile_decide(w, sub)
    return None


def syllable_violation(w: Word, g: LabeledGraph) -> str | None:
    """A trivial word must have at least four cyclic syllables, and with
    exactly four it must be a commutator of powers on a label-2 edge."""
    syl = cyclic_syllables(w)
    if len(syl) < 4:
        return f"{format_word(w)} has {len(syl)} syllables"
    if len(syl) == 4:
        (x, p, _, _), (y, q, _, _), (x2, p2, _, _), (y2, q2, _, _) = syl
        if not (x == x2 and y == y2 and p2 == -p and q2 == -q and g.label(x, y) == 2):
            return f"{format_word(w)} is not a commutator on a label-2 edge"
    return None


def _wp_graph(args) -> dict:
    name, max_len, radius, node_cap = args
    g = WP_GRAPHS[name]
    p = presentation_from_graph(g)
    words = [w for n in range(1, max_len + 1) for w in cyclic_classes(g.vertices, n)]
    caps = SearchCaps(node_cap=node_cap)
    bfs = bfs_verdicts(words, p, radius)
    counts = {k: {s.value: 0 for s in Status} for k in ("exact", "search", "bfs", "decide")}
    conflicts, syllables = [], []
    trivial = 0
    for w, b in zip(words, bfs):
        verdicts = {
            "exact": exact_verdict(w, g),
            "search": bounded_diagram_search(w, p, caps).status,
            "bfs": b.status,
            "decide": decide(w, g, caps).status,
        }
        for k, v in verdicts.items():
            counts[k][(v or Status.UNKNOWN).value] += 1
        seen = {v for v in verdicts.values() if v in (Status.TRIVIAL, Status.NONTRIVIAL)}
        if len(seen) > 1:
            conflicts.append(f"{format_word(w)}: " + ", ".join(f"{k}={v.value if v else '-'}" for k, v in verdicts.items()))
        if Status.TRIVIAL in seen:
            trivial += 1
            why = syllable_violation(w, g)
            if why:
                syllables.append(why)
    return {"graph": name, "classes": len(words), "trivial": trivial, "counts": counts,
            "conflicts": conflicts, "syllables": syllables}


def suite_wp_agreement(seed: int = 0, max_len: int = 8, radius: int = 2, node_cap: int = 50) -> SuiteResult:
    """Exhaustive cross-check over conjugacy classes of cyclically reduced
    words (every verdict involved is invariant under rotation and inversion)."""
    res = SuiteResult("wp-agreement", ["graph", "classes", "trivial", "unknown exact", "unknown search",
                                       "unknown bfs", "unknown decide", "conflicts", "syllable violations"])
    out = parallel_map(_wp_graph, [(n, max_len, radius, node_cap) for n in WP_GRAPHS])
    for r in out:
        c = r["counts"]
        res.rows.append([r["graph"], r["classes"], r["trivial"], c["exact"]["UNKNOWN"], c["search"]["UNKNOWN"],
                         c["bfs"]["UNKNOWN"], c["decide"]["UNKNOWN"], len(r["conflicts"]), len(r["syllables"])])
        for x in r["conflicts"]:
            res.fail(f"{r['graph']}: conflict {x}")
        for x in r["syllables"]:
            res.fail(f"{r['graph']}: {x}")
    res.summary["max length"] = max_len
    res.summary["bfs radius"] = radius
    res.summary["search node cap"] = node_cap
    res.summary["conflicts"] = sum(len(r["conflicts"]) for r in out)
    res.summary["syllable violations"] = sum(len(r["syllables"]) for r in out)
    return res


AREA_GRAPHS = {
    "raag triangle": LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 2), ("a", "c", 2)]),
    "raag path": LabeledGraph.build("abc", [("a", "b", 2), ("b", "c", 2)]),
    "edge m=4": LabeledGraph.build("ab", [("a", "b", 4)]),
    "triangle 4,2,2": LabeledGraph.build("abc", [("a", "b", 4), ("b", "c", 2), ("a", "c", 2)]),
}


def suite_area_bounds(seed: int = 0, count: int = 100, max_len: int = 14, max_k: int = 5,
                      node_cap: int = 20_000) -> SuiteResult:
    """min_area on sampled trivial words against |W|^6, |W|^2 (right-angled
    graphs) and the witness count k.  The search is exact within the caps:
    area cap k (the witness) and length cap |W| + k * max relator length."""
    res = SuiteResult("area-bounds", ["graph", "|W|", "k", "min_area", "|W|^6", "pass"])
    rng = random.Random(seed)
    names = sorted(AREA_GRAPHS)
    capped = 0
    i = 0
    while len(res.rows) < count:
        gname = names[i % len(names)]
        i += 1
        g = AREA_GRAPHS[gname]
        p = presentation_from_graph(g)
        k = rng.randint(1, max_k)
        conj = rng.randint(0, 3)
        sample = sample_with_witness(p, k, conj, rng.randrange(2**32))
        w = sample.word
        if len(w) > max_len:
            continue
        caps = SearchCaps(area_cap=k, length_cap=len(w) + k * p.max_relator_length, node_cap=node_cap)
        a = min_area(w, p, caps=caps)
        n = len(w)
        if a is None:
            # cap reached; the witness still bounds the area
            capped += 1
            ok = k <= n ** 6 and (not g.is_raag() or k <= n * n)
            res.rows.append([gname, n, k, f"<={k}", n ** 6, ok])
        else:
            ok = a <= n ** 6 and a <= k and (not g.is_raag() or a <= n * n)
            res.rows.append([gname, n, k, a, n ** 6, ok])
        if not ok:
            res.fail(f"{gname} {format_word(w)}: area {a}, k={k}")
    res.summary["samples"] = len(res.rows)
    res.summary["search cap reached"] = capped
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "relators": suite_relators,
    "small-cancellation": suite_small_cancellation,
    "greendlinger": suite_greendlinger,
    "layers": suite_layers,
    "moves": suite_moves,
    "prisms": suite_prisms,
    "quotients": suite_quotients,
    "minimal-quotients": suite_minimal_quotients,
    "wp-agreement": suite_wp_agreement,
    "area-bounds": suite_area_bounds,
}


# ----------------------------------------------------------------------
# configuration and subcommands


@dataclass
class Config:
    command: str
    graph: LabeledGraph | None = None
    caps: SearchCaps = field(default_factory=SearchCaps)
    seed: int = 0
    fmt: str = "text"
    params: dict = field(default_factory=dict)


def _read_diagram(path: str) -> Diagram:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


def _parse_word(text: str) -> Word:
    return Word.parse(text)


def _emit(cfg: Config, text: str, data, diagram: Diagram | None = None) -> None:
    if cfg.fmt == "json":
        print(json.dumps(data, sort_keys=True, indent=2))
    elif cfg.fmt == "dot":
        if diagram is None:
            raise UsageError("--dot needs a command that produces a diagram")
        sys.stdout.write(to_dot(diagram))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _need_graph(cfg: Config) -> LabeledGraph:
    if cfg.graph is None:
        raise UsageError(f"{cfg.command} needs -g/--graph")
    return cfg.graph


def _steps(trace) -> list[dict]:
    return [{"pos": s.pos, "form": format_word(s.form), "k": s.k} for s in trace or []]


def cmd_relators(cfg: Config) -> int:
    g = _need_graph(cfg)
    rows = [{"edge": [a, b, m], "relator": format_word(artin_relator(a, b, m))} for a, b, m in g.edges]
    _emit(cfg, "\n".join(r["relator"] for r in rows), rows)
    return EXIT_OK


def cmd_wp(cfg: Config) -> int:
    g = _need_graph(cfg)
    w = _parse_word(cfg.params["word"])
    v = decide(w, g, cfg.caps)
    data = {"word": format_word(w), "status": v.status.value, "certificate": v.kind.value,
            "detail": v.detail, "area_upper_bound": v.area, "trace": _steps(v.trace)}
    line = f"{v.status.value} ({v.kind.value}{': ' + v.detail if v.detail else ''})"
    if v.area is not None:
        line += f" trace length {v.area}"
    _emit(cfg, line, data)
    return EXIT_OK


def cmd_area(cfg: Config) -> int:
    g = _need_graph(cfg)
    w = _parse_word(cfg.params["word"])
    p = presentation_from_graph(g)
    v = bounded_diagram_search(w, p, cfg.caps)
    area = v.area if v.status == Status.TRIVIAL else None
    data = {"word": format_word(w), "status": v.status.value, "area": area, "detail": v.detail,
            "nodes": v.nodes, "trace": _steps(v.trace)}
    text = f"area {area}" if area is not None else f"{v.status.value} ({v.detail})"
    d = diagram_from_trace(v.word, v.trace) if area else None
    _emit(cfg, text, data, d)
    return EXIT_OK


def cmd_sample(cfg: Config) -> int:
    g = _need_graph(cfg)
    p = presentation_from_graph(g)
    s = sample_with_witness(p, cfg.params["k"], cfg.params["conj_len"], cfg.seed)
    data = {"word": format_word(s.word), "witness_area": s.witness_area,
            "factors": [{"conjugator": format_word(f), "relator": format_word(r)} for f, r in s.factors]}
    lines = [format_word(s.word)] + [f"  ({format_word(f)}) . {format_word(r)}" for f, r in s.factors]
    _emit(cfg, "\n".join(lines), data)
    return EXIT_OK


def cmd_check_diagram(cfg: Config) -> int:
    d = _read_diagram(cfg.params["diagram"])
    p = presentation_from_graph(cfg.graph) if cfg.graph else None
    rep = validate(d, p, howie=cfg.params.get("howie", False))
    data = {"ok": rep.ok, "violations": rep.violations, "warnings": rep.warnings, "area": rep.area,
            "boundary": format_word(rep.boundary) if rep.boundary is not None else None}
    text = "\n".join(["ok" if rep.ok else "invalid"] + [f"violation: {x}" for x in rep.violations]
                     + [f"warning: {x}" for x in rep.warnings]
                     + ([f"boundary {data['boundary']}", f"area {rep.area}"] if rep.ok else []))
    _emit(cfg, text, data, d)
    return EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_analyze(cfg: Config) -> int:
    d = _read_diagram(cfg.params["diagram"])
    p = presentation_from_graph(cfg.graph) if cfg.graph else None
    cls = classify_regions(d, p)
    gr = greendlinger(d)
    data = {"area": d.area(), "reg2": sorted(cls.reg2), "reg4plus": sorted(cls.reg4plus), "T": sorted(cls.T_set),
            "C4T4": diagram_C4T4(d), "greendlinger": [list(r) for r in gr.regions], "sum_defect": gr.sum_defect,
            "shape": gr.shape.value, "problems": gr.problems}
    lines = [f"area {d.area()}  Reg2 {len(cls.reg2)}  Reg4+ {len(cls.reg4plus)}  T {''.join(sorted(cls.T_set))}",
             f"C(4)&T(4) {'yes' if data['C4T4'] else 'no'}",
             f"greendlinger regions {gr.faces}  sum defect {gr.sum_defect}  shape {gr.shape.value}"]
    v = cfg.params.get("vertex")
    if v is not None:
        ls = layer_structure(d, v)
        data["layers"] = [sorted(L) for L in ls.layers[1:]]
        data["convex"] = ls.convex
        data["layer_violations"] = ls.violations
        lines.append(f"layers from {v}: {data['layers']}  convex {'yes' if ls.convex else 'no'}")
        lines += [f"violation: {x}" for x in ls.violations]
    split = cfg.params.get("split")
    if split is not None:
        cases = theoremC_cases(d, split, p)
        data["cases"] = [asdict(c) for c in cases]
        lines.append("cases " + (", ".join(f"{c.case}@{c.side}" for c in cases) or "none"))
    _emit(cfg, "\n".join(lines), data, d)
    return EXIT_OK


def cmd_bands(cfg: Config) -> int:
    d = _read_diagram(cfg.params["diagram"])
    p = presentation_from_graph(cfg.graph) if cfg.graph else None
    bands = extract_bands(d, p)
    data = [{"index": i, "generator": b.generator, "regions": b.regions, "poles": list(b.poles), "closed": b.closed}
            for i, b in enumerate(bands)]
    lines = [f"{i}: {b.generator}-band {b.regions}{' closed' if b.closed else ''}" for i, b in enumerate(bands)]
    _emit(cfg, "\n".join(lines) or "no bands", data, d)
    return EXIT_OK


def _parse_faces(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad face list {text!r}") from None


def cmd_move(cfg: Config) -> int:
    d = _read_diagram(cfg.params["diagram"])
    p = presentation_from_graph(cfg.graph) if cfg.graph else None
    if cfg.params.get("diamond") is not None:
        new, rec = diamond_move(d, cfg.params["diamond"], presentation=p)
    elif cfg.params.get("imove"):
        prism_path, faces = cfg.params["imove"]
        new, rec, _ = i_move(d, _parse_faces(faces), _read_diagram(prism_path), p)
    elif cfg.params.get("transfer"):
        face, index = cfg.params["transfer"]
        bands = extract_bands(d, p)
        try:
            band = bands[int(index)]
        except (ValueError, IndexError):
            raise UsageError(f"no band with index {index!r}; see the bands command") from None
        new, rec = transfer_region(d, int(face), band, presentation=p)
    else:
        raise UsageError("move needs one of --diamond, --imove, --transfer")
    if cfg.params.get("free_reduce"):
        free_reduce_diagram(new)
    out = cfg.params.get("output")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(serialize(new))
    data = {"record": rec.to_dict(), "diagram": serialize(new)}
    text = rec.to_json() if out else rec.to_json() + "\n" + serialize(new)
    _emit(cfg, text, data, new)
    return EXIT_OK


def cmd_quotient(cfg: Config) -> int:
    d = _read_diagram(cfg.params["diagram"])
    p = presentation_from_graph(cfg.graph) if cfg.graph else None
    t = cfg.params["t"]
    stage = cfg.params["stage"]
    coarse = build_coarse(d, t, p)
    howie = build_howie(coarse) if stage in ("howie", "tilde") or cfg.params.get("check_counts") else None
    target = {"coarse": coarse.diagram, "howie": howie.diagram if howie else None}.get(stage)
    if stage == "tilde":
        target = build_tilde(howie).diagram
    data = {"stage": stage, "t": t, "diagram": serialize(target),
            "classes": {str(k): v for k, v in sorted(coarse.classes.items())},
            "kinds": {str(k): v.value for k, v in sorted(coarse.kinds.items())}}
    lines = [f"{stage} diagram over t={t}: {target.area()} regions"]
    if howie is not None and stage == "howie":
        words = {v: format_word(w) for v, w in sorted(howie.vertex_words().items())}
        data["vertex_words"] = {str(v): w for v, w in words.items()}
        lines += [f"vertex {v}: {w}" for v, w in words.items() if v in howie.inner_vertices()]
        if cfg.graph is not None:
            chk = verify_howie(howie, ht_solver_for(cfg.graph, t, cfg.caps))
            data["howie_check"] = {True: "ok", False: "failed", None: "inconclusive"}[chk.result]
            lines.append(f"corner products: {data['howie_check']}")
    if cfg.params.get("check_counts"):
        ps = psi_t(d, t, p)
        lhs, rhs = len(ps.coarse.reg4plus), ps.tilde.diagram.area()
        bad = lemma_checks(ps)
        data["counts"] = {"reg4plus_classes": lhs, "tilde_area": rhs, "equal": lhs == rhs, "preimage": bad}
        lines.append(f"Reg4+ classes {lhs}, tilde regions {rhs}: {'equal' if lhs == rhs else 'DIFFERENT'}")
        lines += [f"preimage: {b}" for b in bad]
        if lhs != rhs or bad:
            _emit(cfg, "\n".join(lines + [serialize(target)]), data, target)
            return EXIT_DOMAIN
    _emit(cfg, "\n".join(lines + [serialize(target)]), data, target)
    return EXIT_OK


def cmd_prism(cfg: Config) -> int:
    g = _need_graph(cfg)
    i, j, k = cfg.params["triple"]
    pr: Prism = make_prism(g, i, j, k, allow_cube=cfg.params.get("allow_cube", False))
    s = pr.sphere
    ok = identity_sequence_check(s)
    data = {"triple": [i, j, k], "m": pr.m, "faces": len(s.inner_faces()), "euler": s.euler(),
            "identity_sequence": ok, "diagram": serialize(s)}
    _emit(cfg, f"prism {i} {j} {k}: m={pr.m}, {data['faces']} faces, euler {s.euler()}, "
               f"identity sequence {'ok' if ok else 'FAILED'}\n" + serialize(s), data, s)
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_experiment(cfg: Config) -> int:
    names = list(SUITES) if cfg.params["suite"] == "all" else [cfg.params["suite"]]
    results = [SUITES[n](cfg.seed) for n in names]
    if cfg.fmt == "dot":
        raise UsageError("experiments have no DOT output")
    if cfg.fmt == "json":
        data = [r.to_dict() for r in results]
        _emit(cfg, "", data if len(data) > 1 else data[0])
    else:
        sys.stdout.write("\n".join(r.to_text() for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_DOMAIN


COMMANDS = {
    "relators": cmd_relators,
    "wp": cmd_wp,
    "area": cmd_area,
    "sample": cmd_sample,
    "check-diagram": cmd_check_diagram,
    "analyze": cmd_analyze,
    "bands": cmd_bands,
    "move": cmd_move,
    "quotient": cmd_quotient,
    "prism": cmd_prism,
    "experiment": cmd_experiment,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-g", "--graph", help="graph file: 'gens a b c' and 'edge a b m' lines")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_const", const="json", dest="fmt", help="JSON output")
    fmt.add_argument("--dot", action="store_const", const="dot", dest="fmt", help="Graphviz output of the diagram")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--area-cap", type=int)
    common.add_argument("--len-cap", type=int)
    common.add_argument("--node-cap", type=int, default=200_000)
    common.add_argument("--time-cap", type=float)
    common.add_argument("--rigorous", action="store_true",
                        help="report NONTRIVIAL when the search is exhausted within the caps")

    parser = _Parser(prog="artin-dehn", description="Artin group presentations, diagrams and word problems.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("relators", parents=[common], help="print the defining relators")
    for name, helptext in (("wp", "decide triviality of a word"), ("area", "minimal area of a trivial word")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("-w", "--word", required=True, help="word such as 'a b a^-1 b^-1'")
    sp = sub.add_parser("sample", parents=[common], help="sample a trivial word with its witness")
    sp.add_argument("-k", type=int, default=3, help="number of conjugated relators")
    sp.add_argument("--conj-len", type=int, default=3)
    for name, helptext in (("check-diagram", "validate a diagram file"), ("analyze", "regions, Greendlinger, layers"),
                           ("bands", "list a-bands")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("-d", "--diagram", required=True)
        if name == "check-diagram":
            sp.add_argument("--howie", action="store_true", help="allow corner labels")
        if name == "analyze":
            sp.add_argument("--vertex", type=int, help="base vertex for the layer decomposition")
            sp.add_argument("--split", type=int, help="boundary split point for the case detection")
    sp = sub.add_parser("move", parents=[common], help="apply a diamond move, I-move or transfer")
    sp.add_argument("-d", "--diagram", required=True)
    mv = sp.add_mutually_exclusive_group(required=True)
    mv.add_argument("--diamond", type=int, metavar="V")
    mv.add_argument("--imove", nargs=2, metavar=("PRISM", "FACES"))
    mv.add_argument("--transfer", nargs=2, metavar=("FACE", "BAND"))
    sp.add_argument("--free-reduce", action="store_true")
    sp.add_argument("-o", "--output")
    sp = sub.add_parser("quotient", parents=[common], help="coarse, Howie and collapsed quotients")
    sp.add_argument("-d", "--diagram", required=True)
    sp.add_argument("--t", required=True)
    sp.add_argument("--stage", choices=("coarse", "howie", "tilde"), default="tilde")
    sp.add_argument("--check-counts", action="store_true")
    sp = sub.add_parser("prism", parents=[common], help="build a prism sphere")
    sp.add_argument("triple", nargs=3, metavar="GEN")
    sp.add_argument("--allow-cube", action="store_true")
    sp = sub.add_parser("experiment", parents=[common], help="run an experiment suite")
    sp.add_argument("--suite", required=True, choices=sorted(SUITES) + ["all"])
    return parser


def make_config(ns: argparse.Namespace) -> Config:
    graph = load_graph(ns.graph) if getattr(ns, "graph", None) else None
    try:
        caps = SearchCaps(ns.area_cap, ns.len_cap, ns.node_cap, ns.time_cap, ns.rigorous)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    skip = {"command", "graph", "fmt", "seed", "area_cap", "len_cap", "node_cap", "time_cap", "rigorous"}
    params = {k: v for k, v in vars(ns).items() if k not in skip}
    for key in ("k", "conj_len"):
        if key in params and params[key] < (1 if key == "k" else 0):
            raise UsageError(f"--{key.replace('_', '-')} is out of range")
    return Config(ns.command, graph, caps, ns.seed, ns.fmt or "text", params)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        worker_count()
        cfg = make_config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (GraphError, WordParseError, DiagramError, QuotientError, MoveError, ClassError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())
