"""Finite sites: sieves, Grothendieck topologies, sheaf conditions, plus
construction.

Topologies are entered as generating families per object and saturated to
honest sieve sets; the saturation is reported so nothing covers silently.
The plus construction realizes the colimit over covering sieves via the
intersection refinement, with classes closed transitively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import AxiomViolation, InvalidTable, MixedCodomain, UnknownObject
from .fincat import (
    DEFAULT_BOUND,
    FinCat,
    PresheafMap,
    SetPresheaf,
    compose_presheaf_maps,
    guard,
    reindex_slice_presheaf,
    slice_arrow_name,
    slice_cat,
)
from .report import Report


# -- sieves -----------------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class Sieve:
    at: str
    arrows: frozenset[str]

    def sorted_arrows(self) -> tuple[str, ...]:
        return tuple(sorted(self.arrows))

    def __le__(self, other: "Sieve") -> bool:
        return self.at == other.at and self.arrows <= other.arrows


def maximal_sieve(cat: FinCat, c: str) -> Sieve:
    if c not in cat.objects:
        raise UnknownObject(c)
    return Sieve(c, frozenset(cat.arrows_into(c)))


def empty_sieve(c: str) -> Sieve:
    return Sieve(c, frozenset())


def sieve_generate(cat: FinCat, arrows: Iterable[str]) -> Sieve:
    """Close a family of arrows with common codomain under precomposition."""
    arrows = list(arrows)
    if not arrows:
        raise MixedCodomain(arrows)
    cods = {cat.cod(f) for f in arrows}
    if len(cods) != 1:
        raise MixedCodomain(arrows)
    (c,) = cods
    closed = {
        cat.compose(f, g)
        for f in arrows
        for g in cat.arrows_into(cat.dom(f))
    }
    return Sieve(c, frozenset(closed))


def sieve_generate_at(cat: FinCat, c: str, arrows: Iterable[str]) -> Sieve:
    """Like sieve_generate but tolerates the empty family (empty sieve at c)."""
    arrows = list(arrows)
    if not arrows:
        if c not in cat.objects:
            raise UnknownObject(c)
        return empty_sieve(c)
    s = sieve_generate(cat, arrows)
    if s.at != c:
        raise MixedCodomain(arrows)
    return s


def is_sieve(cat: FinCat, s: Sieve) -> bool:
    return all(cat.cod(f) == s.at for f in s.arrows) and all(
        cat.compose(f, g) in s.arrows
        for f in s.arrows
        for g in cat.arrows_into(cat.dom(f))
    )


def pullback_sieve(cat: FinCat, g: str, s: Sieve) -> Sieve:
    """g*S = the arrows h into dom(g) with g.h in S."""
    if cat.cod(g) != s.at:
        raise InvalidTable(f"pullback_sieve: {g!r} does not land at {s.at!r}")
    d = cat.dom(g)
    return Sieve(d, frozenset(h for h in cat.arrows_into(d) if cat.compose(g, h) in s.arrows))


def intersect_sieves(a: Sieve, b: Sieve) -> Sieve:
    if a.at != b.at:
        raise InvalidTable("sieve intersection needs a common object")
    return Sieve(a.at, a.arrows & b.arrows)


def all_sieves(cat: FinCat, c: str, bound: int = DEFAULT_BOUND) -> list[Sieve]:
    """Every sieve on c, by filtering subsets of the arrows into c."""
    into = cat.arrows_into(c)
    guard("all_sieves", 2 ** len(into), bound)
    out = []
    for k in range(len(into) + 1):
        for sub in itertools.combinations(into, k):
            s = Sieve(c, frozenset(sub))
            if is_sieve(cat, s):
                out.append(s)
    return out


# -- topologies ---------------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class GrothTopology:
    base: FinCat
    covers: Mapping[str, frozenset[Sieve]]

    def covering(self, c: str) -> tuple[Sieve, ...]:
        return tuple(sorted(self.covers[c], key=lambda s: s.sorted_arrows()))

    def is_covering(self, s: Sieve) -> bool:
        return s in self.covers[s.at]


def trivial_topology(cat: FinCat) -> GrothTopology:
    return GrothTopology(cat, {c: frozenset({maximal_sieve(cat, c)}) for c in cat.objects})


def topology_from_generators(
    cat: FinCat,
    generators: Mapping[str, Iterable[Iterable[str]]],
    bound: int = DEFAULT_BOUND,
) -> tuple[GrothTopology, Report]:
    """Saturate per-object generating families to a Grothendieck topology.

    Maximal sieves are always added; stability and transitivity closures run
    to a fixpoint and every sieve added beyond the user's generated ones is
    reported.
    """
    covers: dict[str, set[Sieve]] = {c: {maximal_sieve(cat, c)} for c in cat.objects}
    user: set[Sieve] = set()
    for c, fams in generators.items():
        if c not in cat.objects:
            raise UnknownObject(c)
        for fam in fams:
            s = sieve_generate_at(cat, c, fam)
            covers[c].add(s)
            user.add(s)
    report = Report("topology_from_generators")
    candidates = {c: all_sieves(cat, c, bound) for c in cat.objects}
    changed = True
    while changed:
        changed = False
        # stability closure
        for c in cat.objects:
            for s in list(covers[c]):
                for g in cat.arrows:
                    if cat.cod(g) == c:
                        ps = pullback_sieve(cat, g, s)
                        if ps not in covers[cat.dom(g)]:
                            covers[cat.dom(g)].add(ps)
                            changed = True
        # transitivity closure
        for c in cat.objects:
            for r in candidates[c]:
                if r in covers[c]:
                    continue
                for s in covers[c]:
                    if all(
                        pullback_sieve(cat, f, r) in covers[cat.dom(f)] for f in s.arrows
                    ):
                        covers[c].add(r)
                        changed = True
                        break
    for c in sorted(covers):
        for s in sorted(covers[c], key=lambda s: s.sorted_arrows()):
            if s not in user and s != maximal_sieve(cat, c):
                report.note(("saturated", c, s.sorted_arrows()))
    topo = GrothTopology(cat, {c: frozenset(v) for c, v in covers.items()})
    return topo, report


def validate_topology(j: GrothTopology, bound: int = DEFAULT_BOUND) -> Report:
    """Exhaustively verify maximality, stability and transitivity."""
    cat = j.base
    report = Report("validate_topology")
    if set(j.covers) != set(cat.objects):
        return report.fail(("coverage", "covers table not total"))
    for c in cat.objects:
        for s in j.covers[c]:
            if s.at != c or not is_sieve(cat, s):
                return report.fail(("well-formed", c, s.sorted_arrows()))
    for c in cat.objects:
        if maximal_sieve(cat, c) not in j.covers[c]:
            report.fail(("maximality", c))
    for c in cat.objects:
        for s in j.covers[c]:
            for g in cat.arrows:
                if cat.cod(g) == c:
                    if pullback_sieve(cat, g, s) not in j.covers[cat.dom(g)]:
                        report.fail(("stability", c, s.sorted_arrows(), g))
    for c in cat.objects:
        for r in all_sieves(cat, c, bound):
            if r in j.covers[c]:
                continue
            for s in j.covers[c]:
                if all(pullback_sieve(cat, f, r) in j.covers[cat.dom(f)] for f in s.arrows):
                    report.fail(("transitivity", c, r.sorted_arrows(), s.sorted_arrows()))
                    break
    return report


def representable_presheaf(cat: FinCat, b: str) -> SetPresheaf:
    """Hom(-, b) as a finite-set-valued presheaf."""
    if b not in cat.objects:
        raise UnknownObject(b)
    return SetPresheaf(
        cat,
        {d: cat.hom(d, b) for d in cat.objects},
        {
            f: {g: cat.compose(g, f) for g in cat.hom(c, b)}
            for f, (d, c) in cat.arrows.items()
        },
    )


def subcanonical_check(j: GrothTopology, bound: int = DEFAULT_BOUND) -> Report:
    """Run is_sheaf on every representable presheaf."""
    report = Report("subcanonical_check")
    for b in j.base.objects:
        rep = is_sheaf(representable_presheaf(j.base, b), j, bound)
        if not rep.ok:
            report.fail(("representable", b, rep.counterexamples[0]))
    return report


_slice_topology_cache: dict[tuple[int, str], tuple[GrothTopology, GrothTopology]] = {}


def slice_topology(j: GrothTopology, c: str) -> GrothTopology:
    """The topology induced on slice(C, c): a sieve covers f iff its
    dom-image covers dom(f) in the base.  The result is validated once and
    cached."""
    key = (id(j), c)
    hit = _slice_topology_cache.get(key)
    if hit is not None and hit[0] is j:
        return hit[1]
    cat = j.base
    sl, _ = slice_cat(cat, c)

    def lift_sieve(f: str, s: Sieve) -> Sieve:
        return Sieve(f, frozenset(slice_arrow_name(g, f) for g in s.arrows))

    covers = {
        f: frozenset(lift_sieve(f, s) for s in j.covers[cat.dom(f)]) for f in sl.objects
    }
    out = GrothTopology(sl, covers)
    rep = validate_topology(out)
    if not rep.ok:
        raise AxiomViolation("slice-topology", (c, rep.counterexamples[0]))
    _slice_topology_cache[key] = (j, out)
    return out


# -- matching families and sheaf conditions -------------------------------------------


@dataclass(frozen=True, eq=True)
class MatchingFamily:
    presheaf: SetPresheaf
    sieve: Sieve
    assignment: Mapping[str, str]

    def validate(self) -> None:
        cat = self.presheaf.base
        if set(self.assignment) != set(self.sieve.arrows):
            raise InvalidTable("matching family not defined on exactly the sieve")
        for f in self.sieve.arrows:
            if self.assignment[f] not in self.presheaf.on_objects[cat.dom(f)]:
                raise InvalidTable(f"value at {f!r} outside the presheaf")
        for f in self.sieve.arrows:
            for g in cat.arrows_into(cat.dom(f)):
                if self.assignment[cat.compose(f, g)] != \
                   self.presheaf.on_arrows[g][self.assignment[f]]:
                    raise InvalidTable(f"compatibility fails on ({f!r}, {g!r})")


def matching_families(Z: SetPresheaf, s: Sieve,
                      bound: int = DEFAULT_BOUND) -> list[MatchingFamily]:
    """All compatible assignments over the sieve, by product-and-filter."""
    cat = Z.base
    arrows = sorted(s.arrows)
    total = 1
    for f in arrows:
        total *= max(1, len(Z.on_objects[cat.dom(f)]))
        guard("matching_families", total, bound)
    pools = [Z.on_objects[cat.dom(f)] for f in arrows]
    if any(not pool for pool in pools):
        return []
    out = []
    for choice in itertools.product(*pools):
        m = dict(zip(arrows, choice))
        if all(
            m[cat.compose(f, g)] == Z.on_arrows[g][m[f]]
            for f in arrows
            for g in cat.arrows_into(cat.dom(f))
        ):
            out.append(MatchingFamily(Z, s, m))
    return out


def amalgamations(Z: SetPresheaf, s: Sieve, m: MatchingFamily) -> list[str]:
    """All sections at the sieve's object restricting to the family."""
    cat = Z.base
    return [
        x
        for x in Z.on_objects[s.at]
        if all(Z.on_arrows[f][x] == m.assignment[f] for f in s.arrows)
    ]


def _sheaf_scan(Z: SetPresheaf, j: GrothTopology, bound: int):
    for c in Z.base.objects:
        for s in sorted(j.covers[c], key=lambda s: s.sorted_arrows()):
            for m in matching_families(Z, s, bound):
                yield c, s, m, amalgamations(Z, s, m)


def is_sheaf(Z: SetPresheaf, j: GrothTopology, bound: int = DEFAULT_BOUND) -> Report:
    report = Report("is_sheaf")
    if Z.base != j.base:
        raise InvalidTable("presheaf and topology live on different bases")
    for c, s, m, ams in _sheaf_scan(Z, j, bound):
        if len(ams) != 1:
            return report.fail((c, s.sorted_arrows(), dict(sorted(m.assignment.items())),
                                len(ams)))
    return report


def is_separated(Z: SetPresheaf, j: GrothTopology, bound: int = DEFAULT_BOUND) -> Report:
    report = Report("is_separated")
    if Z.base != j.base:
        raise InvalidTable("presheaf and topology live on different bases")
    for c, s, m, ams in _sheaf_scan(Z, j, bound):
        if len(ams) > 1:
            return report.fail((c, s.sorted_arrows(), dict(sorted(m.assignment.items())),
                                len(ams)))
    return report


# -- plus construction ------------------------------------------------------------------


def _pair_key(s: Sieve, assignment: Mapping[str, str]):
    return (tuple(sorted(s.arrows)), tuple(sorted(assignment.items())))


@dataclass(frozen=True)
class PlusConstruction:
    presheaf: SetPresheaf
    unit: PresheafMap
    # per object: canonical (sieve, family) key -> class label, and label -> representative
    class_of: Mapping[str, Mapping[tuple, str]]
    reps: Mapping[str, Mapping[str, tuple[Sieve, Mapping[str, str]]]]

    def label(self, c: str, s: Sieve, assignment: Mapping[str, str]) -> str:
        return self.class_of[c][_pair_key(s, assignment)]


def plus(Z: SetPresheaf, j: GrothTopology, bound: int = DEFAULT_BOUND) -> PlusConstruction:
    """One application of the plus construction.

    Sections at c are equivalence classes of (covering sieve, matching
    family); two pairs are identified when they agree on the intersection
    sieve, closed transitively.  Restriction pulls both parts back.
    """
    cat = Z.base
    if cat != j.base:
        raise InvalidTable("presheaf and topology live on different bases")
    pairs: dict[str, list[tuple[Sieve, dict]]] = {}
    for c in cat.objects:
        items: list[tuple[Sieve, dict]] = []
        for s in sorted(j.covers[c], key=lambda s: s.sorted_arrows()):
            for m in matching_families(Z, s, bound):
                items.append((s, dict(m.assignment)))
        pairs[c] = items

    class_of: dict[str, dict[tuple, str]] = {}
    reps: dict[str, dict[str, tuple[Sieve, dict]]] = {}
    sections: dict[str, tuple[str, ...]] = {}
    for c in cat.objects:
        items = pairs[c]
        parent = list(range(len(items)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(len(items)):
            si, mi = items[i]
            for k in range(i + 1, len(items)):
                sk, mk = items[k]
                inter = intersect_sieves(si, sk)
                if inter not in j.covers[c]:
                    raise AxiomViolation(
                        "intersection", (c, si.sorted_arrows(), sk.sorted_arrows())
                    )
                if all(mi[f] == mk[f] for f in inter.arrows):
                    ri, rk = find(i), find(k)
                    if ri != rk:
                        parent[rk] = ri
        groups: dict[int, list[int]] = {}
        for i in range(len(items)):
            groups.setdefault(find(i), []).append(i)
        # canonical order: by the minimal pair key in each class
        keyed = sorted(
            (min(_pair_key(items[i][0], items[i][1]) for i in g), g)
            for g in groups.values()
        )
        class_of[c] = {}
        reps[c] = {}
        labels = []
        for idx, (_, g) in enumerate(keyed):
            label = f"q{idx}"
            labels.append(label)
            rep_i = min(g, key=lambda i: _pair_key(items[i][0], items[i][1]))
            reps[c][label] = items[rep_i]
            for i in g:
                class_of[c][_pair_key(items[i][0], items[i][1])] = label
        sections[c] = tuple(sorted(labels))

    on_arrows: dict[str, dict[str, str]] = {}
    for f, (d, c) in cat.arrows.items():
        table = {}
        for label in sections[c]:
            s, m = reps[c][label]
            ps = pullback_sieve(cat, f, s)
            pm = {h: m[cat.compose(f, h)] for h in ps.arrows}
            table[label] = class_of[d][_pair_key(ps, pm)]
        on_arrows[f] = table
    presheaf = SetPresheaf(cat, sections, on_arrows)
    presheaf.validate()

    unit_components: dict[str, dict[str, str]] = {}
    for c in cat.objects:
        mx = maximal_sieve(cat, c)
        unit_c = {}
        for x in Z.on_objects[c]:
            fam = {f: Z.on_arrows[f][x] for f in mx.arrows}
            unit_c[x] = class_of[c][_pair_key(mx, fam)]
        unit_components[c] = unit_c
    unit = PresheafMap(Z, presheaf, unit_components)
    unit.validate()
    return PlusConstruction(presheaf, unit, class_of, reps)


def plus_map(m: PresheafMap, pc_src: PlusConstruction, pc_tgt: PlusConstruction) -> PresheafMap:
    """Functorial action of plus on a presheaf map."""
    cat = m.source.base
    comps = {}
    for c in cat.objects:
        table = {}
        for label in pc_src.presheaf.on_objects[c]:
            s, fam = pc_src.reps[c][label]
            mapped = {f: m.components[cat.dom(f)][x] for f, x in fam.items()}
            table[label] = pc_tgt.class_of[c][_pair_key(s, mapped)]
        comps[c] = table
    out = PresheafMap(pc_src.presheaf, pc_tgt.presheaf, comps)
    out.validate()
    return out


@dataclass(frozen=True)
class Sheafification:
    presheaf: SetPresheaf
    unit: PresheafMap
    first: PlusConstruction
    second: PlusConstruction


def sheafify(Z: SetPresheaf, j: GrothTopology, bound: int = DEFAULT_BOUND) -> Sheafification:
    """Plus applied twice; the unit is the composite of the two units."""
    first = plus(Z, j, bound)
    second = plus(first.presheaf, j, bound)
    return Sheafification(
        second.presheaf,
        compose_presheaf_maps(second.unit, first.unit),
        first,
        second,
    )


# -- transport of plus along slice reindexing ---------------------------------------


def slice_plus(cat: FinCat, j: GrothTopology, c: str, Z: SetPresheaf,
               bound: int = DEFAULT_BOUND) -> PlusConstruction:
    return plus(Z, slice_topology(j, c), bound)


def transport_plus_iso(cat: FinCat, j: GrothTopology, f: str, Z: SetPresheaf,
                       bound: int = DEFAULT_BOUND) -> PresheafMap:
    """The canonical iso  f*(Z+) -> (f*Z)+  for Z on slice(C, cod f).

    Covering sieves on a slice object g of slice(C, dom f) and on the slice
    object f.g of slice(C, cod f) both come from base sieves on dom(g), so
    representatives transport arrow-by-arrow.
    """
    d, c = cat.arrows[f]
    pc_c = slice_plus(cat, j, c, Z, bound)
    Zf = reindex_slice_presheaf(cat, f, Z)
    pc_d = slice_plus(cat, j, d, Zf, bound)
    sl_d, _ = slice_cat(cat, d)
    comps: dict[str, dict[str, str]] = {}
    for g in sl_d.objects:
        fg = cat.compose(f, g)
        renames = {
            slice_arrow_name(h, fg): slice_arrow_name(h, g)
            for h in cat.arrows_into(cat.dom(g))
        }
        table = {}
        for label in pc_c.presheaf.on_objects[fg]:
            s, fam = pc_c.reps[fg][label]
            # rename slice-of-c arrows (h > f.g) to slice-of-d arrows (h > g)
            new_fam = {renames[name]: x for name, x in fam.items()}
            s2 = Sieve(g, frozenset(renames[name] for name in s.arrows))
            table[label] = pc_d.class_of[g][_pair_key(s2, new_fam)]
        comps[g] = table
    out = PresheafMap(reindex_slice_presheaf(cat, f, pc_c.presheaf), pc_d.presheaf, comps)
    out.validate()
    if not out.is_iso():
        raise InvalidTable("transport_plus_iso produced a non-iso; slice naming out of sync")
    return out
