"""Finite categories with explicit composition tables.

Everything downstream (slices, opfibrations, presheaves, classifiers)
consumes these values.  All values are immutable after construction and
every operation is a pure function.  Identifiers are opaque strings and
equality is identifier equality; enumeration order is lexicographic on
identifiers so that oracle outputs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    IllTypedComposite,
    InvalidTable,
    MissingIdentity,
    NonAssociative,
    SizeBound,
    UnknownObject,
)

DEFAULT_BOUND = 10**6


def guard(what: str, estimate: int, bound: int) -> None:
    if estimate > bound:
        raise SizeBound(what, estimate, bound)


# -- categories ----------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class FinCat:
    """A finite category: object/arrow tables plus a total composition table.

    ``arrows`` maps an arrow id to ``(dom, cod)``; ``compose_table`` maps
    ``(g, f)`` with ``cod(f) == dom(g)`` to the id of ``g after f``.
    """

    objects: tuple[str, ...]
    arrows: Mapping[str, tuple[str, str]]
    identities: Mapping[str, str]
    compose_table: Mapping[tuple[str, str], str]

    # lookups

    def dom(self, f: str) -> str:
        return self.arrows[f][0]

    def cod(self, f: str) -> str:
        return self.arrows[f][1]

    def id_of(self, c: str) -> str:
        return self.identities[c]

    def compose(self, g: str, f: str) -> str:
        """g after f; only defined when cod(f) == dom(g)."""
        return self.compose_table[(g, f)]

    def is_identity(self, f: str) -> bool:
        d, c = self.arrows[f]
        return d == c and self.identities[d] == f

    def hom(self, a: str, b: str) -> tuple[str, ...]:
        return tuple(sorted(f for f, (d, c) in self.arrows.items() if d == a and c == b))

    def arrows_into(self, c: str) -> tuple[str, ...]:
        return tuple(sorted(f for f, (_, cc) in self.arrows.items() if cc == c))

    def arrows_from(self, d: str) -> tuple[str, ...]:
        return tuple(sorted(f for f, (dd, _) in self.arrows.items() if dd == d))

    def sorted_arrows(self) -> tuple[str, ...]:
        return tuple(sorted(self.arrows))

    def is_invertible(self, f: str) -> bool:
        d, c = self.arrows[f]
        for g in self.hom(c, d):
            if self.compose(g, f) == self.id_of(d) and self.compose(f, g) == self.id_of(c):
                return True
        return False

    # validation

    def validate(self) -> None:
        seen = set(self.objects)
        if len(seen) != len(self.objects):
            raise InvalidTable("duplicate object identifiers")
        for f, (d, c) in self.arrows.items():
            if d not in seen or c not in seen:
                raise InvalidTable(f"arrow {f!r} has unknown endpoint ({d!r}, {c!r})")
        for c in self.objects:
            i = self.identities.get(c)
            if i is None or i not in self.arrows:
                raise MissingIdentity(c, "no identity arrow assigned")
            if self.arrows[i] != (c, c):
                raise MissingIdentity(c, f"assigned identity {i!r} is not an endo-arrow on {c!r}")
        # compose defined exactly on composable pairs, with correct endpoints
        expected = {
            (g, f)
            for f in self.arrows
            for g in self.arrows
            if self.cod(f) == self.dom(g)
        }
        declared = set(self.compose_table)
        for g, f in declared - expected:
            raise IllTypedComposite(g, f, f"cod({f!r}) != dom({g!r})")
        for g, f in expected - declared:
            raise IllTypedComposite(g, f, "composable pair missing from table")
        for (g, f), h in self.compose_table.items():
            if h not in self.arrows:
                raise IllTypedComposite(g, f, f"result {h!r} is not an arrow")
            if self.arrows[h] != (self.dom(f), self.cod(g)):
                raise IllTypedComposite(g, f, f"result {h!r} has wrong endpoints")
        # identity laws
        for f in self.arrows:
            if self.compose(self.id_of(self.cod(f)), f) != f:
                raise MissingIdentity(self.cod(f), f"left identity law fails on {f!r}")
            if self.compose(f, self.id_of(self.dom(f))) != f:
                raise MissingIdentity(self.dom(f), f"right identity law fails on {f!r}")
        # associativity over all composable triples
        for f in self.arrows:
            for g in self.arrows_from(self.cod(f)):
                gf = self.compose(g, f)
                for h in self.arrows_from(self.cod(g)):
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                        raise NonAssociative(h, g, f)


def build_category(
    objects: Iterable[str],
    arrows: Mapping[str, tuple[str, str]],
    identities: Mapping[str, str],
    compose_table: Mapping[tuple[str, str], str],
) -> FinCat:
    """Assemble and validate a FinCat from raw tables."""
    cat = FinCat(
        objects=tuple(sorted(objects)),
        arrows=dict(arrows),
        identities=dict(identities),
        compose_table=dict(compose_table),
    )
    cat.validate()
    return cat


def point_category(obj: str = "*", ident: str = "id_*") -> FinCat:
    """The terminal category on a single object."""
    return build_category([obj], {ident: (obj, obj)}, {obj: ident}, {(ident, ident): ident})


def discrete_category(labels: Iterable[str]) -> FinCat:
    labels = sorted(labels)
    arrows = {f"id_{x}": (x, x) for x in labels}
    identities = {x: f"id_{x}" for x in labels}
    compose = {(f"id_{x}", f"id_{x}"): f"id_{x}" for x in labels}
    return build_category(labels, arrows, identities, compose)


def opposite(cat: FinCat) -> FinCat:
    """Reverse all arrows; an involution on the nose."""
    return build_category(
        cat.objects,
        {f: (c, d) for f, (d, c) in cat.arrows.items()},
        cat.identities,
        {(f, g): h for (g, f), h in cat.compose_table.items()},
    )


# -- slices ---------------------------------------------------------------------


def slice_arrow_name(g: str, f: str) -> str:
    """Canonical name of the slice arrow with underlying g and target object f."""
    return f"{g}>{f}"


_slice_cache: dict[tuple[int, str], tuple[FinCat, FinCat, "FinFunctor"]] = {}


def slice_cat(cat: FinCat, c: str) -> tuple[FinCat, "FinFunctor"]:
    """The slice over c together with the domain projection.

    Objects are the arrows of ``cat`` into ``c``, named by the arrow they
    wrap; for every g composable into f there is one arrow (f.g) -> f named
    ``g>f``.
    """
    if c not in cat.objects:
        raise UnknownObject(c)
    key = (id(cat), c)
    hit = _slice_cache.get(key)
    if hit is not None and hit[0] is cat:
        return hit[1], hit[2]
    objs = list(cat.arrows_into(c))
    arrows: dict[str, tuple[str, str]] = {}
    for f in objs:
        for g in cat.arrows_into(cat.dom(f)):
            arrows[slice_arrow_name(g, f)] = (cat.compose(f, g), f)
    identities = {f: slice_arrow_name(cat.id_of(cat.dom(f)), f) for f in objs}
    compose: dict[tuple[str, str], str] = {}
    for f1 in objs:
        for g1 in cat.arrows_into(cat.dom(f1)):
            a = slice_arrow_name(g1, f1)
            for f2 in objs:
                for g2 in cat.arrows_into(cat.dom(f2)):
                    if cat.compose(f2, g2) == f1:
                        b = slice_arrow_name(g2, f2)
                        compose[(b, a)] = slice_arrow_name(cat.compose(g2, g1), f2)
    sl = build_category(objs, arrows, identities, compose)
    dom_fun = FinFunctor(
        source=sl,
        target=cat,
        on_objects={f: cat.dom(f) for f in objs},
        on_arrows={name: g for name, g in ((slice_arrow_name(g, f), g)
                                            for f in objs
                                            for g in cat.arrows_into(cat.dom(f)))},
    )
    dom_fun.validate()
    _slice_cache[key] = (cat, sl, dom_fun)
    return sl, dom_fun


def postcompose(cat: FinCat, f: str) -> "FinFunctor":
    """slice(C, dom f) -> slice(C, cod f), sending g to f.g."""
    d, c = cat.arrows[f]
    src, _ = slice_cat(cat, d)
    tgt, _ = slice_cat(cat, c)
    on_objects = {g: cat.compose(f, g) for g in src.objects}
    on_arrows = {
        slice_arrow_name(h, g): slice_arrow_name(h, cat.compose(f, g))
        for g in src.objects
        for h in cat.arrows_into(cat.dom(g))
    }
    fun = FinFunctor(src, tgt, on_objects, on_arrows)
    fun.validate()
    return fun


# -- functors and natural transformations ---------------------------------------


@dataclass(frozen=True, eq=True)
class FinFunctor:
    source: FinCat
    target: FinCat
    on_objects: Mapping[str, str]
    on_arrows: Mapping[str, str]

    def ob(self, x: str) -> str:
        return self.on_objects[x]

    def ar(self, f: str) -> str:
        return self.on_arrows[f]

    def validate(self) -> None:
        if set(self.on_objects) != set(self.source.objects):
            raise InvalidTable("functor object map is not total")
        if set(self.on_arrows) != set(self.source.arrows):
            raise InvalidTable("functor arrow map is not total")
        for x, y in self.on_objects.items():
            if y not in self.target.objects:
                raise InvalidTable(f"object image {y!r} not in target")
        for f, m in self.on_arrows.items():
            d, c = self.source.arrows[f]
            if m not in self.target.arrows or \
               self.target.arrows[m] != (self.on_objects[d], self.on_objects[c]):
                raise InvalidTable(f"arrow image {m!r} of {f!r} missing or has wrong endpoints")
        for x in self.source.objects:
            if self.on_arrows[self.source.id_of(x)] != self.target.id_of(self.on_objects[x]):
                raise InvalidTable(f"identity on {x!r} not preserved")
        for (g, f), h in self.source.compose_table.items():
            if self.target.compose(self.on_arrows[g], self.on_arrows[f]) != self.on_arrows[h]:
                raise InvalidTable(f"composition not preserved on ({g!r}, {f!r})")


def identity_functor(cat: FinCat) -> FinFunctor:
    return FinFunctor(cat, cat,
                      {x: x for x in cat.objects},
                      {f: f for f in cat.arrows})


def compose_functors(g: FinFunctor, f: FinFunctor) -> FinFunctor:
    if g.source != f.target:
        raise InvalidTable("functors not composable")
    return FinFunctor(
        f.source,
        g.target,
        {x: g.on_objects[y] for x, y in f.on_objects.items()},
        {a: g.on_arrows[b] for a, b in f.on_arrows.items()},
    )


@dataclass(frozen=True, eq=True)
class NatTransform:
    source: FinFunctor
    target: FinFunctor
    components: Mapping[str, str]

    def at(self, x: str) -> str:
        return self.components[x]

    def validate(self) -> None:
        F, G = self.source, self.target
        if F.source != G.source or F.target != G.target:
            raise InvalidTable("natural transformation endpoints are not parallel")
        B = F.target
        for x in F.source.objects:
            a = self.components.get(x)
            if a is None or a not in B.arrows or \
               B.arrows[a] != (F.on_objects[x], G.on_objects[x]):
                raise InvalidTable(f"component at {x!r} missing or ill-typed")
        for u, (x, y) in F.source.arrows.items():
            if B.compose(G.on_arrows[u], self.components[x]) != \
               B.compose(self.components[y], F.on_arrows[u]):
                raise InvalidTable(f"naturality square fails on {u!r}")


def identity_nat(F: FinFunctor) -> NatTransform:
    return NatTransform(F, F, {x: F.target.id_of(F.on_objects[x]) for x in F.source.objects})


# -- set-valued functors ---------------------------------------------------------


@dataclass(frozen=True, eq=True)
class SetPresheaf:
    """Contravariant finite-set-valued functor: f: d -> c acts Z(c) -> Z(d)."""

    base: FinCat
    on_objects: Mapping[str, tuple[str, ...]]
    on_arrows: Mapping[str, Mapping[str, str]]

    def at(self, c: str) -> tuple[str, ...]:
        return self.on_objects[c]

    def act(self, f: str, x: str) -> str:
        return self.on_arrows[f][x]

    def validate(self) -> None:
        if set(self.on_objects) != set(self.base.objects):
            raise InvalidTable("presheaf object table is not total")
        for c, elems in self.on_objects.items():
            if len(set(elems)) != len(elems) or tuple(sorted(elems)) != tuple(elems):
                raise InvalidTable(f"element table at {c!r} must be sorted and duplicate-free")
        if set(self.on_arrows) != set(self.base.arrows):
            raise InvalidTable("presheaf arrow table is not total")
        for f, fun in self.on_arrows.items():
            d, c = self.base.arrows[f]
            if set(fun) != set(self.on_objects[c]):
                raise InvalidTable(f"action of {f!r} not defined on all of Z({c!r})")
            for x, y in fun.items():
                if y not in self.on_objects[d]:
                    raise InvalidTable(f"action of {f!r} sends {x!r} outside Z({d!r})")
        for c in self.base.objects:
            i = self.base.id_of(c)
            if any(self.on_arrows[i][x] != x for x in self.on_objects[c]):
                raise InvalidTable(f"identity on {c!r} does not act as identity")
        for (f, g), fg in self.base.compose_table.items():
            # f: d -> c, g: e -> d, so Z(f.g) = Z(g) . Z(f)
            c = self.base.cod(f)
            for x in self.on_objects[c]:
                if self.on_arrows[fg][x] != self.on_arrows[g][self.on_arrows[f][x]]:
                    raise InvalidTable(f"functoriality fails on composite ({f!r}, {g!r})")


@dataclass(frozen=True, eq=True)
class FinSetFunctor:
    """Covariant finite-set-valued functor: f: d -> c acts A(d) -> A(c)."""

    base: FinCat
    on_objects: Mapping[str, tuple[str, ...]]
    on_arrows: Mapping[str, Mapping[str, str]]

    def at(self, c: str) -> tuple[str, ...]:
        return self.on_objects[c]

    def act(self, f: str, x: str) -> str:
        return self.on_arrows[f][x]

    def validate(self) -> None:
        if set(self.on_objects) != set(self.base.objects):
            raise InvalidTable("set functor object table is not total")
        for c, elems in self.on_objects.items():
            if len(set(elems)) != len(elems) or tuple(sorted(elems)) != tuple(elems):
                raise InvalidTable(f"element table at {c!r} must be sorted and duplicate-free")
        if set(self.on_arrows) != set(self.base.arrows):
            raise InvalidTable("set functor arrow table is not total")
        for f, fun in self.on_arrows.items():
            d, c = self.base.arrows[f]
            if set(fun) != set(self.on_objects[d]):
                raise InvalidTable(f"action of {f!r} not defined on all of A({d!r})")
            for x, y in fun.items():
                if y not in self.on_objects[c]:
                    raise InvalidTable(f"action of {f!r} sends {x!r} outside A({c!r})")
        for c in self.base.objects:
            i = self.base.id_of(c)
            if any(self.on_arrows[i][x] != x for x in self.on_objects[c]):
                raise InvalidTable(f"identity on {c!r} does not act as identity")
        for (f, g), fg in self.base.compose_table.items():
            # f: d -> c, g: e -> d, so A(f.g) = A(f) . A(g)
            e = self.base.dom(g)
            for x in self.on_objects[e]:
                if self.on_arrows[fg][x] != self.on_arrows[f][self.on_arrows[g][x]]:
                    raise InvalidTable(f"functoriality fails on composite ({f!r}, {g!r})")


@dataclass(frozen=True, eq=True)
class PresheafMap:
    """Natural transformation between SetPresheaves on the same base."""

    source: SetPresheaf
    target: SetPresheaf
    components: Mapping[str, Mapping[str, str]]

    def at(self, c: str, x: str) -> str:
        return self.components[c][x]

    def validate(self) -> None:
        if self.source.base != self.target.base:
            raise InvalidTable("presheaf map endpoints live on different bases")
        base = self.source.base
        for c in base.objects:
            comp = self.components.get(c)
            if comp is None or set(comp) != set(self.source.on_objects[c]):
                raise InvalidTable(f"component at {c!r} missing or not total")
            for x, y in comp.items():
                if y not in self.target.on_objects[c]:
                    raise InvalidTable(f"component at {c!r} sends {x!r} outside target")
        for f in base.arrows:
            d, c = base.arrows[f]
            for x in self.source.on_objects[c]:
                if self.target.on_arrows[f][self.components[c][x]] != \
                   self.components[d][self.source.on_arrows[f][x]]:
                    raise InvalidTable(f"naturality fails on arrow {f!r}")

    def is_iso(self) -> bool:
        return all(
            len(comp) == len(self.target.on_objects[c]) == len(set(comp.values()))
            for c, comp in self.components.items()
        )


@dataclass(frozen=True, eq=True)
class SetFunctorMap:
    """Natural transformation between FinSetFunctors on the same base."""

    source: FinSetFunctor
    target: FinSetFunctor
    components: Mapping[str, Mapping[str, str]]

    def at(self, c: str, x: str) -> str:
        return self.components[c][x]

    def validate(self) -> None:
        if self.source.base != self.target.base:
            raise InvalidTable("set functor map endpoints live on different bases")
        base = self.source.base
        for c in base.objects:
            comp = self.components.get(c)
            if comp is None or set(comp) != set(self.source.on_objects[c]):
                raise InvalidTable(f"component at {c!r} missing or not total")
            for x, y in comp.items():
                if y not in self.target.on_objects[c]:
                    raise InvalidTable(f"component at {c!r} sends {x!r} outside target")
        for f in base.arrows:
            d, c = base.arrows[f]
            for x in self.source.on_objects[d]:
                if self.components[c][self.source.on_arrows[f][x]] != \
                   self.target.on_arrows[f][self.components[d][x]]:
                    raise InvalidTable(f"naturality fails on arrow {f!r}")

    def is_iso(self) -> bool:
        return all(
            len(comp) == len(self.target.on_objects[c]) == len(set(comp.values()))
            for c, comp in self.components.items()
        )


def compose_presheaf_maps(b: PresheafMap, a: PresheafMap) -> PresheafMap:
    if a.target != b.source:
        raise InvalidTable("presheaf maps not composable")
    return PresheafMap(
        a.source,
        b.target,
        {c: {x: b.components[c][y] for x, y in comp.items()}
         for c, comp in a.components.items()},
    )


def invert_presheaf_map(a: PresheafMap) -> PresheafMap:
    if not a.is_iso():
        raise InvalidTable("presheaf map is not invertible")
    return PresheafMap(
        a.target,
        a.source,
        {c: {y: x for x, y in comp.items()} for c, comp in a.components.items()},
    )


def identity_presheaf_map(Z: SetPresheaf) -> PresheafMap:
    return PresheafMap(Z, Z, {c: {x: x for x in elems} for c, elems in Z.on_objects.items()})


def constant_presheaf(base: FinCat, labels: Iterable[str]) -> SetPresheaf:
    elems = tuple(sorted(labels))
    return SetPresheaf(
        base,
        {c: elems for c in base.objects},
        {f: {x: x for x in elems} for f in base.arrows},
    )


def delta1(base: FinCat) -> SetPresheaf:
    """The constant singleton presheaf."""
    return constant_presheaf(base, ("*",))


# -- reindexing of slice presheaves ----------------------------------------------


def reindex_slice_presheaf(cat: FinCat, f: str, Z: SetPresheaf) -> SetPresheaf:
    """Precompose Z on slice(C, cod f) with postcompose(f); lands on slice(C, dom f)."""
    d, _ = cat.arrows[f]
    sl_d, _ = slice_cat(cat, d)
    return SetPresheaf(
        sl_d,
        {g: Z.on_objects[cat.compose(f, g)] for g in sl_d.objects},
        {
            slice_arrow_name(h, g): Z.on_arrows[slice_arrow_name(h, cat.compose(f, g))]
            for g in sl_d.objects
            for h in cat.arrows_into(cat.dom(g))
        },
    )


def reindex_slice_presheaf_map(cat: FinCat, f: str, m: PresheafMap) -> PresheafMap:
    d, _ = cat.arrows[f]
    sl_d, _ = slice_cat(cat, d)
    return PresheafMap(
        reindex_slice_presheaf(cat, f, m.source),
        reindex_slice_presheaf(cat, f, m.target),
        {g: m.components[cat.compose(f, g)] for g in sl_d.objects},
    )


# -- enumeration oracles ----------------------------------------------------------


def enumerate_functors(A: FinCat, B: FinCat, bound: int = DEFAULT_BOUND) -> list[FinFunctor]:
    """All functors A -> B, by brute force over object and arrow assignments."""
    objs = list(A.objects)
    nonid = [f for f in A.sorted_arrows() if not A.is_identity(f)]
    est = max(1, len(B.objects)) ** len(objs)
    guard("enumerate_functors object maps", est, bound)
    out: list[FinFunctor] = []
    for images in itertools.product(sorted(B.objects), repeat=len(objs)):
        omap = dict(zip(objs, images))
        homs = [B.hom(omap[A.dom(f)], omap[A.cod(f)]) for f in nonid]
        total = 1
        for h in homs:
            total *= len(h)
        guard("enumerate_functors arrow maps", total, bound)
        if total == 0:
            continue
        for choice in itertools.product(*homs):
            amap = dict(zip(nonid, choice))
            for x in objs:
                amap[A.id_of(x)] = B.id_of(omap[x])
            ok = True
            for (g, f), h in A.compose_table.items():
                if B.compose(amap[g], amap[f]) != amap[h]:
                    ok = False
                    break
            if ok:
                out.append(FinFunctor(A, B, omap, amap))
    return out


def enumerate_nats(F: FinFunctor, G: FinFunctor, bound: int = DEFAULT_BOUND) -> list[NatTransform]:
    """All natural transformations between the parallel functors F and G."""
    if F.source != G.source or F.target != G.target:
        raise InvalidTable("enumerate_nats needs parallel functors")
    A, B = F.source, F.target
    objs = list(A.objects)
    homs = [B.hom(F.on_objects[x], G.on_objects[x]) for x in objs]
    total = 1
    for h in homs:
        total *= len(h)
    guard("enumerate_nats", total, bound)
    out: list[NatTransform] = []
    for choice in itertools.product(*homs):
        comp = dict(zip(objs, choice))
        if all(
            B.compose(G.on_arrows[u], comp[x]) == B.compose(comp[y], F.on_arrows[u])
            for u, (x, y) in A.arrows.items()
        ):
            out.append(NatTransform(F, G, comp))
    return out


def natural_iso(F: FinFunctor, G: FinFunctor, bound: int = DEFAULT_BOUND) -> NatTransform | None:
    """Lexicographically first natural isomorphism F => G, if any."""
    for nat in enumerate_nats(F, G, bound):
        if all(F.target.is_invertible(a) for a in nat.components.values()):
            return nat
    return None


def _enumerate_component_maps(sources, targets, bound: int):
    """All families of functions sources[k] -> targets[k], keyed by k."""
    keys = sorted(sources)
    per_key = []
    total = 1
    for k in keys:
        elems = sorted(sources[k])
        pool = sorted(targets[k])
        if elems and not pool:
            return []
        total *= max(1, len(pool)) ** len(elems)
        guard("component maps", total, bound)
        per_key.append([dict(zip(elems, img))
                        for img in itertools.product(pool, repeat=len(elems))])
    return (dict(zip(keys, combo)) for combo in itertools.product(*per_key))


def enumerate_presheaf_maps(Z: SetPresheaf, W: SetPresheaf,
                            bound: int = DEFAULT_BOUND) -> list[PresheafMap]:
    """All natural transformations Z => W, by product-and-filter."""
    if Z.base != W.base:
        raise InvalidTable("presheaf maps need a common base")
    base = Z.base
    out: list[PresheafMap] = []
    for comp in _enumerate_component_maps(
        {c: Z.on_objects[c] for c in base.objects},
        {c: W.on_objects[c] for c in base.objects},
        bound,
    ):
        if all(
            W.on_arrows[f][comp[c][x]] == comp[d][Z.on_arrows[f][x]]
            for f, (d, c) in base.arrows.items()
            for x in Z.on_objects[c]
        ):
            out.append(PresheafMap(Z, W, comp))
    return out


def presheaf_iso(Z: SetPresheaf, W: SetPresheaf,
                 bound: int = DEFAULT_BOUND) -> PresheafMap | None:
    if any(len(Z.on_objects[c]) != len(W.on_objects[c]) for c in Z.base.objects):
        return None
    for m in enumerate_presheaf_maps(Z, W, bound):
        if m.is_iso():
            return m
    return None


def enumerate_setfunctor_maps(A: FinSetFunctor, B: FinSetFunctor,
                              bound: int = DEFAULT_BOUND) -> list[SetFunctorMap]:
    if A.base != B.base:
        raise InvalidTable("set functor maps need a common base")
    base = A.base
    out: list[SetFunctorMap] = []
    for comp in _enumerate_component_maps(
        {c: A.on_objects[c] for c in base.objects},
        {c: B.on_objects[c] for c in base.objects},
        bound,
    ):
        if all(
            comp[c][A.on_arrows[f][x]] == B.on_arrows[f][comp[d][x]]
            for f, (d, c) in base.arrows.items()
            for x in A.on_objects[d]
        ):
            out.append(SetFunctorMap(A, B, comp))
    return out


def setfunctor_iso(A: FinSetFunctor, B: FinSetFunctor,
                   bound: int = DEFAULT_BOUND) -> SetFunctorMap | None:
    if any(len(A.on_objects[c]) != len(B.on_objects[c]) for c in A.base.objects):
        return None
    for m in enumerate_setfunctor_maps(A, B, bound):
        if m.is_iso():
            return m
    return None


def search_setfunctor_maps(A: FinSetFunctor, B: FinSetFunctor,
                           bound: int = DEFAULT_BOUND,
                           iso_only: bool = False,
                           first_only: bool = False) -> list[SetFunctorMap]:
    """Natural transformations A => B by element-wise backtracking.

    Choosing the image of one element forces images along every arrow out
    of it, so the search prunes far earlier than the product-and-filter
    enumerator; results come in lexicographic order.  The bound caps the
    number of search nodes.
    """
    if A.base != B.base:
        raise InvalidTable("set functor maps need a common base")
    base = A.base
    if iso_only and any(
        len(A.on_objects[c]) != len(B.on_objects[c]) for c in base.objects
    ):
        return []
    variables = [(c, x) for c in sorted(base.objects) for x in A.on_objects[c]]
    out_arrows: dict[str, list[str]] = {c: [] for c in base.objects}
    for f, (d, _) in base.arrows.items():
        out_arrows[d].append(f)
    assignment: dict[tuple[str, str], str] = {}
    used: dict[str, set[str]] = {c: set() for c in base.objects}
    results: list[SetFunctorMap] = []
    nodes = 0

    def propagate(var, val, trail) -> bool:
        stack = [(var, val)]
        while stack:
            (c, x), v = stack.pop()
            cur = assignment.get((c, x))
            if cur is not None:
                if cur != v:
                    return False
                continue
            if iso_only and v in used[c]:
                return False
            assignment[(c, x)] = v
            used[c].add(v)
            trail.append((c, x))
            for f in out_arrows[c]:
                cod = base.cod(f)
                stack.append(((cod, A.on_arrows[f][x]), B.on_arrows[f][v]))
        return True

    def undo(trail) -> None:
        for c, x in trail:
            used[c].discard(assignment.pop((c, x)))

    def backtrack(i: int) -> bool:
        nonlocal nodes
        if i == len(variables):
            comps = {c: {} for c in base.objects}
            for (c, x), v in assignment.items():
                comps[c][x] = v
            results.append(SetFunctorMap(A, B, comps))
            return first_only
        var = variables[i]
        if var in assignment:
            return backtrack(i + 1)
        c, _ = var
        for v in B.on_objects[c]:
            nodes += 1
            guard("search_setfunctor_maps nodes", nodes, bound)
            trail: list[tuple[str, str]] = []
            if propagate(var, v, trail) and backtrack(i + 1):
                return True
            undo(trail)
        return False

    backtrack(0)
    return results


# -- free categories on acyclic generators ---------------------------------------


def free_category(objects: Iterable[str], generators: Mapping[str, tuple[str, str]]) -> FinCat:
    """The free category on an acyclic generating graph.

    A composite path (g1 then g2) is named ``g2*g1``; identities are named
    ``id_<object>``.  Cyclic generators are rejected (the free category
    would be infinite).
    """
    objs = sorted(objects)
    adj: dict[str, list[tuple[str, str]]] = {x: [] for x in objs}
    for g, (d, c) in sorted(generators.items()):
        if d not in adj or c not in objs:
            raise InvalidTable(f"generator {g!r} has unknown endpoint")
        adj[d].append((g, c))
    # reject cycles (DFS colouring)
    state = {x: 0 for x in objs}  # 0 unseen, 1 on stack, 2 done

    def visit(x: str) -> None:
        state[x] = 1
        for _, y in adj[x]:
            if state[y] == 1:
                raise InvalidTable("generating graph has a cycle; free category would be infinite")
            if state[y] == 0:
                visit(y)
        state[x] = 2

    for x in objs:
        if state[x] == 0:
            visit(x)

    # enumerate all paths out of each object; finite since acyclic
    paths: dict[str, list[tuple[tuple[str, ...], str]]] = {}

    def extend(x: str) -> list[tuple[tuple[str, ...], str]]:
        if x in paths:
            return paths[x]
        items: list[tuple[tuple[str, ...], str]] = [((), x)]
        for g, y in adj[x]:
            items.extend(((g,) + rest, end) for rest, end in extend(y))
        paths[x] = items
        return items

    for x in objs:
        extend(x)

    def name(path: tuple[str, ...], start: str) -> str:
        return "*".join(reversed(path)) if path else f"id_{start}"

    arrows = {name(path, x): (x, end) for x, items in paths.items() for path, end in items}
    identities = {x: f"id_{x}" for x in objs}
    compose: dict[tuple[str, str], str] = {}
    for x, items in paths.items():
        for path, end in items:
            f = name(path, x)
            for path2, _ in paths[end]:
                compose[(name(path2, end), f)] = name(path + path2, x)
    return build_category(objs, arrows, identities, compose)
