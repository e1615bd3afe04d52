"""Strict Cat-valued presheaves on a finite site, their 2-natural
transformations and modifications, and pointwise discrete opfibrations.

Strictness is checked on the nose everywhere: functoriality and naturality
are equalities of tables, never isomorphisms.  Isomorphism only enters when
comparing opfibrations over a fixed presheaf, where it is searched for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from . import cat2
from .cat2 import DiscOpfibCat
from .errors import InvalidTable, NotOpfibration, NotOpfibrationAt, UnknownObject
from .fincat import (
    DEFAULT_BOUND,
    FinCat,
    FinFunctor,
    NatTransform,
    build_category,
    compose_functors,
    discrete_category,
    enumerate_functors,
    enumerate_nats,
    guard,
    identity_functor,
    point_category,
)


@dataclass(frozen=True, eq=True)
class CatPresheaf:
    """A strict 2-functor C^op -> Cat given by per-object/per-arrow tables."""

    base: FinCat
    on_objects: Mapping[str, FinCat]
    on_arrows: Mapping[str, FinFunctor]

    def at(self, c: str) -> FinCat:
        return self.on_objects[c]

    def act(self, f: str) -> FinFunctor:
        return self.on_arrows[f]

    def validate(self) -> None:
        if set(self.on_objects) != set(self.base.objects):
            raise InvalidTable("cat presheaf object table is not total")
        if set(self.on_arrows) != set(self.base.arrows):
            raise InvalidTable("cat presheaf arrow table is not total")
        for cat in self.on_objects.values():
            cat.validate()
        for f, (d, c) in self.base.arrows.items():
            fun = self.on_arrows[f]
            if fun.source != self.on_objects[c] or fun.target != self.on_objects[d]:
                raise InvalidTable(f"action of {f!r} has wrong endpoints")
            fun.validate()
        for c in self.base.objects:
            if self.on_arrows[self.base.id_of(c)] != identity_functor(self.on_objects[c]):
                raise InvalidTable(f"identity on {c!r} does not act as the identity functor")
        for (f, g), fg in self.base.compose_table.items():
            # f: d -> c, g: e -> d; F(f.g) = F(g) . F(f) on the nose
            if self.on_arrows[fg] != compose_functors(self.on_arrows[g], self.on_arrows[f]):
                raise InvalidTable(f"strict functoriality fails on composite ({f!r}, {g!r})")


@dataclass(frozen=True, eq=True)
class TwoNat:
    source: CatPresheaf
    target: CatPresheaf
    components: Mapping[str, FinFunctor]

    def at(self, c: str) -> FinFunctor:
        return self.components[c]

    def validate(self) -> None:
        if self.source.base != self.target.base:
            raise InvalidTable("two-natural transformation across different sites")
        base = self.source.base
        if set(self.components) != set(base.objects):
            raise InvalidTable("component table is not total")
        for c in base.objects:
            comp = self.components[c]
            if comp.source != self.source.on_objects[c] or \
               comp.target != self.target.on_objects[c]:
                raise InvalidTable(f"component at {c!r} has wrong endpoints")
            comp.validate()
        for f, (d, c) in base.arrows.items():
            lhs = compose_functors(self.target.on_arrows[f], self.components[c])
            rhs = compose_functors(self.components[d], self.source.on_arrows[f])
            if lhs != rhs:
                raise InvalidTable(f"strict naturality fails on {f!r}")


@dataclass(frozen=True, eq=True)
class Modification:
    source: TwoNat
    target: TwoNat
    components: Mapping[str, NatTransform]

    def validate(self) -> None:
        z, w = self.source, self.target
        if z.source != w.source or z.target != w.target:
            raise InvalidTable("modification endpoints are not parallel")
        base = z.source.base
        if set(self.components) != set(base.objects):
            raise InvalidTable("modification component table is not total")
        for c in base.objects:
            m = self.components[c]
            if m.source != z.components[c] or m.target != w.components[c]:
                raise InvalidTable(f"modification component at {c!r} has wrong endpoints")
            m.validate()
        for f, (d, c) in base.arrows.items():
            # G(f) * m_c  ==  m_d * F(f)   componentwise on objects of F(c)
            gf = z.target.on_arrows[f]
            for x in z.source.on_objects[c].objects:
                lhs = gf.on_arrows[self.components[c].components[x]]
                rhs = self.components[d].components[z.source.on_arrows[f].on_objects[x]]
                if lhs != rhs:
                    raise InvalidTable(f"modification axiom fails on {f!r} at {x!r}")


@dataclass(frozen=True, eq=True)
class DiscOpfibPre:
    """A 2-natural transformation certified pointwise, with cached fibres."""

    s: TwoNat
    certificates: Mapping[str, DiscOpfibCat]
    fibres: Mapping[tuple[str, str], tuple[str, ...]]

    @property
    def total(self) -> CatPresheaf:
        return self.s.source

    @property
    def codomain(self) -> CatPresheaf:
        return self.s.target

    def fibre(self, c: str, x: str) -> tuple[str, ...]:
        return self.fibres[(c, x)]


# -- constructions ------------------------------------------------------------------


def terminal_presheaf(base: FinCat) -> CatPresheaf:
    pt = point_category()
    return CatPresheaf(
        base,
        {c: pt for c in base.objects},
        {f: identity_functor(pt) for f in base.arrows},
    )


def discrete_presheaf(base: FinCat, Z) -> CatPresheaf:
    """View a SetPresheaf as a Cat-valued presheaf with discrete values."""
    cats = {c: discrete_category(Z.on_objects[c]) for c in base.objects}
    on_arrows = {}
    for f, (d, c) in base.arrows.items():
        table = Z.on_arrows[f]
        on_arrows[f] = FinFunctor(
            cats[c],
            cats[d],
            dict(table),
            {f"id_{x}": f"id_{table[x]}" for x in Z.on_objects[c]},
        )
    F = CatPresheaf(base, cats, on_arrows)
    F.validate()
    return F


def representable(base: FinCat, c: str) -> CatPresheaf:
    """Hom(-, c) as a discrete Cat-valued presheaf."""
    if c not in base.objects:
        raise UnknownObject(c)
    from .site import representable_presheaf

    return discrete_presheaf(base, representable_presheaf(base, c))


def yoneda(F: CatPresheaf, c: str, x: str) -> TwoNat:
    """The 2-natural transformation representable(c) -> F picking x."""
    if x not in F.on_objects[c].objects:
        raise UnknownObject(x)
    rep = representable(F.base, c)
    comps = {}
    for d in F.base.objects:
        on_objects = {f: F.on_arrows[f].on_objects[x] for f in F.base.hom(d, c)}
        on_arrows = {
            f"id_{f}": F.on_objects[d].id_of(on_objects[f]) for f in F.base.hom(d, c)
        }
        comps[d] = FinFunctor(rep.on_objects[d], F.on_objects[d], on_objects, on_arrows)
    nat = TwoNat(rep, F, comps)
    nat.validate()
    return nat


def yoneda_inv(nat: TwoNat) -> str:
    """Evaluate a 2-natural transformation out of a representable at the identity."""
    base = nat.source.base
    for c in base.objects:
        if nat.source == representable(base, c):
            return nat.components[c].on_objects[base.id_of(c)]
    raise InvalidTable("source is not a representable presheaf")


def identity_two_nat(F: CatPresheaf) -> TwoNat:
    return TwoNat(F, F, {c: identity_functor(F.on_objects[c]) for c in F.base.objects})


def compose_two_nats(t: TwoNat, s: TwoNat) -> TwoNat:
    if s.target != t.source:
        raise InvalidTable("two-natural transformations not composable")
    return TwoNat(
        s.source,
        t.target,
        {c: compose_functors(t.components[c], s.components[c]) for c in s.components},
    )


def enumerate_two_nats(F: CatPresheaf, G: CatPresheaf,
                       bound: int = DEFAULT_BOUND) -> list[TwoNat]:
    """All strict 2-natural transformations F => G, by product-and-filter."""
    if F.base != G.base:
        raise InvalidTable("presheaves on different sites")
    base = F.base
    objs = sorted(base.objects)
    per_obj = [enumerate_functors(F.on_objects[c], G.on_objects[c], bound) for c in objs]
    total = 1
    for fs in per_obj:
        total *= max(1, len(fs))
        guard("enumerate_two_nats", total, bound)
    out = []
    for combo in itertools.product(*per_obj):
        comps = dict(zip(objs, combo))
        if all(
            compose_functors(G.on_arrows[f], comps[c]) ==
            compose_functors(comps[d], F.on_arrows[f])
            for f, (d, c) in base.arrows.items()
        ):
            out.append(TwoNat(F, G, comps))
    return out


# -- pointwise discrete opfibrations ---------------------------------------------------


def certify_dopf_pre(s: TwoNat) -> DiscOpfibPre:
    """Certify every component, or reject naming the failing one."""
    s.validate()
    certs = {}
    for c in sorted(s.source.base.objects):
        try:
            certs[c] = cat2.certify_dopf(s.components[c])
        except NotOpfibration as exc:
            raise NotOpfibrationAt(c, exc) from exc
    fibres = {
        (c, x): certs[c].fibres[x]
        for c in certs
        for x in s.target.on_objects[c].objects
    }
    return DiscOpfibPre(s, certs, fibres)


@dataclass(frozen=True, eq=True)
class PreCommaCone:
    apex: CatPresheaf
    left_leg: TwoNat
    right_leg: TwoNat
    filler: Modification


def pointwise_comma(f: TwoNat, g: TwoNat) -> PreCommaCone:
    """Comma object in [C^op, Cat], calculated pointwise."""
    if f.target != g.target:
        raise InvalidTable("pointwise_comma: codomains disagree")
    base = f.source.base
    cones = {c: cat2.comma(f.components[c], g.components[c]) for c in base.objects}
    on_arrows = {}
    for u, (d, c) in base.arrows.items():
        src_cone, tgt_cone = cones[c], cones[d]
        A_u = f.source.on_arrows[u]
        B_u = g.source.on_arrows[u]
        C_u = f.target.on_arrows[u]
        on_objects = {}
        for o in src_cone.apex.objects:
            a = src_cone.left_leg.on_objects[o]
            b = src_cone.right_leg.on_objects[o]
            al = src_cone.filler.components[o]
            on_objects[o] = f"({A_u.on_objects[a]},{B_u.on_objects[b]},{C_u.on_arrows[al]})"
        arr_map = {}
        for name in src_cone.apex.arrows:
            u1 = src_cone.left_leg.on_arrows[name]
            v1 = src_cone.right_leg.on_arrows[name]
            o1, o2 = src_cone.apex.arrows[name]
            arr_map[name] = (
                f"[{A_u.on_arrows[u1]},{B_u.on_arrows[v1]}]"
                f"{on_objects[o1]}->{on_objects[o2]}"
            )
        fun = FinFunctor(src_cone.apex, tgt_cone.apex, on_objects, arr_map)
        fun.validate()
        on_arrows[u] = fun
    apex = CatPresheaf(base, {c: cones[c].apex for c in base.objects}, on_arrows)
    apex.validate()
    left = TwoNat(apex, f.source, {c: cones[c].left_leg for c in base.objects})
    right = TwoNat(apex, g.source, {c: cones[c].right_leg for c in base.objects})
    left.validate()
    right.validate()
    filler = Modification(
        compose_two_nats(f, left),
        compose_two_nats(g, right),
        {c: cones[c].filler for c in base.objects},
    )
    filler.validate()
    return PreCommaCone(apex, left, right, filler)


def pointwise_pullback(p: DiscOpfibPre, z: TwoNat) -> tuple[DiscOpfibPre, TwoNat]:
    """Pull a certified opfibration back along z, componentwise."""
    if z.target != p.codomain:
        raise InvalidTable("pointwise_pullback: codomains disagree")
    if z == identity_two_nat(p.codomain):
        return p, identity_two_nat(p.total)
    base = z.source.base
    pieces = {c: cat2.pullback_named(p.certificates[c], z.components[c])
              for c in base.objects}
    on_arrows = {}
    for u, (d, c) in base.arrows.items():
        src_q, tgt_q = pieces[c][0], pieces[d][0]
        F_u = z.source.on_arrows[u]
        G_u = p.total.on_arrows[u]
        on_objects = {}
        for o in src_q.total.objects:
            x = src_q.p.on_objects[o]
            e = pieces[c][1].on_objects[o]
            on_objects[o] = f"({F_u.on_objects[x]},{G_u.on_objects[e]})"
        arr_map = {}
        for name in src_q.total.arrows:
            uu = src_q.p.on_arrows[name]
            gg = pieces[c][1].on_arrows[name]
            arr_map[name] = f"({F_u.on_arrows[uu]},{G_u.on_arrows[gg]})"
        fun = FinFunctor(src_q.total, tgt_q.total, on_objects, arr_map)
        fun.validate()
        on_arrows[u] = fun
    apex = CatPresheaf(base, {c: pieces[c][0].total for c in base.objects}, on_arrows)
    apex.validate()
    left = TwoNat(apex, z.source, {c: pieces[c][0].p for c in base.objects})
    top = TwoNat(apex, p.total, {c: pieces[c][1] for c in base.objects})
    left.validate()
    top.validate()
    return certify_dopf_pre(left), top


# -- the category of elements and fibre diagrams ------------------------------------------


def _elements_tables(F: CatPresheaf):
    """Object and arrow tables of the category of elements of F."""
    base = F.base

    def oname(c: str, x: str) -> str:
        return f"<{c}|{x}>"

    obj_parts = {
        oname(c, x): (c, x) for c in base.objects for x in F.on_objects[c].objects
    }
    arrows: dict[str, tuple[str, str]] = {}
    parts: dict[str, tuple[str, str, str]] = {}  # name -> (f, mu, x)
    for o, (c, x) in obj_parts.items():
        for f in base.arrows_into(c):
            d = base.dom(f)
            fx = F.on_arrows[f].on_objects[x]
            for y in F.on_objects[d].objects:
                for mu in F.on_objects[d].hom(fx, y):
                    name = f"<{f}|{mu}|{x}>"
                    arrows[name] = (o, oname(d, y))
                    parts[name] = (f, mu, x)
    return obj_parts, arrows, parts


def elements_category(F: CatPresheaf) -> FinCat:
    """The category of elements of a Cat-valued presheaf.

    Objects are pairs ``<c|X>`` with X in F(c); an arrow ``<f|mu|X>`` from
    ``<c|X>`` to ``<d|Y>`` is a base arrow f: d -> c together with
    mu: F(f)(X) -> Y.  Covariant set-valued functors on this category are
    exactly the fibre tables of discrete opfibrations over F.
    """
    base = F.base
    obj_parts, arrows, parts = _elements_tables(F)
    identities = {
        o: f"<{base.id_of(c)}|{F.on_objects[c].id_of(x)}|{x}>"
        for o, (c, x) in obj_parts.items()
    }
    compose: dict[tuple[str, str], str] = {}
    for n1, (f, mu, x) in parts.items():
        for n2, (g, mu2, _) in parts.items():
            if arrows[n1][1] != arrows[n2][0]:
                continue
            e = base.dom(g)
            fg = base.compose(f, g)
            comp_mu = F.on_objects[e].compose(mu2, F.on_arrows[g].on_arrows[mu])
            compose[(n2, n1)] = f"<{fg}|{comp_mu}|{x}>"
    return build_category(obj_parts, arrows, identities, compose)


def fibre_diagram(phi: DiscOpfibPre) -> "FinSetFunctor":
    """The fibres of phi as a set functor on elements_category(codomain)."""
    from .fincat import FinSetFunctor

    F = phi.codomain
    G = phi.total
    base = F.base
    el = elements_category(F)
    obj_parts, _, parts = _elements_tables(F)
    on_objects = {o: phi.fibre(c, x) for o, (c, x) in obj_parts.items()}
    on_arrows = {}
    for name, (f, mu, x) in parts.items():
        c = base.cod(f)
        d = base.dom(f)
        table = {}
        for e in phi.fibre(c, x):
            restricted = G.on_arrows[f].on_objects[e]
            table[e] = cat2.transport(phi.certificates[d], restricted, mu)
        on_arrows[name] = table
    out = FinSetFunctor(el, on_objects, on_arrows)
    out.validate()
    return out


# -- hom-sets in the fibred world -------------------------------------------------------


def _two_nat_from_fibre_map(phi: DiscOpfibPre, psi: DiscOpfibPre, m) -> TwoNat:
    base = phi.codomain.base
    comps = {}
    for c in base.objects:
        on_objects: dict[str, str] = {}
        for x in phi.codomain.on_objects[c].objects:
            for e in phi.fibre(c, x):
                on_objects[e] = m.components[f"<{c}|{x}>"][e]
        amap = {}
        for g, (e1, e2) in phi.total.on_objects[c].arrows.items():
            lifted = psi.certificates[c].lifts[
                (on_objects[e1], phi.s.components[c].on_arrows[g])
            ]
            amap[g] = lifted
        fun = FinFunctor(phi.total.on_objects[c], psi.total.on_objects[c],
                         on_objects, amap)
        fun.validate()
        comps[c] = fun
    nat = TwoNat(phi.total, psi.total, comps)
    nat.validate()
    for c in base.objects:
        if compose_functors(psi.s.components[c], comps[c]) != phi.s.components[c]:
            raise InvalidTable("fibre map does not commute with the projections")
    return nat


def fib_hom(phi: DiscOpfibPre, psi: DiscOpfibPre,
            bound: int = DEFAULT_BOUND) -> list[TwoNat]:
    """All strictly commuting 2-naturals dom(phi) -> dom(psi) over the base.

    Computed as natural maps between the fibre diagrams on the category of
    elements, by pruned backtracking.
    """
    from .fincat import search_setfunctor_maps

    if phi.codomain != psi.codomain:
        raise InvalidTable("fib_hom: different codomains")
    maps = search_setfunctor_maps(fibre_diagram(phi), fibre_diagram(psi), bound)
    return [_two_nat_from_fibre_map(phi, psi, m) for m in maps]


def fib_iso(phi: DiscOpfibPre, psi: DiscOpfibPre,
            bound: int = DEFAULT_BOUND) -> TwoNat | None:
    """Lexicographically first invertible fibred map, if any."""
    from .fincat import search_setfunctor_maps

    if phi.codomain != psi.codomain:
        raise InvalidTable("fib_iso: different codomains")
    if any(
        len(phi.fibres[key]) != len(psi.fibres.get(key, ()))
        for key in phi.fibres
    ):
        return None
    found = search_setfunctor_maps(
        fibre_diagram(phi), fibre_diagram(psi), bound, iso_only=True, first_only=True
    )
    if not found:
        return None
    return _two_nat_from_fibre_map(phi, psi, found[0])


def enumerate_modifications(z: TwoNat, w: TwoNat,
                            bound: int = DEFAULT_BOUND) -> list[Modification]:
    """All modifications z => w between parallel 2-naturals."""
    if z.source != w.source or z.target != w.target:
        raise InvalidTable("enumerate_modifications needs parallel 2-naturals")
    base = z.source.base
    objs = sorted(base.objects)
    per_obj = [enumerate_nats(z.components[c], w.components[c], bound) for c in objs]
    total = 1
    for ns in per_obj:
        total *= max(1, len(ns))
        guard("enumerate_modifications", total, bound)
    out = []
    for combo in itertools.product(*per_obj):
        comps = dict(zip(objs, combo))
        m = Modification(z, w, comps)
        try:
            m.validate()
        except InvalidTable:
            continue
        out.append(m)
    return out
