"""Discrete opfibrations, comma objects and the category of elements in Cat.

A functor p: E -> B is certified here when every object of E admits exactly
one lift of every arrow leaving its image.  Fibres are precomputed; the lift
table is what classify/char consult downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidTable, NotOpfibration
from .fincat import (
    DEFAULT_BOUND,
    FinCat,
    FinFunctor,
    FinSetFunctor,
    NatTransform,
    build_category,
    compose_functors,
    guard,
    identity_functor,
    point_category,
)


@dataclass(frozen=True, eq=True)
class DiscOpfibCat:
    """A functor certified to have the unique-lifting property, with fibres."""

    p: FinFunctor
    fibres: Mapping[str, tuple[str, ...]]
    lifts: Mapping[tuple[str, str], str]  # (object of E, arrow of B) -> arrow of E

    @property
    def total(self) -> FinCat:
        return self.p.source

    @property
    def base(self) -> FinCat:
        return self.p.target

    def fibre(self, b: str) -> tuple[str, ...]:
        return self.fibres[b]


@dataclass(frozen=True, eq=True)
class CommaCone:
    apex: FinCat
    left_leg: FinFunctor
    right_leg: FinFunctor
    filler: NatTransform  # f . left_leg => g . right_leg


def certify_dopf(p: FinFunctor) -> DiscOpfibCat:
    """Certify the unique-lifting property by exhaustive scan, or reject."""
    p.validate()
    E, B = p.source, p.target
    lifts: dict[tuple[str, str], str] = {}
    for e in E.objects:
        pe = p.on_objects[e]
        for f in B.arrows_from(pe):
            cands = [g for g in E.arrows_from(e) if p.on_arrows[g] == f]
            if len(cands) != 1:
                raise NotOpfibration(e, f, len(cands))
            lifts[(e, f)] = cands[0]
    # redundant discreteness validator: arrows over identities are identities
    for g in E.arrows:
        if B.is_identity(p.on_arrows[g]) and not E.is_identity(g):
            raise NotOpfibration(E.dom(g), p.on_arrows[g], 2)
    fibres = {
        b: tuple(sorted(e for e in E.objects if p.on_objects[e] == b))
        for b in B.objects
    }
    return DiscOpfibCat(p, fibres, lifts)


def lift(p: DiscOpfibCat, e: str, f: str) -> str:
    """The unique arrow of E with domain e lying over f."""
    return p.lifts[(e, f)]


def transport(p: DiscOpfibCat, e: str, f: str) -> str:
    """Codomain of the unique lift of f at e."""
    return p.total.cod(p.lifts[(e, f)])


def _pair(x: str, y: str) -> str:
    return f"({x},{y})"


def pullback(p: DiscOpfibCat, z: FinFunctor) -> tuple[DiscOpfibCat, FinFunctor]:
    """Strict pullback of p along z, with its projection to E.

    The chosen-pullback convention makes the change of base of an identity
    the identity: pulling back along Id returns p itself.
    """
    if z.target != p.base:
        raise InvalidTable("pullback: codomains disagree")
    if z == identity_functor(p.base):
        return p, identity_functor(p.total)
    return pullback_named(p, z)


def pullback_named(p: DiscOpfibCat, z: FinFunctor) -> tuple[DiscOpfibCat, FinFunctor]:
    """Tuple-named pullback, with no identity special case.

    Used where several pullbacks must share the naming scheme (pointwise
    constructions over a site).
    """
    if z.target != p.base:
        raise InvalidTable("pullback: codomains disagree")
    F, E = z.source, p.total
    obj_parts = {
        _pair(x, e): (x, e)
        for x in F.objects
        for e in E.objects
        if z.on_objects[x] == p.p.on_objects[e]
    }
    arrows: dict[str, tuple[str, str]] = {}
    proj_f: dict[str, str] = {}
    proj_e: dict[str, str] = {}
    for u in F.arrows:
        for g in E.arrows:
            if z.on_arrows[u] == p.p.on_arrows[g]:
                name = _pair(u, g)
                arrows[name] = (_pair(F.dom(u), E.dom(g)), _pair(F.cod(u), E.cod(g)))
                proj_f[name] = u
                proj_e[name] = g
    identities = {o: _pair(F.id_of(x), E.id_of(e)) for o, (x, e) in obj_parts.items()}
    compose = {}
    for n2 in arrows:
        for n1 in arrows:
            if arrows[n1][1] == arrows[n2][0]:
                compose[(n2, n1)] = _pair(
                    F.compose(proj_f[n2], proj_f[n1]), E.compose(proj_e[n2], proj_e[n1])
                )
    apex = build_category(obj_parts, arrows, identities, compose)
    left = FinFunctor(apex, F, {o: x for o, (x, _) in obj_parts.items()}, proj_f)
    top = FinFunctor(apex, E, {o: e for o, (_, e) in obj_parts.items()}, proj_e)
    left.validate()
    top.validate()
    return certify_dopf(left), top


def comma(f: FinFunctor, g: FinFunctor) -> CommaCone:
    """The comma category (f / g) with canonical tuple-named apex."""
    if f.target != g.target:
        raise InvalidTable("comma: codomains disagree")
    A, B, C = f.source, g.source, f.target

    def oname(a: str, b: str, al: str) -> str:
        return f"({a},{b},{al})"

    parts = {
        oname(a, b, al): (a, b, al)
        for a in A.objects
        for b in B.objects
        for al in C.hom(f.on_objects[a], g.on_objects[b])
    }
    objs = sorted(parts)
    arrows: dict[str, tuple[str, str]] = {}
    comp_u: dict[str, str] = {}
    comp_v: dict[str, str] = {}
    for o1 in objs:
        a1, b1, al1 = parts[o1]
        for o2 in objs:
            a2, b2, al2 = parts[o2]
            for u in A.hom(a1, a2):
                for v in B.hom(b1, b2):
                    # square: al2 . f(u) == g(v) . al1
                    if C.compose(al2, f.on_arrows[u]) == C.compose(g.on_arrows[v], al1):
                        name = f"[{u},{v}]{o1}->{o2}"
                        arrows[name] = (o1, o2)
                        comp_u[name] = u
                        comp_v[name] = v
    identities = {
        o: f"[{A.id_of(parts[o][0])},{B.id_of(parts[o][1])}]{o}->{o}" for o in objs
    }
    compose = {}
    for n2 in arrows:
        for n1 in arrows:
            if arrows[n1][1] == arrows[n2][0]:
                u = A.compose(comp_u[n2], comp_u[n1])
                v = B.compose(comp_v[n2], comp_v[n1])
                compose[(n2, n1)] = f"[{u},{v}]{arrows[n1][0]}->{arrows[n2][1]}"
    apex = build_category(objs, arrows, identities, compose)
    left = FinFunctor(apex, A, {o: parts[o][0] for o in objs}, comp_u)
    right = FinFunctor(apex, B, {o: parts[o][1] for o in objs}, comp_v)
    left.validate()
    right.validate()
    filler = NatTransform(
        compose_functors(f, left), compose_functors(g, right),
        {o: parts[o][2] for o in objs},
    )
    filler.validate()
    return CommaCone(apex, left, right, filler)


def lax_limit_of_arrow(omega: FinFunctor) -> tuple[DiscOpfibCat, CommaCone]:
    """comma(omega, Id); the projection to the codomain is certified.

    The fibre over b is in bijection with Hom(omega(*), b).
    """
    if len(omega.source.objects) != 1:
        raise InvalidTable("lax_limit_of_arrow: source must be the point category")
    cone = comma(omega, identity_functor(omega.target))
    return certify_dopf(cone.right_leg), cone


def elements_of(z: FinSetFunctor) -> DiscOpfibCat:
    """Category of elements of a covariant set-valued functor, certified."""
    z.validate()
    B = z.base
    obj_parts = {_pair(b, x): (b, x) for b in B.objects for x in z.on_objects[b]}
    arrows: dict[str, tuple[str, str]] = {}
    over: dict[str, str] = {}
    at_elem: dict[str, str] = {}
    for f, (d, c) in z.base.arrows.items():
        for x in z.on_objects[d]:
            name = _pair(f, x)
            arrows[name] = (_pair(d, x), _pair(c, z.on_arrows[f][x]))
            over[name] = f
            at_elem[name] = x
    identities = {o: _pair(B.id_of(b), x) for o, (b, x) in obj_parts.items()}
    compose = {}
    for n2 in arrows:
        for n1 in arrows:
            if arrows[n1][1] == arrows[n2][0]:
                compose[(n2, n1)] = _pair(B.compose(over[n2], over[n1]), at_elem[n1])
    total = build_category(obj_parts, arrows, identities, compose)
    proj = FinFunctor(total, B, {o: b for o, (b, _) in obj_parts.items()}, over)
    proj.validate()
    return certify_dopf(proj)


def fiber_functor(p: DiscOpfibCat) -> FinSetFunctor:
    """Collect the fibres of p into a covariant set-valued functor."""
    B = p.base
    z = FinSetFunctor(
        B,
        dict(p.fibres),
        {
            f: {e: transport(p, e, f) for e in p.fibres[B.dom(f)]}
            for f in B.arrows
        },
    )
    z.validate()
    return z


# -- morphisms of opfibrations over a fixed base ---------------------------------


def fib_hom_cat(p: DiscOpfibCat, q: DiscOpfibCat,
                bound: int = DEFAULT_BOUND) -> list[FinFunctor]:
    """All functors over the common base from total(p) to total(q).

    Candidates are fibrewise object maps; the arrow map of any such functor
    is forced by unique lifting and then checked.
    """
    if p.base != q.base:
        raise InvalidTable("fib_hom_cat: different bases")
    B = p.base
    total = 1
    for b in B.objects:
        n, m = len(p.fibres[b]), len(q.fibres[b])
        if n > 0 and m == 0:
            return []
        total *= max(1, m) ** n
        guard("fib_hom_cat", total, bound)
    per_obj = []
    keys = []
    for b in sorted(B.objects):
        elems = list(p.fibres[b])
        keys.append(elems)
        per_obj.append([dict(zip(elems, img))
                        for img in itertools.product(q.fibres[b], repeat=len(elems))])
    out = []
    for combo in itertools.product(*per_obj):
        omap: dict[str, str] = {}
        for d in combo:
            omap.update(d)
        amap = {}
        ok = True
        for g, (e, e2) in p.total.arrows.items():
            base_arrow = p.p.on_arrows[g]
            lifted = q.lifts[(omap[e], base_arrow)]
            if q.total.cod(lifted) != omap[e2]:
                ok = False
                break
            amap[g] = lifted
        if not ok:
            continue
        h = FinFunctor(p.total, q.total, omap, amap)
        try:
            h.validate()
        except InvalidTable:
            continue
        if compose_functors(q.p, h) == p.p:
            out.append(h)
    return out


def fib_iso_cat(p: DiscOpfibCat, q: DiscOpfibCat,
                bound: int = DEFAULT_BOUND) -> FinFunctor | None:
    """Lexicographically first isomorphism over the base, if any."""
    if any(len(p.fibres[b]) != len(q.fibres[b]) for b in p.base.objects):
        return None
    for h in fib_hom_cat(p, q, bound):
        if all(
            len(set(h.on_objects[e] for e in p.fibres[b])) == len(q.fibres[b])
            for b in p.base.objects
        ):
            return h
    return None


# -- universal property spot check ------------------------------------------------


def check_comma_universal(cone: CommaCone, f: FinFunctor, g: FinFunctor,
                          test_cats: list[FinCat] | None = None,
                          bound: int = DEFAULT_BOUND) -> tuple[bool, object]:
    """Verify the comma universal property against enumerated test cones.

    For every functor pair (a, b) out of each test category and every filler
    a-to-b transformation, exactly one mediating functor into the apex must
    exist.  Returns (ok, counterexample).
    """
    from .fincat import enumerate_functors, enumerate_nats, free_category

    if test_cats is None:
        test_cats = [
            point_category(),
            free_category(["a", "b"], {"u": ("a", "b")}),
            free_category(["a", "b", "c"], {"u": ("a", "b"), "v": ("b", "c")}),
        ]
    A, B = f.source, g.source
    for T in test_cats:
        for a in enumerate_functors(T, A, bound):
            fa = compose_functors(f, a)
            for b in enumerate_functors(T, B, bound):
                gb = compose_functors(g, b)
                for lam in enumerate_nats(fa, gb, bound):
                    mediators = [
                        m
                        for m in enumerate_functors(T, cone.apex, bound)
                        if compose_functors(cone.left_leg, m) == a
                        and compose_functors(cone.right_leg, m) == b
                        and all(
                            cone.filler.components[m.on_objects[t]] == lam.components[t]
                            for t in T.objects
                        )
                    ]
                    if len(mediators) != 1:
                        return False, (T, a, b, lam, len(mediators))
    return True, None
