"""The prestack classifier, represented intensionally.

The classifying object sends c to the (infinite) category of set-valued
presheaves on slice(C, c); it is never materialized.  A morphism from F
into it is stored as a MapToOmega: one slice presheaf per (c, X in F(c)),
one presheaf map per arrow of F(c), with strict reindexing equalities.

classify builds the classified opfibration from the fibre formula (the
sections of the assigned presheaf at the identity); char implements the
normalized characteristic-morphism recipe in terms of global fibres, which
is what makes strict 2-naturality hold on the nose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import cat2, prestack
from .errors import InvalidTable, NoIsoFound, UnknownObject
from .fincat import (
    DEFAULT_BOUND,
    FinCat,
    FinFunctor,
    FinSetFunctor,
    PresheafMap,
    SetPresheaf,
    compose_functors,
    compose_presheaf_maps,
    delta1,
    enumerate_presheaf_maps,
    guard,
    identity_presheaf_map,
    reindex_slice_presheaf,
    reindex_slice_presheaf_map,
    slice_arrow_name,
    slice_cat,
)
from .prestack import CatPresheaf, DiscOpfibPre, TwoNat, certify_dopf_pre, representable
from .report import Report


@dataclass(frozen=True, eq=True)
class MapToOmega:
    """A morphism F -> Omega-tilde, given per object of F(c) by a presheaf
    on slice(C, c) and per arrow by a presheaf map."""

    site: FinCat
    source: CatPresheaf
    object_part: Mapping[tuple[str, str], SetPresheaf]
    arrow_part: Mapping[tuple[str, str], PresheafMap]

    def part(self, c: str, x: str) -> SetPresheaf:
        return self.object_part[(c, x)]

    def on_arrow(self, c: str, nu: str) -> PresheafMap:
        return self.arrow_part[(c, nu)]

    def validate(self) -> None:
        F = self.source
        if F.base != self.site:
            raise InvalidTable("map-to-omega site does not match its source presheaf")
        expected_obj = {(c, x) for c in F.base.objects for x in F.on_objects[c].objects}
        if set(self.object_part) != expected_obj:
            raise InvalidTable("object_part keys do not match the objects of F")
        expected_arr = {(c, nu) for c in F.base.objects for nu in F.on_objects[c].arrows}
        if set(self.arrow_part) != expected_arr:
            raise InvalidTable("arrow_part keys do not match the arrows of F")
        for (c, x), Z in self.object_part.items():
            sl, _ = slice_cat(self.site, c)
            if Z.base != sl:
                raise InvalidTable(f"object_part({c!r}, {x!r}) not on slice(C, {c!r})")
            Z.validate()
        for (c, nu), m in self.arrow_part.items():
            Fc = F.on_objects[c]
            if m.source != self.object_part[(c, Fc.dom(nu))] or \
               m.target != self.object_part[(c, Fc.cod(nu))]:
                raise InvalidTable(f"arrow_part({c!r}, {nu!r}) has wrong endpoints")
            m.validate()
        for c in F.base.objects:
            Fc = F.on_objects[c]
            for x in Fc.objects:
                if self.arrow_part[(c, Fc.id_of(x))] != \
                   identity_presheaf_map(self.object_part[(c, x)]):
                    raise InvalidTable(f"arrow_part at identity on {x!r} is not the identity")
            for (nu2, nu1), comp in Fc.compose_table.items():
                if self.arrow_part[(c, comp)] != compose_presheaf_maps(
                    self.arrow_part[(c, nu2)], self.arrow_part[(c, nu1)]
                ):
                    raise InvalidTable(
                        f"arrow_part not functorial on ({nu2!r}, {nu1!r}) at {c!r}"
                    )
        # strict 2-naturality of both parts
        for f, (d, c) in F.base.arrows.items():
            for x in F.on_objects[c].objects:
                fx = F.on_arrows[f].on_objects[x]
                if self.object_part[(d, fx)] != \
                   reindex_slice_presheaf(self.site, f, self.object_part[(c, x)]):
                    raise InvalidTable(
                        f"strict naturality of object_part fails on {f!r} at {x!r}"
                    )
            for nu in F.on_objects[c].arrows:
                fnu = F.on_arrows[f].on_arrows[nu]
                if self.arrow_part[(d, fnu)] != \
                   reindex_slice_presheaf_map(self.site, f, self.arrow_part[(c, nu)]):
                    raise InvalidTable(
                        f"strict naturality of arrow_part fails on {f!r} at {nu!r}"
                    )


@dataclass(frozen=True, eq=True)
class OmegaModification:
    source: MapToOmega
    target: MapToOmega
    components: Mapping[tuple[str, str], PresheafMap]

    def validate(self) -> None:
        z, w = self.source, self.target
        if z.source != w.source or z.site != w.site:
            raise InvalidTable("omega-modification endpoints are not parallel")
        if set(self.components) != set(z.object_part):
            raise InvalidTable("omega-modification component table is not total")
        F = z.source
        for (c, x), m in self.components.items():
            if m.source != z.object_part[(c, x)] or m.target != w.object_part[(c, x)]:
                raise InvalidTable(f"component at ({c!r}, {x!r}) has wrong endpoints")
            m.validate()
        # naturality in x against arrow_part
        for c in F.base.objects:
            Fc = F.on_objects[c]
            for nu in Fc.arrows:
                x, x2 = Fc.dom(nu), Fc.cod(nu)
                lhs = compose_presheaf_maps(self.components[(c, x2)], z.arrow_part[(c, nu)])
                rhs = compose_presheaf_maps(w.arrow_part[(c, nu)], self.components[(c, x)])
                if lhs != rhs:
                    raise InvalidTable(f"naturality in x fails at ({c!r}, {nu!r})")
        # modification axiom under reindexing
        for f, (d, c) in F.base.arrows.items():
            for x in F.on_objects[c].objects:
                fx = F.on_arrows[f].on_objects[x]
                if self.components[(d, fx)] != \
                   reindex_slice_presheaf_map(z.site, f, self.components[(c, x)]):
                    raise InvalidTable(f"reindexing axiom fails on {f!r} at {x!r}")

    def is_iso(self) -> bool:
        return all(m.is_iso() for m in self.components.values())


# -- the distinguished point -----------------------------------------------------------


def omega_point(F: CatPresheaf) -> MapToOmega:
    """The composite F -> 1 -> Omega-tilde: constant singleton everywhere."""
    site = F.base
    object_part = {}
    arrow_part = {}
    for c in site.objects:
        sl, _ = slice_cat(site, c)
        d1 = delta1(sl)
        for x in F.on_objects[c].objects:
            object_part[(c, x)] = d1
        for nu in F.on_objects[c].arrows:
            arrow_part[(c, nu)] = identity_presheaf_map(d1)
    z = MapToOmega(site, F, object_part, arrow_part)
    z.validate()
    return z


# -- classification ---------------------------------------------------------------------


def _fibre_table(z: MapToOmega, c: str) -> FinSetFunctor:
    """The set functor X |-> Z_X(id_c) on F(c), with transport from arrow_part."""
    F = z.source
    Fc = F.on_objects[c]
    idc = z.site.id_of(c)
    return FinSetFunctor(
        Fc,
        {x: z.object_part[(c, x)].on_objects[idc] for x in Fc.objects},
        {nu: dict(z.arrow_part[(c, nu)].components[idc]) for nu in Fc.arrows},
    )


_classify_cache: dict[int, tuple[MapToOmega, "DiscOpfibPre"]] = {}


def classify(z: MapToOmega) -> DiscOpfibPre:
    """The classified discrete opfibration, built from the fibre formula.

    The fibre over (c, X) is the value of the assigned slice presheaf at
    the identity; transitions restrict along the slice arrow f > id.
    Results are memoized per map instance.
    """
    hit = _classify_cache.get(id(z))
    if hit is not None and hit[0] is z:
        return hit[1]
    z.validate()
    site = z.site
    F = z.source
    totals = {c: cat2.elements_of(_fibre_table(z, c)) for c in site.objects}
    on_arrows = {}
    for f, (d, c) in site.arrows.items():
        idc = site.id_of(c)
        src, tgt = totals[c].total, totals[d].total
        restrict = slice_arrow_name(f, idc)
        on_objects = {}
        for o in src.objects:
            x = totals[c].p.on_objects[o]
            t = o[2 + len(x):-1]
            fx = F.on_arrows[f].on_objects[x]
            on_objects[o] = f"({fx},{z.object_part[(c, x)].on_arrows[restrict][t]})"
        arr_map = {}
        for name, (o1, _) in src.arrows.items():
            nu = totals[c].p.on_arrows[name]
            x = totals[c].p.on_objects[o1]
            t = o1[2 + len(x):-1]
            arr_map[name] = (
                f"({F.on_arrows[f].on_arrows[nu]},"
                f"{z.object_part[(c, x)].on_arrows[restrict][t]})"
            )
        fun = FinFunctor(src, tgt, on_objects, arr_map)
        fun.validate()
        on_arrows[f] = fun
    G = CatPresheaf(site, {c: totals[c].total for c in site.objects}, on_arrows)
    G.validate()
    s = TwoNat(G, F, {c: totals[c].p for c in site.objects})
    s.validate()
    result = certify_dopf_pre(s)
    _classify_cache[id(z)] = (z, result)
    return result


def classify_via_hom_enumeration(z: MapToOmega,
                                 bound: int = DEFAULT_BOUND) -> DiscOpfibPre:
    """Comma-style construction of the classified opfibration.

    Independently of the fibre formula, objects over (c, X) are the
    enumerated natural maps from the constant singleton into the assigned
    presheaf; this cross-validates classify on small inputs.
    """
    site = z.site
    F = z.source

    def enc(m: PresheafMap) -> str:
        return repr(sorted((c, tuple(sorted(t.items()))) for c, t in m.components.items()))

    homs: dict[tuple[str, str], list[PresheafMap]] = {}
    for c in site.objects:
        sl, _ = slice_cat(site, c)
        d1 = delta1(sl)
        for x in F.on_objects[c].objects:
            homs[(c, x)] = enumerate_presheaf_maps(d1, z.object_part[(c, x)], bound)
    labels = {
        key: {enc(m): f"h{i}" for i, m in enumerate(sorted(maps, key=enc))}
        for key, maps in homs.items()
    }
    comps = {}
    cats = {}
    for c in site.objects:
        Fc = F.on_objects[c]
        sets = {x: tuple(sorted(labels[(c, x)].values())) for x in Fc.objects}
        acts = {}
        for nu in Fc.arrows:
            x = Fc.dom(nu)
            table = {}
            for m in homs[(c, x)]:
                m2 = compose_presheaf_maps(z.arrow_part[(c, nu)], m)
                table[labels[(c, x)][enc(m)]] = labels[(c, Fc.cod(nu))][enc(m2)]
            acts[nu] = table
        bc = FinSetFunctor(Fc, sets, acts)
        bc.validate()
        cats[c] = cat2.elements_of(bc)
        comps[c] = cats[c].p
    on_arrows = {}
    for f, (d, c) in site.arrows.items():
        src, tgt = cats[c].total, cats[d].total
        on_objects = {}
        arr_map = {}
        inv = {key: {v: k for k, v in lab.items()} for key, lab in labels.items()}
        by_enc = {key: {enc(m): m for m in maps} for key, maps in homs.items()}
        for o in src.objects:
            x = comps[c].on_objects[o]
            t = o[2 + len(x):-1]
            m = by_enc[(c, x)][inv[(c, x)][t]]
            fx = F.on_arrows[f].on_objects[x]
            m2 = reindex_slice_presheaf_map(site, f, m)
            on_objects[o] = f"({fx},{labels[(d, fx)][enc(m2)]})"
        for name, (o1, _) in src.arrows.items():
            nu = comps[c].on_arrows[name]
            x = comps[c].on_objects[o1]
            t = o1[2 + len(x):-1]
            m = by_enc[(c, x)][inv[(c, x)][t]]
            m2 = reindex_slice_presheaf_map(site, f, m)
            fx = F.on_arrows[f].on_objects[x]
            arr_map[name] = f"({F.on_arrows[f].on_arrows[nu]},{labels[(d, fx)][enc(m2)]})"
        fun = FinFunctor(src, tgt, on_objects, arr_map)
        fun.validate()
        on_arrows[f] = fun
    G = CatPresheaf(site, {c: cats[c].total for c in site.objects}, on_arrows)
    G.validate()
    s = TwoNat(G, F, comps)
    s.validate()
    return certify_dopf_pre(s)


# -- the characteristic morphism ----------------------------------------------------------


def char(phi: DiscOpfibPre) -> MapToOmega:
    """The normalized characteristic morphism of a certified opfibration.

    The presheaf assigned to (c, X) sends f: d -> c to the global fibre of
    the component at d over the reindexed object, and slice arrows act by
    the total presheaf; arrows of F(c) act by transporting fibres along
    liftings.
    """
    F = phi.codomain
    G = phi.total
    site = F.base
    object_part: dict[tuple[str, str], SetPresheaf] = {}
    arrow_part: dict[tuple[str, str], PresheafMap] = {}
    for c in site.objects:
        sl, _ = slice_cat(site, c)
        Fc = F.on_objects[c]
        for x in Fc.objects:
            on_objects = {}
            for f in sl.objects:
                d = site.dom(f)
                fx = F.on_arrows[f].on_objects[x]
                on_objects[f] = phi.fibre(d, fx)
            on_arrows = {}
            for f in sl.objects:
                d = site.dom(f)
                fx = F.on_arrows[f].on_objects[x]
                for g in site.arrows_into(d):
                    on_arrows[slice_arrow_name(g, f)] = {
                        y: G.on_arrows[g].on_objects[y] for y in phi.fibre(d, fx)
                    }
            Z = SetPresheaf(sl, on_objects, on_arrows)
            Z.validate()
            object_part[(c, x)] = Z
        for nu in Fc.arrows:
            x = Fc.dom(nu)
            comps = {}
            for f in sl.objects:
                d = site.dom(f)
                fnu = F.on_arrows[f].on_arrows[nu]
                fx = F.on_arrows[f].on_objects[x]
                comps[f] = {
                    y: cat2.transport(phi.certificates[d], y, fnu)
                    for y in phi.fibre(d, fx)
                }
            arrow_part[(c, nu)] = PresheafMap(
                object_part[(c, x)], object_part[(c, Fc.cod(nu))], comps
            )
    z = MapToOmega(site, F, object_part, arrow_part)
    z.validate()
    return z


def precompose_map_to_omega(z: MapToOmega, y: TwoNat) -> MapToOmega:
    """Reindex z: F -> Omega-tilde along y: H -> F."""
    if y.target != z.source:
        raise InvalidTable("precompose_map_to_omega: endpoints disagree")
    H = y.source
    object_part = {
        (c, w): z.object_part[(c, y.components[c].on_objects[w])]
        for c in H.base.objects
        for w in H.on_objects[c].objects
    }
    arrow_part = {
        (c, nu): z.arrow_part[(c, y.components[c].on_arrows[nu])]
        for c in H.base.objects
        for nu in H.on_objects[c].arrows
    }
    out = MapToOmega(z.site, H, object_part, arrow_part)
    out.validate()
    return out


def gamma_mod(alpha: OmegaModification) -> TwoNat:
    """Action of the classification on 2-cells: a fibred map classify(source)
    -> classify(target) transporting each fibre element along the component."""
    alpha.validate()
    z, w = alpha.source, alpha.target
    site = z.site
    F = z.source
    src = classify(z)
    tgt = classify(w)
    comps = {}
    for c in site.objects:
        idc = site.id_of(c)
        Fc = F.on_objects[c]
        on_objects = {}
        for o in src.total.on_objects[c].objects:
            x = src.s.components[c].on_objects[o]
            t = o[2 + len(x):-1]
            on_objects[o] = f"({x},{alpha.components[(c, x)].components[idc][t]})"
        arr_map = {}
        for name, (o1, _) in src.total.on_objects[c].arrows.items():
            nu = src.s.components[c].on_arrows[name]
            x = src.s.components[c].on_objects[o1]
            t = o1[2 + len(x):-1]
            arr_map[name] = f"({nu},{alpha.components[(c, x)].components[idc][t]})"
        fun = FinFunctor(src.total.on_objects[c], tgt.total.on_objects[c],
                         on_objects, arr_map)
        fun.validate()
        comps[c] = fun
    out = TwoNat(src.total, tgt.total, comps)
    out.validate()
    for c in site.objects:
        if compose_functors(tgt.s.components[c], comps[c]) != src.s.components[c]:
            raise InvalidTable("gamma_mod does not commute with the projections")
    return out


# -- the indexed Grothendieck equivalence over representables ------------------------------


def j_forward(site: FinCat, c: str, Z: SetPresheaf) -> DiscOpfibPre:
    """From a presheaf on slice(C, c) to an opfibration over representable(c)."""
    sl, _ = slice_cat(site, c)
    if Z.base != sl:
        raise InvalidTable("j_forward expects a presheaf on slice(C, c)")
    if c not in site.objects:
        raise UnknownObject(c)
    Z.validate()
    rep = representable(site, c)
    from .fincat import discrete_category

    cats = {}
    comps = {}
    for d in site.objects:
        elems = sorted(f"({f},{x})" for f in site.hom(d, c) for x in Z.on_objects[f])
        cats[d] = discrete_category(elems)
        on_objects = {}
        for f in site.hom(d, c):
            for x in Z.on_objects[f]:
                on_objects[f"({f},{x})"] = f
        comps[d] = FinFunctor(
            cats[d], rep.on_objects[d], on_objects,
            {f"id_{o}": f"id_{on_objects[o]}" for o in on_objects},
        )
    on_arrows = {}
    for g, (e, d) in site.arrows.items():
        on_objects = {}
        for f in site.hom(d, c):
            fg = site.compose(f, g)
            for x in Z.on_objects[f]:
                on_objects[f"({f},{x})"] = f"({fg},{Z.on_arrows[slice_arrow_name(g, f)][x]})"
        fun = FinFunctor(
            cats[d], cats[e], on_objects,
            {f"id_{o}": f"id_{on_objects[o]}" for o in on_objects},
        )
        fun.validate()
        on_arrows[g] = fun
    H = CatPresheaf(site, cats, on_arrows)
    H.validate()
    s = TwoNat(H, rep, comps)
    s.validate()
    return certify_dopf_pre(s)


def j_inverse(psi: DiscOpfibPre) -> SetPresheaf:
    """From an opfibration over representable(c) back to a presheaf on the slice."""
    site = psi.codomain.base
    target_c = None
    for c in site.objects:
        if psi.codomain == representable(site, c):
            target_c = c
            break
    if target_c is None:
        raise InvalidTable("j_inverse expects an opfibration over a representable")
    c = target_c
    sl, _ = slice_cat(site, c)
    H = psi.total
    on_objects = {f: psi.fibre(site.dom(f), f) for f in sl.objects}
    on_arrows = {}
    for f in sl.objects:
        d = site.dom(f)
        for g in site.arrows_into(d):
            on_arrows[slice_arrow_name(g, f)] = {
                y: H.on_arrows[g].on_objects[y] for y in on_objects[f]
            }
    Z = SetPresheaf(sl, on_objects, on_arrows)
    Z.validate()
    return Z


# -- modifications between maps to Omega ---------------------------------------------------


def enumerate_omega_modifications(z: MapToOmega, w: MapToOmega,
                                  bound: int = DEFAULT_BOUND) -> list[OmegaModification]:
    """All omega-modifications z => w, by backtracking with reindex forcing.

    Choosing the component at (c, X) forces the component at (d, F(f)X)
    for every f: d -> c; remaining freedom is enumerated and vertical
    naturality filtered at the end.
    """
    if z.source != w.source or z.site != w.site:
        raise InvalidTable("enumerate_omega_modifications needs parallel maps")
    site = z.site
    F = z.source
    keys = sorted(z.object_part)
    candidates = {
        key: enumerate_presheaf_maps(z.object_part[key], w.object_part[key], bound)
        for key in keys
    }
    total = 1
    for key in keys:
        total *= max(1, len(candidates[key]))
        guard("enumerate_omega_modifications", total, bound)

    out: list[OmegaModification] = []

    def propagate(assignment: dict, key, m) -> bool:
        stack = [(key, m)]
        while stack:
            (c, x), cur = stack.pop()
            if (c, x) in assignment:
                if assignment[(c, x)] != cur:
                    return False
                continue
            assignment[(c, x)] = cur
            for f in site.arrows:
                if site.cod(f) != c:
                    continue
                d = site.dom(f)
                fx = F.on_arrows[f].on_objects[x]
                stack.append(((d, fx), reindex_slice_presheaf_map(site, f, cur)))
        return True

    def backtrack(i: int, assignment: dict) -> None:
        if i == len(keys):
            mod = OmegaModification(z, w, dict(assignment))
            try:
                mod.validate()
            except InvalidTable:
                return
            out.append(mod)
            return
        key = keys[i]
        if key in assignment:
            backtrack(i + 1, assignment)
            return
        for m in candidates[key]:
            trial = dict(assignment)
            if propagate(trial, key, m):
                backtrack(i + 1, trial)

    backtrack(0, {})
    return out


def find_omega_iso(z: MapToOmega, w: MapToOmega,
                   bound: int = DEFAULT_BOUND) -> OmegaModification | None:
    for mod in enumerate_omega_modifications(z, w, bound):
        if mod.is_iso():
            return mod
    return None


# -- full faithfulness and round trips -------------------------------------------------------


def ff_check(z: MapToOmega, w: MapToOmega, bound: int = DEFAULT_BOUND) -> Report:
    """Certify that gamma_mod is a bijection from omega-modifications z => w
    onto the fibred maps classify(z) -> classify(w)."""
    report = Report("ff_check")
    mods = enumerate_omega_modifications(z, w, bound)
    homs = prestack.fib_hom(classify(z), classify(w), bound)
    images = []
    for mod in mods:
        images.append(gamma_mod(mod))
    for i, a in enumerate(images):
        for b in images[i + 1:]:
            if a == b:
                report.fail(("not-injective", repr(a.components)))
                return report
    hom_set = list(homs)
    for img in images:
        if img not in hom_set:
            report.fail(("image-outside-homs", repr(img.components)))
            return report
    for h in hom_set:
        if h not in images:
            report.fail(("not-surjective", repr(h.components)))
            return report
    report.note(("bijection", len(mods)))
    return report


def roundtrip_phi(phi: DiscOpfibPre, bound: int = DEFAULT_BOUND) -> TwoNat:
    """Witness classify(char(phi)) iso to phi over F, or raise NoIsoFound."""
    psi = classify(char(phi))
    iso = prestack.fib_iso(psi, phi, bound)
    if iso is None:
        raise NoIsoFound("classify(char(phi)) is not isomorphic to phi over F")
    return iso


def roundtrip_z(z: MapToOmega, bound: int = DEFAULT_BOUND) -> OmegaModification:
    """Witness char(classify(z)) iso to z, or raise NoIsoFound."""
    z2 = char(classify(z))
    iso = find_omega_iso(z2, z, bound)
    if iso is None:
        raise NoIsoFound("char(classify(z)) is not isomorphic to z")
    return iso
