"""Descent data, stack conditions, and the sheaf-valued classifier.

The stack classifier is never materialized: its gluing property is probed
on concrete descent data of sheaves-on-slices by running the explicit
double-plus algorithm and verifying the compatibility squares, and its
morphism gluing by matching-family transport.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .classifier import MapToOmega, char
from .errors import FactorizationFailed, InvalidTable, SizeBound
from .fincat import (
    DEFAULT_BOUND,
    FinCat,
    PresheafMap,
    SetPresheaf,
    compose_presheaf_maps,
    enumerate_presheaf_maps,
    guard,
    invert_presheaf_map,
    reindex_slice_presheaf,
    reindex_slice_presheaf_map,
    slice_arrow_name,
    slice_cat,
)
from .prestack import CatPresheaf, DiscOpfibPre
from .report import Report
from .site import (
    GrothTopology,
    Sieve,
    amalgamations,
    is_sheaf,
    plus_map,
    pullback_sieve,
    sheafify,
    slice_plus,
    slice_topology,
    transport_plus_iso,
)


# -- descent data over a Cat-valued presheaf ----------------------------------------


@dataclass(frozen=True, eq=True)
class DescentDatum:
    presheaf: CatPresheaf
    sieve: Sieve
    objects: Mapping[str, str]               # f in S -> object of F(dom f)
    isos: Mapping[tuple[str, str], str]      # (f, g) -> iso F(g)(M_f) -> M_{f.g}


@dataclass(frozen=True, eq=True)
class EffectivenessWitness:
    obj: str                                  # M in F(c)
    isos: Mapping[str, str]                   # f -> iso F(f)(M) -> M_f


def validate_descent(d: DescentDatum) -> Report:
    """Verify typing, invertibility and the cocycle condition exhaustively."""
    report = Report("validate_descent")
    F = d.presheaf
    base = F.base
    S = d.sieve
    if set(d.objects) != set(S.arrows):
        return report.fail(("objects", "assignment keys differ from the sieve"))
    for f in S.arrows:
        if d.objects[f] not in F.on_objects[base.dom(f)].objects:
            return report.fail(("objects", f, d.objects[f]))
    expected = {(f, g) for f in S.arrows for g in base.arrows_into(base.dom(f))}
    if set(d.isos) != expected:
        return report.fail(("isos", "iso keys differ from composable pairs"))
    for (f, g), phi in d.isos.items():
        dg = base.dom(g)
        Fd = F.on_objects[dg]
        src = F.on_arrows[g].on_objects[d.objects[f]]
        tgt = d.objects[base.compose(f, g)]
        if phi not in Fd.arrows or Fd.arrows[phi] != (src, tgt):
            return report.fail(("iso-typing", f, g, phi))
        if not Fd.is_invertible(phi):
            return report.fail(("iso-invertible", f, g, phi))
    for f in sorted(S.arrows):
        for g in base.arrows_into(base.dom(f)):
            for h in base.arrows_into(base.dom(g)):
                Fh = F.on_arrows[h]
                lhs = d.isos[(f, base.compose(g, h))]
                dcat = F.on_objects[base.dom(h)]
                rhs = dcat.compose(d.isos[(base.compose(f, g), h)],
                                   Fh.on_arrows[d.isos[(f, g)]])
                if lhs != rhs:
                    report.fail(("cocycle", f, g, h))
    return report


def induced_descent_datum(F: CatPresheaf, s: Sieve, m: str) -> DescentDatum:
    """The datum induced by a global object: M_f = F(f)(M) with identity isos."""
    base = F.base
    objects = {f: F.on_arrows[f].on_objects[m] for f in s.arrows}
    isos = {
        (f, g): F.on_objects[base.dom(g)].id_of(
            F.on_arrows[g].on_objects[objects[f]]
        )
        for f in s.arrows
        for g in base.arrows_into(base.dom(f))
    }
    return DescentDatum(F, s, objects, isos)


def effectiveness(d: DescentDatum, bound: int = DEFAULT_BOUND) -> list[EffectivenessWitness]:
    """All witnesses, by exhaustive search over objects and iso families."""
    F = d.presheaf
    base = F.base
    S = d.sieve
    c = S.at
    arrows = sorted(S.arrows)
    out: list[EffectivenessWitness] = []
    for m in F.on_objects[c].objects:
        pools = []
        for f in arrows:
            Fd = F.on_objects[base.dom(f)]
            fm = F.on_arrows[f].on_objects[m]
            pools.append([a for a in Fd.hom(fm, d.objects[f]) if Fd.is_invertible(a)])
        total = 1
        for p in pools:
            total *= max(1, len(p))
            guard("effectiveness", total, bound)
        if any(not p for p in pools):
            continue
        for choice in itertools.product(*pools):
            psi = dict(zip(arrows, choice))
            ok = True
            for f in arrows:
                for g in base.arrows_into(base.dom(f)):
                    fg = base.compose(f, g)
                    dcat = F.on_objects[base.dom(g)]
                    lhs = psi[fg]
                    rhs = dcat.compose(d.isos[(f, g)], F.on_arrows[g].on_arrows[psi[f]])
                    if lhs != rhs:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(EffectivenessWitness(m, psi))
    return out


def enumerate_descent_data(F: CatPresheaf, s: Sieve,
                           bound: int = DEFAULT_BOUND) -> list[DescentDatum]:
    """All descent data over the sieve, up to the bound."""
    base = F.base
    arrows = sorted(s.arrows)
    obj_pools = [F.on_objects[base.dom(f)].objects for f in arrows]
    total = 1
    for p in obj_pools:
        total *= max(1, len(p))
        guard("descent data objects", total, bound)
    out = []
    for objs in itertools.product(*obj_pools):
        assignment = dict(zip(arrows, objs))
        pairs = [(f, g) for f in arrows for g in base.arrows_into(base.dom(f))]
        iso_pools = []
        for f, g in pairs:
            Fd = F.on_objects[base.dom(g)]
            src = F.on_arrows[g].on_objects[assignment[f]]
            tgt = assignment[base.compose(f, g)]
            iso_pools.append([a for a in Fd.hom(src, tgt) if Fd.is_invertible(a)])
        subtotal = total
        for p in iso_pools:
            subtotal *= max(1, len(p))
            guard("descent data isos", subtotal, bound)
        if any(not p for p in iso_pools):
            continue
        for choice in itertools.product(*iso_pools):
            datum = DescentDatum(F, s, assignment, dict(zip(pairs, choice)))
            if validate_descent(datum).ok:
                out.append(datum)
    return out


def check_stack(F: CatPresheaf, j: GrothTopology, bound: int = DEFAULT_BOUND) -> Report:
    """The three gluing conditions, per covering sieve.

    Morphism conditions are decided exhaustively; object gluing enumerates
    descent data and is reported as bounded when a stratum trips the bound.
    """
    report = Report("check_stack")
    base = F.base
    for c in base.objects:
        Fc = F.on_objects[c]
        for s in sorted(j.covers[c], key=lambda s: s.sorted_arrows()):
            arrows = sorted(s.arrows)
            # (iii) uniqueness of gluings of morphisms
            for x in Fc.objects:
                for y in Fc.objects:
                    homs = Fc.hom(x, y)
                    for h in homs:
                        for k in homs:
                            if h < k and all(
                                F.on_arrows[f].on_arrows[h] == F.on_arrows[f].on_arrows[k]
                                for f in arrows
                            ):
                                report.fail(("iii", c, s.sorted_arrows(), x, y, h, k))
            # (ii) gluing of morphisms
            for x in Fc.objects:
                for y in Fc.objects:
                    pools = [
                        F.on_objects[base.dom(f)].hom(
                            F.on_arrows[f].on_objects[x], F.on_arrows[f].on_objects[y]
                        )
                        for f in arrows
                    ]
                    total = 1
                    for p in pools:
                        total *= max(1, len(p))
                    try:
                        guard("stack morphism families", total, bound)
                    except SizeBound:
                        report.bounded(f"stack-ii at {c}", bound)
                        continue
                    if any(not p for p in pools):
                        continue
                    for choice in itertools.product(*pools):
                        fam = dict(zip(arrows, choice))
                        compatible = all(
                            F.on_arrows[g].on_arrows[fam[f]] == fam[base.compose(f, g)]
                            for f in arrows
                            for g in base.arrows_into(base.dom(f))
                        )
                        if not compatible:
                            continue
                        gluings = [
                            h for h in Fc.hom(x, y)
                            if all(F.on_arrows[f].on_arrows[h] == fam[f] for f in arrows)
                        ]
                        if not gluings:
                            report.fail(("ii", c, s.sorted_arrows(), x, y,
                                         tuple(sorted(fam.items()))))
            # (i) gluing of objects over enumerated descent data
            try:
                data = enumerate_descent_data(F, s, bound)
            except SizeBound as exc:
                report.bounded(f"stack-i at {c} over {s.sorted_arrows()}", exc.bound)
                continue
            for datum in data:
                try:
                    wits = effectiveness(datum, bound)
                except SizeBound as exc:
                    report.bounded(f"stack-i-witness at {c}", exc.bound)
                    continue
                if not wits:
                    report.fail(("i", c, s.sorted_arrows(),
                                 tuple(sorted(datum.objects.items()))))
    return report


# -- the sheaf-valued restriction of the classifier -------------------------------------


@dataclass(frozen=True, eq=True)
class MapToOmegaJ:
    """A MapToOmega all of whose assigned presheaves are sheaves for the
    induced slice topologies; constructing one is exactly factoring through
    the sheaf inclusion."""

    underlying: MapToOmega
    topology: GrothTopology


@dataclass(frozen=True, eq=True)
class FactorResult:
    certified: MapToOmegaJ | None
    witness: tuple | None

    @property
    def ok(self) -> bool:
        return self.certified is not None


def ell_factors(z: MapToOmega, j: GrothTopology, bound: int = DEFAULT_BOUND) -> FactorResult:
    """Certify that every assigned presheaf is a sheaf, or report the first
    failing (c, X, slice object, sieve)."""
    if j.base != z.site:
        raise InvalidTable("topology and map live on different sites")
    topologies = {c: slice_topology(j, c) for c in z.site.objects}
    for (c, x) in sorted(z.object_part):
        rep = is_sheaf(z.object_part[(c, x)], topologies[c], bound)
        if not rep.ok:
            f, sieve_arrows, fam, n = rep.counterexamples[0]
            return FactorResult(None, (c, x, f, sieve_arrows, n))
    return FactorResult(MapToOmegaJ(z, j), None)


def char_stacks(phi: DiscOpfibPre, j: GrothTopology,
                check_endpoints: bool = True,
                bound: int = DEFAULT_BOUND) -> MapToOmegaJ:
    """Characteristic morphism of an opfibration between stacks, upgraded
    with sheaf certificates.

    With check_endpoints the endpoints are verified to be stacks first;
    factorization failure signals non-stack endpoints either way.
    """
    if check_endpoints:
        for F in (phi.total, phi.codomain):
            rep = check_stack(F, j, bound)
            if not rep.ok:
                raise FactorizationFailed(("endpoint-not-a-stack", rep.counterexamples[:1]))
    z = char(phi)
    result = ell_factors(z, j, bound)
    if not result.ok:
        raise FactorizationFailed(result.witness)
    return result.certified


# -- descent data valued in sheaves on slices ---------------------------------------------


@dataclass(frozen=True, eq=True)
class SheafDescentDatum:
    """Descent datum for the sheaf-valued classifier: a sheaf on
    slice(C, dom f) per arrow of the sieve, with coherent iso maps."""

    site: FinCat
    topology: GrothTopology
    sieve: Sieve
    objects: Mapping[str, SetPresheaf]                 # f -> sheaf on slice(C, dom f)
    isos: Mapping[tuple[str, str], PresheafMap]        # (f, g): g*(M_f) -> M_{f.g}


def validate_sheaf_descent(d: SheafDescentDatum, bound: int = DEFAULT_BOUND) -> Report:
    report = Report("validate_sheaf_descent")
    base = d.site
    S = d.sieve
    if set(d.objects) != set(S.arrows):
        return report.fail(("objects", "assignment keys differ from the sieve"))
    for f in sorted(S.arrows):
        sl, _ = slice_cat(base, base.dom(f))
        M = d.objects[f]
        if M.base != sl:
            return report.fail(("objects", f, "not on the expected slice"))
        sheaf_rep = is_sheaf(M, slice_topology(d.topology, base.dom(f)), bound)
        if not sheaf_rep.ok:
            return report.fail(("objects", f, "not a sheaf", sheaf_rep.counterexamples[0]))
    expected = {(f, g) for f in S.arrows for g in base.arrows_into(base.dom(f))}
    if set(d.isos) != expected:
        return report.fail(("isos", "iso keys differ from composable pairs"))
    for (f, g), phi in sorted(d.isos.items()):
        src = reindex_slice_presheaf(base, g, d.objects[f])
        tgt = d.objects[base.compose(f, g)]
        if phi.source != src or phi.target != tgt:
            return report.fail(("iso-typing", f, g))
        try:
            phi.validate()
        except InvalidTable as exc:
            return report.fail(("iso-naturality", f, g, str(exc)))
        if not phi.is_iso():
            return report.fail(("iso-invertible", f, g))
    for f in sorted(S.arrows):
        for g in base.arrows_into(base.dom(f)):
            for h in base.arrows_into(base.dom(g)):
                lhs = d.isos[(f, base.compose(g, h))]
                rhs = compose_presheaf_maps(
                    d.isos[(base.compose(f, g), h)],
                    reindex_slice_presheaf_map(base, h, d.isos[(f, g)]),
                )
                if lhs != rhs:
                    report.fail(("cocycle", f, g, h))
    return report


def induced_sheaf_descent_datum(base: FinCat, j: GrothTopology, s: Sieve,
                                M: SetPresheaf) -> SheafDescentDatum:
    """The datum induced by a global sheaf on slice(C, at): M_f = f*M."""
    from .fincat import identity_presheaf_map

    objects = {f: reindex_slice_presheaf(base, f, M) for f in s.arrows}
    isos = {}
    for f in s.arrows:
        for g in base.arrows_into(base.dom(f)):
            # g*(f*M) equals (f.g)*M on the nose
            isos[(f, g)] = identity_presheaf_map(objects[base.compose(f, g)])
    return SheafDescentDatum(base, j, s, objects, isos)


def build_gluing_presheaf(d: SheafDescentDatum) -> SetPresheaf:
    """The proof-algorithm presheaf: sections at f in S are the identity
    sections of M_f, empty outside the sieve."""
    base = d.site
    c = d.sieve.at
    sl, _ = slice_cat(base, c)
    S = d.sieve.arrows
    on_objects = {}
    for f in sl.objects:
        if f in S:
            on_objects[f] = d.objects[f].on_objects[base.id_of(base.dom(f))]
        else:
            on_objects[f] = ()
    on_arrows = {}
    for f in sl.objects:
        df = base.dom(f)
        for h in base.arrows_into(df):
            name = slice_arrow_name(h, f)
            if f not in S:
                on_arrows[name] = {}
                continue
            dh = base.dom(h)
            # M_f(id) -> M_f(h) -> M_{f.h}(id)
            step1 = d.objects[f].on_arrows[slice_arrow_name(h, base.id_of(df))]
            step2 = d.isos[(f, h)].components[base.id_of(dh)]
            on_arrows[name] = {x: step2[step1[x]] for x in on_objects[f]}
    Z = SetPresheaf(sl, on_objects, on_arrows)
    Z.validate()
    return Z


def _double_plus_transport(base: FinCat, j: GrothTopology, f: str,
                           Z: SetPresheaf, bound: int) -> PresheafMap:
    """The iso f*(Z++) -> (f*Z)++ assembled from single-plus transports."""
    d = base.dom(f)
    pc1_c = slice_plus(base, j, base.cod(f), Z, bound)
    t1 = transport_plus_iso(base, j, f, pc1_c.presheaf, bound)   # f*(Z+)+ -> (f*(Z+))+ ... see below
    # t0: f*(Z+) -> (f*Z)+
    t0 = transport_plus_iso(base, j, f, Z, bound)
    fZ = reindex_slice_presheaf(base, f, Z)
    pc_src = slice_plus(base, j, d, reindex_slice_presheaf(base, f, pc1_c.presheaf), bound)
    pc_tgt = slice_plus(base, j, d, slice_plus(base, j, d, fZ, bound).presheaf, bound)
    t2 = plus_map(t0, pc_src, pc_tgt)                            # (f*(Z+))+ -> ((f*Z)+)+
    return compose_presheaf_maps(t2, t1)


def construct_effectiveness(d: SheafDescentDatum,
                            bound: int = DEFAULT_BOUND) -> tuple[SetPresheaf, dict]:
    """Run the double-plus gluing algorithm: returns the glued sheaf M and
    the compatibility isos psi^f: f*M -> M_f."""
    base = d.site
    c = d.sieve.at
    jc = slice_topology(d.topology, c)
    Z = build_gluing_presheaf(d)
    M = sheafify(Z, jc, bound)
    psis: dict[str, PresheafMap] = {}
    for f in sorted(d.sieve.arrows):
        df = base.dom(f)
        jd = slice_topology(d.topology, df)
        # e_f: M_f -> f*Z; at g the section sets are M_f(g) = (g*M_f)(id) and
        # (f*Z)(g) = M_{f.g}(id), compared by the datum iso at the identity
        fZ = reindex_slice_presheaf(base, f, Z)
        sl_d, _ = slice_cat(base, df)
        comps = {}
        for g in sl_d.objects:
            dg = base.dom(g)
            comps[g] = {
                x: d.isos[(f, g)].components[base.id_of(dg)][x]
                for x in d.objects[f].on_objects[g]
            }
        e_f = PresheafMap(d.objects[f], fZ, comps)
        e_f.validate()
        if not e_f.is_iso():
            raise InvalidTable("datum comparison map is not an iso")
        e_inv = invert_presheaf_map(e_f)
        pcW1 = slice_plus(base, d.topology, df, fZ, bound)
        pcM1 = slice_plus(base, d.topology, df, d.objects[f], bound)
        p1 = plus_map(e_inv, pcW1, pcM1)
        pcW2 = slice_plus(base, d.topology, df, pcW1.presheaf, bound)
        pcM2 = slice_plus(base, d.topology, df, pcM1.presheaf, bound)
        p2 = plus_map(p1, pcW2, pcM2)
        t = _double_plus_transport(base, d.topology, f, Z, bound)
        mf_sheafified = sheafify(d.objects[f], jd, bound)
        collapse = invert_presheaf_map(mf_sheafified.unit)
        psi = compose_presheaf_maps(collapse, compose_presheaf_maps(p2, t))
        psis[f] = psi
    return M.presheaf, psis


def verify_effectiveness(d: SheafDescentDatum, M: SetPresheaf,
                         psis: Mapping[str, PresheafMap]) -> Report:
    """Check the compatibility squares of the produced witness."""
    report = Report("verify_effectiveness")
    base = d.site
    for f in sorted(d.sieve.arrows):
        psi = psis[f]
        if psi.source != reindex_slice_presheaf(base, f, M) or psi.target != d.objects[f]:
            return report.fail(("typing", f))
        if not psi.is_iso():
            return report.fail(("not-iso", f))
        try:
            psi.validate()
        except InvalidTable as exc:
            return report.fail(("naturality", f, str(exc)))
    for f in sorted(d.sieve.arrows):
        for g in base.arrows_into(base.dom(f)):
            fg = base.compose(f, g)
            lhs = psis[fg]
            rhs = compose_presheaf_maps(
                d.isos[(f, g)], reindex_slice_presheaf_map(base, g, psis[f])
            )
            if lhs != rhs:
                report.fail(("square", f, g))
    return report


def glue_sheaf_morphisms(base: FinCat, j: GrothTopology, s: Sieve,
                         M: SetPresheaf, N: SetPresheaf,
                         alpha: Mapping[str, PresheafMap],
                         bound: int = DEFAULT_BOUND) -> PresheafMap:
    """Glue a compatible family alpha_f: f*M -> f*N to a map M -> N via
    matching-family transport; M and N are sheaves on slice(C, at)."""
    c = s.at
    sl, _ = slice_cat(base, c)
    comps: dict[str, dict[str, str]] = {}
    for g in sl.objects:
        e = base.dom(g)
        gs = pullback_sieve(base, g, s)
        lifted = Sieve(g, frozenset(slice_arrow_name(h, g) for h in gs.arrows))
        table = {}
        for x in M.on_objects[g]:
            fam = {}
            for h in gs.arrows:
                gh = base.compose(g, h)
                xh = M.on_arrows[slice_arrow_name(h, g)][x]
                fam[slice_arrow_name(h, g)] = \
                    alpha[gh].components[base.id_of(base.dom(h))][xh]
            from .site import MatchingFamily

            mf = MatchingFamily(N, lifted, fam)
            mf.validate()
            ams = amalgamations(N, lifted, mf)
            if len(ams) != 1:
                raise InvalidTable(f"gluing at {g!r} is not unique: {len(ams)} candidates")
            table[x] = ams[0]
        comps[g] = table
    lam = PresheafMap(M, N, comps)
    lam.validate()
    return lam


def omega_J_probe(j: GrothTopology, data: list[SheafDescentDatum],
                  bound: int = DEFAULT_BOUND) -> Report:
    """Probe the stack property of the sheaf-valued classifier on supplied
    descent data: run the gluing algorithm, verify the witness, and verify
    morphism gluing and its uniqueness on the glued sheaf."""
    report = Report("omega_J_probe")
    for idx, d in enumerate(data):
        val = validate_sheaf_descent(d, bound)
        if not val.ok:
            report.fail(("datum", idx, val.counterexamples[0]))
            continue
        if not d.sieve.arrows:
            report.note(("vacuous", idx))
            continue
        M, psis = construct_effectiveness(d, bound)
        ver = verify_effectiveness(d, M, psis)
        if not ver.ok:
            report.fail(("witness", idx, ver.counterexamples[0]))
            continue
        # morphism gluing: every endomorphism family induced by restriction
        # glues back to the map it came from, uniquely
        from .fincat import identity_presheaf_map

        try:
            lam_pool = enumerate_presheaf_maps(M, M, min(bound, 50000))
        except SizeBound:
            lam_pool = [identity_presheaf_map(M)]
        for lam0 in lam_pool[: min(len(lam_pool), 4)]:
            alpha = {}
            ok = True
            for f in d.sieve.arrows:
                alpha[f] = reindex_slice_presheaf_map(d.site, f, lam0)
            try:
                lam = glue_sheaf_morphisms(d.site, j, d.sieve, M, M, alpha, bound)
            except InvalidTable as exc:
                report.fail(("morphism-gluing", idx, str(exc)))
                ok = False
            if ok and lam != lam0:
                report.fail(("morphism-gluing-uniqueness", idx))
        report.note(("glued", idx, {c2: len(v) for c2, v in M.on_objects.items()}))
    return report
