import pytest

from tck import prestack
from tck.classifier import char, classify
from tck.corpus import (
    nonseparated_presheaf,
    open_site,
    open_site_topology,
    presheaf_corpus,
    walking_arrow,
)
from tck.errors import FactorizationFailed, InvalidTable
from tck.fincat import (
    PresheafMap,
    SetPresheaf,
    delta1,
    identity_presheaf_map,
    presheaf_iso,
    reindex_slice_presheaf,
    reindex_slice_presheaf_map,
    slice_arrow_name,
    slice_cat,
)
from tck.prestack import (
    certify_dopf_pre,
    discrete_presheaf,
    enumerate_two_nats,
    fib_iso,
    identity_two_nat,
    representable,
    terminal_presheaf,
    TwoNat,
)
from tck.site import (
    Sieve,
    is_sheaf,
    sieve_generate,
    slice_topology,
    trivial_topology,
)
from tck.stacks import (
    DescentDatum,
    MapToOmegaJ,
    SheafDescentDatum,
    build_gluing_presheaf,
    char_stacks,
    check_stack,
    construct_effectiveness,
    effectiveness,
    ell_factors,
    enumerate_descent_data,
    glue_sheaf_morphisms,
    induced_descent_datum,
    induced_sheaf_descent_datum,
    omega_J_probe,
    validate_descent,
    validate_sheaf_descent,
    verify_effectiveness,
)

OS = open_site()
OSJ = open_site_topology()
WA = walking_arrow()
JOINT = sieve_generate(OS, ["L_T", "R_T"])


def sheaf_corpus(n):
    return [Z for Z in presheaf_corpus(OS, n + 8) if is_sheaf(Z, OSJ).ok][:n]


def sheaf_maps_corpus(n):
    """Presheaf morphisms between sheaves on the open site, as discrete stacks."""
    out = []
    one = delta1(OS)
    for Z in sheaf_corpus(n):
        out.append((Z, Z, identity_presheaf_map(Z)))
        out.append((Z, one, PresheafMap(Z, one, {
            c: {x: "*" for x in Z.on_objects[c]} for c in OS.objects
        })))
    return out[:n]


def test_validate_descent_induced_by_global_object():
    F = discrete_presheaf(OS, sheaf_corpus(4)[3])
    for m in F.on_objects["T"].objects:
        d = induced_descent_datum(F, JOINT, m)
        assert validate_descent(d).ok


def test_validate_descent_empty_sieve_vacuous():
    F = discrete_presheaf(OS, sheaf_corpus(1)[0])
    d = DescentDatum(F, Sieve("O", frozenset()), {}, {})
    assert validate_descent(d).ok
    wits = effectiveness(d)
    assert len(wits) == len(F.on_objects["O"].objects)


def test_validate_descent_broken_iso_is_rejected():
    # a non-discrete presheaf where a wrong iso choice breaks the cocycle
    from tck.corpus import constant_cat_presheaf
    from tck.fincat import discrete_category

    K = discrete_category(["x", "y"])
    F = constant_cat_presheaf(OS, K)
    objects = {f: "x" for f in JOINT.arrows}
    isos = {}
    for f in JOINT.arrows:
        for g in OS.arrows_into(OS.dom(f)):
            isos[(f, g)] = "id_x"
    good = DescentDatum(F, JOINT, objects, isos)
    assert validate_descent(good).ok
    # break typing: point one iso at the wrong object
    bad_isos = dict(isos)
    bad_isos[("L_T", "O_L")] = "id_y"
    bad = DescentDatum(F, JOINT, objects, bad_isos)
    assert not validate_descent(bad).ok


def test_effectiveness_finds_global_object():
    F = discrete_presheaf(OS, sheaf_corpus(4)[3])
    for m in F.on_objects["T"].objects:
        d = induced_descent_datum(F, JOINT, m)
        wits = effectiveness(d)
        assert any(w.obj == m for w in wits)


def test_effectiveness_empty_for_non_stack():
    # the nonseparated fixture has two local-sections patterns that do not glue
    Z = nonseparated_presheaf()
    F = discrete_presheaf(OS, Z)
    # descent datum: local objects over L and R both "*", but there is no
    # canonical choice problem; instead drop to a presheaf with NO global
    # object: empty at T, singleton on L
    on_objects = {"O": ("*",), "L": ("s",), "R": ("*",), "T": ()}
    on_arrows = {}
    for f, (d0, c0) in OS.arrows.items():
        src = on_objects[c0]
        if d0 == "L":
            on_arrows[f] = {x: "s" for x in src}
        elif d0 == "T":
            on_arrows[f] = {x: x for x in src}
        else:
            on_arrows[f] = {x: "*" for x in src}
    W = SetPresheaf(OS, on_objects, on_arrows)
    W.validate()
    Fw = discrete_presheaf(OS, W)
    objects = {"L_T": "s", "R_T": "*", "O_T": "*"}
    isos = {}
    for f in JOINT.arrows:
        Fd = Fw.on_objects[OS.dom(f)]
        for g in OS.arrows_into(OS.dom(f)):
            isos[(f, g)] = Fd if False else Fw.on_objects[OS.dom(g)].id_of(
                Fw.on_arrows[g].on_objects[objects[f]]
            )
    d = DescentDatum(Fw, JOINT, objects, isos)
    assert validate_descent(d).ok
    assert effectiveness(d) == []


def test_effectiveness_matches_amalgamations_for_discrete_presheaves():
    for Z in presheaf_corpus(OS, 8):
        F = discrete_presheaf(OS, Z)
        for datum in enumerate_descent_data(F, JOINT)[:20]:
            fam = {f: datum.objects[f] for f in JOINT.arrows}
            from tck.site import MatchingFamily, amalgamations

            # the identity-iso data of a discrete presheaf are exactly the
            # matching families
            mf = MatchingFamily(Z, JOINT, fam)
            try:
                mf.validate()
                ams = amalgamations(Z, JOINT, mf)
            except InvalidTable:
                ams = None
            wits = effectiveness(datum)
            if ams is None:
                assert wits == []
            else:
                assert sorted(w.obj for w in wits) == sorted(ams)


def test_check_stack_trivial_topology():
    from tck.corpus import catpresheaf_corpus

    for F in catpresheaf_corpus(WA, 4):
        assert check_stack(F, trivial_topology(WA)).ok


def test_check_stack_representables_on_open_site():
    for c in OS.objects:
        assert check_stack(representable(OS, c), OSJ).ok


def test_check_stack_sheaves_are_stacks_nonsheaves_are_not():
    for Z in presheaf_corpus(OS, 10) + [nonseparated_presheaf()]:
        F = discrete_presheaf(OS, Z)
        assert check_stack(F, OSJ).ok == is_sheaf(Z, OSJ).ok


def test_check_stack_reports_condition_iii_failure():
    # F(T) has parallel arrows collapsing under every restriction
    from tck.corpus import parallel_pair
    from tck.fincat import FinFunctor, free_category, identity_functor

    PP = parallel_pair()
    K = free_category(["x", "y"], {"m": ("x", "y")})
    collapse = FinFunctor(PP, K, {"a": "x", "b": "y"},
                          {"id_a": "id_x", "id_b": "id_y", "u": "m", "v": "m"})
    collapse.validate()
    cats = {"T": PP, "L": K, "R": K, "O": K}
    on_arrows = {}
    for f, (d0, c0) in OS.arrows.items():
        if c0 == "T" and d0 != "T":
            on_arrows[f] = collapse
        else:
            on_arrows[f] = identity_functor(cats[c0])
    F = prestack.CatPresheaf(OS, cats, on_arrows)
    F.validate()
    rep = check_stack(F, OSJ)
    assert not rep.ok
    assert any(ce[0] == "iii" for ce in rep.counterexamples)


def test_ell_factors_on_char_of_identity():
    F = discrete_presheaf(OS, sheaf_corpus(1)[0])
    phi = certify_dopf_pre(identity_two_nat(F))
    res = ell_factors(char(phi), OSJ)
    assert res.ok


def test_ell_factors_on_sheaf_valued_maps():
    for V, W, m in sheaf_maps_corpus(8):
        Fv, Fw = discrete_presheaf(OS, V), discrete_presheaf(OS, W)
        comps = {}
        for c in OS.objects:
            from tck.fincat import FinFunctor

            comps[c] = FinFunctor(
                Fv.on_objects[c], Fw.on_objects[c],
                dict(m.components[c]),
                {f"id_{x}": f"id_{m.components[c][x]}" for x in V.on_objects[c]},
            )
        s = TwoNat(Fv, Fw, comps)
        s.validate()
        phi = certify_dopf_pre(s)
        res = ell_factors(char(phi), OSJ)
        assert res.ok, res.witness


def test_ell_factors_reports_failing_value():
    V = nonseparated_presheaf()
    Fv = discrete_presheaf(OS, V)
    T = terminal_presheaf(OS)
    s = enumerate_two_nats(Fv, T)[0]
    phi = certify_dopf_pre(s)
    res = ell_factors(char(phi), OSJ)
    assert not res.ok
    c, x, f, sieve_arrows, n = res.witness
    assert (c, x) == ("T", "*")


def test_char_stacks_identity_and_roundtrip():
    F = discrete_presheaf(OS, sheaf_corpus(2)[1])
    phi = certify_dopf_pre(identity_two_nat(F))
    zj = char_stacks(phi, OSJ)
    assert isinstance(zj, MapToOmegaJ)
    back = classify(zj.underlying)
    assert fib_iso(back, phi) is not None


def test_char_stacks_rejects_non_stack_endpoint():
    V = nonseparated_presheaf()
    Fv = discrete_presheaf(OS, V)
    phi = certify_dopf_pre(identity_two_nat(Fv))
    with pytest.raises(FactorizationFailed):
        char_stacks(phi, OSJ)


def test_char_stacks_point_site_reduces_to_cat():
    from tck.corpus import chain3, constant_cat_presheaf, dopf_corpus
    from tck.fincat import point_category

    PT = point_category()
    F = constant_cat_presheaf(PT, chain3())
    for phi in dopf_corpus(F, 3):
        zj = char_stacks(phi, trivial_topology(PT))
        assert fib_iso(classify(zj.underlying), phi) is not None


def local_pair_datum(n1: int, n2: int) -> SheafDescentDatum:
    """Local sheaf data over the joint cover: n1 sections over L, n2 over R."""
    pieces = {}
    for f, n in (("L_T", n1), ("R_T", n2), ("O_T", 1)):
        d = OS.dom(f)
        sl, _ = slice_cat(OS, d)
        labels = tuple(f"s{i}" for i in range(n))
        on_objects = {}
        for g in sl.objects:
            on_objects[g] = labels if OS.dom(g) == d else ("*",)
        on_arrows = {}
        for g in sl.objects:
            for h in OS.arrows_into(OS.dom(g)):
                name = slice_arrow_name(h, g)
                src = on_objects[g]
                tgt = on_objects[sl.dom(name)]
                if tgt == labels and src == labels:
                    on_arrows[name] = {x: x for x in src}
                else:
                    on_arrows[name] = {x: tgt[0] for x in src} if tgt else {}
    # build each piece separately to avoid cross-contamination
    def build(dobj: str, n: int) -> SetPresheaf:
        sl, _ = slice_cat(OS, dobj)
        labels = tuple(sorted(f"s{i}" for i in range(n)))
        on_objects = {g: (labels if OS.dom(g) == dobj else ("*",)) for g in sl.objects}
        on_arrows = {}
        for g in sl.objects:
            for h in OS.arrows_into(OS.dom(g)):
                name = slice_arrow_name(h, g)
                src = on_objects[g]
                tgt = on_objects[sl.cod(name)]
                # contravariant: value at cod restricts to value at dom
                source_vals = on_objects[sl.cod(name)]
                target_vals = on_objects[sl.dom(name)]
                if source_vals == target_vals:
                    on_arrows[name] = {x: x for x in source_vals}
                else:
                    on_arrows[name] = {x: target_vals[0] for x in source_vals}
        Z = SetPresheaf(sl, on_objects, on_arrows)
        Z.validate()
        return Z

    objects = {"L_T": build("L", n1), "R_T": build("R", n2), "O_T": build("O", 1)}
    isos = {}
    for f in JOINT.arrows:
        for g in OS.arrows_into(OS.dom(f)):
            fg = OS.compose(f, g)
            src = reindex_slice_presheaf(OS, g, objects[f])
            tgt = objects[fg]
            comps = {}
            for obj in src.base.objects:
                vals_src = src.on_objects[obj]
                vals_tgt = tgt.on_objects[obj]
                assert len(vals_src) <= len(vals_tgt) or len(vals_tgt) == 1
                if vals_src == vals_tgt:
                    comps[obj] = {x: x for x in vals_src}
                else:
                    comps[obj] = {x: vals_tgt[0] for x in vals_src}
            m = PresheafMap(src, tgt, comps)
            m.validate()
            isos[(f, g)] = m
    datum = SheafDescentDatum(OS, OSJ, JOINT, objects, isos)
    return datum


def test_local_pair_datum_is_valid():
    for n1, n2 in [(1, 1), (2, 1), (2, 3)]:
        d = local_pair_datum(n1, n2)
        assert validate_sheaf_descent(d).ok


def test_gluing_presheaf_tables():
    d = local_pair_datum(2, 3)
    Z = build_gluing_presheaf(d)
    assert len(Z.on_objects["L_T"]) == 2
    assert len(Z.on_objects["R_T"]) == 3
    assert len(Z.on_objects["O_T"]) == 1
    assert len(Z.on_objects["T_T"]) == 0


def test_double_plus_glues_disjoint_cover_to_product():
    # sections over the whole space = pairs of local sections
    for n1, n2 in [(1, 1), (2, 1), (2, 3)]:
        d = local_pair_datum(n1, n2)
        M, psis = construct_effectiveness(d)
        assert len(M.on_objects["T_T"]) == n1 * n2
        assert len(M.on_objects["L_T"]) == n1
        assert len(M.on_objects["R_T"]) == n2
        assert verify_effectiveness(d, M, psis).ok


def test_probe_on_induced_datum_returns_global_sheaf_up_to_iso():
    sl, _ = slice_cat(OS, "T")
    slj = slice_topology(OSJ, "T")
    count = 0
    for Z in presheaf_corpus(sl, 12):
        if not is_sheaf(Z, slj).ok:
            continue
        d = induced_sheaf_descent_datum(OS, OSJ, JOINT, Z)
        assert validate_sheaf_descent(d).ok
        M, psis = construct_effectiveness(d)
        assert verify_effectiveness(d, M, psis).ok
        assert presheaf_iso(M, Z) is not None
        count += 1
    assert count >= 3


def test_omega_J_probe_full_report():
    data = [
        local_pair_datum(1, 1),
        local_pair_datum(2, 1),
        local_pair_datum(1, 2),
        local_pair_datum(2, 2),
    ]
    rep = omega_J_probe(OSJ, data)
    assert rep.ok, rep.counterexamples


def test_omega_J_probe_vacuous_on_empty_sieve():
    sl, _ = slice_cat(OS, "O")
    d = SheafDescentDatum(OS, OSJ, Sieve("O", frozenset()), {}, {})
    rep = omega_J_probe(OSJ, [d])
    assert rep.ok
    assert ("vacuous", 0) in rep.witnesses


def test_glue_sheaf_morphisms_recovers_global_map():
    d = local_pair_datum(2, 2)
    M, _ = construct_effectiveness(d)
    from tck.fincat import enumerate_presheaf_maps

    for lam0 in enumerate_presheaf_maps(M, M)[:5]:
        alpha = {f: reindex_slice_presheaf_map(OS, f, lam0) for f in JOINT.arrows}
        lam = glue_sheaf_morphisms(OS, OSJ, JOINT, M, M, alpha)
        assert lam == lam0


def walking_iso():
    from tck.fincat import build_category

    arrows = {"id_x": ("x", "x"), "id_y": ("y", "y"), "i": ("x", "y"), "j": ("y", "x")}
    compose = {
        ("id_x", "id_x"): "id_x", ("id_y", "id_y"): "id_y",
        ("i", "id_x"): "i", ("id_y", "i"): "i",
        ("j", "id_y"): "j", ("id_x", "j"): "j",
        ("j", "i"): "id_x", ("i", "j"): "id_y",
    }
    return build_category(["x", "y"], arrows, {"x": "id_x", "y": "id_y"}, compose)


def test_check_stack_constant_walking_iso_is_a_stack():
    # non-identity descent isos: every datum glues because all objects are
    # isomorphic and hom-sets are singletons
    from tck.corpus import constant_cat_presheaf

    F = constant_cat_presheaf(OS, walking_iso())
    rep = check_stack(F, OSJ)
    assert rep.ok, rep.counterexamples
    # and the enumeration really does produce data with non-identity isos
    data = enumerate_descent_data(F, JOINT)
    assert any(
        any(not F.on_objects[OS.dom(g)].is_identity(phi) for (f, g), phi in d.isos.items())
        for d in data
    )
    for d in data:
        assert effectiveness(d), d.objects


def test_check_stack_reports_condition_i_failure():
    # discrete presheaf with local sections that do not glue: empty at T
    on_objects = {"O": ("*",), "L": ("s",), "R": ("t",), "T": ()}
    on_arrows = {}
    for f, (d0, c0) in OS.arrows.items():
        src = on_objects[c0]
        tgt = on_objects[d0]
        on_arrows[f] = {x: tgt[0] for x in src} if tgt else {}
    W = SetPresheaf(OS, on_objects, on_arrows)
    W.validate()
    F = discrete_presheaf(OS, W)
    rep = check_stack(F, OSJ)
    assert not rep.ok
    assert any(ce[0] == "i" for ce in rep.counterexamples)


def test_effectiveness_witnesses_unique_up_to_iso():
    # on a stack, any two witnesses for the same datum have isomorphic
    # global objects
    from tck.corpus import constant_cat_presheaf

    F = constant_cat_presheaf(OS, walking_iso())
    for d in enumerate_descent_data(F, JOINT)[:40]:
        wits = effectiveness(d)
        assert wits
        Fc = F.on_objects["T"]
        for w1 in wits:
            for w2 in wits:
                assert any(
                    Fc.is_invertible(a) for a in Fc.hom(w1.obj, w2.obj)
                ), (w1.obj, w2.obj)


# -- gluing over a cover with non-empty overlap -----------------------------------


def square_site():
    from tck.corpus import square
    from tck.site import topology_from_generators

    SQ = square()
    topo, _ = topology_from_generators(SQ, {"s": [["q_s", "r_s"]]})
    return SQ, topo


def overlap_datum(twist: bool, r_to_overlap=None):
    """Descent datum on the square site: two local sheaves meeting over p.

    M over q has sections m0, m1 restricting to x0, x1; M over r has
    sections n0, n1; the datum iso on the overlap optionally swaps x0/x1.
    """
    SQ, topo = square_site()
    S = sieve_generate(SQ, ["q_s", "r_s"])
    assert S.arrows == frozenset({"q_s", "r_s", "p_s"})

    def local_sheaf(dobj: str, own: tuple, bottom: tuple, down: dict) -> SetPresheaf:
        sl, _ = slice_cat(SQ, dobj)
        on_objects = {}
        for g in sl.objects:
            on_objects[g] = own if SQ.dom(g) == dobj else bottom
        on_arrows = {}
        for g in sl.objects:
            for h in SQ.arrows_into(SQ.dom(g)):
                name = slice_arrow_name(h, g)
                src = on_objects[g]
                tgt = on_objects[sl.dom(name)]
                if src == tgt:
                    on_arrows[name] = {x: x for x in src}
                else:
                    on_arrows[name] = {x: down[x] for x in src}
        Z = SetPresheaf(sl, on_objects, on_arrows)
        Z.validate()
        return Z

    overlap = ("x0", "x1")
    r_down = r_to_overlap or {"n0": "x0", "n1": "x1"}
    mq = local_sheaf("q", ("m0", "m1"), overlap, {"m0": "x0", "m1": "x1"})
    mr = local_sheaf("r", tuple(sorted(r_down)), overlap, r_down)
    sl_p, _ = slice_cat(SQ, "p")
    mp = SetPresheaf(sl_p, {"p_p": overlap}, {slice_arrow_name("p_p", "p_p"): {
        "x0": "x0", "x1": "x1"}})
    mp.validate()
    objects = {"q_s": mq, "r_s": mr, "p_s": mp}

    tw = {"x0": "x1", "x1": "x0"} if twist else {"x0": "x0", "x1": "x1"}
    isos = {}
    for f in S.arrows:
        for g in SQ.arrows_into(SQ.dom(f)):
            src = reindex_slice_presheaf(SQ, g, objects[f])
            tgt = objects[SQ.compose(f, g)]
            if f == "q_s" and g == "p_q":
                comps = {"p_p": dict(tw)}
            else:
                comps = {o: {x: x for x in src.on_objects[o]} for o in src.base.objects}
            m = PresheafMap(src, tgt, comps)
            m.validate()
            isos[(f, g)] = m
    return SheafDescentDatum(SQ, topo, S, objects, isos)


def test_square_site_is_valid_and_subcanonical():
    from tck.site import subcanonical_check, validate_topology

    _, topo = square_site()
    assert validate_topology(topo).ok
    assert subcanonical_check(topo).ok


def test_overlap_datum_valid_with_and_without_twist():
    for twist in (False, True):
        d = overlap_datum(twist)
        assert validate_sheaf_descent(d).ok


def test_double_plus_glues_overlapping_cover_to_pullback():
    # expected global sections: pairs (m, n) matching over the overlap,
    # computed by an independent oracle from the raw tables
    cases = [
        (False, None),
        (True, None),
        (False, {"n0": "x0", "n1": "x0"}),
        (True, {"n0": "x0", "n1": "x0"}),
    ]
    for twist, r_down in cases:
        d = overlap_datum(twist, r_down)
        M, psis = construct_effectiveness(d)
        assert verify_effectiveness(d, M, psis).ok, (twist, r_down)
        tw = {"x0": "x1", "x1": "x0"} if twist else {"x0": "x0", "x1": "x1"}
        q_down = {"m0": "x0", "m1": "x1"}
        rd = r_down or {"n0": "x0", "n1": "x1"}
        expected = sum(
            1
            for m in q_down
            for n in rd
            if tw[q_down[m]] == rd[n]
        )
        assert len(M.on_objects["s_s"]) == expected, (twist, r_down)
        assert len(M.on_objects["q_s"]) == 2
        assert len(M.on_objects["p_s"]) == 2


def test_omega_J_probe_on_overlapping_cover():
    _, topo = square_site()
    data = [overlap_datum(False), overlap_datum(True),
            overlap_datum(True, {"n0": "x0", "n1": "x0"})]
    rep = omega_J_probe(topo, data)
    assert rep.ok, rep.counterexamples


def test_char_stacks_pipeline_on_square_site():
    # discrete stacks from glued sheaves on the square site: char factors
    # through sheaf values and classify recovers the opfibration
    SQ, topo = square_site()

    def glued_base_sheaf(a_down: dict, b_down: dict) -> SetPresheaf:
        overlap = ("x0", "x1")
        pairs = tuple(sorted(
            f"{m}&{n}" for m in a_down for n in b_down if a_down[m] == b_down[n]
        ))
        on_objects = {"p": overlap, "q": tuple(sorted(a_down)),
                      "r": tuple(sorted(b_down)), "s": pairs}
        on_arrows = {}
        for f, (d0, c0) in SQ.arrows.items():
            src = on_objects[c0]
            if d0 == c0:
                on_arrows[f] = {x: x for x in src}
            elif (d0, c0) == ("q", "s"):
                on_arrows[f] = {x: x.split("&")[0] for x in src}
            elif (d0, c0) == ("r", "s"):
                on_arrows[f] = {x: x.split("&")[1] for x in src}
            elif (d0, c0) == ("p", "q"):
                on_arrows[f] = {x: a_down[x] for x in src}
            elif (d0, c0) == ("p", "r"):
                on_arrows[f] = {x: b_down[x] for x in src}
            elif (d0, c0) == ("p", "s"):
                on_arrows[f] = {x: a_down[x.split("&")[0]] for x in src}
        Z = SetPresheaf(SQ, on_objects, on_arrows)
        Z.validate()
        return Z

    w1 = glued_base_sheaf({"m0": "x0", "m1": "x1"}, {"n0": "x0", "n1": "x1"})
    w2 = glued_base_sheaf({"m0": "x0", "m1": "x0"}, {"n0": "x0", "n1": "x1"})
    for W in (w1, w2):
        assert is_sheaf(W, topo).ok
        F = discrete_presheaf(SQ, W)
        phi = certify_dopf_pre(identity_two_nat(F))
        zj = char_stacks(phi, topo, check_endpoints=True)
        assert fib_iso(classify(zj.underlying), phi) is not None
    # the terminal map out of a glued stack also factors and round-trips
    from tck.fincat import FinFunctor, delta1

    one = delta1(SQ)
    Fw, Fone = discrete_presheaf(SQ, w1), discrete_presheaf(SQ, one)
    comps = {}
    for c in SQ.objects:
        comps[c] = FinFunctor(
            Fw.on_objects[c], Fone.on_objects[c],
            {x: "*" for x in w1.on_objects[c]},
            {f"id_{x}": "id_*" for x in w1.on_objects[c]},
        )
    s = TwoNat(Fw, Fone, comps)
    s.validate()
    phi = certify_dopf_pre(s)
    zj = char_stacks(phi, topo, check_endpoints=True)
    assert fib_iso(classify(zj.underlying), phi) is not None


def test_check_stack_reports_bounded_pass_when_bound_trips():
    from tck.corpus import constant_cat_presheaf
    from tck.report import BOUNDED_PASS

    F = constant_cat_presheaf(OS, walking_iso())
    rep = check_stack(F, OSJ, bound=3)
    assert rep.verdict == BOUNDED_PASS
    assert rep.bounds


def test_scale_smoke_five_object_chain():
    # a slightly larger site than the shipped corpus: end-to-end classify,
    # char, roundtrip and sheaf checks stay fast
    from tck.corpus import dopf_corpus, map_to_omega_corpus
    from tck.classifier import char, classify, roundtrip_phi
    from tck.fincat import free_category
    from tck.prestack import representable
    from tck.site import is_sheaf, subcanonical_check, trivial_topology

    chain5 = free_category(
        ["a", "b", "c", "d", "e"],
        {"u1": ("a", "b"), "u2": ("b", "c"), "u3": ("c", "d"), "u4": ("d", "e")},
    )
    assert subcanonical_check(trivial_topology(chain5)).ok
    F = representable(chain5, "e")
    for phi in dopf_corpus(F, 3):
        assert roundtrip_phi(phi) is not None
    for z in map_to_omega_corpus(F, 2):
        phi = classify(z)
        for (c, x), Z in z.object_part.items():
            assert len(phi.fibre(c, x)) == len(Z.on_objects[chain5.id_of(c)])
