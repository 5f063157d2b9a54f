import json

import numpy as np
import pytest

from coclass import cohomology, extensions, groups, modules, pairs, scenarios


_cache = {}


def dihedral():
    if "dihedral" not in _cache:
        _cache["dihedral"] = scenarios.load_scenario("dihedral_mainline")
    return _cache["dihedral"]


def d8():
    if "d8" not in _cache:
        _cache["d8"] = scenarios.load_scenario("d8_gaussian")
    return _cache["d8"]


def test_builtins_load_and_validate():
    for name in scenarios.BUILTIN_SCENARIOS:
        scn = scenarios.load_scenario(name)
        assert scn.validate() is scn
        assert scn.period() >= 1


def test_missing_field_is_named(tmp_path):
    data = dict(scenarios.BUILTIN_SCENARIOS["dihedral_mainline"])
    del data["action"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(scenarios.ScenarioError, match="action"):
        scenarios.load_scenario(str(path))


def test_file_round_trip(tmp_path):
    data = scenarios.BUILTIN_SCENARIOS["d8_gaussian"]
    path = tmp_path / "d8.json"
    path.write_text(json.dumps(data))
    scn = scenarios.load_scenario(str(path))
    assert scn.name == "d8_gaussian"
    assert scn.period() == d8().period()


def test_non_uniserial_action_is_rejected():
    data = dict(scenarios.BUILTIN_SCENARIOS["d8_gaussian"])
    data["action"] = [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]  # trivial action
    with pytest.raises((scenarios.ScenarioError, modules.ModuleError)):
        scenarios.load_scenario(data)


def test_dihedral_thresholds():
    bounds = dihedral().bounds()
    assert (bounds.a_exp, bounds.b_exp) == (1, 0)
    assert bounds.least_qualifying() == 1


def test_d8_thresholds():
    bounds = d8().bounds()
    assert (bounds.a_exp, bounds.b_exp) == (1, 1)
    assert bounds.v == 2
    assert bounds.least_qualifying() == 4


def test_top_quotient_structure():
    top = dihedral().top()
    assert top.group.order == 4
    assert top.r == 1 and top.l == 2
    t8 = d8().top()
    assert t8.group.order == 32
    assert t8.r == 3 and t8.l == 3


def test_mainline_extensions_are_the_finite_quotients():
    # the mainline class at level n must rebuild the semidirect quotient
    scn = dihedral()
    top = scn.top()
    G0 = scn.group()
    for n in (1, 2, 3):
        Q = top.quotient(n)
        lam = top.mainline_cocycle(n, Q)
        ext = extensions.build_extension(top.group, Q.module, lam)
        Qfull = scn.quotient(n + scn.top_offset)
        Am = Qfull.module
        quotient_table = groups.abelian_extension_table(
            G0.mul, [int(x) for x in Am.coord_moduli()], Am.plain, None)
        assert extensions.are_isomorphic(ext.table, quotient_table)
        cc, flag = extensions.coclass_of_extension(ext, l=top.l)
        assert flag and cc == top.r


def test_mainline_reduction_is_mainline():
    top = dihedral().top()
    Q3 = top.quotient(3)
    Q2 = top.quotient(2)
    lam3 = top.mainline_cocycle(3, Q3)
    lam2 = top.mainline_cocycle(2, Q2)
    H2 = cohomology.finite_cohomology(Q2.module, 2)
    red = cohomology.restrict_level(Q3, Q2, 2, lam3)
    assert np.array_equal(H2.coords(red), H2.coords(lam2))


def test_lcs_identification_dihedral():
    rep = scenarios.check_lower_central_series(dihedral(), max_order=128)
    assert rep.ok, rep.failures
    assert rep.limit_coclass == 1
    assert all(c == 1 for _, c in rep.coclasses)


def test_lcs_identification_d8():
    rep = scenarios.check_lower_central_series(d8(), max_order=256)
    assert rep.ok, rep.failures
    assert rep.limit_coclass == 3
    # gamma_{1+2k} of the semidirect product is the 2^k-scaled lattice:
    # at chain index 2k the fiber starts the (1+2k)-th term
    identified = {(m, li) for m, li, _ in rep.identified_terms}
    assert (4, 5) in identified and (5, 5) in identified
    assert (3, 3) in identified


def d8_scan():
    if "scan" not in _cache:
        _cache["scan"] = scenarios.summand_instability_witness(d8())
    return _cache["scan"]


def test_summand_instability_witness_d8():
    rep = d8_scan()
    assert rep.found
    assert rep.lifted_endomorphisms_stable
    w = rep.witness
    assert (w["k"], w["n"]) == ("0", "2")
    assert any(c != "0" for c in w["h3_component"])


def test_witness_is_recheckable():
    scn = d8()
    rep = d8_scan()
    w = rep.witness
    n = int(w["n"])
    T, chain = scn.lattice(), scn.chain()
    frame = cohomology.split_frame(T, chain, n, m=2)
    Q = scn.quotient(n)
    level = cohomology.split_at_level(frame, T, chain, n, scn.period(), Q=Q)
    H = level.H
    A = Q.module
    eps_hat = np.array([[int(x) for x in r] for r in w["eps_hat"]], dtype=np.int64)
    pair = pairs.CompatiblePair(np.arange(A.group.order, dtype=np.int64),
                                pairs.canonical_hat(A, eps_hat))
    assert pairs.is_module_automorphism(A, pair.eps_hat)
    # rebuild the class from the theta rows so it provably sits in the summand
    classes = scenarios._summand_classes(level)
    lookup = dict(classes)
    key = tuple(int(c) for c in w["class_coords"])
    row = lookup[key]
    member = scenarios._summand_membership_solver(level, H)
    assert not np.any(member.reduce(row))
    image = pairs.act_on_cochain(H, pair, row)
    assert np.any(member.reduce(image))
    comp = scenarios._h3_component(level, image)
    assert [str(c) for c in comp] == w["h3_component"]
    # an independent representative of the same class decomposes the same way
    spec = cohomology.finite_coefficients(A)
    d1 = cohomology.coboundary_matrix(spec, 1)
    rng = np.random.default_rng(3)
    f = rng.integers(0, A.q, size=d1.shape[0], dtype=np.int64)
    image2 = (image + f @ d1) % A.q
    assert scenarios._h3_component(level, image2) == comp


def test_no_witness_on_dihedral():
    rep = scenarios.summand_instability_witness(dihedral(), n_range=range(1, 4))
    assert not rep.found
    assert rep.lifted_endomorphisms_stable


def test_correspondence_report_qualifying_and_not():
    rep = scenarios.orbit_correspondence_report(dihedral())
    assert rep.ok and rep.qualified
    bad = scenarios.orbit_correspondence_report(dihedral(), n=0)
    assert not bad.qualified and "violates" in bad.reason
