import itertools

import numpy as np
import pytest

from coclass import cohomology, extensions, groups, linalg, modules, pairs


def cyclic_table(n):
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def trivial_module(G, p, exps):
    r = len(exps)
    act = [np.eye(r, dtype=np.int64) for _ in range(G.order)]
    return modules.finite_module_from_plain(G, p, exps, act)


_cache = {}


def d8_level_one():
    if "d8" not in _cache:
        D8 = groups.build_group(
            {"presentation": {"generators": ["a", "b"],
                              "relators": ["a^2", "b^4", "a^-1 b a b"]}}
        )
        ctx = modules.PrecisionContext(2, 16)
        a = np.array([[1, 0], [0, -1]])
        b = np.array([[0, 1], [-1, 0]])
        T = modules.lattice_module(D8, {D8.generators[0]: a, D8.generators[1]: b}, ctx)
        chain = modules.g_central_series(T, 4)
        Q = modules.quotient(T, chain, 1)
        H = cohomology.cohomology_group(cohomology.finite_coefficients(Q.module), 2)
        _cache["d8"] = (Q, H)
    return _cache["d8"]


def test_zero_cocycle_gives_direct_product():
    C2 = groups.make_table(cyclic_table(2))
    A = trivial_module(C2, 2, [1])
    H = cohomology.cohomology_group(cohomology.finite_coefficients(A), 2)
    ext = extensions.build_extension(C2, A, H.representative(H.structure.coords(
        np.zeros(H.cocycles.shape[1], dtype=np.int64))))
    orders = sorted(int(o) for o in ext.table.element_orders())
    assert ext.order == 4
    assert orders == [1, 2, 2, 2]  # C2 x C2


def test_nonzero_cocycle_gives_c4():
    C2 = groups.make_table(cyclic_table(2))
    A = trivial_module(C2, 2, [1])
    H = cohomology.cohomology_group(cohomology.finite_coefficients(A), 2)
    assert H.structure.invariants() == [2]
    rep = H.representative(np.array([1], dtype=np.int64))
    ext = extensions.build_extension(C2, A, rep)
    assert max(int(o) for o in ext.table.element_orders()) == 4  # C4


def test_cohomologous_cocycles_give_isomorphic_extensions():
    Q, H = d8_level_one()
    A = Q.module
    spec = cohomology.finite_coefficients(A)
    d1 = cohomology.coboundary_matrix(spec, 1)
    rng = np.random.default_rng(7)
    for coords in list(H.structure.all_coords())[:4]:
        rep = H.representative(coords)
        f = rng.integers(0, A.q, size=d1.shape[0], dtype=np.int64)
        rep2 = (rep + f @ d1) % A.q
        e1 = extensions.build_extension(A.group, A, rep)
        e2 = extensions.build_extension(A.group, A, rep2)
        assert extensions.are_isomorphic(e1.table, e2.table)


def test_cocycle_identity_is_enforced():
    Q, H = d8_level_one()
    A = Q.module
    bad = H.representative(list(H.structure.all_coords())[1]).copy()
    bad[0] = (bad[0] + 1) % A.q
    if np.any((bad @ cohomology.coboundary_matrix(
            cohomology.finite_coefficients(A), 2)) % A.q):
        with pytest.raises(extensions.ExtensionError):
            extensions.build_extension(A.group, A, bad)


def test_coclass_criterion_on_the_dihedral_tower():
    # extensions of Z/2 by D8 of order 16: the flag must pick out exactly
    # the maximal-class groups (coclass 1, same as D8)
    Q, H = d8_level_one()
    A = Q.module
    flagged = []
    for coords in list(H.structure.all_coords()):
        ext = extensions.build_extension(A.group, A, H.representative(coords))
        cc, flag = extensions.coclass_of_extension(ext)
        assert flag == (cc == 1)
        if flag:
            flagged.append(ext)
    assert len(flagged) == 4
    # gamma_2 has order 4 in a maximal-class group of order 16
    for ext in flagged:
        terms = groups.lower_central_series(ext.table).terms
        assert [len(t) for t in terms] == [16, 4, 2, 1]


def test_dihedral_quaternion_semidihedral_all_distinct():
    Q, H = d8_level_one()
    A = Q.module
    flagged = [extensions.build_extension(A.group, A, H.representative(c))
               for c in H.structure.all_coords()]
    flagged = [e for e in flagged if extensions.coclass_of_extension(e)[1]]
    spectra = sorted(tuple(sorted(int(o) for o in e.table.element_orders()))
                     for e in flagged)
    # D16, SD16 (two classes), Q16 by their order spectra
    assert len(spectra) == 4
    assert len(set(spectra)) == 3


def test_are_isomorphic_separates_d8_q8():
    D8 = groups.build_group(
        {"presentation": {"generators": ["a", "b"],
                          "relators": ["a^2", "b^4", "a^-1 b a b"]}})
    Q8 = groups.build_group(
        {"presentation": {"generators": ["a", "b"],
                          "relators": ["a^4", "a^2 b^-2", "a^-1 b a b"]}})
    assert D8.order == 8 and Q8.order == 8
    assert not extensions.are_isomorphic(D8, Q8)
    assert extensions.are_isomorphic(D8, D8)


def test_fingerprint_prefilter_matches_isomorphism_on_order_eight():
    tables = [groups.make_table(cyclic_table(8))]
    tables.append(groups.build_group(
        {"presentation": {"generators": ["a", "b"], "relators": ["a^4", "b^2", "a b a^-1 b^-1"]}}))
    tables.append(groups.build_group(
        {"presentation": {"generators": ["a", "b"],
                          "relators": ["a^2", "b^4", "a^-1 b a b"]}}))
    for G1, G2 in itertools.combinations(tables, 2):
        assert not extensions.are_isomorphic(G1, G2)


def test_orbit_isomorphism_on_d8_level_one():
    Q, H = d8_level_one()
    part = pairs.orbits_on_h2(H, pairs.compatible_pairs(Q.module))
    rep = extensions.orbit_isomorphism_check(H, Q.module, part)
    assert rep.ok
    assert rep.checked_pairs == 6
    assert rep.skipped_classes == 4


def test_extension_cap_is_enforced():
    C2 = groups.make_table(cyclic_table(2))
    A = trivial_module(C2, 2, [1])
    H = cohomology.cohomology_group(cohomology.finite_coefficients(A), 2)
    rep = H.representative(np.array([1], dtype=np.int64))
    with pytest.raises(extensions.ExtensionError):
        extensions.build_extension(C2, A, rep, cap=3)
