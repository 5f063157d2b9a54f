import itertools

import numpy as np
import pytest

from coclass import groups


def cyclic_table(n):
    return [[(i + j) % n for j in range(n)] for i in range(n)]


D8_PRESENTATION = {
    "presentation": {"generators": ["a", "b"], "relators": ["a^2", "b^4", "a^-1 b a b"]}
}

D8_MATRICES = {
    "matrix_generators": [[[1, 0], [0, -1]], [[0, 1], [-1, 0]]],
    "modulus": 2**6,
}


def test_trivial_group():
    G = groups.build_group({"presentation": {"generators": [], "relators": []}})
    assert G.order == 1
    assert groups.lower_central_series(G).sizes() == [1]
    assert groups.coclass(G) == 0


def test_cyclic_table_and_orders():
    G = groups.make_table(cyclic_table(4))
    assert G.order == 4
    assert sorted(G.element_order(g) for g in range(4)) == [1, 2, 4, 4]
    assert G.is_abelian()
    assert groups.coclass(G) == 1


def test_cyclic_closure_from_generator():
    G, _ = groups.from_permutations([(1, 2, 3, 0)])
    assert G.order == 4
    powers = {G.power(G.generators[0], k) for k in range(4)}
    assert len(powers) == 4


def test_d8_from_presentation():
    G = groups.build_group(D8_PRESENTATION)
    assert G.order == 8
    assert groups.lower_central_series(G).sizes() == [8, 2, 1]
    assert groups.coclass(G) == 1
    assert not G.is_abelian()


def test_d8_from_matrices_matches_presentation():
    G = groups.build_group(D8_MATRICES)
    H = groups.build_group(D8_PRESENTATION)
    assert G.order == H.order == 8
    assert sorted(G.element_orders()) == sorted(H.element_orders())
    assert groups.lower_central_series(G).sizes() == [8, 2, 1]


def test_quaternion_presentation():
    Q = groups.build_group(
        {"presentation": {"generators": ["a", "b"],
                          "relators": ["a^4", "a^2 b^-2", "a^-1 b a b"]}}
    )
    assert Q.order == 8
    # one element of order 2 distinguishes Q8 from D8
    assert int(np.sum(Q.element_orders() == 2)) == 1
    assert groups.coclass(Q) == 1


def test_bad_table_rejected():
    bad = [[0, 1], [1, 1]]
    with pytest.raises(groups.GroupError):
        groups.make_table(bad)


def test_nonassociative_rejected():
    # latin square that is not a group table (order 5 loop)
    sq = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 3, 4, 0, 1],
        [3, 4, 1, 2, 0],
        [4, 2, 0, 1, 3],
    ]
    with pytest.raises(groups.GroupError):
        groups.make_table(sq)


def test_automorphisms_c2_c4_d8():
    C2 = groups.make_table(cyclic_table(2))
    assert len(groups.automorphism_group(C2)) == 1
    C4 = groups.make_table(cyclic_table(4))
    assert len(groups.automorphism_group(C4)) == 2
    D8 = groups.build_group(D8_PRESENTATION)
    auts = groups.automorphism_group(D8)
    assert len(auts) == 8
    # closure under composition and inverses
    keys = {a.tobytes() for a in auts}
    for a, b in itertools.product(auts, repeat=2):
        assert groups.compose_perms(a, b).tobytes() in keys
    for a in auts:
        assert groups.invert_perm(a).tobytes() in keys
    ident = np.arange(8)
    assert ident.tobytes() in keys


def test_lcs_terms_are_normal():
    D8 = groups.build_group(D8_PRESENTATION)
    for term in groups.lower_central_series(D8).terms:
        assert groups.is_subgroup(D8, term)
        assert groups.is_normal(D8, term)


def test_center_d8():
    D8 = groups.build_group(D8_PRESENTATION)
    assert len(groups.center(D8)) == 2


def test_stabilizer_trivial_action():
    G = groups.make_table(cyclic_table(4))
    assert groups.stabilizer(G, lambda v, g: v, 7) == [0, 1, 2, 3]


def test_stabilizer_regular_action():
    G = groups.make_table(cyclic_table(4))
    assert groups.stabilizer(G, lambda v, g: int(G.mul[v, g]), 2) == [0]


def test_stabilizer_rejects_non_action():
    G = groups.make_table(cyclic_table(4))
    with pytest.raises(groups.GroupError):
        groups.stabilizer(G, lambda v, g: (v + 1) % 4 if g else v, 0)


def test_semidirect_split_table():
    # C2 acting by negation on Z/4: the dihedral group of order 8
    gmul = np.array([[0, 1], [1, 0]])
    act = [np.array([[1]]), np.array([[-1]])]
    E = groups.abelian_extension_table(gmul, [4], act)
    assert E.order == 8
    assert groups.lower_central_series(E).sizes() == [8, 2, 1]


def test_factor_set_extension_table():
    # C2 on Z/4 by negation with tau(g,h) = 2 for g=h=flip: quaternion-like check
    gmul = np.array([[0, 1], [1, 0]])
    act = [np.array([[1]]), np.array([[-1]])]
    tau = [[np.array([0]), np.array([0])], [np.array([0]), np.array([2])]]
    E = groups.abelian_extension_table(gmul, [4], act, tau)
    assert E.order == 8
    assert int(np.sum(E.element_orders() == 2)) == 1  # quaternion group


def test_word_labels_present():
    D8 = groups.build_group(D8_PRESENTATION)
    assert D8.element_labels is not None
    assert D8.element_labels[0] == "1"
    assert len(set(D8.element_labels)) == 8
