import numpy as np
import pytest

from coclass import groups, linalg, modules


def cyclic_table(n):
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def c2_negation(N=10, rank=1):
    C2 = groups.make_table(cyclic_table(2))
    ctx = modules.PrecisionContext(2, N)
    mat = -np.eye(rank, dtype=np.int64)
    return modules.lattice_module(C2, {1: mat}, ctx)


def d8_lattice(N=12):
    D8 = groups.build_group(
        {"presentation": {"generators": ["a", "b"], "relators": ["a^2", "b^4", "a^-1 b a b"]}}
    )
    ctx = modules.PrecisionContext(2, N)
    a = np.array([[1, 0], [0, -1]])
    b = np.array([[0, 1], [-1, 0]])
    ga, gb = D8.generators[0], D8.generators[1]
    return modules.lattice_module(D8, {ga: a, gb: b}, ctx)


def test_precision_policy():
    ctx = modules.precision_for(2, 6, 8)
    assert ctx.N == 6 + 9 + 2


def test_c2_negation_chain():
    T = c2_negation()
    chain = modules.g_central_series(T, 5)
    assert chain.index_exponents == [0, 1, 2, 3, 4, 5]
    ok, steps = modules.is_uniserial(chain, 5)
    assert ok and steps == [1] * 5
    assert modules.chain_period(T, chain) == 1


def test_trivial_action_chain_stops():
    C2 = groups.make_table(cyclic_table(2))
    ctx = modules.PrecisionContext(2, 8)
    T = modules.lattice_module(C2, {1: np.eye(1, dtype=np.int64)}, ctx)
    chain = modules.g_central_series(T, 3)
    assert chain.stopped and chain.depth == 0


def test_diagonal_negation_not_uniserial():
    T = c2_negation(rank=2)
    chain = modules.g_central_series(T, 3)
    ok, steps = modules.is_uniserial(chain, 1)
    assert not ok
    assert steps[0] == 2


def test_d8_chain_uniserial_and_periodic():
    T = d8_lattice()
    chain = modules.g_central_series(T, 8)
    ok, steps = modules.is_uniserial(chain, 8)
    assert ok, steps
    assert modules.chain_period(T, chain) == 2
    # T_1 = {(x, y) : x + y even}
    B1 = chain.bases[1]
    assert linalg.span_equal(B1, [[1, 1], [0, 2]], 2, T.ctx.N)


def test_d8_quotients():
    T = d8_lattice()
    chain = modules.g_central_series(T, 8)
    for n in range(0, 7):
        Q = modules.quotient(T, chain, n)
        assert Q.order == 2**n
    Q2 = modules.quotient(T, chain, 2)
    assert Q2.invariants() == [2, 2]


def test_quotient_zero_level_trivial():
    T = d8_lattice()
    chain = modules.g_central_series(T, 2)
    Q0 = modules.quotient(T, chain, 0)
    assert Q0.order == 1 and Q0.invariants() == []


def test_c2_quotient_invariants():
    T = c2_negation()
    chain = modules.g_central_series(T, 4)
    Q = modules.quotient(T, chain, 3)
    assert Q.invariants() == [8]


def test_quotient_coords_additive_and_action():
    T = d8_lattice()
    chain = modules.g_central_series(T, 6)
    Q = modules.quotient(T, chain, 5)
    rng = np.random.default_rng(3)
    mods = Q.module.coord_moduli()
    for _ in range(20):
        u = rng.integers(0, T.q, 2)
        v = rng.integers(0, T.q, 2)
        assert np.array_equal(
            Q.coords((u + v) % T.q), (Q.coords(u) + Q.coords(v)) % mods
        )
        g = int(rng.integers(0, 8))
        # action commutes with the coordinate map
        got = Q.module.unhat(Q.module.apply(Q.module.hat(Q.coords(u)), g))
        want = Q.coords(T.apply(u, g))
        assert np.array_equal(got, want)


def test_mu_shift_c2():
    T = c2_negation()
    chain = modules.g_central_series(T, 6)
    mu = modules.mu_shift(T, chain, 2, 1)
    assert mu.rep.shape == (1, 1)


def test_mu_shift_d8():
    T = d8_lattice()
    chain = modules.g_central_series(T, 8)
    mu = modules.mu_shift(T, chain, 1, 2)
    # rep expresses 2*T_1 in the T_3 basis and must be invertible... it is a
    # bijection onto T_3, so the rep matrix is invertible mod 2^N
    assert linalg.is_invertible(mu.rep, 2, T.ctx.N)
    with pytest.raises(modules.ModuleError):
        modules.mu_shift(T, chain, 1, 1)


def test_distinguished_generator_d8():
    T = d8_lattice()
    chain = modules.g_central_series(T, 4)
    t0 = modules.distinguished_generator(T, chain)
    H = linalg.howell(np.vstack([t0[None, :], chain.bases[1]]), 2, T.ctx.N)
    assert H.index_exponent() == 0


def test_fixed_points_c2_negation():
    T = c2_negation()
    chain = modules.g_central_series(T, 5)
    Q = modules.quotient(T, chain, 4)  # Z/16 with negation
    fx = modules.fixed_points(Q.module, [0, 1])
    qg = linalg.quotient_group(fx, np.zeros((0, 1), dtype=np.int64), 2, Q.module.E)
    assert qg.invariants() == [2]


def test_fixed_points_trivial_subgroup():
    T = d8_lattice()
    chain = modules.g_central_series(T, 4)
    Q = modules.quotient(T, chain, 3)
    fx = modules.fixed_points(Q.module, [0])
    assert linalg.span_equal(fx, Q.module.member_rows(), 2, Q.module.E)


def test_hom_space_trivial_group_all_maps():
    triv = groups.make_table([[0]])
    ident = [np.eye(2, dtype=np.int64)]
    # homocyclic case: every linear map counts, |W|^(number of generators)
    V = modules.finite_module_from_plain(triv, 2, [2, 2], ident)
    assert modules.hom_space(V, V).order == 16**2
    # mixed exponents: hom(Z4+Z2, Z4+Z2) = Z4 x Z2 x Z2 x Z2
    Vm = modules.finite_module_from_plain(triv, 2, [2, 1], ident)
    hs = modules.hom_space(Vm, Vm)
    assert hs.order == 32
    assert hs.invariants() == [4, 2, 2, 2]


def test_hom_space_c2_endos_with_orbit_route():
    T = c2_negation()
    chain = modules.g_central_series(T, 4)
    Q = modules.quotient(T, chain, 3)
    v0 = Q.hat_of_ambient([1])
    hs = modules.hom_space(Q.module, Q.module, v0_hat=v0)
    assert hs.invariants() == [8]


def test_hom_space_d8_endos_routes_agree():
    T = d8_lattice()
    chain = modules.g_central_series(T, 6)
    t0 = modules.distinguished_generator(T, chain)
    for n in (1, 2, 3, 4):
        Q = modules.quotient(T, chain, n)
        v0 = Q.hat_of_ambient(t0)
        hs = modules.hom_space(Q.module, Q.module, v0_hat=v0)
        # every basis hom commutes with the action
        for C in hs.basis_matrices():
            for g in range(8):
                lhs = modules.linalg.matmul(Q.module.plain[g], C, Q.module.q)
                rhs = modules.linalg.matmul(C, Q.module.plain[g], Q.module.q)
                mods = Q.module.coord_moduli()
                assert np.array_equal(lhs % mods[None, :], rhs % mods[None, :])


def test_lattice_hom_space_ranks():
    T1 = c2_negation()
    assert len(modules.lattice_hom_space(T1)) == 1
    T2 = d8_lattice()
    basis = modules.lattice_hom_space(T2)
    assert len(basis) == 1  # the centralizer of the D8 matrices is the scalars
    for Phi in basis:
        for g in range(8):
            assert np.array_equal((T2.act[g] @ Phi) % T2.q, (Phi @ T2.act[g]) % T2.q)


def test_endo_reduction_identity():
    T = d8_lattice()
    chain = modules.g_central_series(T, 5)
    Q = modules.quotient(T, chain, 4)
    C = modules.endo_to_quotient(Q, np.eye(2, dtype=np.int64))
    assert np.array_equal(C % Q.module.coord_moduli()[None, :],
                          np.eye(Q.module.rank, dtype=np.int64))


def test_precision_stability_of_invariants():
    for N in (12, 14):
        T = d8_lattice(N)
        chain = modules.g_central_series(T, 6)
        Q = modules.quotient(T, chain, 5)
        assert Q.invariants() == [8, 4]
