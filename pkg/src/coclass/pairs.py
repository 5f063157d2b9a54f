"""Compatible pairs, their action on second cohomology, and the level shift.

A compatible pair on a module V is (beta, eps) with beta a group automorphism
and eps an invertible additive map satisfying M_g eps = eps M_{beta(g)} for the
action matrices M_g.  The pairs act on cocycles by

    (tau . (beta, eps))(g, h) = tau(beta^{-1} g, beta^{-1} h) . eps

and the induced orbits on H^2 classify the extensions up to the relevant
isomorphisms.  This module also builds the complement E_n of the reduced
lattice endomorphisms inside End(A_n), the homomorphisms rho/pi whose images
generate the pair group at deep levels, and the certified orbit bijection
between two consecutive qualifying levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cohomology, groups, linalg, modules
from .cohomology import CohomologyGroup, SplitLevel
from .groups import GroupTable
from .modules import CentralChain, FiniteModule, LatticeModule, QuotientModule


class PairError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the pair group on a finite module


@dataclass
class CompatiblePair:
    """(beta, eps) with eps in hatted coordinates on the finite module.

    Hat matrices represent the same module map whenever row i agrees mod
    p^{e_i}, so eps_hat is kept in the canonical reduced form.
    """

    beta: np.ndarray  # index permutation of the group
    eps_hat: np.ndarray  # hatted matrix, row i reduced mod p^{e_i}

    def key(self) -> tuple:
        return (self.beta.tobytes(), self.eps_hat.tobytes())


def canonical_hat(A: FiniteModule, M) -> np.ndarray:
    row_mods = np.array([A.p**e for e in A.exps], dtype=np.int64)
    return np.asarray(M, dtype=np.int64) % A.q % row_mods[:, None]


def pair_compose(A: FiniteModule, x: CompatiblePair, y: CompatiblePair) -> CompatiblePair:
    """Product in action order: tau.(x y) = (tau.x).y."""
    beta = groups.compose_perms(x.beta, y.beta)
    eps = canonical_hat(A, x.eps_hat @ y.eps_hat)
    return CompatiblePair(beta, eps)


def pair_identity(A: FiniteModule) -> CompatiblePair:
    n = A.group.order
    return CompatiblePair(np.arange(n, dtype=np.int64),
                          canonical_hat(A, np.eye(A.rank, dtype=np.int64)))


def pair_inverse(A: FiniteModule, x: CompatiblePair) -> CompatiblePair:
    """Inverse by finite order of the pair (desk scale)."""
    ident = pair_identity(A)
    acc = x
    prev = pair_identity(A)
    for _ in range(4 * A.order * A.group.order + 4):
        if acc.key() == ident.key():
            return prev
        prev = acc
        acc = pair_compose(A, acc, x)
    raise PairError("pair order not found; eps may not be invertible")


def is_module_automorphism(A: FiniteModule, eps_hat) -> bool:
    img = (A.member_rows() @ (np.asarray(eps_hat) % A.q)) % A.q
    return linalg.span_equal(img, A.member_rows(), A.p, A.E)


def satisfies_compatibility(A: FiniteModule, pair: CompatiblePair) -> bool:
    gens = A.group.generators or range(A.group.order)
    for g in gens:
        lhs = canonical_hat(A, A.act[g] @ pair.eps_hat)
        rhs = canonical_hat(A, pair.eps_hat @ A.act[int(pair.beta[g])])
        if not np.array_equal(lhs, rhs):
            return False
    return True


def compatible_pairs(A: FiniteModule, auts: list[np.ndarray] | None = None) -> list[CompatiblePair]:
    """All pairs (beta, eps) by exhausting hom(A, A^(beta)) per automorphism."""
    if auts is None:
        auts = groups.automorphism_group(A.group)
    out = []
    for beta in auts:
        beta = np.asarray(beta, dtype=np.int64)
        H = modules.hom_space(A, A, beta=beta)
        for C in H.all_matrices():
            eps_hat = _hat_matrix(A, C)
            if is_module_automorphism(A, eps_hat):
                pair = CompatiblePair(beta, eps_hat)
                if not satisfies_compatibility(A, pair):
                    raise PairError("hom space produced an incompatible pair")
                out.append(pair)
    return out


def _hat_matrix(A: FiniteModule, plain) -> np.ndarray:
    """Hatted matrix of an additive map given by a plain coordinate matrix."""
    C = np.asarray(plain, dtype=np.int64)
    s = A.scales()
    X = (C % A.q) * s[None, :] % A.q  # X[i, j] = C_ij p^{E - e_j}
    if np.any(X % s[:, None]):
        raise PairError("plain matrix is not a well defined module map")
    return canonical_hat(A, X // s[:, None])


# ---------------------------------------------------------------------------
# action on cochains and on H^2


def act_on_cochain(H: CohomologyGroup, pair: CompatiblePair, row) -> np.ndarray:
    """(tau.(beta, eps))(g_1..g_m) = tau(g_1^{beta^-1}, ..).eps on hatted rows."""
    spec = H.spec
    m = H.m
    tuples = cohomology.tuples_of(spec.group, m)
    index = {t: i for i, t in enumerate(tuples)}
    binv = groups.invert_perm(pair.beta)
    r = spec.rank
    row = np.asarray(row, dtype=np.int64) % spec.q
    out = np.zeros_like(row)
    for i, t in enumerate(tuples):
        src = index[tuple(int(binv[g]) for g in t)]
        out[i * r : (i + 1) * r] = (row[src * r : (src + 1) * r] @ pair.eps_hat) % spec.q
    return out


def induced_h2_matrix(H: CohomologyGroup, pair: CompatiblePair) -> np.ndarray:
    """Matrix of the pair action on H coordinates (row i = image of gen i)."""
    rows = [H.coords(act_on_cochain(H, pair, g)) for g in H.structure.gens]
    k = len(H.structure.exps)
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.vstack(rows).astype(np.int64).reshape(k, k)


def _apply_coord_matrix(H: CohomologyGroup, M: np.ndarray, coords) -> tuple:
    mods = np.array([H.spec.p**e for e in H.structure.exps], dtype=np.int64)
    v = (np.asarray(coords, dtype=np.int64) @ M) % mods
    return tuple(int(x) for x in v)


@dataclass
class OrbitPartition:
    classes: list[list[tuple]]  # orbits of H^2 coordinate tuples
    sizes: list[int]
    stabilizer_sizes: list[int]
    acting_order: int  # order of the induced image in GL(H^2)

    @property
    def count(self) -> int:
        return len(self.classes)

    def orbit_of(self, coords) -> int:
        t = tuple(int(x) for x in coords)
        for i, cl in enumerate(self.classes):
            if t in set(cl):
                return i
        raise PairError("coordinates not found in any orbit")


def orbits_on_h2(H: CohomologyGroup, pairs: list[CompatiblePair]) -> OrbitPartition:
    """Exact orbit partition of H under the pairs, by breadth-first closure."""
    mats = {}
    for pair in pairs:
        M = induced_h2_matrix(H, pair)
        mats[M.tobytes()] = M
    # close the induced image under composition to get the acting order
    mods = np.array([H.spec.p**e for e in H.structure.exps], dtype=np.int64)
    frontier = list(mats.values())
    closed = dict(mats)
    while frontier:
        nxt = []
        for X in frontier:
            for Y in list(mats.values()):
                Z = (X @ Y) % mods[None, :] if X.size else X
                kz = Z.tobytes()
                if kz not in closed:
                    closed[kz] = Z
                    nxt.append(Z)
        frontier = nxt
    acting_order = max(len(closed), 1)
    gens = list(mats.values())
    seen: set[tuple] = set()
    classes: list[list[tuple]] = []
    for start in H.structure.all_coords():
        if start in seen:
            continue
        orbit = {start}
        queue = [start]
        while queue:
            c = queue.pop()
            for M in gens:
                nc = _apply_coord_matrix(H, M, c)
                if nc not in orbit:
                    orbit.add(nc)
                    queue.append(nc)
        seen |= orbit
        classes.append(sorted(orbit))
    sizes = [len(c) for c in classes]
    stabs = []
    for s in sizes:
        if acting_order % s:
            raise PairError("orbit size %d does not divide the acting order %d" % (s, acting_order))
        stabs.append(acting_order // s)
    return OrbitPartition(classes, sizes, stabs, acting_order)


# ---------------------------------------------------------------------------
# the lattice pair group, reduced modulo c


def lattice_pairs_mod(T: LatticeModule, c_exp: int,
                      auts: list[np.ndarray] | None = None):
    """Representatives (beta, eps) of the image of the lattice pair group in
    the pairs of T / p^c T.

    eps runs over the span of the commuting-matrix basis with coefficients
    mod p^c, filtered by invertibility mod p; distinct reductions are kept
    once, each with a full-precision lattice representative.
    """
    if auts is None:
        auts = groups.automorphism_group(T.group)
    p, q = T.p, T.q
    qc = p**c_exp
    out = []
    for beta in auts:
        beta = np.asarray(beta, dtype=np.int64)
        basis = modules.lattice_hom_space(T, beta)
        seen = set()
        for x in groups.all_coord_rows([qc] * len(basis)):
            eps = np.zeros((T.rank, T.rank), dtype=np.int64)
            for xi, M in zip(x, basis):
                eps = (eps + int(xi) * M) % q
            if not _invertible_mod_p(eps, p):
                continue
            k = (eps % qc).tobytes()
            if k in seen:
                continue
            seen.add(k)
            out.append((beta, eps))
    return out


def _invertible_mod_p(M, p: int) -> bool:
    try:
        linalg.invert(np.asarray(M) % p, p, 1)
        return True
    except ValueError:
        return False


def reduce_pair(Q: QuotientModule, beta, eps_lattice) -> CompatiblePair:
    """The pair induced on A_n by a lattice pair (beta, eps)."""
    C = modules.endo_to_quotient(Q, eps_lattice)
    return CompatiblePair(np.asarray(beta, dtype=np.int64), _hat_matrix(Q.module, C))


# ---------------------------------------------------------------------------
# exponent bounds and qualifying levels


@dataclass
class ExponentBounds:
    """a = max{exp H^2(T), exp H^3(T_n)}, b = exp H^1(stab, T_n), as p-powers.

    v is the least exponent with p^v >= b * max{a, b}; a level n qualifies
    when n >= v*d (the deep-level assumption) and n >= b_exp*d (complement
    hypothesis).
    """

    p: int
    d: int
    a_exp: int
    b_exp: int

    @property
    def c_exp(self) -> int:
        return max(self.a_exp, self.b_exp)

    @property
    def v(self) -> int:
        return self.b_exp + self.c_exp

    def qualifies(self, n: int) -> bool:
        return n >= self.v * self.d and n >= self.b_exp * self.d

    def least_qualifying(self) -> int:
        return max(self.v * self.d, self.b_exp * self.d, 1)


def stabilizer_elements(T: LatticeModule, t0) -> list[int]:
    t0 = np.asarray(t0, dtype=np.int64) % T.q
    return [g for g in range(T.group.order)
            if np.array_equal((t0 @ T.act[g]) % T.q, t0)]


def restricted_lattice(T: LatticeModule, elems) -> tuple[LatticeModule, list[int]]:
    """The same lattice viewed as a module for a subgroup."""
    sub, elements = groups.restricted_table(T.group, elems)
    act = T.act[np.array(elements, dtype=np.int64)]
    return LatticeModule(sub, T.ctx, T.rank, act.copy()), elements


def exponent_bounds(T: LatticeModule, chain: CentralChain, n: int, d: int) -> ExponentBounds:
    a2 = cohomology.lattice_cohomology(T, 2).exponent_valuation()
    a3 = cohomology.lattice_cohomology(T, 3, basis=chain.bases[n]).exponent_valuation()
    t0 = modules.distinguished_generator(T, chain)
    TP, _ = restricted_lattice(T, stabilizer_elements(T, t0))
    b = cohomology.lattice_cohomology(TP, 1, basis=chain.bases[n]).exponent_valuation()
    return ExponentBounds(T.p, d, max(a2, a3), b)


# ---------------------------------------------------------------------------
# the complement E_n of the reduced lattice endomorphisms in End(A_n)


@dataclass
class Complement:
    """End(A_n) = (reduced lattice endomorphisms) + E_n, a direct sum.

    E_flat holds hatted flat rows of the complement generators; lattice_lifts
    are integer matrices on the ambient lattice reducing to the generators.
    """

    level: int
    t0: np.ndarray
    stabilizer: list[int]
    h1_invariants: list[int]
    end_space: modules.HomSpace
    endT_flat: np.ndarray
    E_flat: np.ndarray
    lattice_lifts: list[np.ndarray]

    def invariants(self) -> list[int]:
        A = self.end_space.codomain
        if self.E_flat.shape[0] == 0:
            return []
        B = np.zeros((0, self.E_flat.shape[1]), dtype=np.int64)
        return linalg.quotient_group(self.E_flat, B, A.p, A.E).invariants()

    @property
    def order(self) -> int:
        out = 1
        for x in self.invariants():
            out *= x
        return out


def _lift_plain_endo(Q: QuotientModule, C) -> np.ndarray:
    """Integer matrix on the ambient lattice inducing the plain matrix C on A_n."""
    q = Q.lattice.q
    reps = Q.representatives()
    V = Q._V[:, Q._kept]
    return (V @ (np.asarray(C, dtype=np.int64) % q) @ reps) % q


def complement_En(T: LatticeModule, chain: CentralChain, n: int, period: int,
                  Q: QuotientModule | None = None) -> Complement:
    """Complement of the reduced lattice endomorphisms inside End(A_n).

    Construction: over the stabilizer P of a distinguished lattice generator
    t0, the fixed points of A_n split as the reduction of the lattice fixed
    points plus a complement isomorphic to H^1(P, T_n); each complement
    generator w yields the unique endomorphism of A_n sending t0 to w.
    """
    if Q is None:
        Q = modules.quotient(T, chain, n)
    p = T.p
    A = Q.module
    t0 = modules.distinguished_generator(T, chain)
    stab = stabilizer_elements(T, t0)
    TP, _ = restricted_lattice(T, stab)
    H1 = cohomology.lattice_cohomology(TP, 1, basis=chain.bases[n])
    b_exp = H1.exponent_valuation()
    if n < b_exp * period:
        raise PairError("level %d below the complement hypothesis %d" % (n, b_exp * period))
    frame = cohomology.split_frame(TP, chain, n, m=0)
    level = cohomology.split_at_level(frame, TP, chain, n, period)
    t0_hat = Q.hat_of_ambient(t0)
    End = modules.hom_space(A, A, v0_hat=t0_hat)
    t0c = Q.coords(t0)
    # image of t0 under each hom generator, in hatted coordinates
    gen_rows = [(t0c @ np.asarray(g, dtype=np.int64).reshape(A.rank, A.rank)) % A.q
                for g in End.structure.gens]
    Rmat = np.vstack(gen_rows) if gen_rows else np.zeros((0, A.rank), dtype=np.int64)
    E_gens = []
    lifts = []
    for w in level.K_hat:
        x = linalg.solve_rows(Rmat, w % A.q, p, A.E)
        if x is None:
            raise PairError("complement generator is not the t0-image of an endomorphism")
        flat = np.zeros(A.rank * A.rank, dtype=np.int64)
        for xi, g in zip(x, End.structure.gens):
            flat = (flat + int(xi) * np.asarray(g, dtype=np.int64)) % A.q
        E_gens.append(flat)
        Hsp = End  # plain matrix and its ambient lift
        C = Hsp.flat_to_matrix(flat)
        lifts.append(_lift_plain_endo(Q, C))
    E_flat = linalg.howell(np.vstack(E_gens), p, A.E).rows if E_gens else (
        np.zeros((0, A.rank * A.rank), dtype=np.int64))
    # reductions of the lattice endomorphisms, flattened the same way
    endT = modules.lattice_hom_space(T)
    endT_rows = [End.matrix_to_flat(modules.endo_to_quotient(Q, Phi)) for Phi in endT]
    endT_flat = linalg.howell(np.vstack(endT_rows), p, A.E).rows if endT_rows else (
        np.zeros((0, A.rank * A.rank), dtype=np.int64))
    comp = Complement(n, t0, stab, H1.invariants(), End, endT_flat, E_flat, lifts)
    _verify_complement(comp)
    return comp


def _verify_complement(comp: Complement):
    A = comp.end_space.codomain
    p, E = A.p, A.E
    inter = linalg.span_intersection(comp.E_flat, comp.endT_flat, p, E)
    if linalg.howell(inter, p, E).rows.shape[0]:
        raise PairError("complement intersects the reduced lattice endomorphisms")
    joint = np.vstack([comp.E_flat, comp.endT_flat])
    full = np.vstack([comp.end_space.structure.gens]) if comp.end_space.structure.gens.shape[0] else joint
    if not linalg.span_equal(joint, full, p, E):
        raise PairError("complement plus lattice endomorphisms do not fill End(A_n)")
    if comp.invariants() != comp.h1_invariants:
        raise PairError("complement invariants %s differ from H^1 invariants %s"
                        % (comp.invariants(), comp.h1_invariants))


# ---------------------------------------------------------------------------
# rho / pi images and their interaction


@dataclass
class RhoPiData:
    bounds: ExponentBounds
    complement: Complement
    rho_pairs: list[CompatiblePair]  # (1, 1 + eps) for the complement basis
    pi_rho_pairs: list[CompatiblePair]  # closure of (1, (1 + p^c phi)_{A_n})
    gamma_mod_c: list  # (beta, lattice eps) reps of the pair group mod p^c


def one_plus(A: FiniteModule, eps_flat) -> CompatiblePair:
    """(1, 1 + eps) from a hatted flat hom row (X[i, j] = C_ij p^{E - e_j})."""
    X = np.asarray(eps_flat, dtype=np.int64).reshape(A.rank, A.rank)
    s = A.scales()
    C_hat = _hat_matrix(A, (X // s[None, :]) % A.coord_moduli()[None, :])
    eps_hat = canonical_hat(A, np.eye(A.rank, dtype=np.int64) + C_hat)
    return CompatiblePair(np.arange(A.group.order, dtype=np.int64), eps_hat)


def rho_pi_data(T: LatticeModule, chain: CentralChain, n: int, period: int,
                Q: QuotientModule | None = None,
                comp: Complement | None = None) -> RhoPiData:
    if Q is None:
        Q = modules.quotient(T, chain, n)
    A = Q.module
    bounds = exponent_bounds(T, chain, n, period)
    if not bounds.qualifies(n):
        raise PairError("level %d does not satisfy the deep-level assumption; need %d"
                        % (n, bounds.least_qualifying()))
    if comp is None:
        comp = complement_En(T, chain, n, period, Q=Q)
    rho_pairs = [one_plus(A, row) for row in comp.E_flat]
    for pair in rho_pairs:
        if not (is_module_automorphism(A, pair.eps_hat) and satisfies_compatibility(A, pair)):
            raise PairError("1 + eps is not a compatible pair")
    c = T.p**bounds.c_exp
    gens = []
    for Phi in modules.lattice_hom_space(T):
        eps = (np.eye(T.rank, dtype=np.int64) + c * Phi) % T.q
        gens.append(reduce_pair(Q, np.arange(T.group.order, dtype=np.int64), eps))
    pi_rho = _pair_closure(A, gens)
    gamma = lattice_pairs_mod(T, bounds.c_exp)
    return RhoPiData(bounds, comp, rho_pairs, pi_rho, gamma)


def _pair_closure(A: FiniteModule, gens: list[CompatiblePair]) -> list[CompatiblePair]:
    ident = pair_identity(A)
    closed = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = pair_compose(A, x, g)
                if y.key() not in closed:
                    closed[y.key()] = y
                    nxt.append(y)
        frontier = nxt
    return list(closed.values())


def check_rho_additivity(A: FiniteModule, comp: Complement) -> bool:
    """(1 + eps)(1 + eps') = 1 + eps + eps' on the complement at deep levels."""
    rows = list(comp.E_flat)
    for x in rows:
        for y in rows:
            lhs = pair_compose(A, one_plus(A, x), one_plus(A, y))
            rhs = one_plus(A, (np.asarray(x) + np.asarray(y)) % A.q)
            if not np.array_equal(lhs.eps_hat, rhs.eps_hat):
                return False
    return True


def check_centralizing(A: FiniteModule, data: RhoPiData) -> bool:
    for x in data.rho_pairs:
        for y in data.pi_rho_pairs:
            if pair_compose(A, x, y).key() != pair_compose(A, y, x).key():
                return False
    return True


def check_pi_rho_trivial_on_h2(H: CohomologyGroup, data: RhoPiData) -> bool:
    mods = _mods(H)
    ident = np.eye(len(H.structure.exps), dtype=np.int64) % mods[None, :]
    for pair in data.pi_rho_pairs:
        if not np.array_equal(induced_h2_matrix(H, pair) % mods[None, :], ident):
            return False
    return True


def _mods(H: CohomologyGroup) -> np.ndarray:
    return np.array([H.spec.p**e for e in H.structure.exps], dtype=np.int64)


# ---------------------------------------------------------------------------
# the orbit correspondence between levels n and n + d


@dataclass
class GeneratorPair:
    """A generator of the pair group at level n with its partner at n + d."""

    kind: str  # "lattice" or "complement"
    at_n: CompatiblePair
    at_nd: CompatiblePair


@dataclass
class OrbitCorrespondence:
    level: int
    next_level: int
    equivariant: bool
    witness: dict | None
    orbits_n: OrbitPartition
    orbits_nd: OrbitPartition
    bijection: list[tuple[int, int]]  # orbit index at n -> orbit index at n+d

    @property
    def ok(self) -> bool:
        return (self.equivariant and len(self.bijection) == self.orbits_n.count
                and self.orbits_n.count == self.orbits_nd.count
                and sorted(self.orbits_n.sizes) == sorted(self.orbits_nd.sizes))


def generator_pairs(T: LatticeModule, chain: CentralChain, n: int, period: int,
                    Q_n: QuotientModule, Q_nd: QuotientModule,
                    data: RhoPiData) -> list[GeneratorPair]:
    """Matched generators of the pair groups at levels n and n + d.

    Lattice pairs reduce at both levels directly; complement generators map
    by eps -> p * eps through the fixed integer lifts.
    """
    p = T.p
    out = []
    for beta, eps in data.gamma_mod_c:
        out.append(GeneratorPair("lattice",
                                 reduce_pair(Q_n, beta, eps),
                                 reduce_pair(Q_nd, beta, eps)))
    A_nd = Q_nd.module
    for row, lift in zip(data.complement.E_flat, data.complement.lattice_lifts):
        at_n = one_plus(Q_n.module, row)
        C_nd = modules.endo_to_quotient(Q_nd, (p * lift) % T.q)
        eps_nd = canonical_hat(A_nd, np.eye(A_nd.rank, dtype=np.int64) + _hat_matrix(A_nd, C_nd))
        at_nd = CompatiblePair(np.arange(T.group.order, dtype=np.int64), eps_nd)
        if not (is_module_automorphism(A_nd, at_nd.eps_hat)
                and satisfies_compatibility(A_nd, at_nd)):
            raise PairError("shifted complement generator is not a compatible pair")
        out.append(GeneratorPair("complement", at_n, at_nd))
    return out


def orbit_correspondence(T: LatticeModule, chain: CentralChain, n: int,
                         period: int) -> OrbitCorrespondence:
    """Certified orbit bijection H^2(A_n)/pairs -> H^2(A_{n+d})/pairs.

    Checks the equivariance identity shift(tau.g) = shift(tau).partner(g) on
    every H^2 element and every matched generator, then matches the full
    orbit partitions through the shift.
    """
    nd = n + period
    Q_n = modules.quotient(T, chain, n)
    Q_nd = modules.quotient(T, chain, nd)
    data = rho_pi_data(T, chain, n, period, Q=Q_n)
    frame = cohomology.split_frame(T, chain, n, m=2)
    lev_n = cohomology.split_at_level(frame, T, chain, n, period, Q=Q_n)
    lev_nd = cohomology.split_at_level(frame, T, chain, nd, period, Q=Q_nd)
    H_n, H_nd = lev_n.H, lev_nd.H
    gens = generator_pairs(T, chain, n, period, Q_n, Q_nd, data)
    witness = None
    equivariant = True
    elements = [H_n.representative(c) for c in H_n.structure.all_coords()]
    for gp in gens:
        for tau in elements:
            moved = act_on_cochain(H_n, gp.at_n, tau)
            lhs = H_nd.coords(cohomology.id_oplus_mu(lev_n, lev_nd, moved))
            shifted = cohomology.id_oplus_mu(lev_n, lev_nd, tau)
            rhs = H_nd.coords(act_on_cochain(H_nd, gp.at_nd, shifted))
            if not np.array_equal(lhs, rhs):
                equivariant = False
                witness = {"kind": gp.kind,
                           "tau_coords": [int(x) for x in H_n.coords(tau)],
                           "lhs": [int(x) for x in lhs],
                           "rhs": [int(x) for x in rhs]}
                break
        if not equivariant:
            break
    pairs_n = compatible_pairs(Q_n.module)
    pairs_nd = compatible_pairs(Q_nd.module)
    orb_n = orbits_on_h2(H_n, pairs_n)
    orb_nd = orbits_on_h2(H_nd, pairs_nd)
    bijection = []
    if equivariant and orb_n.count == orb_nd.count:
        hit = set()
        for i, cl in enumerate(orb_n.classes):
            rep = H_n.representative(cl[0])
            img = H_nd.coords(cohomology.id_oplus_mu(lev_n, lev_nd, rep))
            j = orb_nd.orbit_of(img)
            if j in hit or orb_n.sizes[i] != orb_nd.sizes[j]:
                bijection = []
                break
            hit.add(j)
            bijection.append((i, j))
    return OrbitCorrespondence(n, nd, equivariant, witness, orb_n, orb_nd, bijection)
