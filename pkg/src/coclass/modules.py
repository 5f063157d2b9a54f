"""Lattices with group action at finite p-adic precision, and their quotients.

A rank-d lattice with a right action of a finite group R is modelled by d x d
action matrices over Z/p^N.  The descending chain T = T_0 > T_1 > ... with
T_{i+1} = <t.g - t> is computed by exact Howell reduction; uniserial chains
drop index p at every step and satisfy T_{i+d} = p T_i.

Finite coefficient modules (the quotients A_n = T/T_n and friends) are
direct sums of cyclic p-groups Z/p^{e_i}.  They are embedded into a uniform
ambient (Z/p^E)^r by scaling coordinate i with p^{E-e_i} ("hatted"
coordinates), which makes every subgroup computation a plain exact
linear-algebra question mod p^E.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import groups, linalg
from .groups import GroupTable


class ModuleError(ValueError):
    pass


@dataclass(frozen=True)
class PrecisionContext:
    p: int
    N: int

    @property
    def q(self) -> int:
        return self.p**self.N


def precision_for(p: int, n_max: int, group_order: int, slack: int = 2) -> PrecisionContext:
    """Working precision N = n_max + 3 v_p(|G|) + slack."""
    v = 0
    g = group_order
    while g % p == 0:
        g //= p
        v += 1
    return PrecisionContext(p, n_max + 3 * v + slack)


# ---------------------------------------------------------------------------
# lattices


@dataclass
class LatticeModule:
    group: GroupTable
    ctx: PrecisionContext
    rank: int
    act: np.ndarray  # (|G|, d, d), right action v -> v @ act[g], act[gh] = act[g] @ act[h]

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def q(self) -> int:
        return self.ctx.q

    def apply(self, v, g: int):
        return (np.asarray(v) @ self.act[g]) % self.q


def lattice_module(group: GroupTable, gen_action: dict, ctx: PrecisionContext) -> LatticeModule:
    """Extend generator action matrices to the whole table and validate.

    gen_action maps generator element indices to d x d integer matrices; the
    extension must be single valued and multiplicative on the full table.
    """
    q = ctx.q
    items = list(gen_action.items())
    if not items:
        raise ModuleError("need at least one generator action matrix")
    d = np.asarray(items[0][1]).shape[0]
    n = group.order
    act = np.full((n, d, d), -1, dtype=np.int64)
    act[group.identity] = np.eye(d, dtype=np.int64)
    assigned = {group.identity}
    frontier = [group.identity]
    gen_mats = {g: np.asarray(m, dtype=np.int64) % q for g, m in items}
    while frontier:
        nxt = []
        for x in frontier:
            for g, Mg in gen_mats.items():
                y = int(group.mul[x, g])
                My = (act[x] @ Mg) % q
                if y in assigned:
                    if not np.array_equal(act[y], My):
                        raise ModuleError("action matrices violate the group relations")
                else:
                    act[y] = My
                    assigned.add(y)
                    nxt.append(y)
        frontier = nxt
    if len(assigned) != n:
        raise ModuleError("generators with action matrices do not generate the group")
    # full multiplicativity check
    for g in range(n):
        for h in range(n):
            if not np.array_equal((act[g] @ act[h]) % q, act[int(group.mul[g, h])]):
                raise ModuleError("extended action is not multiplicative")
    return LatticeModule(group, ctx, d, act)


@dataclass
class CentralChain:
    lattice: LatticeModule
    bases: list[np.ndarray]  # bases[i] rows span T_i mod p^N
    index_exponents: list[int]  # v_p([T : T_i]) for each term
    stopped: bool  # True when the series became stationary before reaching depth

    @property
    def depth(self) -> int:
        return len(self.bases) - 1


def g_central_series(T: LatticeModule, depth: int) -> CentralChain:
    """T_0 = T, T_{i+1} = span{ t.g - t : t in T_i, g in the group }."""
    p, N, q = T.p, T.ctx.N, T.q
    d = T.rank
    ident = np.eye(d, dtype=np.int64)
    diffs = [(T.act[g] - ident) % q for g in range(T.group.order)]
    bases = [ident.copy()]
    idx = [0]
    stopped = False
    for _ in range(depth):
        B = bases[-1]
        rows = np.vstack([(B @ D) % q for D in diffs])
        H = linalg.howell(rows, p, N)
        if H.rows.shape[0] < d:
            stopped = True
            break
        e = H.index_exponent()
        if e + 2 > N:
            raise ModuleError("precision exhausted at chain index p^%d (N = %d)" % (e, N))
        if e == idx[-1]:
            stopped = True
            break
        bases.append(H.rows.copy())
        idx.append(e)
    return CentralChain(T, bases, idx, stopped)


def is_uniserial(chain: CentralChain, depth: int) -> tuple[bool, list[int]]:
    """True iff [T_i : T_{i+1}] = p for the first `depth` steps; returns the step indices."""
    steps = [b - a for a, b in zip(chain.index_exponents, chain.index_exponents[1:])]
    ok = chain.depth >= depth and all(s == 1 for s in steps[:depth])
    return ok, steps


def chain_period(T: LatticeModule, chain: CentralChain) -> int | None:
    """Least d with T_{i+d} = p T_i for all applicable i, or None."""
    p = T.p
    for dd in range(1, chain.depth + 1):
        ok = True
        for i in range(0, chain.depth - dd + 1):
            if not linalg.span_equal((p * chain.bases[i]) % T.q, chain.bases[i + dd], p, T.ctx.N):
                ok = False
                break
        if ok and chain.depth >= dd:
            return dd
    return None


@dataclass
class MuShift:
    """The multiplication-by-p isomorphism T_n -> T_{n+d} in chain bases."""

    n: int
    d: int
    rep: np.ndarray  # rep @ basis(T_{n+d}) = p * basis(T_n)


def mu_shift(T: LatticeModule, chain: CentralChain, n: int, d: int) -> MuShift:
    p, N, q = T.p, T.ctx.N, T.q
    Bn = chain.bases[n]
    Bnd = chain.bases[n + d]
    target = (p * Bn) % q
    if not linalg.span_equal(target, Bnd, p, N):
        raise ModuleError("p T_%d does not equal T_%d; chain is not %d-periodic here" % (n, n + d, d))
    rows = []
    for i in range(target.shape[0]):
        x = linalg.solve_rows(Bnd, target[i], p, N)
        if x is None:
            raise ModuleError("failed to express p T_%d in the T_%d basis" % (n, n + d))
        rows.append(x)
    return MuShift(n, d, np.vstack(rows) % q)


def distinguished_generator(T: LatticeModule, chain: CentralChain) -> np.ndarray:
    """A vector t0 with <t0, T_1> = T, preferring ambient basis vectors."""
    if chain.depth < 1:
        raise ModuleError("need T_1 to choose a distinguished generator")
    p, N = T.p, T.ctx.N
    B1 = chain.bases[1]
    d = T.rank
    candidates = [np.eye(d, dtype=np.int64)[i] for i in range(d)]
    # fall back to short integer combinations if no basis vector works
    for c in range(2, p + 2):
        for i in range(d - 1):
            v = np.zeros(d, dtype=np.int64)
            v[i] = 1
            v[i + 1] = c - 1
            candidates.append(v)
    for t0 in candidates:
        H = linalg.howell(np.vstack([t0[None, :], B1]), p, N)
        if H.index_exponent() == 0:
            return t0
    raise ModuleError("no distinguished generator found")


# ---------------------------------------------------------------------------
# finite coefficient modules in hatted coordinates


@dataclass
class FiniteModule:
    """Direct sum of Z/p^{e_i} with a right group action, in hatted coordinates.

    Elements live in (Z/p^E)^r as multiples of scale_i = p^{E-e_i} on
    coordinate i; act[g] are the hatted action matrices.
    """

    group: GroupTable
    p: int
    exps: list[int]  # e_i > 0
    E: int
    act: np.ndarray  # (|G|, r, r) hatted matrices mod p^E
    plain: np.ndarray  # (|G|, r, r) plain coordinate matrices, entry ij mod p^{e_j}

    @property
    def rank(self) -> int:
        return len(self.exps)

    @property
    def q(self) -> int:
        return self.p**self.E

    @property
    def order_exponent(self) -> int:
        return int(sum(self.exps))

    @property
    def order(self) -> int:
        return self.p**self.order_exponent

    def scales(self) -> np.ndarray:
        return np.array([self.p ** (self.E - e) for e in self.exps], dtype=np.int64)

    def member_rows(self) -> np.ndarray:
        """Generator rows of the module inside the hatted ambient space."""
        return np.diag(self.scales()).astype(np.int64)

    def hat(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64)
        return (c * self.scales()) % self.q

    def unhat(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64) % self.q
        s = self.scales()
        if np.any(x % s):
            raise ModuleError("vector is not in the hatted module")
        mods = np.array([self.p**e for e in self.exps], dtype=np.int64)
        return (x // s) % mods

    def apply(self, x, g: int) -> np.ndarray:
        return (np.asarray(x) @ self.act[g]) % self.q

    def all_elements(self):
        for c in groups.all_coord_rows([self.p**e for e in self.exps]):
            yield self.hat(c)

    def invariants(self) -> list[int]:
        return [self.p**e for e in sorted(self.exps, reverse=True)]

    def twisted(self, beta: np.ndarray) -> "FiniteModule":
        """Same underlying group with t * g := t.(g^beta)."""
        b = np.asarray(beta, dtype=np.int64)
        return FiniteModule(self.group, self.p, list(self.exps), self.E,
                            self.act[b], self.plain[b])

    def coord_moduli(self) -> np.ndarray:
        return np.array([self.p**e for e in self.exps], dtype=np.int64)


def finite_module_from_plain(group: GroupTable, p: int, exps: list[int], plain_act) -> FiniteModule:
    """Build from action matrices on plain coordinates (entry ij mod p^{e_j})."""
    exps = [int(e) for e in exps]
    E = max(exps) if exps else 1
    q = p**E
    r = len(exps)
    act = np.zeros((group.order, r, r), dtype=np.int64)
    plain = np.zeros((group.order, r, r), dtype=np.int64)
    mods = np.array([p**e for e in exps], dtype=np.int64).reshape(1, r)
    for g in range(group.order):
        A = np.asarray(plain_act[g], dtype=np.int64)
        plain[g] = A % mods
        M = np.zeros((r, r), dtype=np.int64)
        for i in range(r):
            for j in range(r):
                num = int(A[i, j]) * p ** (E - exps[j])
                den = p ** (E - exps[i])
                if num % den:
                    raise ModuleError("action matrix is not a well defined module map")
                M[i, j] = (num // den) % q
        act[g] = M
    fm = FiniteModule(group, p, exps, E, act, plain)
    _validate_finite_action(fm)
    return fm


def _validate_finite_action(fm: FiniteModule):
    q = fm.q
    for g in range(fm.group.order):
        for h in range(fm.group.order):
            gh = int(fm.group.mul[g, h])
            if not np.array_equal((fm.act[g] @ fm.act[h]) % q, fm.act[gh] % q):
                raise ModuleError("finite module action is not multiplicative")
    # hatted lattice must be invariant
    mem = fm.member_rows()
    for g in range(fm.group.order):
        img = (mem @ fm.act[g]) % q
        for i in range(img.shape[0]):
            if np.any(img[i] % fm.scales()):
                raise ModuleError("action does not preserve the module")


@dataclass
class QuotientModule:
    """A_n = T / T_n with coordinates from the Smith form of the T_n basis."""

    lattice: LatticeModule
    level: int
    relation_basis: np.ndarray
    module: FiniteModule
    _V: np.ndarray  # ambient -> SNF coordinates
    _Vinv: np.ndarray
    _kept: list[int]  # SNF coordinates with nontrivial modulus

    def coords(self, v) -> np.ndarray:
        """Plain coordinates of v + T_n."""
        q = self.lattice.q
        z = (np.asarray(v, dtype=np.int64) @ self._V) % q
        p = self.lattice.p
        return np.array([int(z[i]) % p**e for i, e in zip(self._kept, self.module.exps)],
                        dtype=np.int64)

    def reduce(self, v) -> np.ndarray:
        """Canonical ambient representative of v + T_n."""
        return (self.coords(v) @ self.representatives()) % self.lattice.q

    def representatives(self) -> np.ndarray:
        """Ambient rows representing the coordinate generators."""
        rows = [self._Vinv[i] for i in self._kept]
        return np.vstack(rows) % self.lattice.q if rows else np.zeros((0, self.lattice.rank), dtype=np.int64)

    def hat_of_ambient(self, v) -> np.ndarray:
        return self.module.hat(self.coords(v))

    def invariants(self) -> list[int]:
        return self.module.invariants()

    @property
    def order(self) -> int:
        return self.module.order


def quotient(T: LatticeModule, chain: CentralChain, n: int) -> QuotientModule:
    if n > chain.depth:
        raise ModuleError("chain only computed to depth %d < %d" % (chain.depth, n))
    p, N, q = T.p, T.ctx.N, T.q
    d = T.rank
    if n == 0:
        B = np.eye(d, dtype=np.int64)
    else:
        B = chain.bases[n]
    s = linalg.smith(B, p, N, want_left=False, want_right=True)
    V = s.V
    Vinv = linalg.invert(V, p, N)
    exps = list(s.exps)
    kept = [i for i, e in enumerate(exps) if e > 0]
    kexps = [min(exps[i], N) for i in kept]
    # induced plain action on the kept coordinates
    plain = []
    for g in range(T.group.order):
        M = (Vinv @ T.act[g] @ V) % q
        plain.append(M[np.ix_(kept, kept)])
    fm = finite_module_from_plain(T.group, p, kexps, plain)
    return QuotientModule(T, n, B.copy(), fm, V, Vinv, kept)


# ---------------------------------------------------------------------------
# fixed points and hom spaces


def fixed_points(W: FiniteModule, subgroup_elems) -> np.ndarray:
    """Hatted generator rows of { w : w.h = w for all h in the subgroup }."""
    q = W.q
    r = W.rank
    if r == 0:
        return np.zeros((0, 0), dtype=np.int64)
    ident = np.eye(r, dtype=np.int64)
    blocks = [((W.act[h] - ident) % q) for h in subgroup_elems if h != W.group.identity]
    if not blocks:
        return W.member_rows()
    F = np.hstack(blocks)
    K = linalg.row_kernel(F, W.p, W.E)
    sec = linalg.span_intersection(K, W.member_rows(), W.p, W.E)
    return linalg.howell(sec, W.p, W.E).rows


@dataclass
class HomSpace:
    """hom_R(V, W) as a finite abelian group of plain coordinate matrices."""

    domain: FiniteModule
    codomain: FiniteModule
    structure: linalg.QuotientGroup  # over flattened hatted hom coordinates
    v0_hat: np.ndarray | None  # distinguished domain generator used by the orbit route

    def basis_matrices(self) -> list[np.ndarray]:
        return [self.flat_to_matrix(g) for g in self.structure.gens]

    def flat_to_matrix(self, flat_hat) -> np.ndarray:
        """Plain coordinate matrix (entry ij mod p^{f_j}) from a hatted flat row."""
        W = self.codomain
        r, rw = self.domain.rank, W.rank
        X = np.asarray(flat_hat, dtype=np.int64).reshape(r, rw) % W.q
        s = W.scales()
        mods = np.array([W.p**e for e in W.exps], dtype=np.int64)
        if np.any(X % s[None, :]):
            raise ModuleError("flat row is not a hom representative")
        return (X // s[None, :]) % mods[None, :]

    def matrix_to_flat(self, C) -> np.ndarray:
        W = self.codomain
        C = np.asarray(C, dtype=np.int64)
        s = W.scales()
        return ((C % W.q) * s[None, :]).reshape(-1) % W.q

    def invariants(self) -> list[int]:
        return self.structure.invariants()

    @property
    def order(self) -> int:
        return self.structure.order

    def all_matrices(self):
        for c in self.structure.all_coords():
            yield self.flat_to_matrix(self.structure.element(c))

    def apply(self, C, coords) -> np.ndarray:
        """Image of a plain domain coordinate vector under the hom matrix C."""
        W = self.codomain
        mods = np.array([W.p**e for e in W.exps], dtype=np.int64)
        return (np.asarray(coords, dtype=np.int64) @ np.asarray(C, dtype=np.int64)) % mods


def solve_homogeneous(F, unknown_exps: list[int], target_exps: list[int], p: int) -> np.ndarray:
    """Generators of { c in sum Z/p^{m_u} : (c @ F) column t = 0 mod p^{f_t} }.

    F has one row per unknown and one column per condition.  The result is
    returned as hatted rows mod p^{E} with E = max(unknown_exps), coordinate u
    scaled by p^{E - m_u}.
    """
    u = len(unknown_exps)
    Eu = max(unknown_exps) if unknown_exps else 1
    qu = p**Eu
    if u == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if len(target_exps) == 0:
        K = np.eye(u, dtype=np.int64)
    else:
        Es = max(target_exps)
        qs = p**Es
        F = np.asarray(F, dtype=np.int64)
        scale = np.array([p ** (Es - f) for f in target_exps], dtype=np.int64)
        Fs = (F % qs * scale[None, :]) % qs
        K = linalg.row_kernel(Fs, p, Es)
    # reduce unknowns to their own moduli and pass to hat coordinates
    mods = np.array([p**m for m in unknown_exps], dtype=np.int64)
    hat_scale = np.array([p ** (Eu - m) for m in unknown_exps], dtype=np.int64)
    rows = ((K % mods[None, :]) * hat_scale[None, :]) % qu
    return linalg.howell(rows, p, Eu).rows


def hom_space_flat(V: FiniteModule, W: FiniteModule, beta=None) -> np.ndarray:
    """Hatted flat generator rows of hom_R(V, W^(beta)), by direct linear solve.

    A hom is a plain coordinate matrix C with entry (i, j) mod p^{f_j}; it is
    flattened row major and hatted at precision E_W.
    """
    p = V.p
    r, rw = V.rank, W.rank
    u = r * rw
    if u == 0:
        return np.zeros((0, u), dtype=np.int64)
    Wplain = W.plain if beta is None else W.plain[np.asarray(beta, dtype=np.int64)]
    gens = V.group.generators or [g for g in range(V.group.order) if g != V.group.identity]
    cols = []
    target_exps: list[int] = []
    for g in gens:
        A = V.plain[g]
        Bm = Wplain[g]
        # (A @ C - C @ Bm)[a, b] = 0 mod p^{f_b}: linear in the entries of C
        for a in range(r):
            for b in range(rw):
                col = np.zeros(u, dtype=np.int64)
                for i in range(r):
                    col[i * rw + b] += int(A[a, i])
                for j in range(rw):
                    col[a * rw + j] -= int(Bm[j, b])
                cols.append(col)
                target_exps.append(W.exps[b])
    # well-definedness: p^{e_a} C[a, b] = 0 mod p^{f_b}
    for a in range(r):
        for b in range(rw):
            col = np.zeros(u, dtype=np.int64)
            col[a * rw + b] = p ** V.exps[a]
            cols.append(col)
            target_exps.append(W.exps[b])
    F = np.stack(cols, axis=1)
    unknown_exps = [W.exps[j] for _ in range(r) for j in range(rw)]
    return solve_homogeneous(F, unknown_exps, target_exps, p)


def hom_space_via_orbit(V: FiniteModule, W: FiniteModule, beta=None, v0_hat=None) -> np.ndarray:
    """Hatted flat hom generators via the distinguished-generator orbit route.

    Requires v0 to generate V as a module: the stabilizer of v0 is computed,
    each fixed point of the stabilizer in W^(beta) lifts to the unique hom
    with v0 -> w, and the lifts of the fixed-submodule generators generate
    the hom space.
    """
    if v0_hat is None:
        raise ModuleError("orbit route needs a distinguished generator")
    p = V.p
    G = V.group
    v0_hat = np.asarray(v0_hat, dtype=np.int64) % V.q
    orbit = np.vstack([V.apply(v0_hat, g) for g in range(G.order)])
    stab = [g for g in range(G.order) if np.array_equal(orbit[g], v0_hat)]
    Wt = W if beta is None else W.twisted(beta)
    fixed = fixed_points(Wt, stab)
    # orbit must span V
    span = linalg.howell(orbit, p, V.E)
    if not linalg.span_equal(span.rows, V.member_rows(), p, V.E):
        raise ModuleError("distinguished generator does not generate the module")
    rows = []
    for w in fixed:
        img_rows = []
        for i in range(V.rank):
            ei_hat = V.hat(np.eye(V.rank, dtype=np.int64)[i])
            x = linalg.solve_rows(orbit, ei_hat, p, V.E)
            if x is None:
                raise ModuleError("failed to express a coordinate generator in the orbit")
            img = np.zeros(W.rank, dtype=np.int64)
            for g in range(G.order):
                img = (img + int(x[g]) * Wt.apply(w, g)) % W.q
            img_rows.append(img)
        rows.append(np.concatenate(img_rows) % W.q)
    if not rows:
        return np.zeros((0, V.rank * W.rank), dtype=np.int64)
    return linalg.howell(np.vstack(rows), p, W.E).rows


def hom_space(V: FiniteModule, W: FiniteModule, beta=None, v0_hat=None,
              cross_check: bool = True) -> HomSpace:
    """hom_R(V, W^(beta)) with the orbit route cross-checked when v0 is given."""
    flat = hom_space_flat(V, W, beta)
    if v0_hat is not None and cross_check:
        flat2 = hom_space_via_orbit(V, W, beta, v0_hat)
        if not linalg.span_equal(flat, flat2, V.p, W.E):
            raise ModuleError("hom space routes disagree")
    structure = linalg.quotient_group(flat, np.zeros((0, flat.shape[1]), dtype=np.int64),
                                      V.p, W.E)
    return HomSpace(V, W, structure, v0_hat)


# ---------------------------------------------------------------------------
# endomorphisms of the lattice itself


def lattice_hom_space(T: LatticeModule, beta=None) -> list[np.ndarray]:
    """Basis matrices of hom_R(T, T^(beta)) as a free module, at precision N.

    Solutions of act[g] X = X act[beta g] for all generators; the saturated
    kernel discards precision artifacts, so the row count is the free rank.
    """
    p, N, q = T.p, T.ctx.N, T.q
    d = T.rank
    u = d * d
    gens = T.group.generators or [g for g in range(T.group.order) if g != T.group.identity]
    bperm = np.arange(T.group.order) if beta is None else np.asarray(beta, dtype=np.int64)
    cols = []
    for g in gens:
        A = T.act[g]
        Bm = T.act[int(bperm[g])]
        for a in range(d):
            for b in range(d):
                col = np.zeros(u, dtype=np.int64)
                for i in range(d):
                    col[i * d + b] += int(A[a, i])
                for j in range(d):
                    col[a * d + j] -= int(Bm[j, b])
                cols.append(col % q)
    F = np.stack(cols, axis=1)
    K, Ke = linalg.lattice_kernel(F, p, N)
    return [K[i].reshape(d, d) % (p**Ke) for i in range(K.shape[0])]


def endo_to_quotient(Q: QuotientModule, Phi) -> np.ndarray:
    """Plain coordinate matrix of a lattice endomorphism acting on A_n."""
    q = Q.lattice.q
    M = (Q._Vinv @ (np.asarray(Phi, dtype=np.int64) % q) @ Q._V) % q
    M = M[np.ix_(Q._kept, Q._kept)]
    mods = Q.module.coord_moduli()
    return M % mods[None, :]
