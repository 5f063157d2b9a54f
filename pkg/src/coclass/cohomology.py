"""Group cohomology H^m (m <= 3) by exact normal forms of coboundary maps.

Normalized bar cochains for right modules: an m-cochain assigns a coefficient
vector to every m-tuple of nonidentity group elements, and

  (d f)(g_1, ..., g_{m+1}) = f(g_2, ..., g_{m+1})
      + sum_{i=1}^{m} (-1)^i f(g_1, ..., g_i g_{i+1}, ..., g_{m+1})
      + (-1)^{m+1} f(g_1, ..., g_m).g_{m+1},

with terms containing an identity argument dropped.  Cochains are flat row
vectors (one coefficient block per tuple) and d is a matrix acting on the
right, so cocycles are row kernels and coboundaries are row spans.

Two coefficient regimes share the machinery:
  - finite modules in hatted coordinates mod p^E (exact);
  - free lattices at working precision p^N, where cocycles are the saturated
    kernel and computed invariants must divide |G| (anything larger signals
    precision loss and raises).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg, modules
from .groups import GroupTable
from .modules import FiniteModule, LatticeModule, QuotientModule


class CohomologyError(ValueError):
    pass


@dataclass
class CoefficientSpace:
    """Uniform coefficient description for the cochain complex."""

    group: GroupTable
    p: int
    E: int  # arithmetic happens mod p^E
    rank: int
    act: np.ndarray  # (|G|, r, r) matrices on coefficient rows, mod p^E
    scales: np.ndarray  # hat scales; ones in lattice mode
    lattice: bool

    @property
    def q(self) -> int:
        return self.p**self.E


def finite_coefficients(A: FiniteModule) -> CoefficientSpace:
    return CoefficientSpace(A.group, A.p, A.E, A.rank, A.act % A.q, A.scales(), False)


def lattice_coefficients(T: LatticeModule, basis=None) -> CoefficientSpace:
    """Coefficients in a finite-index sublattice given by basis rows (default T).

    The action conjugated into the sublattice basis is only determined modulo
    p^{N - a}, where p^a is the largest elementary divisor of the basis, so
    the returned space works at that reduced precision.
    """
    p, N, q = T.p, T.ctx.N, T.q
    if basis is None:
        act = T.act % q
        d = T.rank
        E = N
    else:
        B = np.asarray(basis, dtype=np.int64) % q
        d = B.shape[0]
        sB = linalg.smith(B, p, N, want_left=False, want_right=False)
        a_max = max(sB.exps) if sB.exps else 0
        E = N - a_max
        gexp = _group_order_valuation(T.group, p)
        if E < gexp + 3:
            raise CohomologyError(
                "precision p^%d left after the basis change is too small" % E
            )
        qE = p**E
        mats = []
        for g in range(T.group.order):
            BM = (B @ T.act[g]) % q
            rows = []
            for i in range(d):
                x = linalg.solve_rows(B, BM[i], p, N)
                if x is None:
                    raise CohomologyError("sublattice is not invariant under the action")
                rows.append(x % qE)
            mats.append(np.vstack(rows))
        act = np.stack(mats)
    return CoefficientSpace(T.group, p, E, d, act, np.ones(d, dtype=np.int64), True)


def tuples_of(group: GroupTable, m: int) -> list[tuple[int, ...]]:
    nonid = [g for g in range(group.order) if g != group.identity]
    return list(itertools.product(nonid, repeat=m))


def coboundary_matrix(spec: CoefficientSpace, m: int) -> np.ndarray:
    """Matrix of d^m: C^m -> C^{m+1} acting on flat cochain rows."""
    G = spec.group
    r = spec.rank
    q = spec.q
    src = tuples_of(G, m)
    dst = tuples_of(G, m + 1)
    src_index = {t: i for i, t in enumerate(src)}
    D = np.zeros((len(src) * r, len(dst) * r), dtype=np.int64)
    ident = np.eye(r, dtype=np.int64)
    for ti, tau in enumerate(dst):
        c0, c1 = ti * r, (ti + 1) * r
        # leading term f(g_2, ..., g_{m+1})
        lead = tau[1:]
        i = src_index[lead]
        D[i * r : (i + 1) * r, c0:c1] += ident
        # merge terms
        for k in range(1, m + 1):
            u = int(G.mul[tau[k - 1], tau[k]])
            if u == G.identity:
                continue
            merged = tau[: k - 1] + (u,) + tau[k + 1 :]
            i = src_index[merged]
            sign = -1 if k % 2 else 1
            D[i * r : (i + 1) * r, c0:c1] += sign * ident
        # trailing term (-1)^{m+1} f(g_1, ..., g_m).g_{m+1}
        tail = tau[:m]
        i = src_index[tail]
        sign = -1 if (m + 1) % 2 else 1
        D[i * r : (i + 1) * r, c0:c1] += sign * spec.act[tau[m]]
    return D % q


def _legal_rows(spec: CoefficientSpace, m: int) -> np.ndarray:
    s = len(tuples_of(spec.group, m))
    return np.diag(np.tile(spec.scales, s)).astype(np.int64)


def cocycle_rows(spec: CoefficientSpace, m: int) -> tuple[np.ndarray, int]:
    """Generators of the cocycles together with the precision they hold at.

    For finite coefficients the arithmetic is exact and the precision is
    spec.E.  For a lattice the kernel of the coboundary map is read off a
    mod p^E computation, which only determines it to a reduced precision.
    """
    D = coboundary_matrix(spec, m)
    if spec.lattice:
        return linalg.lattice_kernel(D, spec.p, spec.E)
    K = linalg.row_kernel(D, spec.p, spec.E)
    sec = linalg.span_intersection(K, _legal_rows(spec, m), spec.p, spec.E)
    return linalg.howell(sec, spec.p, spec.E).rows, spec.E


def coboundary_rows(spec: CoefficientSpace, m: int) -> np.ndarray:
    if m == 0:
        s = len(tuples_of(spec.group, 0)) * spec.rank
        return np.zeros((0, s), dtype=np.int64)
    D = coboundary_matrix(spec, m - 1)
    if spec.lattice:
        return D % spec.q
    return (_legal_rows(spec, m - 1) @ D) % spec.q


@dataclass
class CohomologyGroup:
    spec: CoefficientSpace
    m: int
    cocycles: np.ndarray
    boundaries: np.ndarray
    structure: linalg.QuotientGroup
    E_eff: int

    def invariants(self) -> list[int]:
        return self.structure.invariants()

    @property
    def order(self) -> int:
        return self.structure.order

    def exponent(self) -> int:
        inv = self.invariants()
        return max(inv) if inv else 1

    def exponent_valuation(self) -> int:
        inv = self.invariants()
        if not inv:
            return 0
        e = 0
        x = max(inv)
        while x % self.spec.p == 0:
            x //= self.spec.p
            e += 1
        return e

    def coords(self, cocycle_row) -> np.ndarray:
        qe = self.spec.p**self.E_eff
        return self.structure.coords(np.asarray(cocycle_row) % qe)

    def representative(self, coords) -> np.ndarray:
        return self.structure.element(coords)

    def is_coboundary(self, cocycle_row) -> bool:
        return not np.any(self.coords(cocycle_row))

    def value(self, cocycle_row, tau: tuple[int, ...]) -> np.ndarray:
        idx = tuples_of(self.spec.group, self.m).index(tuple(tau))
        r = self.spec.rank
        return np.asarray(cocycle_row)[idx * r : (idx + 1) * r] % self.spec.q


def cohomology_group(spec: CoefficientSpace, m: int) -> CohomologyGroup:
    Z, Ee = cocycle_rows(spec, m)
    qe = spec.p**Ee
    B = coboundary_rows(spec, m) % qe
    structure = linalg.quotient_group(Z % qe, B, spec.p, Ee)
    H = CohomologyGroup(spec, m, Z, B, structure, Ee)
    if spec.lattice and m >= 1:
        gexp = _group_order_valuation(spec.group, spec.p)
        for e in structure.exps:
            if e > gexp:
                raise CohomologyError(
                    "lattice H^%d invariant p^%d exceeds the |G| bound p^%d; "
                    "raise the working precision" % (m, e, gexp)
                )
    return H


def _group_order_valuation(group: GroupTable, p: int) -> int:
    n = group.order
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def finite_cohomology(A: FiniteModule, m: int) -> CohomologyGroup:
    return cohomology_group(finite_coefficients(A), m)


def lattice_cohomology(T: LatticeModule, m: int, basis=None) -> CohomologyGroup:
    return cohomology_group(lattice_coefficients(T, basis), m)


# ---------------------------------------------------------------------------
# the split decomposition H^m(R, T/T_n) = Im(theta) + K with K = H^{m+1}(R, T_n)


def lattice_row_to_quotient(Q: QuotientModule, row, m: int) -> np.ndarray:
    """Reduce a T-valued cochain row to a hatted A_n-valued cochain row."""
    d = Q.lattice.rank
    row = np.asarray(row, dtype=np.int64)
    s = row.shape[0] // d
    out = []
    for t in range(s):
        out.append(Q.module.hat(Q.coords(row[t * d : (t + 1) * d])))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


@dataclass
class SplitFrame:
    """Level-independent data for splitting H^m(R, A_n), computed once per
    residue class of n modulo the chain period.

    theta_rows generate Z^m(R, T) at precision N.  K_lifts are T-valued
    cochains delta_i = (f / b_i) a_i from the Smith frame of the coboundary on
    the intermediate lattice D = T_n / f; their reductions mod T_n generate
    the complement K = H^{m+1}(R, T_n) inside Z^m(R, A_n).
    """

    m: int
    base_level: int
    f_exp: int  # v_p(exp H^{m+1}(R, T_n))
    theta_rows: np.ndarray
    theta_precision: int  # theta_rows are determined mod p^theta_precision
    K_lifts: np.ndarray
    K_divisor_exps: list[int]  # v_p(b_i), each in (0, f_exp]
    h_next_order_exp: int  # v_p |H^{m+1}(R, T_n)|


def split_frame(T: LatticeModule, chain: modules.CentralChain, n: int, m: int = 2) -> SplitFrame:
    p, N, q = T.p, T.ctx.N, T.q
    d = T.rank
    Bn = chain.bases[n]
    Hnext = lattice_cohomology(T, m + 1, basis=Bn)
    vf = Hnext.exponent_valuation()
    f = p**vf
    if np.any(Bn % f):
        raise CohomologyError(
            "T_%d is not contained in %d.T; the level is too small for the split" % (n, f)
        )
    theta, theta_prec = cocycle_rows(lattice_coefficients(T), m)
    if vf == 0:
        return SplitFrame(m, n, 0, theta, theta_prec,
                          np.zeros((0, theta.shape[1])).astype(np.int64),
                          [], Hnext.structure.order_exponent)
    BD = (Bn // f) % q
    specD = lattice_coefficients(T, basis=BD)
    ED = specD.E
    Dm = coboundary_matrix(specD, m)
    s = linalg.smith(Dm, p, ED, want_left=True, want_right=False)
    nrows = Dm.shape[0]
    exps = list(s.exps) + [ED] * (nrows - len(s.exps))
    lifts = []
    divisors = []
    for i, a in enumerate(exps):
        if 0 < a <= vf:
            delta_D = (p ** (vf - a) * s.U[i]) % q  # (f/b_i) a_i in D coordinates
            # convert per slot from D coordinates to ambient T coordinates
            slots = delta_D.reshape(-1, d)
            amb = (slots @ BD) % q
            lifts.append(amb.reshape(-1))
            divisors.append(a)
        elif vf < a < ED:
            raise CohomologyError(
                "coboundary divisor p^%d exceeds exp H^%d = p^%d; precision problem" % (a, m + 1, vf)
            )
    lifts_arr = np.vstack(lifts) if lifts else np.zeros((0, theta.shape[1]), dtype=np.int64)
    frame = SplitFrame(m, n, vf, theta, theta_prec, lifts_arr, divisors,
                       Hnext.structure.order_exponent)
    if sum(divisors) != frame.h_next_order_exp:
        raise CohomologyError(
            "complement order p^%d disagrees with |H^%d(T_n)| = p^%d"
            % (sum(divisors), m + 1, frame.h_next_order_exp)
        )
    return frame


@dataclass
class SplitLevel:
    """The split of Z^m(R, A_n) = Im(theta) + K at a concrete level n."""

    frame: SplitFrame
    Q: QuotientModule
    level: int
    scale_exp: int  # (n - base_level) / period
    theta_hat: np.ndarray
    K_hat: np.ndarray
    H: CohomologyGroup
    _solver: linalg.Howell

    def decompose(self, tau_hat) -> tuple[np.ndarray, np.ndarray]:
        """tau = theta(gamma) + sum c_i kappa_i exactly on cocycles.

        Returns (gamma, c) with gamma a T-valued m-cocycle row and c the
        K-lift coefficients.
        """
        coeffs: list = []
        res = self._solver.reduce(np.asarray(tau_hat) % self.Q.module.q, coeffs_out=coeffs)
        if np.any(res):
            raise CohomologyError("cocycle does not split; it may not be a cocycle")
        q = self.frame.theta_rows.shape[1]
        tr = self._solver.transform
        x = np.zeros(tr.shape[1], dtype=np.int64)
        for cf, trow in zip(coeffs, tr):
            x = (x + cf * trow) % self.Q.lattice.q
        nt = self.frame.theta_rows.shape[0]
        gamma = (x[:nt] @ self.frame.theta_rows) % self.Q.lattice.q if nt else np.zeros(q, dtype=np.int64)
        return gamma, x[nt:]

    def k_lift(self, c) -> np.ndarray:
        """T-valued cochain lift of the K-part with the given coefficients."""
        q = self.Q.lattice.q
        scale = self.Q.lattice.p**self.scale_exp
        out = np.zeros(self.frame.theta_rows.shape[1], dtype=np.int64)
        for ci, lift in zip(np.asarray(c, dtype=np.int64), self.frame.K_lifts):
            out = (out + int(ci) * lift) % q
        return (scale * out) % q


def split_at_level(frame: SplitFrame, T: LatticeModule, chain: modules.CentralChain,
                   n: int, period: int, Q: QuotientModule | None = None) -> SplitLevel:
    if Q is None:
        Q = modules.quotient(T, chain, n)
    if (n - frame.base_level) % period or n < frame.base_level:
        raise CohomologyError("frame at level %d cannot serve level %d" % (frame.base_level, n))
    k = (n - frame.base_level) // period
    if frame.theta_precision < Q.module.E:
        raise CohomologyError("cocycle precision p^%d below module precision p^%d"
                              % (frame.theta_precision, Q.module.E))
    scale = T.p**k
    q = T.q
    theta_hat = np.vstack([
        lattice_row_to_quotient(Q, row, frame.m) for row in frame.theta_rows
    ]) if frame.theta_rows.shape[0] else np.zeros((0, 0), dtype=np.int64)
    K_hat = np.vstack([
        lattice_row_to_quotient(Q, (scale * row) % q, frame.m) for row in frame.K_lifts
    ]) if frame.K_lifts.shape[0] else np.zeros((0, theta_hat.shape[1] if theta_hat.size else 0), dtype=np.int64)
    H = finite_cohomology(Q.module, frame.m)
    stacked = np.vstack([x for x in (theta_hat, K_hat) if x.shape[0]]) if (
        theta_hat.shape[0] or K_hat.shape[0]) else np.zeros((0, H.cocycles.shape[1]), dtype=np.int64)
    solver = linalg.howell(stacked, T.p, Q.module.E, track=True)
    # the two parts must span the cocycles exactly and independently
    if not linalg.span_equal(stacked, H.cocycles, T.p, Q.module.E):
        raise CohomologyError("theta image plus complement does not span the cocycles")
    ord_theta = _span_order_exp(theta_hat, T.p, Q.module.E)
    ord_K = _span_order_exp(K_hat, T.p, Q.module.E)
    ord_Z = _span_order_exp(H.cocycles, T.p, Q.module.E)
    if ord_theta + ord_K != ord_Z:
        raise CohomologyError("theta image and complement are not independent")
    return SplitLevel(frame, Q, n, k, theta_hat, K_hat, H, solver)


def _span_order_exp(rows, p: int, E: int) -> int:
    rows = np.asarray(rows)
    if rows.shape[0] == 0:
        return 0
    H = linalg.howell(rows, p, E)
    return E * rows.shape[1] - H.index_exponent()


def restrict_level(Q_from: QuotientModule, Q_to: QuotientModule, m: int, row) -> np.ndarray:
    """Push a hatted A_n-valued cochain row down to a shallower level.

    Slotwise: take an ambient representative of each value and reduce it
    modulo the larger relation lattice (Q_to.level <= Q_from.level).
    """
    if Q_to.level > Q_from.level:
        raise CohomologyError("target level must not exceed the source level")
    A = Q_from.module
    r = A.rank
    row = np.asarray(row, dtype=np.int64) % A.q
    reps = Q_from.representatives()
    out = []
    for t in range(row.shape[0] // r):
        amb = (A.unhat(row[t * r : (t + 1) * r]) @ reps) % Q_from.lattice.q
        out.append(Q_to.hat_of_ambient(amb))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def id_oplus_mu(src: SplitLevel, dst: SplitLevel, tau_hat) -> np.ndarray:
    """The shift H^m(R, A_n) -> H^m(R, A_{n+d}) on cocycle representatives.

    Decomposes tau = theta(gamma) + kappa and returns the reduction of
    gamma + p^k delta at the destination level, where delta is the T-valued
    lift of the complement part and k raises by one per period step.
    """
    if dst.frame is not src.frame:
        raise CohomologyError("source and destination must share a split frame")
    gamma, c = src.decompose(tau_hat)
    q = src.Q.lattice.q
    delta = src.k_lift(c)  # already scaled to the source level
    step = dst.scale_exp - src.scale_exp
    if step <= 0:
        raise CohomologyError("destination level must be deeper than the source")
    lifted = (gamma + (src.Q.lattice.p**step) * delta) % q
    return lattice_row_to_quotient(dst.Q, lifted, src.frame.m)


def id_oplus_mu_inverse(src: SplitLevel, dst: SplitLevel, tau_hat) -> np.ndarray:
    """Preimage under the shift, on cocycle representatives (dst = deeper level).

    Both levels share the complement frame, so the coefficients of the
    complement part transfer directly.
    """
    if dst.frame is not src.frame:
        raise CohomologyError("source and destination must share a split frame")
    gamma, c = dst.decompose(tau_hat)
    lifted = (gamma + src.k_lift(c)) % src.Q.lattice.q
    return lattice_row_to_quotient(src.Q, lifted, src.frame.m)
