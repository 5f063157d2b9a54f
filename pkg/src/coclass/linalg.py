"""Exact linear algebra over Z/p^M.

Everything downstream (lattice chains, cochain complexes, orbit machinery)
reduces to Smith/Howell normal forms over the local ring Z/p^M.  Row
convention throughout: a linear map is a matrix F acting on row vectors,
f(x) = x @ F, and subgroups of (Z/p^M)^n are given by matrices whose rows
generate them.

Matrices are numpy int64 arrays when p^M fits comfortably (products must not
overflow), with a python-int (object dtype) fallback for larger moduli.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INT64_SAFE_MODULUS = 1 << 31

_obj_gcd = np.frompyfunc(math.gcd, 2, 1)


def modulus(p: int, M: int) -> int:
    return p**M


def as_matrix(rows, q: int):
    """Coerce to a 2-D array with dtype suited to modulus q."""
    dtype = np.int64 if q <= INT64_SAFE_MODULUS else object
    a = np.array(rows, dtype=dtype)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    return a % q


def zeros(shape, q: int):
    dtype = np.int64 if q <= INT64_SAFE_MODULUS else object
    z = np.zeros(shape, dtype=dtype)
    return z


def eye(n: int, q: int):
    dtype = np.int64 if q <= INT64_SAFE_MODULUS else object
    return np.eye(n, dtype=np.int64).astype(dtype)


def matmul(a, b, q: int):
    a = as_matrix(a, q)
    b = as_matrix(b, q)
    return (a @ b) % q


def _gcd_with(a, q: int):
    if a.dtype == object:
        return _obj_gcd(a, q)
    return np.gcd(a, q)


def _reduce_inplace(a, q: int, p: int):
    """a %= q, using the cheap bitwise form when the modulus is a 2-power."""
    if p == 2 and a.dtype == np.int64:
        a &= q - 1
    else:
        a %= q


def _nonzero_mod(a, pv: int, p: int):
    """Boolean mask of entries not divisible by pv."""
    if p == 2 and a.dtype == np.int64:
        return (a & (pv - 1)) != 0
    return (a % pv) != 0


def valuation(x: int, p: int, cap: int) -> int:
    """p-adic valuation of x, with v(0) reported as cap."""
    x = int(x)
    if x % (p**cap) == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass
class Smith:
    """U @ F @ V = diag(p^exps) over Z/p^M (U, V invertible mod p^M)."""

    p: int
    M: int
    shape: tuple[int, int]
    exps: list[int]  # length min(shape), nondecreasing; M encodes a zero diagonal entry
    U: np.ndarray | None
    V: np.ndarray | None

    @property
    def q(self) -> int:
        return self.p**self.M


def smith(F, p: int, M: int, *, want_left: bool = True, want_right: bool = False) -> Smith:
    """Smith normal form over Z/p^M by minimal-valuation pivoting.

    Over the local ring the diagonal comes out as p-powers in nondecreasing
    valuation order without any extra gcd passes.
    """
    q = p**M
    A = as_matrix(F, q).copy()
    r, c = A.shape
    U = eye(r, q) if want_left else None
    V = eye(c, q) if want_right else None
    exps: list[int] = []
    n = min(r, c)
    # Divisor valuations are nondecreasing over the local ring, so the search
    # for a minimal-valuation pivot can start where the previous one left off
    # and use a cheap divisibility mask instead of gcd passes.
    vcur = 0
    for k in range(n):
        if min(r - k, c - k) <= 0:
            break
        # fast path: a valuation-vcur entry in the current column, if any
        pv = p ** (vcur + 1)
        colmask = _nonzero_mod(A[k:, k], pv, p)
        if colmask.any():
            ii, jj = int(np.argmax(colmask)), 0
        else:
            sub = A[k:, k:]
            mask = None
            while vcur < M:
                pv = p ** (vcur + 1)
                mask = _nonzero_mod(sub, pv, p)
                if mask.any():
                    break
                mask = None
                vcur += 1
            if mask is None:
                break  # remaining submatrix is zero mod p^M
            ii, jj = np.unravel_index(int(np.argmax(mask)), mask.shape)
        i, j = k + int(ii), k + int(jj)
        mn = p**vcur
        if i != k:
            A[[k, i]] = A[[i, k]]
            if U is not None:
                U[[k, i]] = U[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            if V is not None:
                V[:, [k, j]] = V[:, [j, k]]
        pa = int(mn)  # p^a
        a = vcur
        w = int(A[k, k]) // pa
        winv = pow(w, -1, q)
        A[k, :] = (A[k, :] * winv) % q
        if U is not None:
            U[k, :] = (U[k, :] * winv) % q
        # clear column k below the pivot (rows above are already clear, and
        # columns left of k stay zero, so the update can skip them)
        col = A[k + 1 :, k]
        if col.size and np.any(col != 0):
            m = col // pa
            block = A[k + 1 :, k:]
            block -= m[:, None] * A[k, k:][None, :]
            _reduce_inplace(block, q, p)
            if U is not None:
                ub = U[k + 1 :, :]
                ub -= m[:, None] * U[k, :][None, :]
                _reduce_inplace(ub, q, p)
        # clear row k right of the pivot; only row k is affected since col k = p^a e_k
        row = A[k, k + 1 :]
        if row.size and np.any(row != 0):
            m = row // pa
            if V is not None:
                V[:, k + 1 :] = (V[:, k + 1 :] - V[:, k][:, None] * m[None, :]) % q
            A[k, k + 1 :] = 0
        exps.append(a)
    exps.extend([M] * (n - len(exps)))
    return Smith(p, M, (r, c), exps, U, V)


def invert(A, p: int, M: int):
    """Inverse of a square matrix over Z/p^M; raises if not invertible."""
    q = p**M
    s = smith(A, p, M, want_left=True, want_right=True)
    if any(e != 0 for e in s.exps) or s.shape[0] != s.shape[1]:
        raise ValueError("matrix not invertible mod %d^%d" % (p, M))
    return (s.V @ s.U) % q


def is_invertible(A, p: int, M: int) -> bool:
    s = smith(A, p, M, want_left=False, want_right=False)
    return s.shape[0] == s.shape[1] and all(e == 0 for e in s.exps)


def row_kernel(F, p: int, M: int, *, saturate: bool = False):
    """Generators of {x : x @ F = 0 mod p^M}.

    With saturate=True only the exact (valuation-M divisor) kernel rows are
    returned, discarding the p^{M-a}-scaled rows that exist solely because of
    the finite modulus.  That is the right kernel for maps of free modules
    read at finite precision.
    """
    q = p**M
    s = smith(F, p, M, want_left=True, want_right=False)
    r = s.shape[0]
    rows = []
    for i, a in enumerate(s.exps):
        if a >= M:
            rows.append(s.U[i])
        elif a > 0 and not saturate:
            rows.append((p ** (M - a) * s.U[i]) % q)
    for i in range(len(s.exps), r):
        rows.append(s.U[i])
    if not rows:
        return zeros((0, r), q)
    return np.vstack(rows) % q


def lattice_kernel(F, p: int, M: int):
    """Kernel of a map of free modules read at precision p^M.

    Returns (rows, M_eff): generator rows of the reduction of the exact
    p-adic kernel, valid modulo p^{M_eff}.  Each finite nonzero divisor of F
    costs its exponent in precision, because eliminating past a pivot p^a
    determines the transform only mod p^{M-a}.
    """
    q = p**M
    s = smith(F, p, M, want_left=True, want_right=False)
    loss = sum(a for a in s.exps if 0 < a < M)
    Me = M - loss
    if Me <= 0:
        raise ValueError("no precision left for the kernel (loss %d >= %d)" % (loss, M))
    r = s.shape[0]
    rows = [s.U[i] for i, a in enumerate(s.exps) if a >= M]
    rows.extend(s.U[i] for i in range(len(s.exps), r))
    qe = p**Me
    if not rows:
        return zeros((0, r), qe), Me
    return np.vstack(rows) % qe, Me


@dataclass
class Howell:
    """Canonical generating rows for a subgroup of (Z/p^M)^n.

    transform @ original_gens = rows (mod p^M) when transform tracking was
    requested; pivots[i] = (column, valuation) for rows[i].
    """

    p: int
    M: int
    ncols: int
    rows: np.ndarray
    pivots: list[tuple[int, int]]
    transform: np.ndarray | None

    @property
    def q(self) -> int:
        return self.p**self.M

    def reduce(self, v, coeffs_out: list | None = None):
        """Reduce a row vector by the basis; returns the residue.

        The residue is zero iff v lies in the span.  If coeffs_out is given
        it receives the coefficient of each basis row used.
        """
        q = self.q
        v = np.array(v, dtype=self.rows.dtype if self.rows.size else None) % q
        if coeffs_out is not None:
            coeffs_out.extend([0] * (len(self.pivots) - len(coeffs_out)))
        for i, (j, a) in enumerate(self.pivots):
            x = int(v[j])
            if x == 0:
                continue
            pa = self.p**a
            # reduce by the floor multiple; a leftover x mod pa < pa stays in
            # the residue and marks the vector as outside the span
            m = x // pa
            if m == 0:
                continue
            v = (v - m * self.rows[i]) % q
            if coeffs_out is not None:
                coeffs_out[i] = (coeffs_out[i] + m) % q
        return v

    def contains(self, v) -> bool:
        return not np.any(self.reduce(v))

    def index_exponent(self) -> int:
        """v_p of the index of the span in (Z/p^M)^ncols."""
        tot = self.M * self.ncols
        for _, a in self.pivots:
            tot -= self.M - a
        return tot


def howell(gens, p: int, M: int, *, track: bool = False) -> Howell:
    """Howell canonical form of the row span of gens over Z/p^M."""
    q = p**M
    G = as_matrix(gens, q)
    nrows, ncols = G.shape
    work: list[np.ndarray] = [G[i].copy() for i in range(nrows)]
    trans: list[np.ndarray] = [eye(max(nrows, 1), q)[i] for i in range(nrows)] if track else []
    ntrack = nrows
    done_rows: list[np.ndarray] = []
    done_trans: list[np.ndarray] = []
    pivots: list[tuple[int, int]] = []
    for j in range(ncols):
        cand = [i for i, w in enumerate(work) if int(w[j]) % q != 0]
        if not cand:
            continue
        best = min(cand, key=lambda i: math.gcd(int(work[i][j]), q))
        pa = math.gcd(int(work[best][j]), q)
        a = valuation(pa, p, M)
        piv = work.pop(best)
        tpiv = trans.pop(best) if track else None
        w = int(piv[j]) // pa
        winv = pow(w, -1, q)
        piv = (piv * winv) % q
        if track:
            tpiv = (tpiv * winv) % q
        # eliminate from remaining working rows (their entries at j have val >= a)
        for i, wrow in enumerate(work):
            x = int(wrow[j])
            if x:
                m = x // pa
                work[i] = (wrow - m * piv) % q
                if track:
                    trans[i] = (trans[i] - m * tpiv) % q
        # canonicalize entries above the pivot into [0, p^a)
        for i, drow in enumerate(done_rows):
            x = int(drow[j])
            if x // pa:
                m = x // pa
                done_rows[i] = (drow - m * piv) % q
                if track:
                    done_trans[i] = (done_trans[i] - m * tpiv) % q
        # annihilator tail: p^{M-a} * pivot row still generates span elements
        if a > 0:
            ann = (p ** (M - a) * piv) % q
            if np.any(ann):
                work.append(ann)
                if track:
                    trans.append((p ** (M - a) * tpiv) % q)
        done_rows.append(piv)
        if track:
            done_trans.append(tpiv)
        pivots.append((j, a))
    if done_rows:
        rows = np.vstack(done_rows) % q
    else:
        rows = zeros((0, ncols), q)
    tr = None
    if track:
        tr = np.vstack(done_trans) % q if done_trans else zeros((0, ntrack), q)
        if tr.shape[1] != nrows:  # pragma: no cover - only for degenerate nrows=0
            tr = tr[:, :nrows]
    return Howell(p, M, ncols, rows, pivots, tr)


def solve_rows(gens, b, p: int, M: int):
    """One x with x @ gens = b over Z/p^M, or None."""
    H = howell(gens, p, M, track=True)
    coeffs: list = []
    res = H.reduce(b, coeffs_out=coeffs)
    if np.any(res):
        return None
    q = p**M
    ngens = np.array(H.transform, dtype=H.transform.dtype)
    x = zeros((np.shape(gens)[0],), q)
    for cf, trow in zip(coeffs, ngens):
        x = (x + cf * trow) % q
    return x


def span_equal(gens_a, gens_b, p: int, M: int) -> bool:
    Ha = howell(gens_a, p, M)
    Hb = howell(gens_b, p, M)
    if Ha.pivots != Hb.pivots:
        return False
    return bool(np.array_equal(Ha.rows % Ha.q, Hb.rows % Hb.q))


def span_intersection(gens_a, gens_b, p: int, M: int):
    """Generators of span(a) ∩ span(b) over Z/p^M."""
    q = p**M
    A = as_matrix(gens_a, q)
    B = as_matrix(gens_b, q)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return zeros((0, A.shape[1]), q)
    stacked = np.vstack([A, (-B) % q])
    # coefficient rows (x, y) with x @ A = y @ B
    K = row_kernel(stacked, p, M)
    if K.shape[0] == 0:
        return zeros((0, A.shape[1]), q)
    coeff_a = K[:, : A.shape[0]]
    return (coeff_a @ A) % q


@dataclass
class QuotientGroup:
    """Finite abelian group K/B for subgroups B <= K <= (Z/p^M)^n.

    Exposes invariant exponents, generator representatives (rows in the
    ambient space), and a coordinate map for arbitrary elements of K.
    """

    p: int
    M: int
    exps: list[int]  # invariant factor exponents, > 0, nondecreasing
    gens: np.ndarray  # one ambient row per invariant factor
    _K: Howell
    _V: np.ndarray  # right transform sending K-coordinates to SNF coordinates
    _kept: list[int]

    @property
    def order_exponent(self) -> int:
        return sum(self.exps)

    @property
    def order(self) -> int:
        return self.p**self.order_exponent

    def coords(self, v) -> np.ndarray:
        """Coordinates of v + B in the invariant-factor decomposition."""
        q = self.p**self.M
        cf: list = []
        res = self._K.reduce(v, coeffs_out=cf)
        if np.any(res):
            raise ValueError("element not in the subgroup K")
        x = zeros((self._V.shape[0],), q)
        tr = self._K.transform
        for c, trow in zip(cf, tr):
            x = (x + c * trow) % q
        z = (x @ self._V) % q
        out = []
        for i, e in zip(self._kept, self.exps):
            out.append(int(z[i]) % self.p**e)
        return np.array(out, dtype=np.int64)

    def element(self, coords) -> np.ndarray:
        """An ambient representative with the given coordinates."""
        q = self.p**self.M
        v = zeros((self.gens.shape[1],), q)
        for c, g in zip(coords, self.gens):
            v = (v + int(c) * g) % q
        return v

    def all_coords(self):
        """Iterate over all coordinate tuples (desk scale only)."""
        import itertools

        ranges = [range(self.p**e) for e in self.exps]
        yield from itertools.product(*ranges)

    def invariants(self) -> list[int]:
        return [self.p**e for e in sorted(self.exps, reverse=True)]


def quotient_group(K_rows, B_rows, p: int, M: int) -> QuotientGroup:
    """Structure of span(K)/span(B) over Z/p^M (B must lie in span(K))."""
    q = p**M
    HK = howell(K_rows, p, M, track=True)
    # keep the howell rows as the working generating set of K
    Kb = HK.rows
    g = Kb.shape[0]
    if g == 0:
        return QuotientGroup(p, M, [], zeros((0, np.shape(K_rows)[1]), q), HK, eye(0, q), [])
    rel = row_kernel(Kb, p, M)
    B = as_matrix(B_rows, q)
    bcoords = []
    for i in range(B.shape[0]):
        cf: list = []
        res = HK.reduce(B[i], coeffs_out=cf)
        if np.any(res):
            raise ValueError("B is not contained in K")
        bcoords.append(np.array(cf, dtype=Kb.dtype) % q)
    pieces = [rel] + ([np.vstack(bcoords)] if bcoords else [])
    pieces = [x for x in pieces if x.shape[0] > 0]
    L = np.vstack(pieces) if pieces else zeros((0, g), q)
    s = smith(L, p, M, want_left=False, want_right=True)
    Vinv = invert(s.V, p, M)
    exps = list(s.exps) + [M] * (g - len(s.exps))
    kept = [i for i, a in enumerate(exps) if a > 0]
    gens = []
    new_exps = []
    # rebuild HK transform coefficient count: HK.reduce expects coeffs over HK.rows;
    # but HK.transform maps original K_rows to HK.rows.  Re-track against Kb itself.
    HK2 = howell(Kb, p, M, track=True)
    for i in kept:
        x = (Vinv[i] if i < Vinv.shape[0] else zeros((g,), q)) % q
        amb = (x @ Kb) % q
        gens.append(amb)
        new_exps.append(exps[i])
    qg = QuotientGroup(
        p,
        M,
        new_exps,
        np.vstack(gens) % q if gens else zeros((0, Kb.shape[1]), q),
        HK2,
        s.V,
        kept,
    )
    return qg


def abelian_invariants_of_span(gens, p: int, M: int) -> list[int]:
    """Invariant factors (as prime powers) of the subgroup generated by gens."""
    q = p**M
    G = as_matrix(gens, q)
    if G.shape[0] == 0 or not np.any(G):
        return []
    rel = row_kernel(G, p, M)
    # span(G) = Z^rows / rel-lattice; rel contains p^M * I implicitly
    qq = p ** (M + 1)
    relint = np.vstack([as_matrix(rel, qq), (q * eye(G.shape[0], qq)) % qq])
    s = smith(relint, p, M + 1, want_left=False, want_right=False)
    exps = list(s.exps) + [M + 1] * (G.shape[0] - len(s.exps))
    # span(G) = Z^g / Lambda and smith(Lambda) = diag(p^a) gives factors Z/p^a
    inv = [min(a, M) for a in exps if a > 0]
    return sorted((p**e for e in inv), reverse=True)
