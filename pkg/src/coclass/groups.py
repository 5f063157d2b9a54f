"""Small finite groups as validated multiplication tables.

Everything here runs on groups of order at most a few thousand, stored as
dense numpy multiplication tables with identity at index 0.  Exhaustive
validation keeps the rest of the toolkit honest: a table that passes
construction satisfies the group axioms, full stop.

Convention: all module actions in this package are right actions, written
v.g, and a homomorphism of tables preserves products in the given order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

TABLE_VALIDATION_CAP = 512
CLOSURE_CAP = 4096
AUT_CAP = 64


class GroupError(ValueError):
    pass


@dataclass
class GroupTable:
    mul: np.ndarray  # order x order element indices
    identity: int
    inverses: np.ndarray
    generators: list[int]
    element_labels: list[str] | None = None
    _orders: np.ndarray | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def inv(self, g: int) -> int:
        return int(self.inverses[g])

    def conj(self, x: int, g: int) -> int:
        """g^{-1} x g."""
        return int(self.mul[self.mul[self.inv(g), x], g])

    def commutator(self, x: int, y: int) -> int:
        """x^{-1} y^{-1} x y."""
        return int(self.mul[self.mul[self.mul[self.inv(x), self.inv(y)], x], y])

    def element_order(self, g: int) -> int:
        if self._orders is None:
            self._orders = _element_orders(self.mul, self.identity)
        return int(self._orders[g])

    def element_orders(self) -> np.ndarray:
        if self._orders is None:
            self._orders = _element_orders(self.mul, self.identity)
        return self._orders

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = self.inv(g), -k
        r = self.identity
        while k:
            if k & 1:
                r = int(self.mul[r, g])
            g = int(self.mul[g, g])
            k >>= 1
        return r

    def label(self, g: int) -> str:
        if self.element_labels is not None:
            return self.element_labels[g]
        return "g%d" % g


def _element_orders(mul: np.ndarray, identity: int) -> np.ndarray:
    n = mul.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for g in range(n):
        x, k = g, 1
        while x != identity:
            x = int(mul[x, g])
            k += 1
        out[g] = k
    return out


def _validate_table(mul: np.ndarray, identity: int) -> np.ndarray:
    n = mul.shape[0]
    if mul.shape != (n, n):
        raise GroupError("multiplication table must be square")
    if np.any(mul < 0) or np.any(mul >= n):
        raise GroupError("table entries out of range")
    if not np.array_equal(mul[identity], np.arange(n)):
        raise GroupError("identity is not a left identity")
    if not np.array_equal(mul[:, identity], np.arange(n)):
        raise GroupError("identity is not a right identity")
    inverses = np.full(n, -1, dtype=np.int64)
    for g in range(n):
        hits = np.flatnonzero(mul[g] == identity)
        if hits.size != 1 or mul[int(hits[0]), g] != identity:
            raise GroupError("element %d lacks a two-sided inverse" % g)
        inverses[g] = int(hits[0])
    if n <= TABLE_VALIDATION_CAP:
        # associativity, exhaustively but in row chunks to bound memory
        chunk = max(1, (1 << 22) // max(n * n, 1))
        for a0 in range(0, n, chunk):
            a1 = min(n, a0 + chunk)
            left = mul[mul[a0:a1], :]  # (a,b,c) -> (ab)c
            right = mul[a0:a1][:, mul]  # (a,b,c) -> a(bc)
            if not np.array_equal(left, right):
                raise GroupError("table is not associative")
    else:
        rng = np.random.default_rng(0)
        for _ in range(20000):
            a, b, c = (int(x) for x in rng.integers(0, n, 3))
            if mul[mul[a, b], c] != mul[a, mul[b, c]]:
                raise GroupError("table is not associative")
    return inverses


def _closure_generates(mul: np.ndarray, identity: int, gens: list[int]) -> bool:
    return len(subgroup_closure_table(mul, identity, gens)) == mul.shape[0]


def make_table(mul, generators: list[int] | None = None, labels=None) -> GroupTable:
    """Validate a raw multiplication table (identity must be index 0)."""
    mul = np.asarray(mul, dtype=np.int64)
    identity = 0
    inverses = _validate_table(mul, identity)
    n = mul.shape[0]
    if generators is None:
        generators = _minimal_generators(mul, identity)
    elif not _closure_generates(mul, identity, list(generators)):
        raise GroupError("given generators do not generate the table")
    return GroupTable(mul, identity, inverses, list(generators), labels)


def closure_table(gen_elems: list, multiply, identity_elem, *, cap: int = CLOSURE_CAP,
                  labeler=None) -> tuple[GroupTable, list]:
    """Close abstract generators under an associative product into a table.

    gen_elems are hashable values, multiply(x, y) their product.  Returns the
    validated table plus the element list in index order (identity first).
    """
    elems = [identity_elem]
    index = {identity_elem: 0}
    frontier = [identity_elem]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gen_elems:
                y = multiply(x, g)
                if y not in index:
                    if len(elems) >= cap:
                        raise GroupError("closure exceeds cap %d" % cap)
                    index[y] = len(elems)
                    elems.append(y)
                    nxt.append(y)
        frontier = nxt
    n = len(elems)
    mul = np.zeros((n, n), dtype=np.int64)
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            mul[i, j] = index[multiply(x, y)]
    labels = [labeler(x) for x in elems] if labeler else None
    gens = [index[g] for g in gen_elems if g in index]
    table = make_table(mul, generators=gens or None, labels=labels)
    return table, elems


def from_permutations(perms: list[tuple[int, ...]], *, cap: int = CLOSURE_CAP) -> tuple[GroupTable, list]:
    deg = len(perms[0]) if perms else 1
    ident = tuple(range(deg))

    def mult(a, b):
        # a then b, so right-multiplication maps compose like the group itself
        return tuple(b[a[i]] for i in range(deg))

    return closure_table([tuple(p) for p in perms], mult, ident, cap=cap)


def from_matrices(mats, q: int, *, cap: int = CLOSURE_CAP) -> tuple[GroupTable, list]:
    """Close integer matrix generators under multiplication mod q."""
    mats = [np.asarray(m, dtype=np.int64) % q for m in mats]
    d = mats[0].shape[0]
    ident = np.eye(d, dtype=np.int64)

    def key(m):
        return m.tobytes()

    lookup = {key(ident): ident}
    for m in mats:
        lookup[key(m)] = m

    def mult(a, b):
        c = (lookup[a] @ lookup[b]) % q
        k = key(c)
        lookup.setdefault(k, c)
        return k

    table, keys = closure_table([key(m) for m in mats], mult, key(ident), cap=cap)
    return table, [lookup[k] for k in keys]


# ---------------------------------------------------------------------------
# presentations


def _parse_word(word: str, gen_names: list[str]) -> list[int]:
    """Parse 'a^-1 b a b' into signed generator indices (1-based, sign = inverse)."""
    out: list[int] = []
    for tok in word.replace("*", " ").split():
        if "^" in tok:
            name, expo = tok.split("^")
            e = int(expo)
        else:
            name, e = tok, 1
        if name not in gen_names:
            raise GroupError("unknown generator %r in word %r" % (name, word))
        idx = gen_names.index(name) + 1
        s = idx if e > 0 else -idx
        out.extend([s] * abs(e))
    return out


def from_presentation(gen_names: list[str], relator_words: list[str], *,
                      cap: int = CLOSURE_CAP) -> GroupTable:
    """Finite group from a presentation via coset enumeration over the trivial subgroup."""
    relators = [_parse_word(w, gen_names) for w in relator_words]
    ngens = len(gen_names)
    if ngens == 0:
        return make_table(np.zeros((1, 1), dtype=np.int64), labels=["1"])
    cols = 2 * ngens  # generator g -> column 2(g-1), inverse -> 2(g-1)+1

    def col(s: int) -> int:
        return 2 * (abs(s) - 1) + (0 if s > 0 else 1)

    def invcol(c: int) -> int:
        return c ^ 1

    table: list[list[int]] = [[-1] * cols]
    reps: list[int] = [0]  # union-find for coincidences

    def find(x: int) -> int:
        while reps[x] != x:
            reps[x] = reps[reps[x]]
            x = reps[x]
        return x

    pending: list[tuple[int, int]] = []

    def merge(a: int, b: int):
        a, b = find(a), find(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        reps[b] = a
        for c in range(cols):
            if table[b][c] != -1:
                pending.append((b, c))

    def deduce(a: int, c: int, b: int):
        a, b = find(a), find(b)
        ta, tb = table[a][c], table[b][invcol(c)]
        if ta != -1 and find(ta) != b:
            merge(ta, b)
        if tb != -1 and find(tb) != a:
            merge(tb, a)
        table[a][c] = b
        table[b][invcol(c)] = a

    def define(a: int, c: int) -> int:
        if len(table) >= cap * 4:
            raise GroupError("coset enumeration exceeded cap")
        table.append([-1] * cols)
        reps.append(len(table) - 1)
        b = len(table) - 1
        deduce(a, c, b)
        return b

    def trace(start: int, word: list[int], fill: bool) -> int | None:
        x = find(start)
        for s in word:
            c = col(s)
            x = find(x)
            nxt = table[x][c]
            if nxt == -1:
                if not fill:
                    return None
                nxt = define(x, c)
            x = find(nxt)
        return x

    # HLT main loop
    i = 0
    while i < len(table):
        if find(i) != i:
            i += 1
            continue
        for rel in relators:
            end = trace(i, rel, True)
            merge(end, i)
            while pending:
                b, c = pending.pop()
                tgt = table[b][c]
                table[b][c] = -1
                if tgt != -1:
                    deduce(find(b), c, find(tgt))
        for c in range(cols):
            if find(i) == i and table[i][c] == -1:
                define(i, c)
        i += 1
    live = sorted({find(x) for x in range(len(table))})
    remap = {x: k for k, x in enumerate(live)}
    n = len(live)
    # cosets index group elements; right multiplication by generators gives perms
    perms = []
    for g in range(ngens):
        perm = tuple(remap[find(table[x][2 * g])] for x in live)
        perms.append(perm)
    tbl, elems = from_permutations(perms, cap=max(cap, n + 1))
    if tbl.order != n:
        raise GroupError("coset table inconsistent with closure")
    # label elements by short generator words
    labels = _word_labels(tbl, gen_names)
    tbl.element_labels = labels
    return tbl


def _word_labels(G: GroupTable, gen_names: list[str]) -> list[str]:
    labels = [""] * G.order
    labels[G.identity] = "1"
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for gi, g in enumerate(G.generators):
                y = int(G.mul[x, g])
                if y not in seen:
                    seen.add(y)
                    base = labels[x] if labels[x] != "1" else ""
                    labels[y] = base + gen_names[gi % len(gen_names)] if gen_names else "g%d" % y
                    nxt.append(y)
        frontier = nxt
    for x in range(G.order):
        if not labels[x]:
            labels[x] = "g%d" % x
    return labels


def build_group(spec) -> GroupTable:
    """Build and validate a group from a table / permutations / matrices / presentation.

    Accepted dict keys: "table"; "permutations"; "matrix_generators" with
    "modulus"; "presentation" with "generators" and "relators".
    """
    if isinstance(spec, GroupTable):
        return spec
    if isinstance(spec, (list, np.ndarray)):
        return make_table(spec)
    if not isinstance(spec, dict):
        raise GroupError("unsupported group spec %r" % type(spec))
    if "table" in spec:
        return make_table(spec["table"], generators=spec.get("generators"),
                          labels=spec.get("element_labels"))
    if "permutations" in spec:
        return from_permutations(spec["permutations"])[0]
    if "matrix_generators" in spec:
        return from_matrices(spec["matrix_generators"], int(spec["modulus"]))[0]
    if "presentation" in spec:
        pres = spec["presentation"]
        return from_presentation(list(pres["generators"]), list(pres["relators"]))
    raise GroupError("group spec must contain table/permutations/matrix_generators/presentation")


# ---------------------------------------------------------------------------
# subgroups and series


def subgroup_closure_table(mul: np.ndarray, identity: int, gens) -> list[int]:
    seen = {identity}
    frontier = [identity]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(mul[x, g])
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def subgroup_closure(G: GroupTable, gens) -> list[int]:
    return subgroup_closure_table(G.mul, G.identity, gens)


def restricted_table(G: GroupTable, elems) -> tuple[GroupTable, list[int]]:
    """Multiplication table of a subgroup on its own indices.

    elems must be closed under the product.  Returns (table, elements) with
    the ambient identity first, so table index i names ambient elements[i].
    """
    rest = sorted(set(int(e) for e in elems) - {G.identity})
    elements = [G.identity] + rest
    idx = {e: i for i, e in enumerate(elements)}
    k = len(elements)
    mul = np.zeros((k, k), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            c = int(G.mul[a, b])
            if c not in idx:
                raise GroupError("element set is not closed under multiplication")
            mul[i, j] = idx[c]
    labels = [G.label(e) for e in elements] if G.element_labels is not None else None
    return make_table(mul, labels=labels), elements


def is_subgroup(G: GroupTable, elems) -> bool:
    s = set(elems)
    if G.identity not in s:
        return False
    return all(int(G.mul[a, b]) in s for a in s for b in s)


def is_normal(G: GroupTable, elems) -> bool:
    s = set(elems)
    return all(G.conj(x, g) in s for x in s for g in range(G.order))


def center(G: GroupTable) -> list[int]:
    n = G.order
    return [z for z in range(n) if np.array_equal(G.mul[z], G.mul[:, z])]


def commutator_subgroup(G: GroupTable, a_elems, b_elems) -> list[int]:
    a = np.asarray(list(a_elems), dtype=np.int64)
    b = np.asarray(list(b_elems), dtype=np.int64)
    xy = G.mul[a[:, None], b[None, :]]
    comms = G.mul[G.mul[G.inverses[a][:, None], G.inverses[b][None, :]], xy]
    return subgroup_closure(G, set(int(c) for c in np.unique(comms)))


@dataclass
class SubgroupChain:
    terms: list[list[int]]  # descending, each a sorted element list

    def sizes(self) -> list[int]:
        return [len(t) for t in self.terms]


def lower_central_series(G: GroupTable) -> SubgroupChain:
    """gamma_1 = G, gamma_{i+1} = [G, gamma_i], computed until it stabilizes."""
    terms = [list(range(G.order))]
    while True:
        nxt = commutator_subgroup(G, range(G.order), terms[-1])
        if nxt == terms[-1]:
            break
        terms.append(nxt)
        if len(nxt) == 1:
            break
    return SubgroupChain(terms)


def is_nilpotent(G: GroupTable) -> bool:
    return len(lower_central_series(G).terms[-1]) == 1


def nilpotency_class(G: GroupTable) -> int:
    chain = lower_central_series(G)
    if len(chain.terms[-1]) != 1:
        raise GroupError("group is not nilpotent")
    return len(chain.terms) - 1


def _prime_power(n: int) -> tuple[int, int] | None:
    if n == 1:
        return None
    for p in range(2, n + 1):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            return (p, e) if n == 1 else None
    return None


def coclass(G: GroupTable) -> int:
    """n - c for a p-group of order p^n and nilpotency class c."""
    if G.order == 1:
        return 0
    pp = _prime_power(G.order)
    if pp is None:
        raise GroupError("order %d is not a prime power" % G.order)
    _, n = pp
    return n - nilpotency_class(G)


def group_prime(G: GroupTable) -> int:
    pp = _prime_power(G.order)
    if pp is None:
        raise GroupError("order %d is not a prime power" % G.order)
    return pp[0]


# ---------------------------------------------------------------------------
# automorphisms


def _minimal_generators(mul: np.ndarray, identity: int) -> list[int]:
    n = mul.shape[0]
    gens: list[int] = []
    closed = [identity]
    # deterministic greedy: always extend by the smallest element not yet reached
    while len(closed) < n:
        for x in range(n):
            if x not in closed:
                gens.append(x)
                closed = subgroup_closure_table(mul, identity, gens)
                break
    return gens


def _extend_hom(G: GroupTable, H: GroupTable, gen_src: list[int], gen_img: list[int]):
    """Extend generator images to a homomorphism G -> H, or return None.

    Every element of G is reached as a product of generators; images follow
    the same words.  A conflict or a product mismatch kills the candidate.
    """
    img = np.full(G.order, -1, dtype=np.int64)
    img[G.identity] = H.identity
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s, t in zip(gen_src, gen_img):
                y = int(G.mul[x, s])
                iy = int(H.mul[img[x], t])
                if img[y] == -1:
                    img[y] = iy
                    nxt.append(y)
                elif img[y] != iy:
                    return None
        frontier = nxt
    if np.any(img == -1):
        return None
    if not np.array_equal(img[G.mul], H.mul[img[:, None], img[None, :]]):
        return None
    return img


def automorphism_group(G: GroupTable, *, cap: int = AUT_CAP) -> list[np.ndarray]:
    """All automorphisms as index permutations, by generator-image search."""
    if G.order > cap:
        raise GroupError("automorphism search capped at order %d" % cap)
    gens = _minimal_generators(G.mul, G.identity)
    orders = G.element_orders()
    candidates = [[x for x in range(G.order) if orders[x] == orders[g]] for g in gens]
    out = []
    for images in itertools.product(*candidates):
        img = _extend_hom(G, G, gens, list(images))
        if img is None:
            continue
        if len(set(int(v) for v in img)) == G.order:
            out.append(img)
    return out


def compose_perms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a then b) as index maps: x -> b[a[x]]."""
    return b[a]


def invert_perm(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = np.arange(len(a))
    return out


def stabilizer(G: GroupTable, action, point) -> list[int]:
    """{ g : point.g = point } for a right action given as action(point, g)."""
    # right-action sanity on a small sample
    rng = np.random.default_rng(1)
    for _ in range(min(20, G.order * G.order)):
        g, h = (int(x) for x in rng.integers(0, G.order, 2))
        lhs = action(action(point, g), h)
        rhs = action(point, int(G.mul[g, h]))
        if not _same_point(lhs, rhs):
            raise GroupError("action(point, g then h) disagrees with action(point, gh)")
    if not _same_point(action(point, G.identity), point):
        raise GroupError("identity does not act trivially")
    return [g for g in range(G.order) if _same_point(action(point, g), point)]


def _same_point(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return bool(np.array_equal(np.asarray(a), np.asarray(b)))
    return a == b


# ---------------------------------------------------------------------------
# building tables over abelian coordinate fibers


def mixed_radix_index(coords: np.ndarray, moduli: list[int]) -> np.ndarray:
    """Index of coordinate rows in lexicographic mixed-radix order."""
    idx = np.zeros(coords.shape[:-1], dtype=np.int64)
    for j, m in enumerate(moduli):
        idx = idx * m + (coords[..., j] % m)
    return idx


def all_coord_rows(moduli: list[int]) -> np.ndarray:
    """All coordinate vectors in mixed-radix index order, one per row."""
    total = 1
    for m in moduli:
        total *= m
    out = np.zeros((total, len(moduli)), dtype=np.int64)
    rep = total
    for j, m in enumerate(moduli):
        rep //= m
        out[:, j] = np.tile(np.repeat(np.arange(m), rep), total // (rep * m))
    return out


def abelian_extension_table(gmul: np.ndarray, moduli: list[int], act_coords,
                            tau_coords=None) -> GroupTable:
    """Multiplication table of A x G with (a,g)(b,h) = (a.h + b + tau(g,h), gh).

    A is the abelian group with the given coordinate moduli; act_coords[h] is
    the matrix of the right action of h on coordinates; tau_coords[g][h] is the
    factor-set coordinate vector (omit for the split case).  Element index is
    g * |A| + index(a), so (0, identity) is index 0 as required.
    """
    gmul = np.asarray(gmul, dtype=np.int64)
    ng = gmul.shape[0]
    V = all_coord_rows(moduli)
    na = V.shape[0]
    modrow = np.array(moduli, dtype=np.int64)
    mul = np.zeros((ng * na, ng * na), dtype=np.int64)
    for h in range(ng):
        Mh = np.asarray(act_coords[h], dtype=np.int64)
        AV = (V @ Mh) % modrow  # a.h for every a
        for g in range(ng):
            tau = None
            if tau_coords is not None:
                tau = np.asarray(tau_coords[g][h], dtype=np.int64) % modrow
            # result coords for every (a, b) pair
            s = AV[:, None, :] + V[None, :, :]
            if tau is not None:
                s = s + tau[None, None, :]
            s %= modrow
            idx = mixed_radix_index(s, moduli)
            mul[g * na : (g + 1) * na, h * na : (h + 1) * na] = gmul[g, h] * na + idx
    return make_table(mul)
