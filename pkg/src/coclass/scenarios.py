"""Canned problem instances and the JSON instance loader.

A scenario packages a point group acting uniserially on a p-adic lattice at
finite precision, together with the derived central chain, the exponent
thresholds, and the finite top quotient used for extension and branch work.
Two instances are built in:

  - "dihedral_mainline": C2 negating Z_2 (rank 1, period 1), the pro-2
    dihedral group of coclass 1;
  - "d8_gaussian": the dihedral group of order 8 on the Gaussian integers
    Z_2[i] with a acting as complex conjugation and b as multiplication by
    i (rank 2, period 2), whose semidirect product is a pro-2-group of
    coclass 3.

The module also hosts the headline verification routines shared by the CLI:
the lower-central-series identification of the semidirect product's finite
quotients, the scan for an endomorphism whose compatible-pair action moves
the lattice summand of H^2 out of itself, and the two-level orbit
correspondence report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import cohomology, groups, linalg, modules, pairs
from .groups import GroupTable
from .modules import CentralChain, LatticeModule, QuotientModule


class ScenarioError(ValueError):
    pass


REQUIRED_FIELDS = (
    "name", "p", "rank", "precision", "depth", "group", "action",
    "top_offset", "pro_coclass",
)


@dataclass(eq=False)
class Scenario:
    """A validated problem instance; heavy artifacts are built lazily."""

    name: str
    p: int
    rank: int
    precision: int
    depth: int
    group_spec: dict
    action: list  # one integer matrix per group generator, in generator order
    top_offset: int  # chain index j with gamma_{1+j}(semidirect product) = 1 x T_j
    pro_coclass: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def l(self) -> int:
        """Lower-central index of the first fiber term: gamma_l = 1 x T_{l-1}."""
        return self.top_offset + 1

    def group(self) -> GroupTable:
        if "group" not in self._cache:
            self._cache["group"] = groups.build_group(self.group_spec)
        return self._cache["group"]

    def lattice(self) -> LatticeModule:
        if "lattice" not in self._cache:
            G = self.group()
            ctx = modules.PrecisionContext(self.p, self.precision)
            act = {g: np.asarray(m, dtype=np.int64)
                   for g, m in zip(G.generators, self.action)}
            self._cache["lattice"] = modules.lattice_module(G, act, ctx)
        return self._cache["lattice"]

    def chain(self) -> CentralChain:
        if "chain" not in self._cache:
            self._cache["chain"] = modules.g_central_series(self.lattice(), self.depth)
        return self._cache["chain"]

    def period(self) -> int:
        if "period" not in self._cache:
            d = modules.chain_period(self.lattice(), self.chain())
            if d is None:
                raise ScenarioError("central chain has no period at depth %d" % self.depth)
            self._cache["period"] = d
        return self._cache["period"]

    def t0(self) -> np.ndarray:
        return modules.distinguished_generator(self.lattice(), self.chain())

    def bounds(self) -> pairs.ExponentBounds:
        """Exponent thresholds, taken over one full period of levels."""
        if "bounds" not in self._cache:
            T, chain, d = self.lattice(), self.chain(), self.period()
            a = b = 0
            for n in range(1, d + 1):
                bd = pairs.exponent_bounds(T, chain, n, d)
                a = max(a, bd.a_exp)
                b = max(b, bd.b_exp)
            self._cache["bounds"] = pairs.ExponentBounds(self.p, d, a, b)
        return self._cache["bounds"]

    def quotient(self, n: int) -> QuotientModule:
        key = ("Q", n)
        if key not in self._cache:
            self._cache[key] = modules.quotient(self.lattice(), self.chain(), n)
        return self._cache[key]

    def top(self) -> "TopQuotient":
        if "top" not in self._cache:
            self._cache["top"] = _build_top(self)
        return self._cache["top"]

    def validate(self):
        """Re-verify every declared structural property; raises on failure."""
        T = self.lattice()  # validates the action matrices
        chain = self.chain()
        ok, steps = modules.is_uniserial(chain, min(self.depth, chain.depth))
        if not ok:
            raise ScenarioError("action is not uniserial: step indices %s" % steps)
        d = self.period()
        j = self.top_offset
        if j < 1 or j % d:
            raise ScenarioError("top_offset must be a positive multiple of the period")
        scale = self.p ** (j // d)
        ident = np.eye(self.rank, dtype=np.int64)
        if not linalg.span_equal((scale * ident) % T.q, chain.bases[j], self.p, T.ctx.N):
            raise ScenarioError("chain term %d is not the %d-fold scaled lattice" % (j, scale))
        return self


def _require(data: dict, fieldname: str):
    if fieldname not in data:
        raise ScenarioError("scenario file is missing the field %r" % fieldname)
    return data[fieldname]


def scenario_from_dict(data: dict) -> Scenario:
    for f in REQUIRED_FIELDS:
        _require(data, f)
    rank = int(data["rank"])
    action = []
    for i, m in enumerate(data["action"]):
        arr = np.asarray(m, dtype=np.int64)
        if arr.shape != (rank, rank):
            raise ScenarioError("action matrix %d is not %d x %d" % (i, rank, rank))
        action.append(arr.tolist())
    scn = Scenario(
        name=str(data["name"]),
        p=int(data["p"]),
        rank=rank,
        precision=int(data["precision"]),
        depth=int(data["depth"]),
        group_spec=data["group"],
        action=action,
        top_offset=int(data["top_offset"]),
        pro_coclass=int(data["pro_coclass"]),
    )
    if len(action) != len(scn.group().generators):
        raise ScenarioError("expected one action matrix per group generator")
    return scn.validate()


BUILTIN_SCENARIOS: dict[str, dict] = {
    "dihedral_mainline": {
        "name": "dihedral_mainline",
        "p": 2,
        "rank": 1,
        "precision": 14,
        "depth": 10,
        "group": {"presentation": {"generators": ["a"], "relators": ["a^2"]}},
        "action": [[[-1]]],
        "top_offset": 1,
        "pro_coclass": 1,
    },
    "d8_gaussian": {
        "name": "d8_gaussian",
        "p": 2,
        "rank": 2,
        "precision": 21,
        "depth": 9,
        "group": {"presentation": {"generators": ["a", "b"],
                                   "relators": ["a^2", "b^4", "a^-1 b a b"]}},
        "action": [[[1, 0], [0, -1]], [[0, 1], [-1, 0]]],
        "top_offset": 2,
        "pro_coclass": 3,
    },
}


def load_scenario(source) -> Scenario:
    """Scenario from a built-in name, a JSON file path, or a parsed dict."""
    if isinstance(source, dict):
        return scenario_from_dict(source)
    name = str(source)
    if name in BUILTIN_SCENARIOS:
        return scenario_from_dict(BUILTIN_SCENARIOS[name])
    try:
        with open(name) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError("no built-in scenario or file named %r" % name)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario file %r is not valid JSON: %s" % (name, exc))
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a JSON object")
    return scenario_from_dict(data)


# ---------------------------------------------------------------------------
# the finite top quotient R = G0 x (T / T_j) and its mainline cocycles


@dataclass(eq=False)
class TopQuotient:
    """The semidirect product's quotient by 1 x T_j, acting on the rescaled
    fiber lattice.  Extensions of its chain quotients by mainline-compatible
    cocycles recover the deeper finite quotients and their siblings.
    """

    scenario: Scenario
    group: GroupTable  # order |G0| * p^j, element index g * p^j + a
    lattice: LatticeModule  # T_j rescaled by p^{-j/d}; the action factors through G0
    chain: CentralChain
    period: int
    l: int  # the fiber of the quotient at level n has order p^n starting depth l
    r: int  # coclass of the top group
    scale_exp: int  # j / d
    _Qj: QuotientModule
    _fiber_coords: np.ndarray  # plain coordinate rows of T/T_j in index order

    def fiber_size(self) -> int:
        return self._Qj.module.order

    def quotient(self, n: int) -> QuotientModule:
        return modules.quotient(self.lattice, self.chain, n)

    def mainline_cocycle(self, n: int, Q: QuotientModule | None = None) -> np.ndarray:
        """Hatted 2-cocycle of the level-n mainline quotient.

        The section lifts (g, a) to (g, a-hat) with a-hat the canonical
        ambient representative; the factor set lands in T_j, read in the
        rescaled coordinates of the fiber lattice.
        """
        scn = self.scenario
        T = scn.lattice()
        if Q is None:
            Q = self.quotient(n)
        A = Q.module
        R = self.group
        na = self.fiber_size()
        reps = self._Qj.representatives()
        scale = scn.p ** self.scale_exp
        tuples = cohomology.tuples_of(R, 2)
        r = scn.rank
        row = np.zeros(len(tuples) * r, dtype=np.int64)
        amb = (self._fiber_coords @ reps) % T.q  # ambient lift per fiber index
        for t, (x, y) in enumerate(tuples):
            g, u = divmod(x, na)
            h, v = divmod(y, na)
            w = (amb[u] @ T.act[h] + amb[v]) % T.q
            w_red = self._Qj.reduce(w)
            value = (w - w_red) % T.q
            if np.any(value % scale):
                raise ScenarioError("mainline factor set left the fiber lattice")
            row[t * r : (t + 1) * r] = Q.hat_of_ambient(value // scale)
        spec = cohomology.finite_coefficients(A)
        if np.any((row @ cohomology.coboundary_matrix(spec, 2)) % A.q):
            raise ScenarioError("mainline factor set is not a cocycle")
        return row


def _build_top(scn: Scenario) -> TopQuotient:
    G0 = scn.group()
    T = scn.lattice()
    chain = scn.chain()
    d = scn.period()
    j = scn.top_offset
    Qj = modules.quotient(T, chain, j)
    Aj = Qj.module
    moduli = [int(m) for m in Aj.coord_moduli()]
    fiber_coords = groups.all_coord_rows(moduli)
    R = groups.abelian_extension_table(G0.mul, moduli, Aj.plain, None)
    na = Aj.order
    act_top = T.act[np.arange(R.order, dtype=np.int64) // na]
    T_top = LatticeModule(R, T.ctx, scn.rank, act_top.copy())
    chain_top = modules.g_central_series(T_top, scn.depth)
    d_top = modules.chain_period(T_top, chain_top)
    if d_top != d:
        raise ScenarioError("top lattice period %s differs from the base period %d"
                            % (d_top, d))
    return TopQuotient(scn, R, T_top, chain_top, d, scn.l, groups.coclass(R),
                       j // d, Qj, fiber_coords)


# ---------------------------------------------------------------------------
# lower central series of the finite semidirect quotients


@dataclass
class LcsReport:
    scenario: str
    max_chain_index: int
    quotient_orders: list[int]
    identified_terms: list[tuple[int, int, int]]  # (chain index m, lcs index 1+j, size)
    coclasses: list[tuple[int, int]]  # (chain index m, coclass of the quotient)
    limit_coclass: int
    ok: bool
    failures: list[str]

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "max_chain_index": str(self.max_chain_index),
            "quotient_orders": [str(x) for x in self.quotient_orders],
            "identified_terms": [{"chain_index": str(m), "lcs_index": str(i),
                                  "size": str(s)} for m, i, s in self.identified_terms],
            "coclasses": [{"chain_index": str(m), "coclass": str(c)}
                          for m, c in self.coclasses],
            "limit_coclass": str(self.limit_coclass),
            "ok": self.ok,
            "failures": self.failures,
        }


def _fiber_term_indices(scn: Scenario, Qm: QuotientModule, j: int, na: int,
                        identity: int) -> list[int]:
    """Table indices of the image of 1 x T_j inside G0 x (T / T_m)."""
    T = scn.lattice()
    chain = scn.chain()
    Bj = chain.bases[j]
    m = Qm.level
    steps = chain.index_exponents
    count = scn.p ** (steps[m] - steps[j])
    moduli = [int(x) for x in Qm.module.coord_moduli()]
    coeffs = groups.all_coord_rows([count] * scn.rank)
    found = set()
    for c in coeffs:
        amb = (c @ Bj) % T.q
        plain = Qm.module.unhat(Qm.hat_of_ambient(amb))
        found.add(identity * na + int(groups.mixed_radix_index(plain, moduli)))
    if len(found) != count:
        raise ScenarioError("fiber sublattice enumeration produced %d of %d elements"
                            % (len(found), count))
    return sorted(found)


def check_lower_central_series(scn: Scenario, max_order: int = 2048) -> LcsReport:
    """Identify the lower central terms of the finite semidirect quotients.

    For each buildable quotient G0 x (T / T_m), checks that with the
    convention gamma_1 = G the (1+j)-th lower central term equals the image
    of 1 x T_j for every j from top_offset up to m, and that the coclass of
    the quotients stabilizes at the declared value.
    """
    G0 = scn.group()
    T = scn.lattice()
    chain = scn.chain()
    failures: list[str] = []
    identified: list[tuple[int, int, int]] = []
    coclasses: list[tuple[int, int]] = []
    orders: list[int] = []
    m = 1
    last_m = 0
    while m <= chain.depth and G0.order * scn.p ** chain.index_exponents[m] <= max_order:
        Qm = scn.quotient(m)
        Am = Qm.module
        moduli = [int(x) for x in Am.coord_moduli()]
        table = groups.abelian_extension_table(G0.mul, moduli, Am.plain, None)
        orders.append(table.order)
        series = groups.lower_central_series(table).terms
        na = Am.order
        for j in range(scn.top_offset, m + 1):
            expected = _fiber_term_indices(scn, Qm, j, na, G0.identity)
            li = 1 + j
            actual = series[li - 1] if li - 1 < len(series) else [table.identity]
            if sorted(actual) == expected:
                identified.append((m, li, len(expected)))
            else:
                failures.append(
                    "chain index %d: lcs term %d has size %d, expected the "
                    "image of the depth-%d sublattice (size %d)"
                    % (m, li, len(actual), j, len(expected)))
        coclasses.append((m, groups.coclass(table)))
        last_m = m
        m += 1
    if last_m < scn.top_offset + 1:
        failures.append("no quotient deep enough to test the identification")
    stabilized = [c for mm, c in coclasses if mm >= scn.top_offset + scn.period()]
    limit = stabilized[-1] if stabilized else -1
    if limit != scn.pro_coclass:
        failures.append("quotient coclass %d does not stabilize at the declared %d"
                        % (limit, scn.pro_coclass))
    elif any(c != limit for c in stabilized):
        failures.append("quotient coclass has not stabilized: %s" % coclasses)
    return LcsReport(scn.name, last_m, orders, identified, coclasses,
                     limit, not failures, failures)


# ---------------------------------------------------------------------------
# the summand-instability scan


@dataclass
class SummandScanReport:
    scenario: str
    found: bool
    witness: dict | None
    lifted_endomorphisms_stable: bool
    scanned: list[dict]
    skipped: list[dict]

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "found": self.found,
            "witness": self.witness,
            "lifted_endomorphisms_stable": self.lifted_endomorphisms_stable,
            "scanned": self.scanned,
            "skipped": self.skipped,
        }


def _scan_stage(scn: Scenario, k: int) -> tuple[GroupTable, LatticeModule]:
    """The acting pair (R, lattice) at rescaling stage k.

    Stage k quotients the semidirect product by the p^k-scaled fiber; the
    rescaled fiber is the original lattice with the action read through the
    projection onto the point group.
    """
    G0 = scn.group()
    T = scn.lattice()
    if k == 0:
        return G0, T
    chain = scn.chain()
    j = k * scn.period()
    Qj = modules.quotient(T, chain, j)
    Aj = Qj.module
    moduli = [int(m) for m in Aj.coord_moduli()]
    R = groups.abelian_extension_table(G0.mul, moduli, Aj.plain, None)
    na = Aj.order
    act = T.act[np.arange(R.order, dtype=np.int64) // na]
    return R, LatticeModule(R, T.ctx, scn.rank, act.copy())


def _summand_classes(level: cohomology.SplitLevel) -> list[tuple[tuple, np.ndarray]]:
    """(coords, representative cocycle row) for every class in the lattice
    summand of H^2, in lexicographic coordinate order."""
    H = level.H
    q = H.spec.q
    zero = np.zeros(level.theta_hat.shape[1] if level.theta_hat.size
                    else H.cocycles.shape[1], dtype=np.int64)
    seen = {tuple(int(x) for x in H.coords(zero)): zero}
    frontier = [zero]
    gens = [level.theta_hat[i] for i in range(level.theta_hat.shape[0])]
    while frontier:
        nxt = []
        for row in frontier:
            for g in gens:
                cand = (row + g) % q
                key = tuple(int(x) for x in H.coords(cand))
                if key not in seen:
                    seen[key] = cand
                    nxt.append(cand)
        frontier = nxt
    return [(k, seen[k]) for k in sorted(seen)]


def _h3_component(level: cohomology.SplitLevel, row) -> list[int]:
    """Complement coefficients of a cocycle, reduced to their class moduli."""
    _, c = level.decompose(row)
    p = level.Q.lattice.p
    return [int(ci % p**a) for ci, a in zip(c, level.frame.K_divisor_exps)]


def summand_instability_witness(scn: Scenario, n_range=None, k_range=(0, 1, 2),
                                group_cap: int = 8) -> SummandScanReport:
    """Scan for an invertible module endomorphism whose compatible-pair
    action moves some class of the lattice summand of H^2 out of the
    summand, i.e. gives it a nonzero complement component.

    Scan order is deterministic: ascending rescaling stage k, then level n,
    then lexicographic endomorphism coordinates (the plain form before the
    one-plus form), then lexicographic class.  Alongside the scan, every
    invertible endomorphism lifted from the lattice is checked to preserve
    the summand.
    """
    if n_range is None:
        n_range = range(1, 7)
    scanned: list[dict] = []
    skipped: list[dict] = []
    witness = None
    lifted_ok = True
    for k in k_range:
        R, Tk = _scan_stage(scn, k)
        if R.order > group_cap:
            skipped.append({"k": str(k), "group_order": str(R.order),
                            "reason": "group order exceeds the scan cap %d" % group_cap})
            continue
        chain_k = modules.g_central_series(Tk, scn.depth)
        period_k = modules.chain_period(Tk, chain_k)
        for n in n_range:
            if n > chain_k.depth - 1:
                break
            try:
                frame = cohomology.split_frame(Tk, chain_k, n, m=2)
            except cohomology.CohomologyError as exc:
                skipped.append({"k": str(k), "n": str(n), "reason": str(exc)})
                continue
            Q = modules.quotient(Tk, chain_k, n)
            level = cohomology.split_at_level(frame, Tk, chain_k, n, period_k, Q=Q)
            H = level.H
            A = Q.module
            member = _summand_membership_solver(level, H)
            classes = _summand_classes(level)
            lifted_ok = lifted_ok and _lifted_endos_stable(Tk, Q, H, member, classes)
            scanned.append({"k": str(k), "n": str(n),
                            "summand_classes": str(len(classes)),
                            "h2_order": str(H.order)})
            if witness is None:
                witness = _scan_level(scn, k, n, level, H, A, member, classes)
            if witness is not None:
                break
        if witness is not None:
            break
    return SummandScanReport(scn.name, witness is not None, witness,
                             lifted_ok, scanned, skipped)


def _summand_membership_solver(level: cohomology.SplitLevel,
                               H: cohomology.CohomologyGroup) -> linalg.Howell:
    stack = [x for x in (level.theta_hat, H.boundaries) if x.shape[0]]
    rows = np.vstack(stack) if stack else np.zeros((0, H.cocycles.shape[1]),
                                                   dtype=np.int64)
    return linalg.howell(rows, H.spec.p, H.spec.E)


def _scan_level(scn, k, n, level, H, A, member, classes):
    End = modules.hom_space(A, A)
    ident = np.eye(A.rank, dtype=np.int64)
    id_perm = np.arange(A.group.order, dtype=np.int64)
    for coords in End.structure.all_coords():
        mat = End.flat_to_matrix(End.structure.element(coords))
        for form, eps in (("eps", mat), ("one_plus_eps", (ident + mat) % A.q)):
            eps_hat = pairs.canonical_hat(A, eps)
            if not pairs.is_module_automorphism(A, eps_hat):
                continue
            pair = pairs.CompatiblePair(id_perm, eps_hat)
            for cls, row in classes:
                image = pairs.act_on_cochain(H, pair, row)
                if np.any(member.reduce(image)):
                    comp = _h3_component(level, image)
                    return {
                        "k": str(k), "n": str(n), "form": form,
                        "eps_hat": [[str(int(x)) for x in r] for r in eps_hat],
                        "class_coords": [str(c) for c in cls],
                        "image_coords": [str(int(c)) for c in H.coords(image)],
                        "h3_component": [str(c) for c in comp],
                    }
    return None


def _lifted_endos_stable(Tk, Q, H, member, classes) -> bool:
    """Every invertible endomorphism reduced from the lattice must keep the
    summand inside itself."""
    basis = modules.lattice_hom_space(Tk)
    if not basis:
        return True
    A = Q.module
    id_perm = np.arange(A.group.order, dtype=np.int64)
    p = Tk.p
    coeffs = groups.all_coord_rows([p * p] * len(basis))
    for c in coeffs:
        Phi = np.zeros((Tk.rank, Tk.rank), dtype=np.int64)
        for ci, B in zip(c, basis):
            Phi = (Phi + int(ci) * B) % Tk.q
        C = modules.endo_to_quotient(Q, Phi)
        eps_hat = pairs.canonical_hat(A, pairs._hat_matrix(A, C))
        if not pairs.is_module_automorphism(A, eps_hat):
            continue
        pair = pairs.CompatiblePair(id_perm, eps_hat)
        for _, row in classes:
            if np.any(member.reduce(pairs.act_on_cochain(H, pair, row))):
                return False
    return True


# ---------------------------------------------------------------------------
# the two-level orbit correspondence report


@dataclass
class CorrespondenceReport:
    scenario: str
    level: int
    qualified: bool
    reason: str | None
    result: pairs.OrbitCorrespondence | None

    @property
    def ok(self) -> bool:
        return self.qualified and self.result is not None and self.result.ok

    def as_dict(self) -> dict:
        out = {"scenario": self.scenario, "level": str(self.level),
               "qualified": self.qualified, "ok": self.ok}
        if self.reason:
            out["reason"] = self.reason
        if self.result is not None:
            out["equivariant"] = self.result.equivariant
            out["orbit_sizes"] = [str(s) for s in sorted(self.result.orbits_n.sizes)]
            out["orbit_sizes_next"] = [str(s) for s in sorted(self.result.orbits_nd.sizes)]
            out["bijection"] = [[str(a), str(b)] for a, b in self.result.bijection]
            if self.result.witness:
                out["witness"] = self.result.witness
        return out


def orbit_correspondence_report(scn: Scenario, n: int | None = None) -> CorrespondenceReport:
    """Certify the orbit bijection between levels n and n + period."""
    bounds = scn.bounds()
    d = scn.period()
    if n is None:
        n = bounds.least_qualifying()
    if not bounds.qualifies(n):
        reason = ("level %d violates n >= v*d = %d*%d or n >= b*d = %d*%d"
                  % (n, bounds.v, d, bounds.b_exp, d))
        return CorrespondenceReport(scn.name, n, False, reason, None)
    result = pairs.orbit_correspondence(scn.lattice(), scn.chain(), n, d)
    return CorrespondenceReport(scn.name, n, True, None, result)
