"""Finite group extensions from 2-cocycles and their classification.

A degree-2 cocycle tau on a group R with values in a finite module A defines
the extension with multiplication (a, g)(b, h) = (a.h + b + tau(g, h), gh).
This module builds the extension table, computes its coclass together with
the lower-central criterion, tests isomorphism of small tables, and
cross-validates that two cocycle classes lie in the same compatible-pair
orbit exactly when their extensions are isomorphic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import cohomology, groups, linalg, modules, pairs
from .cohomology import CohomologyGroup
from .groups import GroupTable
from .modules import FiniteModule

EXTENSION_CAP = 512


class ExtensionError(ValueError):
    pass


@dataclass
class ExtensionGroup:
    base: GroupTable
    fiber: FiniteModule
    cocycle_hat: np.ndarray  # hatted degree-2 cochain row
    table: GroupTable
    fiber_elements: list[int]  # table indices of the embedded fiber

    @property
    def order(self) -> int:
        return self.table.order


def cocycle_value_table(A: FiniteModule, tau_hat) -> list[list[np.ndarray]]:
    """Plain coordinate values tau(g, h) for all pairs, zero on the identity."""
    G = A.group
    tuples = cohomology.tuples_of(G, 2)
    index = {t: i for i, t in enumerate(tuples)}
    r = A.rank
    row = np.asarray(tau_hat, dtype=np.int64) % A.q
    zero = np.zeros(r, dtype=np.int64)
    out = []
    for g in range(G.order):
        vals = []
        for h in range(G.order):
            i = index.get((g, h))
            vals.append(zero if i is None else A.unhat(row[i * r : (i + 1) * r]))
        out.append(vals)
    return out


def build_extension(R: GroupTable, A: FiniteModule, tau_hat,
                    cap: int = EXTENSION_CAP) -> ExtensionGroup:
    """Validated multiplication table of the extension defined by tau."""
    if A.group is not R and A.group.order != R.order:
        raise ExtensionError("cocycle module must be an R-module")
    total = R.order * A.order
    if total > cap:
        raise ExtensionError("extension order %d exceeds the cap %d" % (total, cap))
    spec = cohomology.finite_coefficients(A)
    row = np.asarray(tau_hat, dtype=np.int64) % A.q
    if np.any((row @ cohomology.coboundary_matrix(spec, 2)) % A.q):
        raise ExtensionError("cochain does not satisfy the cocycle identity")
    tau = cocycle_value_table(A, row)
    moduli = [int(m) for m in A.coord_moduli()]
    table = groups.abelian_extension_table(R.mul, moduli, A.plain, tau)
    na = A.order
    fiber = list(range(na)) if R.identity == 0 else [R.identity * na + j for j in range(na)]
    ext = ExtensionGroup(R, A, row, table, fiber)
    _validate_extension(ext)
    return ext


def _validate_extension(ext: ExtensionGroup):
    if ext.table.order != ext.base.order * ext.fiber.order:
        raise ExtensionError("extension order mismatch")
    if not groups.is_subgroup(ext.table, ext.fiber_elements):
        raise ExtensionError("fiber does not embed as a subgroup")
    if not groups.is_normal(ext.table, ext.fiber_elements):
        raise ExtensionError("fiber is not normal")
    # the block projection onto R is a homomorphism by construction; check it
    na = ext.fiber.order
    g_of = np.arange(ext.table.order) // na
    if not np.array_equal(g_of[ext.table.mul], ext.base.mul[g_of[:, None], g_of[None, :]]):
        raise ExtensionError("projection to the base is not a homomorphism")


# ---------------------------------------------------------------------------
# coclass and the lower-central criterion


def coclass_of_extension(ext: ExtensionGroup, l: int | None = None) -> tuple[int, bool]:
    """(coclass of the extension, gamma_l(E) = fiber flag).

    l is a 1-based lower-central index (gamma_1(E) = E) and defaults to one
    past the nilpotency class of the base, which is the right index when the
    base is the depth-l mainline quotient.  The flag captures the
    lower-central criterion: the extension has the base's coclass exactly
    when gamma_l(E) equals the whole fiber.
    """
    if l is None:
        l = groups.nilpotency_class(ext.base) + 1
    cc = groups.coclass(ext.table)
    series = groups.lower_central_series(ext.table).terms
    gamma_l = series[l - 1] if l - 1 < len(series) else [ext.table.identity]
    flag = sorted(gamma_l) == sorted(ext.fiber_elements)
    base_cc = groups.coclass(ext.base)
    if ext.fiber.order > 1 and (cc == base_cc) != flag:
        raise ExtensionError(
            "coclass criterion disagreement: cc %d vs base %d, flag %s" % (cc, base_cc, flag))
    return cc, flag


# ---------------------------------------------------------------------------
# isomorphism testing for small tables


def fingerprint(G: GroupTable) -> tuple:
    """Cheap isomorphism invariants: order, spectrum, center, central series."""
    orders = G.element_orders()
    spectrum = tuple(sorted(int(x) for x in orders))
    lcs = tuple(len(t) for t in groups.lower_central_series(G).terms)
    return (G.order, spectrum, len(groups.center(G)), lcs)


def are_isomorphic(G1: GroupTable, G2: GroupTable, cap: int = EXTENSION_CAP) -> bool:
    """Brute-force isomorphism test with invariant prefilters."""
    if G1.order != G2.order:
        return False
    if G1.order > cap or G2.order > cap:
        raise ExtensionError("isomorphism test capped at order %d" % cap)
    if fingerprint(G1) != fingerprint(G2):
        return False
    gens = groups._minimal_generators(G1.mul, G1.identity)
    o1 = G1.element_orders()
    o2 = G2.element_orders()
    candidates = [[x for x in range(G2.order) if o2[x] == o1[g]] for g in gens]
    for images in itertools.product(*candidates):
        img = groups._extend_hom(G1, G2, gens, list(images))
        if img is None:
            continue
        if len(set(int(v) for v in img)) == G1.order:
            return True
    return False


# ---------------------------------------------------------------------------
# Theorem-4 style cross-validation: same orbit <=> isomorphic extensions


@dataclass
class OrbitIsomorphismReport:
    level_order: int
    checked_pairs: int
    skipped_classes: int  # classes whose extension does not have the base coclass
    ok: bool
    witness: dict | None


def orbit_isomorphism_check(H: CohomologyGroup, A: FiniteModule,
                   partition: pairs.OrbitPartition,
                   cap: int = EXTENSION_CAP) -> OrbitIsomorphismReport:
    """Verify (same orbit <=> isomorphic extensions) over all qualifying classes.

    Classes whose extension does not share the base's coclass fall outside
    the hypothesis and are skipped (counted in the report).
    """
    R = A.group
    exts = {}
    skipped = 0
    for i, cl in enumerate(partition.classes):
        for c in cl:
            ext = build_extension(R, A, H.representative(c), cap=cap)
            cc, flag = coclass_of_extension(ext)
            if flag:
                exts[c] = (i, ext)
            else:
                skipped += 1
    items = sorted(exts.items())
    checked = 0
    for (c1, (i1, e1)), (c2, (i2, e2)) in itertools.combinations(items, 2):
        iso = are_isomorphic(e1.table, e2.table, cap=cap)
        same_orbit = i1 == i2
        checked += 1
        if iso != same_orbit:
            return OrbitIsomorphismReport(A.order, checked, skipped, False,
                                          {"class_a": list(c1), "class_b": list(c2),
                                           "same_orbit": same_orbit, "isomorphic": iso})
    return OrbitIsomorphismReport(A.order, checked, skipped, True, None)
