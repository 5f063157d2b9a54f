"""Branches of the descendant tree of a uniserial semidirect product, and
the shift isomorphism between branches one period apart.

Vertices of branch i are isomorphism classes of finite groups that are
descendants of the depth-i mainline quotient but not of the next one,
realized as extension classes in H^2(R, A_n) over the finite top quotient R.
Classes are identified up to compatible-pair orbits, extensions are built
and cross-checked with the isomorphism oracle, and the branch-to-branch
shift is induced by the summand-preserving level shift on cohomology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cohomology, extensions, groups, modules, pairs
from .scenarios import Scenario, TopQuotient


class BranchError(ValueError):
    pass


@dataclass
class BranchVertex:
    index: int
    level: int  # chain level of the fiber
    distance: int  # edge distance from the root, 0 for the root itself
    class_coords: tuple  # coordinates of the orbit representative in H^2
    orbit: int  # orbit index within its level's partition
    order: int
    mainline: bool
    parent: int | None


@dataclass
class BranchGraph:
    scenario: str
    i: int  # branch index: the root is the depth-i mainline quotient
    k: int  # distance cap
    root_level: int
    vertices: list[BranchVertex]
    edges: list[tuple[int, int]]  # (parent index, child index)
    tables: list  # GroupTable per vertex, for isomorphism checks

    @property
    def root(self) -> BranchVertex:
        return self.vertices[0]

    def at_distance(self, j: int) -> list[BranchVertex]:
        return [v for v in self.vertices if v.distance == j]


@dataclass
class LevelData:
    n: int
    Q: modules.QuotientModule
    H: cohomology.CohomologyGroup
    partition: pairs.OrbitPartition
    mainline_coords: tuple


def _level_data(top: TopQuotient, n: int) -> LevelData:
    Q = top.quotient(n)
    H = cohomology.finite_cohomology(Q.module, 2)
    partition = pairs.orbits_on_h2(H, pairs.compatible_pairs(Q.module))
    lam = top.mainline_cocycle(n, Q)
    return LevelData(n, Q, H, partition, tuple(int(x) for x in H.coords(lam)))


def _reduced_coords(levels: dict[int, LevelData], n_from: int, n_to: int,
                    row) -> tuple:
    src, dst = levels[n_from], levels[n_to]
    red = cohomology.restrict_level(src.Q, dst.Q, 2, row)
    return tuple(int(x) for x in dst.H.coords(red))


def build_branch(scn: Scenario, i: int, k: int = 1,
                 cap: int = extensions.EXTENSION_CAP) -> BranchGraph:
    """Branch i of the descendant tree, shaved at distance k.

    The root is the depth-i mainline quotient, realized as the mainline
    cocycle class at level i - l.  Children at distance j are the
    compatible-pair orbits at level i - l + j whose extensions keep the
    top quotient's coclass, reduce into the root's orbit, and do not reduce
    into the next mainline class (those belong to branch i + 1).
    """
    top = scn.top()
    n0 = i - top.l
    if n0 < 1:
        raise BranchError("branch %d needs root level %d >= 1" % (i, n0))
    if n0 + k > top.chain.depth - 1:
        raise BranchError("chain depth %d cannot host level %d" % (top.chain.depth, n0 + k))
    if top.group.order * scn.p ** (n0 + k) > cap:
        raise BranchError("extensions at level %d exceed the order cap %d" % (n0 + k, cap))
    levels = {n: _level_data(top, n) for n in range(n0, n0 + k + 1)}

    def table_of(lv: LevelData, coords):
        ext = extensions.build_extension(top.group, lv.Q.module,
                                         lv.H.representative(np.array(coords, dtype=np.int64)),
                                         cap=cap)
        return ext, extensions.coclass_of_extension(ext, l=top.l)

    root_lv = levels[n0]
    root_orbit = root_lv.partition.orbit_of(np.array(root_lv.mainline_coords, dtype=np.int64))
    root_ext, (root_cc, root_flag) = table_of(root_lv, root_lv.mainline_coords)
    if not root_flag:
        raise BranchError("mainline quotient at level %d fails the coclass criterion" % n0)
    vertices = [BranchVertex(0, n0, 0, root_lv.mainline_coords, root_orbit,
                             root_ext.order, True, None)]
    edges: list[tuple[int, int]] = []
    tables = [root_ext.table]
    by_level_orbit = {(n0, root_orbit): 0}
    for j in range(1, k + 1):
        n = n0 + j
        lv = levels[n]
        main_orbit = lv.partition.orbit_of(np.array(lv.mainline_coords, dtype=np.int64))
        lv1 = levels[n0 + 1]
        main_orbit_1 = lv1.partition.orbit_of(np.array(lv1.mainline_coords, dtype=np.int64))
        for oi, cl in enumerate(lv.partition.classes):
            coords = cl[0]
            row = lv.H.representative(np.array(coords, dtype=np.int64))
            down = _reduced_coords(levels, n, n - 1, row)
            parent_key = (n - 1, lv_parent_orbit(levels[n - 1], down))
            is_main = oi == main_orbit
            if j == 1:
                descends = parent_key == (n0, root_orbit)
            else:
                descends = parent_key in by_level_orbit
                # everything strictly below the next mainline quotient
                # belongs to the next branch; the mainline child stays
                red1 = _reduced_coords(levels, n, n0 + 1, row)
                if lv_parent_orbit(lv1, red1) == main_orbit_1:
                    continue
            if not descends:
                continue
            ext, (cc, flag) = table_of(lv, coords)
            if not flag:
                continue
            idx = len(vertices)
            parent = by_level_orbit[parent_key]
            vertices.append(BranchVertex(idx, n, j, tuple(coords), oi,
                                         ext.order, is_main, parent))
            edges.append((parent, idx))
            tables.append(ext.table)
            by_level_orbit[(n, oi)] = idx
    _check_orbit_isomorphism(vertices, tables, cap)
    return BranchGraph(scn.name, i, k, n0, vertices, edges, tables)


def lv_parent_orbit(lv: LevelData, coords) -> int:
    return lv.partition.orbit_of(np.array(coords, dtype=np.int64))


def _check_orbit_isomorphism(vertices, tables, cap):
    """Distinct vertices at one level must be pairwise non-isomorphic."""
    by_level: dict[int, list[int]] = {}
    for v in vertices:
        by_level.setdefault(v.level, []).append(v.index)
    for level, idxs in by_level.items():
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                if extensions.are_isomorphic(tables[idxs[a]], tables[idxs[b]], cap=cap):
                    raise BranchError(
                        "distinct orbits at level %d gave isomorphic groups" % level)


# ---------------------------------------------------------------------------
# the branch shift


@dataclass
class ShiftReport:
    i: int
    k: int
    period: int
    vertex_map: list[tuple[int, int]]  # source index -> target index
    ok: bool
    failures: list[str]


def nu_shift(scn: Scenario, src: BranchGraph,
             dst: BranchGraph | None = None) -> tuple[ShiftReport, BranchGraph]:
    """Map branch i onto the independently built branch i + period.

    Every vertex class is pushed through the level shift that fixes the
    lattice summand and multiplies the complement by p; the report certifies
    that the induced vertex map is a bijection preserving root, distances,
    and edges.
    """
    top = scn.top()
    d = top.period
    bounds = scn.bounds()
    if src.i - top.l < bounds.v * d:
        raise BranchError("branch %d violates the shift hypothesis i - l >= %d"
                          % (src.i, bounds.v * d))
    if dst is None:
        dst = build_branch(scn, src.i + d, src.k)
    if dst.i != src.i + d or dst.k != src.k:
        raise BranchError("target branch must be built at i + period with the same k")
    T, chain = top.lattice, top.chain
    failures: list[str] = []
    vmap: list[tuple[int, int]] = []
    dst_levels = {n: _level_data(top, n) for n in range(dst.root_level,
                                                        dst.root_level + dst.k + 1)}
    dst_by_orbit = {(v.level, v.orbit): v.index for v in dst.vertices}
    level_cache: dict[int, tuple] = {}
    for v in src.vertices:
        n = v.level
        if n not in level_cache:
            frame = cohomology.split_frame(T, chain, n, m=2)
            level_cache[n] = (cohomology.split_at_level(frame, T, chain, n, d),
                              cohomology.split_at_level(frame, T, chain, n + d, d))
        lev_n, lev_nd = level_cache[n]
        row = lev_n.H.representative(np.array(v.class_coords, dtype=np.int64))
        shifted = cohomology.id_oplus_mu(lev_n, lev_nd, row)
        lv_t = dst_levels[n + d]
        orbit = lv_t.partition.orbit_of(lv_t.H.coords(shifted))
        key = (n + d, orbit)
        if key not in dst_by_orbit:
            failures.append("vertex %d shifted outside the target branch" % v.index)
            continue
        w = dst.vertices[dst_by_orbit[key]]
        vmap.append((v.index, w.index))
        if w.distance != v.distance:
            failures.append("vertex %d changed distance %d -> %d"
                            % (v.index, v.distance, w.distance))
    mapped = dict(vmap)
    if len(mapped) != len(src.vertices) or len(set(mapped.values())) != len(dst.vertices):
        failures.append("vertex map is not a bijection (%d -> %d of %d)"
                        % (len(mapped), len(set(mapped.values())), len(dst.vertices)))
    else:
        src_edges = sorted((mapped[a], mapped[b]) for a, b in src.edges)
        if src_edges != sorted(dst.edges):
            failures.append("edges are not preserved")
        if mapped[src.root.index] != dst.root.index:
            failures.append("root does not map to the root")
    return ShiftReport(src.i, src.k, d, vmap, not failures, failures), dst


# ---------------------------------------------------------------------------
# DOT export


def _vertex_label(v: BranchVertex, table) -> str:
    orders = table.element_orders()
    involutions = int(np.count_nonzero(orders == 2))
    return "order %d | inv %d | exp %d%s" % (
        v.order, involutions, int(max(orders)), " | mainline" if v.mainline else "")


def export_dot(branch: BranchGraph, nu: ShiftReport | None = None) -> str:
    """Deterministic DOT text for a branch, optionally annotated with the
    shift's vertex map."""
    lines = ["digraph branch_%d {" % branch.i,
             '  rankdir=TB;',
             '  node [shape=box];']
    shift_of = dict(nu.vertex_map) if nu is not None else {}
    for v in branch.vertices:
        label = _vertex_label(v, branch.tables[v.index])
        if v.index in shift_of:
            label += " | nu -> %d" % shift_of[v.index]
        lines.append('  v%d [label="%s"];' % (v.index, label))
    for a, b in sorted(branch.edges):
        lines.append("  v%d -> v%d;" % (a, b))
    lines.append("}")
    return "\n".join(lines) + "\n"
