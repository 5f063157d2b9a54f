"""Command-line entry point.

Exit codes: 0 on success, 1 when a verified mathematical claim fails to
hold, 2 on usage or validation errors.  All reports are JSON with numeric
values rendered as decimal strings; identical invocations produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import coclass_tree, cohomology, extensions, groups, modules, pairs, scenarios
from .scenarios import Scenario, ScenarioError


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> Scenario:
    scn = scenarios.load_scenario(args.scenario)
    if getattr(args, "precision", None):
        data = dict(scenarios.BUILTIN_SCENARIOS.get(args.scenario, {}))
        if not data:
            with open(args.scenario) as fh:
                data = json.load(fh)
        data["precision"] = int(args.precision)
        scn = scenarios.scenario_from_dict(data)
    return scn


def _with_precision(scn: Scenario, precision: int) -> Scenario:
    data = {
        "name": scn.name, "p": scn.p, "rank": scn.rank,
        "precision": precision, "depth": scn.depth, "group": scn.group_spec,
        "action": scn.action, "top_offset": scn.top_offset,
        "pro_coclass": scn.pro_coclass,
    }
    return scenarios.scenario_from_dict(data)


def _invariants_at(scn: Scenario, n: int, degree: int) -> list[int]:
    Q = scn.quotient(n)
    H = cohomology.cohomology_group(cohomology.finite_coefficients(Q.module), degree)
    return H.invariants()


def cmd_cohomology(args) -> int:
    scn = _load(args)
    inv = _invariants_at(scn, args.n, args.degree)
    recheck = _invariants_at(_with_precision(scn, scn.precision + 2), args.n, args.degree)
    report = {
        "scenario": scn.name,
        "n": str(args.n),
        "degree": str(args.degree),
        "invariants": [str(x) for x in inv],
        "order": str(int(np.prod([int(x) for x in inv])) if inv else 1),
        "precision": str(scn.precision),
        "recheck_precision": str(scn.precision + 2),
        "stable": inv == recheck,
    }
    _emit(report, args.out)
    return 0 if inv == recheck else 1


def cmd_orbits(args) -> int:
    scn = _load(args)
    Q = scn.quotient(args.n)
    H = cohomology.cohomology_group(cohomology.finite_coefficients(Q.module), 2)
    part = pairs.orbits_on_h2(H, pairs.compatible_pairs(Q.module))
    report = {
        "scenario": scn.name,
        "n": str(args.n),
        "h2_invariants": [str(x) for x in H.invariants()],
        "orbit_count": str(part.count),
        "orbit_sizes": [str(s) for s in part.sizes],
        "stabilizer_sizes": [str(s) for s in part.stabilizer_sizes],
        "acting_order": str(part.acting_order),
        "representatives": [[str(c) for c in cl[0]] for cl in part.classes],
    }
    _emit(report, args.out)
    return 0


def cmd_correspondence(args) -> int:
    scn = _load(args)
    rep = scenarios.orbit_correspondence_report(scn, args.n)
    _emit(rep.as_dict(), args.out)
    return 0 if rep.ok else 1


def cmd_extend(args) -> int:
    scn = _load(args)
    with open(args.cocycle) as fh:
        data = json.load(fh)
    if "level" not in data:
        raise ScenarioError("cocycle file is missing the field 'level'")
    n = int(data["level"])
    top = scn.top()
    Q = top.quotient(n)
    H = cohomology.finite_cohomology(Q.module, 2)
    if "coords" in data:
        row = H.representative(np.array([int(x) for x in data["coords"]], dtype=np.int64))
    elif "row" in data:
        row = np.array([int(x) for x in data["row"]], dtype=np.int64)
    elif data.get("mainline"):
        row = top.mainline_cocycle(n, Q)
    else:
        raise ScenarioError("cocycle file needs 'coords', 'row', or 'mainline'")
    ext = extensions.build_extension(top.group, Q.module, row)
    cc, flag = extensions.coclass_of_extension(ext, l=top.l)
    report = {
        "scenario": scn.name,
        "level": str(n),
        "order": str(ext.order),
        "nilpotency_class": str(groups.nilpotency_class(ext.table)),
        "coclass": str(cc),
        "has_top_coclass": flag,
        "class_coords": [str(int(x)) for x in H.coords(row)],
        "fiber_invariants": [str(x) for x in Q.module.invariants()],
    }
    _emit(report, args.out)
    return 0


def _branch_dict(br: coclass_tree.BranchGraph) -> dict:
    return {
        "scenario": br.scenario,
        "i": str(br.i),
        "k": str(br.k),
        "root_level": str(br.root_level),
        "vertices": [{
            "index": str(v.index),
            "level": str(v.level),
            "distance": str(v.distance),
            "order": str(v.order),
            "mainline": v.mainline,
            "class_coords": [str(c) for c in v.class_coords],
            "parent": None if v.parent is None else str(v.parent),
        } for v in br.vertices],
        "edges": [[str(a), str(b)] for a, b in sorted(br.edges)],
    }


def cmd_branch(args) -> int:
    scn = _load(args)
    br = coclass_tree.build_branch(scn, args.i, args.k)
    report = {"branch": _branch_dict(br)}
    nu = None
    if args.shift:
        nu, dst = coclass_tree.nu_shift(scn, br)
        report["shifted_branch"] = _branch_dict(dst)
        report["shift"] = {
            "ok": nu.ok,
            "vertex_map": [[str(a), str(b)] for a, b in nu.vertex_map],
            "failures": nu.failures,
        }
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(coclass_tree.export_dot(br, nu))
    _emit(report, args.out)
    if args.shift and not nu.ok:
        return 1
    return 0


def cmd_verify_counterexample(args) -> int:
    scn = _load(args)
    scan = scenarios.summand_instability_witness(scn)
    corr = scenarios.orbit_correspondence_report(scn)
    report = {
        "summand_scan": scan.as_dict(),
        "orbit_correspondence": corr.as_dict(),
        "ok": scan.found and scan.lifted_endomorphisms_stable and corr.ok,
    }
    _emit(report, args.out)
    return 0 if report["ok"] else 1


def cmd_verify_lcs(args) -> int:
    scn = _load(args)
    rep = scenarios.check_lower_central_series(scn, max_order=args.max_order)
    _emit(rep.as_dict(), args.out)
    return 0 if rep.ok else 1


def cmd_run_all(args) -> int:
    names = [args.scenario] if args.scenario else list(scenarios.BUILTIN_SCENARIOS)
    failures = []
    report: dict = {"scenarios": {}}
    for name in names:
        scn = scenarios.load_scenario(name)
        entry: dict = {}
        bounds = scn.bounds()
        n = bounds.least_qualifying()
        entry["bounds"] = {"a": str(bounds.a_exp), "b": str(bounds.b_exp),
                           "v": str(bounds.v), "least_qualifying_n": str(n)}
        lcs = scenarios.check_lower_central_series(scn, max_order=args.max_order)
        entry["lcs"] = lcs.as_dict()
        if not lcs.ok:
            failures.append("%s: lower central series" % name)
        corr = scenarios.orbit_correspondence_report(scn, n)
        entry["correspondence"] = corr.as_dict()
        if not corr.ok:
            failures.append("%s: orbit correspondence" % name)
        scan = scenarios.summand_instability_witness(scn)
        entry["summand_scan"] = scan.as_dict()
        if not scan.lifted_endomorphisms_stable:
            failures.append("%s: lifted endomorphism moved the summand" % name)
        top = scn.top()
        i0 = max(top.l + 1, top.l + bounds.v * scn.period())
        try:
            br = coclass_tree.build_branch(scn, i0, 1)
            nu, dst = coclass_tree.nu_shift(scn, br)
            entry["branch"] = _branch_dict(br)
            entry["shift_ok"] = nu.ok
            if not nu.ok:
                failures.append("%s: branch shift" % name)
        except coclass_tree.BranchError as exc:
            entry["branch_skipped"] = str(exc)
        report["scenarios"][name] = entry
    report["failures"] = failures
    report["ok"] = not failures
    _emit(report, args.out)
    return 0 if not failures else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coclass",
        description="Cohomological classification toolkit for prime-power "
                    "groups of fixed coclass.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_required=False):
        p.add_argument("--scenario", required=True,
                       help="built-in name (%s) or JSON file path"
                            % ", ".join(sorted(scenarios.BUILTIN_SCENARIOS)))
        p.add_argument("--precision", type=int, default=None,
                       help="override the working precision exponent")
        p.add_argument("--out", default=None, help="write the JSON report here")

    p = sub.add_parser("cohomology", help="abelian invariants of H^m(R, A_n)")
    common(p)
    p.add_argument("--n", type=int, required=True, help="chain level")
    p.add_argument("--degree", type=int, default=2, choices=(0, 1, 2, 3))
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("orbits", help="compatible-pair orbits on H^2(R, A_n)")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("correspondence",
                       help="orbit bijection between levels n and n + period")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_correspondence)

    p = sub.add_parser("extend", help="build the extension of a cocycle class")
    common(p)
    p.add_argument("--cocycle", required=True,
                   help="JSON file with 'level' plus 'coords', 'row', or 'mainline'")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("branch", help="build a branch of the descendant tree")
    common(p)
    p.add_argument("--i", type=int, required=True, help="branch index")
    p.add_argument("--k", type=int, default=1, help="distance cap")
    p.add_argument("--shift", action="store_true",
                   help="also build branch i + period and certify the shift")
    p.add_argument("--dot", default=None, help="write DOT output to this file")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("verify-counterexample",
                       help="summand instability scan plus the orbit correspondence")
    common(p)
    p.set_defaults(func=cmd_verify_counterexample)

    p = sub.add_parser("verify-lcs",
                       help="identify the lower central series of the finite quotients")
    common(p)
    p.add_argument("--max-order", type=int, default=1024)
    p.set_defaults(func=cmd_verify_lcs)

    p = sub.add_parser("run-all", help="full verification sweep")
    p.add_argument("--scenario", default=None)
    p.add_argument("--max-order", type=int, default=512)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run_all)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ScenarioError, coclass_tree.BranchError, extensions.ExtensionError,
            modules.ModuleError, cohomology.CohomologyError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
