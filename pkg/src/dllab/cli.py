"""Command-line interface for the Diestel-Leader laboratory.

Three subcommands:

* ``graph``   exports a ball or a box slice of DL_d(q) (or its index-k
  variant) as DOT or JSON;
* ``verify``  runs the exact structural check suites (counting, isoperimetric
  ratios, group correspondence, index-k subgroup) and prints one PASS/FAIL
  line per check;
* ``qilab``   runs the quasi-isometry laboratory: chain scans, fiber-count
  audits, the k-to-1 tile map, and distortion sampling.

All outputs are byte-deterministic: vertices are sorted by canonical key,
JSON uses sorted keys, CSV uses a fixed line terminator, and randomized
modes take an explicit seed.  ``--workers`` bounds worker processes for
fiber scans; results are merged in input order so worker count never
changes output bytes.  A ``--config`` file holds ``key=value`` lines
supplying defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import Counter
from fractions import Fraction

from . import dlgraph, group, qilab
from .algebra import ring_params
from .dlgraph import (
    ball,
    base_vertex,
    box_graph,
    box_members,
    canonical_box,
    cube_size,
    dl_distance,
    dl_key,
    dl_neighbors,
    dl_vertex,
    expected_degree,
    export_dot,
    export_json,
    graph_params,
    height_cube,
    rho,
    sphere_sizes,
)

NAMED_MAPS = {
    "id": [],
    "alpha": [{"kind": "shift", "m": 1}],
    "alpha-inv": [{"kind": "shift", "m": -1}],
}

_CONFIG_CONVERTERS = {
    "d": int,
    "q": int,
    "k": int,
    "radius": int,
    "r": int,
    "seed": int,
    "workers": int,
    "pairs": int,
    "h": str,
    "map": str,
    "format": str,
    "out": str,
    "mode": str,
    "assert": str,
}


def _load_config(path: str) -> dict:
    """Read key=value lines; blank lines and # comments are skipped."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_CONVERTERS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            out["assertion" if key == "assert" else key] = _CONFIG_CONVERTERS[key](
                value.strip()
            )
    return out


def _emit(payload: str, out_path, summary_lines) -> None:
    """Write the payload to --out (or stdout) and summaries alongside.

    With --out the payload goes to the file and summaries to stdout; without
    it the payload owns stdout and summaries go to stderr, so piped payload
    bytes stay clean either way.
    """
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        for line in summary_lines:
            print(line)
    else:
        sys.stdout.write(payload)
        for line in summary_lines:
            print(line, file=sys.stderr)


def _parse_h_list(text: str) -> "list[int]":
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ValueError(f"--h expects integers separated by commas, got {text!r}")
    if not values:
        raise ValueError("--h list is empty")
    return values


def _interior_map_from_arg(params, text: str) -> qilab.InteriorMap:
    """Build an interior map from a CLI spec.

    Accepts a comma list of named coordinate maps (id, alpha, alpha-inv,
    shift:m), a JSON list of per-coordinate primitive descriptions, or
    @path to a file holding that JSON.
    """
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            text = fh.read().strip()
    if text.startswith("["):
        descs = json.loads(text)
    else:
        descs = []
        for name in text.split(","):
            name = name.strip()
            if name in NAMED_MAPS:
                descs.append(NAMED_MAPS[name])
            elif name.startswith("shift:"):
                descs.append([{"kind": "shift", "m": int(name[6:])}])
            else:
                raise ValueError(f"unknown coordinate map {name!r}")
    if len(descs) != params.d:
        raise ValueError(f"map spec has {len(descs)} coordinates, graph has {params.d}")
    maps = tuple(qilab.map_from_description(params.q, d) for d in descs)
    return qilab.interior_map(params, maps)


# ---------------------------------------------------------------------------
# graph subcommand

def cmd_graph(args) -> int:
    params = graph_params(args.d, args.q, args.k)
    if (args.radius is None) == (args.h is None):
        raise ValueError("graph needs exactly one of --radius or --h")
    if args.radius is not None:
        g = ball(base_vertex(params), args.radius)
    else:
        (h,) = _parse_h_list(args.h)
        cube = height_cube([(0, h)] * (params.d - 1), params.k)
        g = box_graph(params, canonical_box(params, cube))
    if args.format == "dot":
        payload = export_dot(g)
    elif args.format == "json":
        payload = export_json(g)
    else:
        raise ValueError(f"graph supports dot or json, not {args.format!r}")
    _emit(payload, args.out, [])
    return 0


# ---------------------------------------------------------------------------
# verify subcommand

def _check_counting(params, h) -> "list[tuple[str, bool, str]]":
    cube = height_cube([(0, h)] * (params.d - 1), params.k)
    box = canonical_box(params, cube)
    expected_fiber = params.q ** ((params.d - 1) * h)
    fibers = {
        dlgraph.box_fiber_size(params, box, pt) for pt in dlgraph.cube_points(cube)
    }
    size_ok = dlgraph.box_size(params, box) == cube_size(cube) * expected_fiber
    deg = len(dl_neighbors(base_vertex(params)))
    checks = [
        (
            "counting.fibers",
            fibers == {expected_fiber},
            f"box fibers over [0,{h}]^{params.d - 1} all q^((d-1)h)={expected_fiber}: got {sorted(fibers)}",
        ),
        (
            "counting.box_size",
            size_ok,
            f"box size {dlgraph.box_size(params, box)} = cube {cube_size(cube)} x fiber {expected_fiber}",
        ),
        (
            "counting.degree",
            deg == expected_degree(params),
            f"vertex degree {deg} matches formula {expected_degree(params)}",
        ),
    ]
    return checks


def _check_folner(params, r, h_values=(2, 4, 6)) -> "list[tuple[str, bool, str]]":
    ratios = []
    for h in h_values:
        cube = height_cube([(0, h)] * (params.d - 1), params.k)
        box = canonical_box(params, cube)
        vset = dlgraph.cube_points(cube)
        vboundary = dlgraph.cube_boundary(params, cube, r)
        box_ratio = Fraction(
            dlgraph.box_boundary_size(params, box, r), dlgraph.box_size(params, box)
        )
        cube_ratio = Fraction(len(vboundary), len(vset))
        ratios.append((h, box_ratio, cube_ratio))
    identity_ok = all(b == c for _, b, c in ratios)
    decreasing = all(ratios[i][1] > ratios[i + 1][1] for i in range(len(ratios) - 1))
    detail = ", ".join(f"h={h}: {b}" for h, b, _ in ratios)
    return [
        (
            "folner.identity",
            identity_ok,
            f"box boundary ratio equals height-set ratio at r={r} ({detail})",
        ),
        (
            "folner.decreasing",
            decreasing,
            f"boundary ratio strictly decreases in h at r={r}",
        ),
    ]


def _check_correspondence(params, radius) -> "tuple[list, object]":
    report = group.validate_correspondence(ring_params(params.q, params.d), radius)
    checks = [
        (
            "correspondence.spheres",
            report.sphere_group == report.sphere_graph,
            f"group spheres {report.sphere_group} match graph spheres {report.sphere_graph}",
        ),
        (
            "correspondence.isomorphism",
            report.ok,
            f"radius-{radius} ball maps isomorphically"
            + ("" if report.ok else f": {report.failures[:3]}"),
        ),
    ]
    return checks, report


def _check_index(params, depth=3) -> "list[tuple[str, bool, str]]":
    rp = ring_params(params.q, params.d)
    k = params.k
    ball_k = group.cayley_ball(rp, k)
    cosets = {group.coset_index(g, k) for g in ball_k.elements}
    amb = group.cayley_ball(rp, depth)
    positives = [g for g in amb.elements if group.subgroup_membership(g, k)]
    sub = group.subgroup_ball(rp, k, depth)
    sub_keys = {group.element_key(g) for g in sub.elements}
    covered = all(group.element_key(g) in sub_keys for g in positives)
    return [
        (
            "index.cosets",
            cosets == set(range(k)),
            f"radius-{k} ball meets exactly k={k} cosets: {sorted(cosets)}",
        ),
        (
            "index.coverage",
            covered,
            f"{len(positives)} membership-positive elements of the radius-{depth} "
            f"ball all reached by depth-{depth} subgroup words",
        ),
    ]


def cmd_verify(args) -> int:
    params = graph_params(args.d, args.q, args.k)
    suite = args.assertion or "all"
    checks = []
    report = None
    if suite in ("counting", "all"):
        h = _parse_h_list(args.h)[0] if args.h else 2
        checks.extend(_check_counting(params, h))
    if suite in ("folner", "all"):
        checks.extend(_check_folner(params, args.r if args.r is not None else 1))
    if suite in ("correspondence", "all"):
        radius = args.radius if args.radius is not None else 3
        got, report = _check_correspondence(params, radius)
        checks.extend(got)
    if suite in ("index", "all"):
        if params.k > 1:
            checks.extend(_check_index(params))
        elif suite == "index":
            raise ValueError("index suite needs --k >= 2")
    if not checks:
        raise ValueError(f"unknown verify suite {args.assertion!r}")
    failures = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    if args.out and report is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["radius", "sphere_size", "ball_size"])
        total = 0
        for rr, size in enumerate(report.sphere_group):
            total += size
            writer.writerow([rr, size, total])
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# qilab subcommand

def _chain_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["h", "box_size", "boundary_size", "chain_sum", "ratio_boundary", "ratio_box"]
    )
    for rec in records:
        writer.writerow(
            [
                rec.h,
                rec.box_size,
                rec.boundary_size,
                rec.chain_sum,
                repr(float(rec.ratio_boundary)),
                repr(float(rec.ratio_box)),
            ]
        )
    return buf.getvalue()


def _qilab_chain(args, params, imap) -> "tuple[str, list, int]":
    h_values = _parse_h_list(args.h or "2,4,6")
    if args.k is not None:
        target = args.k
    else:
        inv = 1 / imap.lam_product()
        if inv.denominator != 1:
            raise ValueError(
                f"1/lambda = {inv} is not an integer; pass an explicit --k target"
            )
        target = int(inv)
    records = qilab.uf_chain_scan(
        imap, target, h_values, r=args.r if args.r is not None else 1,
        workers=args.workers,
    )
    payload = _chain_csv(records)
    summaries = [
        f"chain target k={target}, h={h_values}, "
        f"ratios {[str(r.ratio_boundary) for r in records]}"
    ]
    status = 0
    if args.assertion == "bounded":
        ok = all(abs(r.ratio_boundary) <= 1 for r in records)
        summaries.append(
            "PASS chain.bounded: |chain|/|boundary| <= 1 at every h"
            if ok
            else "FAIL chain.bounded: |chain|/|boundary| exceeds 1"
        )
        status = 0 if ok else 1
    elif args.assertion == "divergence":
        first, last = abs(records[0].ratio_boundary), abs(records[-1].ratio_boundary)
        increasing = all(
            abs(records[i].ratio_boundary) < abs(records[i + 1].ratio_boundary)
            for i in range(len(records) - 1)
        )
        ok = increasing and first > 0 and last >= 2 * first
        summaries.append(
            "PASS chain.divergence: boundary-normalized sums grow (last >= 2x first)"
            if ok
            else "FAIL chain.divergence: no boundary-rate growth detected"
        )
        status = 0 if ok else 1
    elif args.assertion:
        raise ValueError(f"chain mode supports --assert bounded|divergence, not {args.assertion!r}")
    return payload, summaries, status


_AUDIT_FIELDS = (
    "h",
    "box_size",
    "boundary_size",
    "r",
    "bilip",
    "lam_product",
    "total_preimages",
    "lower_bound",
    "upper_bound",
    "bounds_ok",
    "interior_constant",
    "interior_value",
)


def _audit_cell(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def _qilab_audit(args, params, imap) -> "tuple[str, list, int]":
    h_values = _parse_h_list(args.h or "4")
    boxes = [
        canonical_box(params, height_cube([(0, h)] * (params.d - 1), params.k))
        for h in h_values
    ]
    audits = [
        qilab.fiber_count_audit(imap, box, r=args.r, workers=args.workers)
        for box in boxes
    ]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_AUDIT_FIELDS)
        for audit in audits:
            writer.writerow([_audit_cell(getattr(audit, f)) for f in _AUDIT_FIELDS])
        payload = buf.getvalue()
    else:
        rows = [
            {f: _audit_cell(getattr(audit, f)) for f in _AUDIT_FIELDS}
            for audit in audits
        ]
        payload = (
            json.dumps(
                rows[0] if len(rows) == 1 else rows,
                sort_keys=True,
                separators=(",", ":"),
            )
            + "\n"
        )
    summaries = [
        f"audit h={a.h}: {a.lower_bound} <= {a.total_preimages} <= {a.upper_bound}"
        for a in audits
    ]
    status = 0
    if args.assertion == "bounded":
        all_ok = all(a.bounds_ok for a in audits)
        summaries.append(
            "PASS audit.bounded: total preimages within two-sided bounds"
            if all_ok
            else "FAIL audit.bounded: total preimages escape the bounds"
        )
        status = 0 if all_ok else 1
    elif args.assertion:
        raise ValueError(f"audit mode supports --assert bounded, not {args.assertion!r}")
    return payload, summaries, status


def _qilab_umap(args, params) -> "tuple[str, list, int]":
    k = args.k
    if k is None or k < 2:
        raise ValueError("umap mode needs --k >= 2 (the index of the target lattice)")
    side = int(args.h) if args.h else 3 * k
    region = height_cube([(0, side - 1)] * (params.d - 1))
    tiling = qilab.make_tiling(params, region, k)
    table = qilab.umap_eval(tiling, k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "image_key", "displacement"])
    for x, y in table.items():
        disp = dl_distance(x, dl_vertex(params, y.coords))
        writer.writerow([dl_key(x), dl_key(y), disp])
    hits = Counter(dl_key(y) for y in table.values())
    expected = {
        dl_key(x)
        for x in box_members(params, tiling.ambient)
        if rho(x)[0] % k == 0
    }
    exact = set(hits.values()) == {k} and set(hits) == expected
    summaries = [
        f"umap: {len(table)} vertices onto {len(hits)} images, "
        f"multiplicities {sorted(set(hits.values()))}"
    ]
    status = 0
    if args.assertion == "ktoone":
        summaries.append(
            f"PASS umap.ktoone: exactly {k}-to-1 onto the index-{k} sublattice"
            if exact
            else "FAIL umap.ktoone: image multiplicities are not uniform"
        )
        status = 0 if exact else 1
    elif args.assertion:
        raise ValueError(f"umap mode supports --assert ktoone, not {args.assertion!r}")
    return buf.getvalue(), summaries, status


def _qilab_distortion(args, params, imap) -> "tuple[str, list, int]":
    h_values = _parse_h_list(args.h or "4")
    cube = height_cube([(0, h_values[0])] * (params.d - 1), params.k)
    box = canonical_box(params, cube)
    members = sorted(box_members(params, box), key=dl_key)
    table = qilab.psi_eval(imap, members)
    report = qilab.distortion(table, n_pairs=args.pairs, seed=args.seed)
    payload = (
        json.dumps(
            {
                "pairs": report.pairs,
                "k_est": str(report.k_est),
                "c_est": str(report.c_est),
                "max_displacement": report.max_displacement,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        + "\n"
    )
    return payload, [f"distortion: K={report.k_est} C={report.c_est}"], 0


def cmd_qilab(args) -> int:
    params = graph_params(args.d, args.q, 1)
    if args.mode == "umap":
        payload, summaries, status = _qilab_umap(args, params)
    else:
        imap = _interior_map_from_arg(params, args.map or "alpha" + ",id" * (params.d - 1))
        if args.mode == "chain":
            payload, summaries, status = _qilab_chain(args, params, imap)
        elif args.mode == "audit":
            payload, summaries, status = _qilab_audit(args, params, imap)
        elif args.mode == "distortion":
            payload, summaries, status = _qilab_distortion(args, params, imap)
        else:
            raise ValueError(f"unknown qilab mode {args.mode!r}")
    _emit(payload, args.out, summaries)
    return status


# ---------------------------------------------------------------------------
# parser

def _add_common(sub, *names):
    if "d" in names:
        sub.add_argument("--d", type=int, default=2, help="number of tree coordinates")
    if "q" in names:
        sub.add_argument("--q", type=int, default=2, help="branching prime")
    if "k" in names:
        sub.add_argument("--k", type=int, default=None, help="index parameter")
    if "radius" in names:
        sub.add_argument("--radius", type=int, default=None, help="ball radius")
    if "h" in names:
        sub.add_argument("--h", type=str, default=None, help="box side(s), comma separated")
    if "r" in names:
        sub.add_argument("--r", type=int, default=None, help="boundary thickness")
    if "map" in names:
        sub.add_argument(
            "--map",
            type=str,
            default=None,
            help="coordinate maps: names (alpha,id), JSON, or @file",
        )
    if "format" in names:
        sub.add_argument("--format", choices=("dot", "json", "csv"), default=None)
    if "out" in names:
        sub.add_argument("--out", type=str, default=None, help="write payload to file")
    if "seed" in names:
        sub.add_argument("--seed", type=int, default=0, help="sampling seed")
    if "workers" in names:
        sub.add_argument("--workers", type=int, default=1, help="worker processes")
    sub.add_argument("--config", type=str, default=None, help="key=value defaults file")


def build_parser() -> "tuple[argparse.ArgumentParser, list]":
    parser = argparse.ArgumentParser(
        prog="dllab",
        description="exact Diestel-Leader graph and quasi-isometry laboratory",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    g = subs.add_parser("graph", help="export a ball or box slice")
    _add_common(g, "d", "q", "radius", "h", "format", "out", "workers")
    g.add_argument("--k", type=int, default=1, help="index parameter")
    g.set_defaults(func=cmd_graph)

    v = subs.add_parser("verify", help="run exact structural check suites")
    _add_common(v, "d", "q", "radius", "h", "r", "out", "workers")
    v.add_argument("--k", type=int, default=1, help="index parameter")
    v.add_argument(
        "--assert",
        dest="assertion",
        choices=("counting", "folner", "correspondence", "index", "all"),
        default="all",
    )
    v.set_defaults(func=cmd_verify)

    ql = subs.add_parser("qilab", help="quasi-isometry laboratory")
    _add_common(ql, "d", "q", "k", "h", "r", "map", "format", "out", "seed", "workers")
    ql.add_argument(
        "--mode", choices=("chain", "audit", "umap", "distortion"), default="chain"
    )
    ql.add_argument("--pairs", type=int, default=30, help="distortion sample pairs")
    ql.add_argument(
        "--assert",
        dest="assertion",
        choices=("bounded", "divergence", "ktoone"),
        default=None,
    )
    ql.set_defaults(func=cmd_qilab)
    return parser, [g, v, ql]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    config_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    if config_path:
        try:
            defaults = _load_config(config_path)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        # subcommands parse into a fresh namespace, so defaults must be
        # installed per subparser; explicit flags still win
        for sub in subparsers:
            sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command == "graph" and args.format is None:
        args.format = "dot"
    try:
        return args.func(args)
    except (ValueError, dlgraph.BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
