"""Command-line interface: ``honeyvol <command>``.

Commands: enumerate, z, ym, render, oracle, calibrate, selftest.  Every Monte
Carlo command takes ``--seed``; identical command lines give identical
output.  ``--json`` switches from tables to JSON.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from typing import List, Optional

import click

from .errors import GeometryViolation, HoneyvolError, NotSolvable, TruncationInsufficient

EXIT_NOT_SOLVABLE = 2
EXIT_GEOMETRY = 3
EXIT_INPUT = 4


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def _emit(data, as_json: bool, table_rows: Optional[List[str]] = None):
    if as_json:
        click.echo(json.dumps(data, indent=1, sort_keys=True, default=_num))
    else:
        for row in table_rows or []:
            click.echo(row)


def _angles(text: str):
    from .classes import parse_angles

    try:
        return parse_angles(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"cannot parse angle vector {text!r}: {exc}")


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


@click.group()
@click.version_option(package_name="honeyvol")
def main():
    """Honeycomb volumes of flat U(n) moduli and Yang-Mills marginals."""


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------


@main.command("enumerate")
@click.option("--n", "n", type=int, required=True, help="Rank n >= 1.")
@click.option("--d", "d", type=int, required=True, help="Integer 0 <= d <= n.")
@click.option("--json", "as_json", is_flag=True, help="JSON output.")
@click.option("--dump-dir", type=click.Path(file_okay=False), default=None, help="Write each color map to a file.")
def enumerate_cmd(n, d, as_json, dump_dir):
    """List the color maps of the (n, d) grid and their reduced graphs."""
    import os

    from .hivegrid import build_grid, dump_color_map, enumerate_color_maps, m_count
    from .honeycombs import reduce
    from .volumes import cell_system

    if n < 1 or not 0 <= d <= n:
        raise click.UsageError(f"need n >= 1 and 0 <= d <= n, got n={n}, d={d}")
    grid = build_grid(n, d)
    maps = enumerate_color_maps(grid)
    rows = []
    for i, cm in enumerate(maps):
        G = reduce(grid, cm)
        system = cell_system(G)
        rows.append({"index": i, "m_edges": m_count(cm), "vertices": G.graph.n_vertices, "edges": G.graph.n_edges,
                     "chains": len(G.chains), "dimension": system.dimension, "empty_cone": bool(system.empty)})
        if dump_dir:
            os.makedirs(dump_dir, exist_ok=True)
            with open(os.path.join(dump_dir, f"map_n{n}_d{d}_{i:04d}.txt"), "w") as fh:
                fh.write(dump_color_map(grid, cm))
    table = [f"n={n} d={d}: {len(maps)} color maps",
             f"{'index':>5} {'m':>3} {'V':>4} {'E':>4} {'dim':>4} {'empty':>6}"]
    table += [f"{r['index']:>5} {r['m_edges']:>3} {r['vertices']:>4} {r['edges']:>4} {r['dimension']:>4} "
              f"{str(r['empty_cone']):>6}" for r in rows]
    _emit({"n": n, "d": d, "count": len(maps), "maps": rows}, as_json, table)


# ---------------------------------------------------------------------------
# z
# ---------------------------------------------------------------------------


@main.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--boundary", "-b", multiple=True, help="Boundary class, e.g. 14/23,7/23,2/23 (repeat p times).")
@click.option("--method", type=click.Choice(["auto", "exact", "mc", "iterated"]), default="auto", show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--constant", type=float, default=None, help="Triangle constant (default: calibrated or built-in).")
@click.option("--json", "as_json", is_flag=True)
def z(spec_file, boundary, method, samples, seed, jobs, constant, as_json):
    """Evaluate Z_{g,p} for the surface in SPEC_FILE."""
    from .assembler import spec_from_json, z_gp
    from .classes import format_angles

    try:
        spec, data = spec_from_json(_read(spec_file))
    except (ValueError, KeyError, HoneyvolError) as exc:
        click.echo(f"error: {spec_file}: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    texts = list(boundary) or list(data.get("boundaries", []))
    bnds = [_angles(t) for t in texts]
    if len(bnds) != spec.p:
        raise click.UsageError(f"surface has p={spec.p} boundary components, got {len(bnds)} classes")
    if "n" in data and any(b.n != int(data["n"]) for b in bnds):
        raise click.UsageError(f"boundary classes must have n={data['n']} entries")
    try:
        est, rows = z_gp(spec, bnds, method=method, samples=samples, seed=seed, constant=constant, jobs=jobs,
                         breakdown=True)
    except NotSolvable as exc:
        click.echo(f"not solvable: {exc}", err=True)
        sys.exit(EXIT_NOT_SOLVABLE)
    out = {"g": spec.g, "p": spec.p, "n": bnds[0].n, "boundaries": [format_angles(b) for b in bnds],
           "method": est.method, "value": est.value, "stderr": est.stderr, "seed": seed, "samples": est.samples,
           "flags": list(est.flags), "graphs": rows}
    table = [f"Z_{{{spec.g},{spec.p}}} = {_num(est.value)}  (stderr {est.stderr:.3g}, method {est.method})"]
    table += [f"  graph {r['graph']:>4} ds={r['ds']} dim={r['dimension']} {r['method']}: {_num(r['value'])}"
              for r in rows if r["value"]]
    _emit(out, as_json, table)


# ---------------------------------------------------------------------------
# ym
# ---------------------------------------------------------------------------


@main.command()
@click.argument("tree_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--constant", type=float, default=None)
@click.option("--normalization", type=click.Choice(["lattice", "volume"]), default="lattice", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def ym(tree_file, samples, seed, constant, normalization, as_json):
    """Yang-Mills marginal density of the loop classes in TREE_FILE."""
    from .errors import InvalidTree
    from .yangmills import load_loop_tree, ym_marginal

    try:
        tree = load_loop_tree(_read(tree_file))
        est = ym_marginal(tree, samples=samples, seed=seed, constant=constant, normalization=normalization)
    except InvalidTree as exc:
        click.echo(f"error: {tree_file}: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    out = {"value": est.value, "stderr": est.stderr, "seed": seed, "samples": samples, "factors": est.factors}
    table = [f"YM = {est.value:.6g}  (stderr {est.stderr:.3g})"]
    table += [f"  vertex {f['vertex']}: area={f['area']} genus={f['genus']} degree={f['degree']} {f['route']}: "
              f"{f['value']:.6g}  args={f['arguments']}" for f in est.factors]
    _emit(out, as_json, table)


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


@main.command()
@click.option("--n", "n", type=int, default=None)
@click.option("--d", "d", type=int, default=None)
@click.option("--colors", "colors_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Color map file (edgeId:color lines).")
@click.option("--index", type=int, default=None, help="Color map by enumeration index.")
@click.option("--alpha", default=None)
@click.option("--beta", default=None)
@click.option("--gamma", default=None, help="Third class as read on the hive boundary.")
@click.option("--kind", type=click.Choice(["hive", "honeycomb", "auto"]), default="auto", show_default=True)
@click.option("--heights", "heights_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON list of edge heights of the reduced graph (overrides the cell center).")
@click.option("--size", type=int, default=400, show_default=True)
@click.option("--out", "out_file", type=click.Path(dir_okay=False), required=True)
def render(n, d, colors_file, index, alpha, beta, gamma, kind, heights_file, size, out_file):
    """Write the hive (color map, boundary labels) or the honeycomb as SVG."""
    from .hivegrid import build_grid, enumerate_color_maps, load_color_map, require_color_map
    from .honeycombs import (hive_boundary_labels, hive_svg, honeycomb_in_cell, honeycomb_svg, realize, reduce)

    if colors_file:
        nd, colors = load_color_map(_read(colors_file))
        if nd is None and (n is None or d is None):
            raise click.UsageError("color map file has no header; pass --n and --d")
        n, d = nd if nd is not None else (n, d)
        grid = build_grid(n, d)
        try:
            require_color_map(grid, colors)
        except HoneyvolError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        maps = [colors]
    else:
        if n is None or d is None:
            raise click.UsageError("pass --colors or --n/--d")
        grid = build_grid(n, d)
        maps = enumerate_color_maps(grid)
        if index is not None:
            if not 0 <= index < len(maps):
                raise click.UsageError(f"index must be in [0, {len(maps)})")
            maps = [maps[index]]
    bnd = None
    if alpha or beta or gamma:
        if not (alpha and beta and gamma):
            raise click.UsageError("pass all of --alpha, --beta, --gamma")
        bnd = (_angles(alpha), _angles(beta), _angles(gamma))
    want = kind
    if want == "auto":
        want = "honeycomb" if (bnd is not None or heights_file) else "hive"
    if want == "hive":
        labels = hive_boundary_labels(grid, *bnd) if bnd is not None else None
        svg = hive_svg(grid, maps[0], labels, size=size)
    else:
        try:
            if heights_file:
                G = reduce(grid, maps[0])
                heights = [Fraction(h) if isinstance(h, str) else h for h in json.loads(_read(heights_file))]
                real = realize(G, heights)
            else:
                if bnd is None:
                    raise click.UsageError("a honeycomb needs --alpha/--beta/--gamma or --heights")
                real, G = None, None
                for cm in maps:
                    G = reduce(grid, cm)
                    real = honeycomb_in_cell(G, *bnd)
                    if real is not None:
                        break
                if real is None:
                    click.echo("no color map has a nonempty cell for this boundary", err=True)
                    sys.exit(EXIT_NOT_SOLVABLE)
        except GeometryViolation as exc:
            click.echo(f"geometry violation: {exc} (offending: {exc.offending})", err=True)
            sys.exit(EXIT_GEOMETRY)
        svg = honeycomb_svg(G, real, size=size)
    with open(out_file, "w") as fh:
        fh.write(svg)
    click.echo(f"wrote {out_file}")


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


@main.group()
def oracle():
    """Independent oracles: lattice sums and the orbit product sampler."""


@oracle.command("lattice")
@click.option("--g", "g", type=int, default=0, show_default=True)
@click.option("--T", "T", type=float, required=True)
@click.option("--alpha", "alphas", multiple=True, help="Boundary class (repeat p times).")
@click.option("--n", "n", type=int, default=None, help="Rank, needed when no class is given.")
@click.option("--radius", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def oracle_lattice(g, T, alphas, n, radius, as_json):
    """Heat-kernel lattice partition function."""
    from .yangmills import lattice_oracle, lattice_oracle_closed

    cls = [_angles(a) for a in alphas]
    try:
        if cls:
            val = lattice_oracle(g, len(cls), T, cls, R=radius)
        else:
            if n is None:
                raise click.UsageError("pass --n for a closed surface")
            val = lattice_oracle_closed(n, g, T, R=radius)
    except TruncationInsufficient as exc:
        click.echo(f"truncation insufficient: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except HoneyvolError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    _emit({"g": g, "p": len(cls), "T": T, "value": val}, as_json, [f"{val:.12g}"])


@oracle.command("orbit")
@click.option("--alpha", required=True)
@click.option("--beta", required=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--bins", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def oracle_orbit(alpha, beta, samples, bins, seed, as_json):
    """Histogram of the largest angle of (UV)^{-1} for Haar conjugates."""
    from .yangmills import orbit_product_sampler, slice_histogram

    S = orbit_product_sampler(_angles(alpha), _angles(beta), samples, seed=seed)
    counts, edges = slice_histogram(S, bins)
    out = {"samples": samples, "seed": seed, "edges": edges.tolist(), "counts": counts.tolist()}
    table = [f"[{edges[i]:.3f}, {edges[i + 1]:.3f}) {counts[i]}" for i in range(bins)]
    _emit(out, as_json, table)


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------


@main.command("calibrate")
@click.option("--n", "n", type=int, default=3, show_default=True)
@click.option("--T", "T", type=float, default=0.5, show_default=True)
@click.option("--triple", multiple=True, help="Reference classes (3 times); default built in for n=3.")
@click.option("--samples", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--store", type=click.Path(dir_okay=False), default=None,
              help="Calibration file (default: $HONEYVOL_CALIBRATION).")
@click.option("--json", "as_json", is_flag=True)
def calibrate_cmd(n, T, triple, samples, seed, store, as_json):
    """Fit the triangle constant against the lattice oracle and store it."""
    from .assembler import calibration_path, save_calibration
    from .yangmills import calibrate as fit

    tri = [_angles(t) for t in triple] if triple else None
    if tri is not None and len(tri) != 3:
        raise click.UsageError("pass exactly three --triple classes")
    res = fit(n, T, tri, samples=samples, seed=seed)
    path = store or calibration_path()
    if path:
        save_calibration(n, res["c03"], path)
        res["store"] = path
    _emit(res, as_json, [f"c03(n={n}) = {res['c03']:.8g}  (ratio to default {res['ratio']:.6g}, "
                         f"rel. stderr {res['rel_stderr']:.2%})" + (f"; stored in {path}" if path else "")])


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


@main.command()
@click.option("--level", type=click.Choice(["fast", "full"]), default="fast", show_default=True)
@click.option("--json", "as_json", is_flag=True)
def selftest(level, as_json):
    """Run the acceptance checks (fast: structural; full: with oracles)."""
    from .acceptance import run

    results = run(level)
    ok = all(r.passed for r in results)
    _emit({"level": level, "passed": ok, "results": [r.to_dict() for r in results]}, as_json,
          [r.line() for r in results] + [f"{'PASS' if ok else 'FAIL'}: {sum(r.passed for r in results)}/{len(results)}"])
    sys.exit(0 if ok else 1)


if __name__ == "__main__":  # pragma: no cover
    main()
