"""Command-line entry point: ``valleyscape <command> [flags]``.

Every command echoes the resolved RunConfig (as ``# key=value`` lines)
before its results. Flags override values read from ``--config``.
Exit codes: 0 ok, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from pathlib import Path

import numpy as np

from valleyscape import neighborhood, pca, render
from valleyscape.errors import ConfigError, ValleyscapeError
from valleyscape.landscape import Domain, Landscape, grid_evaluate
from valleyscape.registry import DESCRIPTIONS, parse_function, split_labels
from valleyscape.sampling import RunConfig, job_stream_id


class UsageError(Exception):
    pass


# keys of the RunConfig text format, mapped from argparse destinations
_CONFIG_FLAGS = {"seed": "seed", "n": "n", "m": "m", "domain": "domain", "deltas": "deltas",
                 "samples": "samples", "function": "function"}


def _add_config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    p.add_argument("--config", help="key=value config file; flags override its values")
    helps = {
        "seed": "base seed (default 0)",
        "n": "population size N (default 100)",
        "m": "selection size M (default 10)",
        "domain": "box as lo:hi[,lo:hi...] (default -10:10,-10:10)",
        "deltas": "comma-separated neighborhood half-widths (default 0.5,1,2,5,10)",
        "samples": "Monte-Carlo samples per estimate (default 100000)",
        "function": "landscape label, see list-functions (default elliptic:1,0.01)",
    }
    for name in names:
        p.add_argument(f"--{name}", help=helps[name])


def _add_points(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--point", action="append", help="point x1,...,xd (repeatable)")
    g.add_argument("--points", help="semicolon-separated points, e.g. '0,1;0,2'")
    g.add_argument("--along", help="AXIS:START:STOP:COUNT points on coordinate axis AXIS "
                                   "(1-based), other coordinates 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="valleyscape", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("list-functions", help="list landscape labels")

    p = sub.add_parser("eval-grid", help="evaluate a landscape on a lattice (CSV)")
    _add_config_flags(p, "function", "domain")
    p.add_argument("--res", default="101", help="points per axis, int or comma list (default 101)")
    p.add_argument("--out", help="output CSV (default stdout)")

    for name, text in (("ratio", "lower/higher area ratio at points"),
                       ("valley-test", "area-ratio valley test against the sphere")):
        p = sub.add_parser(name, help=text)
        _add_config_flags(p, "function", "seed", "samples")
        _add_points(p)
        p.add_argument("--delta", help="half-width(s), comma list (default: config deltas)")
        p.add_argument("--out", help="ratio-scan CSV output")
        if name == "valley-test":
            p.add_argument("--benchmark-delta", type=float,
                           help="sphere neighborhood half-width (default: same as --delta)")

    p = sub.add_parser("beta", help="narrowness: max area ratio over valley points")
    _add_config_flags(p, "function", "seed", "samples")
    _add_points(p)
    p.add_argument("--delta", default="1", help="half-width (default 1)")
    p.add_argument("--out", help="per-point CSV output")

    p = sub.add_parser("alpha", help="width: largest passing delta over candidates")
    _add_config_flags(p, "function", "seed", "samples", "deltas")
    _add_points(p)
    p.add_argument("--out", help="ratio-scan CSV output")

    p = sub.add_parser("align", help="angle between gradient and a valley direction")
    _add_config_flags(p, "function")
    _add_points(p)
    p.add_argument("--direction", required=True, help="unit direction v1,...,vd")
    p.add_argument("--step", type=float, default=1e-5, help="finite-difference step (default 1e-5)")
    p.add_argument("--out", help="CSV output")

    p = sub.add_parser("pca", help="PCA projection of the best M of N samples")
    _add_config_flags(p, "function", "domain", "n", "m", "seed")
    p.add_argument("--out", help="CSV output (role,x1..xd,f,y)")
    p.add_argument("--summary", help="write the summary block to this file")
    p.add_argument("--svg", help="write a 2-D figure to this SVG file")
    p.add_argument("--res", type=int, default=81, help="heatmap resolution for --svg (default 81)")

    p = sub.add_parser("compare-pca", help="median lambda1/lambda2 per function over seeds")
    _add_config_flags(p, "domain", "n", "m", "seed")
    p.add_argument("--functions", required=True, help="comma-separated labels")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (default 20)")
    p.add_argument("--out", help="per-seed CSV output")

    p = sub.add_parser("render", help="contour SVG, optionally with a PCA CSV overlay")
    _add_config_flags(p, "function", "domain")
    p.add_argument("--res", type=int, default=81, help="points per axis (default 81)")
    p.add_argument("--levels", type=int, default=10, help="quantile color bins (default 10)")
    p.add_argument("--pca", help="overlay points from a pca CSV")
    p.add_argument("--title", help="figure title (default: function label)")
    p.add_argument("--out", required=True, help="SVG output")
    return parser


_NUMERIC_ARG = re.compile(r"^-[\d.]")


def _normalize_argv(argv: list[str]) -> list[str]:
    # "--domain -10:10" would be read as two options; glue numeric values on
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NUMERIC_ARG.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    items = {key: getattr(args, dest) for dest, key in _CONFIG_FLAGS.items()
             if getattr(args, dest, None) is not None}
    return RunConfig.from_mapping(items, base)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"bad vector {text!r}; expected comma-separated numbers") from None


def _points(args: argparse.Namespace) -> list[np.ndarray]:
    if args.point:
        return [_parse_vector(p) for p in args.point]
    if args.points:
        return [_parse_vector(p) for p in args.points.split(";") if p.strip()]
    if args.along:
        try:
            axis, start, stop, count = args.along.split(":")
            axis, count = int(axis), int(count)
            ticks = np.linspace(float(start), float(stop), count)
        except ValueError:
            raise ConfigError("--along expects AXIS:START:STOP:COUNT") from None
        return [("along", axis, t) for t in ticks]
    raise ConfigError("give points with --point, --points or --along")


def _materialize(points, dimension: int) -> list[np.ndarray]:
    out = []
    for p in points:
        if isinstance(p, tuple):
            _, axis, t = p
            if not 1 <= axis <= dimension:
                raise ConfigError(f"--along axis must be in 1..{dimension}")
            v = np.zeros(dimension)
            v[axis - 1] = t
            p = v
        if p.size != dimension:
            raise ConfigError(f"point {p.tolist()} does not have dimension {dimension}")
        out.append(p)
    return out


def _landscape(cfg: RunConfig, dimension: int | None) -> Landscape:
    land = parse_function(cfg.function, dimension)
    if dimension is not None and land.dimension != dimension:
        raise ConfigError(f"{cfg.function} has dimension {land.dimension}, expected {dimension}")
    return land


def _emit(text: str, path: str | None, stdout) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _g(v: float) -> str:
    return f"{v:.10g}"


# ------------------------------------------------------------------ commands


def _prepare(args, stdout):
    """Resolve config, landscape and (optional) points; errors here are usage errors."""
    cfg = resolve_config(args)
    stdout.write("".join(f"# {line}\n" for line in cfg.to_text().splitlines()))
    return cfg


def cmd_list_functions(args, cfg, stdout):
    for label, text in DESCRIPTIONS.items():
        stdout.write(f"{label:34s} {text}\n")


def cmd_eval_grid(args, cfg, stdout):
    land = _landscape(cfg, cfg.domain.dimension)
    try:
        res = [int(v) for v in args.res.split(",")]
    except ValueError:
        raise UsageError("--res expects an integer or comma list") from None
    grid = grid_evaluate(land, cfg.domain, res[0] if len(res) == 1 else res)
    _emit(grid.to_csv(), args.out, stdout)
    if args.out:
        stdout.write(f"wrote {len(grid.values)} rows to {args.out}\n")


def _scan(args, cfg, stdout, deltas):
    raw = _points(args)
    dim = next((p.size for p in raw if not isinstance(p, tuple)), None)
    land = _landscape(cfg, dim)
    points = _materialize(raw, land.dimension)
    results = []
    for i, p in enumerate(points):
        for j, delta in enumerate(deltas):
            results.append(neighborhood.valley_point_test(
                land, p, delta, cfg.samples, cfg.seed, stream_id=job_stream_id(i, j),
                benchmark_delta=getattr(args, "benchmark_delta", None)))
    return land, results


def cmd_ratio(args, cfg, stdout, verdicts=False):
    deltas = _parse_vector(args.delta) if args.delta else cfg.deltas
    land, results = _scan(args, cfg, stdout, deltas)
    for r in results:
        t = r.tested
        line = (f"point={','.join(_g(c) for c in r.point)} delta={_g(r.delta)} "
                f"lower={t.lower} higher={t.higher} ties={t.ties} ratio={_g(t.ratio)} "
                f"se={_g(t.se)} flag={t.flag}")
        if verdicts:
            line += f" sphere_ratio={_g(r.benchmark.ratio)} verdict={str(r.verdict).lower()}"
        stdout.write(line + "\n")
    if verdicts:
        stdout.write(f"passed {sum(r.verdict for r in results)}/{len(results)}\n")
    if args.out:
        Path(args.out).write_text(neighborhood.ratio_scan_csv(results), encoding="utf-8")


def cmd_valley_test(args, cfg, stdout):
    cmd_ratio(args, cfg, stdout, verdicts=True)


def cmd_beta(args, cfg, stdout):
    raw = _points(args)
    dim = next((p.size for p in raw if not isinstance(p, tuple)), None)
    land = _landscape(cfg, dim)
    points = _materialize(raw, land.dimension)
    delta = float(args.delta)
    rep = neighborhood.narrowness_beta(land, points, delta, cfg.samples, cfg.seed)
    arg = "none" if rep.argmax is None else ",".join(_g(c) for c in rep.argmax)
    stdout.write(f"beta={_g(rep.beta)} argmax={arg}\n")
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(land.dimension)] +
                   ["delta", "lower", "higher", "ties", "ratio", "se"])
        for p, e in zip(points, rep.estimates):
            w.writerow([f"{c:.17g}" for c in p] + [f"{delta:.17g}", e.lower, e.higher, e.ties,
                                                   f"{e.ratio:.17g}", f"{e.se:.17g}"])
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")


def cmd_alpha(args, cfg, stdout):
    raw = _points(args)
    dim = next((p.size for p in raw if not isinstance(p, tuple)), None)
    land = _landscape(cfg, dim)
    points = _materialize(raw, land.dimension)
    rep = neighborhood.width_alpha(land, points, cfg.deltas, cfg.samples, cfg.seed)
    for delta, passes, total in rep.table():
        stdout.write(f"delta={_g(delta)} passed={passes}/{total}\n")
    stdout.write(f"alpha={'none' if rep.alpha is None else _g(rep.alpha)}\n")
    if args.out:
        rows = [r for d in rep.deltas for r in rep.results[d]]
        Path(args.out).write_text(neighborhood.ratio_scan_csv(rows), encoding="utf-8")


def cmd_align(args, cfg, stdout):
    direction = _parse_vector(args.direction)
    land = _landscape(cfg, direction.size)
    points = _materialize(_points(args), land.dimension)
    res = neighborhood.gradient_alignment(land, direction, points, args.step)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(land.dimension)] + ["angle_deg", "stationary"])
    for p, a in zip(points, res):
        w.writerow([f"{c:.17g}" for c in p] + [f"{a.angle_deg:.17g}", str(a.stationary).lower()])
        stdout.write(f"point={','.join(_g(c) for c in p)} angle_deg={_g(a.angle_deg)}"
                     f"{' stationary' if a.stationary else ''}\n")
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")


def _pca_figure(land: Landscape, domain: Domain, est: pca.ValleyEstimate, res: int,
                title: str) -> str:
    grid = grid_evaluate(land, domain, res)
    span = float(np.linalg.norm(domain.upper - domain.lower))
    line = np.array([est.mean - span * est.direction, est.mean + span * est.direction])
    return render.render_contour_svg(
        grid, 10, title, render.pca_layers(est.population, est.selected.points,
                                           est.reconstructed, line))


def cmd_pca(args, cfg, stdout):
    land = _landscape(cfg, cfg.domain.dimension)
    est = pca.pca_projection(land, cfg.domain, cfg.n_population, cfg.n_select, cfg.seed)
    summary = pca.pca_summary(est)
    stdout.write(summary)
    if args.out:
        Path(args.out).write_text(pca.pca_csv(est, land), encoding="utf-8")
    if args.summary:
        Path(args.summary).write_text(summary, encoding="utf-8")
    if args.svg:
        if land.dimension != 2:
            raise UsageError("--svg needs a 2-D landscape")
        render.write_svg(args.svg, _pca_figure(land, cfg.domain, est, args.res,
                                               f"PCA projection: {land.label}"))


def cmd_compare_pca(args, cfg, stdout):
    labels = split_labels(args.functions)
    if not labels:
        raise UsageError("--functions is empty")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    lands = [parse_function(lab, cfg.domain.dimension) for lab in labels]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["function", "seed", "lambda1", "lambda2", "ratio"])
    stdout.write(f"{'function':24s} {'median_lambda1/lambda2':>24s}\n")
    for lab, land in zip(labels, lands):
        if land.dimension != cfg.domain.dimension:
            raise UsageError(f"{lab} does not match the domain dimension")
        ratios = []
        for k in range(args.seeds):
            seed = cfg.seed + k
            est = pca.pca_projection(land, cfg.domain, cfg.n_population, cfg.n_select, seed)
            r = pca.eigen_ratio_diagnostic(est)
            ratios.append(r)
            w.writerow([lab, seed, f"{est.eigenvalues[0]:.17g}", f"{est.eigenvalues[1]:.17g}",
                        f"{r:.17g}"])
        stdout.write(f"{lab:24s} {_g(float(np.median(ratios))):>24s}\n")
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")


def cmd_render(args, cfg, stdout):
    land = _landscape(cfg, cfg.domain.dimension)
    if land.dimension != 2:
        raise UsageError("render needs a 2-D landscape")
    grid = grid_evaluate(land, cfg.domain, args.res)
    overlays = []
    if args.pca:
        roles = pca.read_pca_csv(Path(args.pca).read_text())
        overlays = render.pca_layers(roles.get("population", np.empty((0, 2))),
                                     roles.get("selected", np.empty((0, 2))),
                                     roles.get("projected", np.empty((0, 2))))
    doc = render.render_contour_svg(grid, args.levels, args.title or land.label, overlays)
    render.write_svg(args.out, doc)
    stdout.write(f"wrote {args.out}\n")


COMMANDS = {
    "list-functions": cmd_list_functions,
    "eval-grid": cmd_eval_grid,
    "ratio": cmd_ratio,
    "valley-test": cmd_valley_test,
    "beta": cmd_beta,
    "alpha": cmd_alpha,
    "align": cmd_align,
    "pca": cmd_pca,
    "compare-pca": cmd_compare_pca,
    "render": cmd_render,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    """Run one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _prepare(args, stdout)
    except (ConfigError, OSError) as exc:
        stderr.write(f"valleyscape {args.command}: error: {exc}\n")
        return 2
    try:
        COMMANDS[args.command](args, cfg, stdout)
    except (UsageError, ConfigError) as exc:
        stderr.write(f"valleyscape {args.command}: error: {exc}\n")
        return 2
    except (ValleyscapeError, OSError) as exc:
        stderr.write(f"valleyscape {args.command}: {type(exc).__name__}: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
