"""Command-line driver: build charts, run classifier sweeps, factor Lie
transformations and write JSON/CSV reports.

Exit status: 0 when every requested verdict passes, 1 on a verdict failure
or a numerical error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .charts import CHART_NAMES, builtin_chart, envelope_chart, envelope_residuals, mobius_deform
from .classifiers import SCHEMA_VERSION, Verdict, classify, make_plan, sweep_spectra, tri_state
from .config import COMMANDS, build_config
from .errors import InvalidInput, LieDupinError
from .immersion import principal_spectrum
from .legendre import (
    SPHERE_CSV_COLUMNS,
    legendre_lift,
    reducibility_rank,
    sphere_sweep_rows,
    unit_normal_samples,
)
from .liesphere import LieTransformation, cecil_chern_decompose

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DECOMPOSE_TOL = 1e-8
ENVELOPE_TOL = 1e-9
ENVELOPE_CLUSTER_TOL = 1e-6

SWEEP_CSV_COLUMNS = ("point", "normal", "u", "xi", "values", "multiplicities", "min_gap")
VERDICT_CSV_COLUMNS = ("verdict", "state", "residual", "tol", "witness", "reason")

FORMATS_HELP = f"""\
JSON reports (schema_version {SCHEMA_VERSION})
  verify    chart, n, p, c, k_observed, k_max, multiplicities, cluster_ranges,
            constancy_residual, verdicts{{name: state, passed, residual, tol,
            witness, reason}}, nesting_consistent, extras, plan, config
  sweep     chart, config, rows[{{{", ".join(SWEEP_CSV_COLUMNS)}}}]
  lift      chart, config, spheres[...], reducibility[{{index, rank, d,
            reducible_candidate, samples, singular_values}}], verdicts
  decompose kind, t, residual, phi1, phi2 (matrix objects), verdicts
  envelope  chart, residuals{{distance, tangency}}, clusters, verdicts

Matrix JSON (decompose input and phi1/phi2 output)
  {{"signature": "Lie(d)", "d": d, "kind_hint": str, "t": float|null,
   "rows": d+3, "matrix": [row-major floats] or [[rows]]}}

CSV columns (--format csv)
  verify    {",".join(VERDICT_CSV_COLUMNS)}
  sweep     {",".join(SWEEP_CSV_COLUMNS)}
  lift      {",".join(SPHERE_CSV_COLUMNS)}
  vectors inside a CSV cell are space-separated; "inf" marks the point-sphere family.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="liedupin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--help-formats", action="store_true", help="describe JSON/CSV output formats and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="chart parameter (repeatable)")
        p.add_argument("--grid", type=int, help="number of sample points (default 16)")
        p.add_argument("--normals", type=int, help="unit normals per point (at least 2 p^2)")
        p.add_argument("--curves", type=int, help="transport curves / curvature lines per start point")
        p.add_argument("--tol", type=float, help="verdict tolerance")
        p.add_argument("--fd-step", type=float, help="drop the analytic jet and use finite differences")
        p.add_argument("--seed", type=int, help="seed for every random choice (default 0)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--mobius-deform", metavar="SEED", help="compose with a random Moebius map ('7' or 'seed=7')")
        p.add_argument("--require", action="append", metavar="VERDICT",
                       help="verdicts that decide the exit status (default: all)")
        p.add_argument("--config", help="INI file with a [plan] section")

    for name, target_help in [
        ("verify", "chart name"),
        ("sweep", "chart name"),
        ("lift", "chart name (must live in the unit sphere)"),
        ("decompose", "matrix JSON file ('-' for stdin)"),
        ("envelope", "centre chart g in Euclidean space"),
    ]:
        p = sub.add_parser(name)
        p.add_argument("target", help=target_help)
        common(p)
        if name == "envelope":
            p.add_argument("--radius", type=float, help="radius at the chart centre (default 1)")
            p.add_argument("--radius-gradient", type=float, nargs="+", metavar="A",
                           help="r(u) = radius + A . (u - centre)")
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    return str(x)


def dump_json(data):
    return json.dumps(data, indent=2, sort_keys=True, default=_plain) + "\n"


def dump_csv(columns, rows):
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def _vec(a):
    return " ".join(f"{float(x):.12g}" for x in np.atleast_1d(a))


def make_chart(cfg):
    chart = builtin_chart(cfg.target, **cfg.chart_params)
    if cfg.mobius_deform is not None:
        chart = mobius_deform(chart, seed=cfg.mobius_deform)
    if cfg.fd_step is not None:
        chart = chart.with_fd(fd_step=cfg.fd_step, fd_step2=max(cfg.fd_step * 10, 1e-4))
    return chart


def make_run_plan(cfg, chart):
    return make_plan(
        chart,
        points=cfg.grid,
        normals=cfg.normals,
        curve_count=cfg.curves,
        curve_length=cfg.curve_length,
        step=cfg.step,
        seed=cfg.seed,
        tol=cfg.tol,
    )


def exit_status(verdicts, require):
    """0 iff every required verdict (all of them by default) passed."""
    names = list(require) or list(verdicts)
    missing = [n for n in names if n not in verdicts]
    if missing:
        raise InvalidInput(f"requested verdicts not produced: {', '.join(missing)}")
    return EXIT_OK if all(verdicts[n].passed for n in names) else EXIT_FAIL


def _verdict_rows(verdicts):
    rows = []
    for name, v in sorted(verdicts.items()):
        d = v.to_dict()
        rows.append({
            "verdict": name,
            "state": d.get("state"),
            "residual": d.get("residual"),
            "tol": d.get("tol"),
            "witness": json.dumps(d.get("witness"), sort_keys=True, default=_plain),
            "reason": d.get("reason"),
        })
    return rows


# ---------------------------------------------------------------------------
# commands; each returns (json_dict, csv_text, verdicts)
# ---------------------------------------------------------------------------

def cmd_verify(cfg):
    chart = make_chart(cfg)
    plan = make_run_plan(cfg, chart)
    rep = classify(chart, plan)
    data = rep.to_dict()
    return data, dump_csv(VERDICT_CSV_COLUMNS, _verdict_rows(rep.verdicts)), rep.verdicts


def cmd_sweep(cfg):
    chart = make_chart(cfg)
    plan = make_run_plan(cfg, chart)
    rows = []
    for s in sweep_spectra(chart, plan):
        rows.append({
            "point": s.point_index,
            "normal": s.normal_index,
            "u": _vec(s.u),
            "xi": _vec(s.xi),
            "values": _vec(s.values),
            "multiplicities": " ".join(str(m) for m in s.multiplicities),
            "min_gap": f"{s.min_gap:.6g}",
        })
    data = {"schema_version": SCHEMA_VERSION, "chart": chart.name, "n": chart.n, "p": chart.p, "rows": rows}
    return data, dump_csv(SWEEP_CSV_COLUMNS, rows), {}


def cmd_lift(cfg):
    chart = make_chart(cfg)
    lift = legendre_lift(chart)
    count = max(cfg.grid, lift.d + 3)
    samples = unit_normal_samples(lift, count, seed=cfg.seed, normals_per_point=cfg.normals)
    rows = sphere_sweep_rows(lift, samples)
    per_sample = {}
    for r in rows:
        per_sample.setdefault(r["sample"], []).append(r)
    counts = sorted({len(v) for v in per_sample.values()})
    worst = max(float(r["degeneracy"]) for r in rows)
    tol = cfg.tol or 1e-6
    verdicts = {
        "curvature-spheres": Verdict(tri_state(worst, tol), residual=worst, tol=tol,
                                     reason="largest singular value of dK on the principal spaces"),
    }
    reducibility = []
    if len(counts) == 1:
        for i in range(counts[0]):
            res = reducibility_rank(lift, i, samples)
            reducibility.append({"index": i, **res.to_dict()})
    data = {
        "schema_version": SCHEMA_VERSION,
        "chart": chart.name,
        "d": lift.d,
        "n": chart.n,
        "p": chart.p,
        "sphere_counts": counts,
        "spheres": rows,
        "reducibility": reducibility,
        "verdicts": {k: v.to_dict() for k, v in verdicts.items()},
    }
    return data, dump_csv(SPHERE_CSV_COLUMNS, rows), verdicts


def cmd_decompose(cfg):
    try:
        text = sys.stdin.read() if cfg.target == "-" else open(cfg.target).read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {cfg.target}: {exc}") from exc
    try:
        g = LieTransformation.from_json(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{cfg.target} is not JSON: {exc}") from exc
    tol = cfg.tol or DECOMPOSE_TOL
    dec = cecil_chern_decompose(g, tol=tol)
    verdicts = {"reconstruction": Verdict(tri_state(dec.residual, tol), residual=dec.residual, tol=tol)}
    data = {"schema_version": SCHEMA_VERSION, **dec.to_dict(),
            "verdicts": {k: v.to_dict() for k, v in verdicts.items()}}
    rows = [{"kind": dec.kind, "t": dec.t, "residual": dec.residual}]
    return data, dump_csv(("kind", "t", "residual"), rows), verdicts


def cmd_envelope(cfg):
    g = builtin_chart(cfg.target, **cfg.chart_params)
    if cfg.fd_step is not None:
        g = g.with_fd(fd_step=cfg.fd_step)
    r0 = cfg.radius
    if cfg.radius_gradient:
        a = np.asarray(cfg.radius_gradient, float)
        if a.size != g.n:
            raise InvalidInput(f"--radius-gradient needs {g.n} values")
        centre = g.center
        chart = envelope_chart(g, lambda u: r0 + a @ (np.asarray(u) - centre), r_grad=lambda u: a)
    else:
        chart = envelope_chart(g, r0)
    ra, rb = envelope_residuals(chart)
    rng = np.random.default_rng(cfg.seed)
    k = chart.params["k"]
    pieces = chart.params["envelope"]["pieces"]
    worst = 0.0
    clusters = []
    for x in chart.sample_points(rng, cfg.grid):
        sp = principal_spectrum(chart, x, np.array([1.0]))
        r = pieces(x[:k])[2]
        j = sp.nearest_cluster(1.0 / r)
        mult = sp.multiplicities[j]
        dev = abs(sp.eigenvalues[j] - 1.0 / r)
        if mult != chart.n - k:
            dev = max(dev, 1.0)
        worst = max(worst, dev)
        clusters.append({"x": _vec(x), "r": r, "value": float(sp.eigenvalues[j]), "multiplicity": int(mult)})
    res = max(ra, rb)
    tol = cfg.tol or ENVELOPE_TOL
    verdicts = {
        "envelope": Verdict(tri_state(res, tol), residual=res, tol=tol),
        "sphere-cluster": Verdict(tri_state(worst, ENVELOPE_CLUSTER_TOL), residual=worst,
                                  tol=ENVELOPE_CLUSTER_TOL, reason=f"cluster 1/r of multiplicity {chart.n - k}"),
    }
    data = {
        "schema_version": SCHEMA_VERSION,
        "chart": chart.name,
        "n": chart.n,
        "k": k,
        "residuals": {"distance": ra, "tangency": rb},
        "clusters": clusters,
        "verdicts": {k_: v.to_dict() for k_, v in verdicts.items()},
    }
    return data, dump_csv(("x", "r", "value", "multiplicity"), clusters), verdicts


COMMAND_TABLE = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "lift": cmd_lift,
    "decompose": cmd_decompose,
    "envelope": cmd_envelope,
}
assert set(COMMAND_TABLE) == set(COMMANDS)


def run(cfg):
    """Execute one configured command; returns (exit status, report text)."""
    data, csv_text, verdicts = COMMAND_TABLE[cfg.command](cfg)
    if isinstance(data, dict):
        data["config"] = cfg.echo()
        data["seed"] = cfg.seed
    status = exit_status(verdicts, cfg.require) if verdicts or cfg.require else EXIT_OK
    text = dump_json(data) if cfg.format == "json" else csv_text
    return status, text


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.help_formats:
        sys.stdout.write(FORMATS_HELP)
        return EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = build_config(args)
        if cfg.command not in ("decompose", "envelope") and cfg.target not in CHART_NAMES:
            raise InvalidInput(f"unknown chart {cfg.target!r}; known: {', '.join(CHART_NAMES)}")
        status, text = run(cfg)
    except InvalidInput as exc:
        sys.stderr.write(f"liedupin: error: {exc}\n")
        return EXIT_USAGE
    except LieDupinError as exc:
        sys.stderr.write(f"liedupin: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
