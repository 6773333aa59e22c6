"""Command-line front end.

    kdvb solve --K 128 --dt 1e-4 --T 0.5 --data "cos(x)"
    kdvb cascade --family paired_cos --N-list 64,128
    kdvb lemma-check --which resonance

Every subcommand writes its RunRecord(s) under a timestamped directory inside
--out (default: $KDVB_OUTPUT_DIR, else ./runs).  Trailing key=value words
override flags of the same name.  Exit codes: 0 ok, 2 bad configuration,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import checks, experiments
from . import norms as nm
from .propagators import BlowUpError, SolverConfig, solve_ivp
from .records import RunRecord, Timer, persist, series_csv_path, write_series_csv
from .torus import TorusField, sobolev_norm

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3
OUTPUT_ENV = "KDVB_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# data grammar: sums of a*cos(kx), a*sin(kx), a*phi_N, a*paired_N, a*rough

_TERM = re.compile(
    r"""^(?P<coef>[0-9.eE+-]*?)\*?
        (?:(?P<fn>cos|sin)\((?P<k>\d*)x\)|(?P<fam>phi|paired)_(?P<N>\d+)|(?P<rough>rough))$""",
    re.X,
)


def parse_data(expr: str, K: int, seed: int = 0) -> TorusField:
    """Parse e.g. "cos(x) + 0.5*sin(2x)" or "0.05*paired_64" into a field at K."""
    s = expr.replace(" ", "")
    if not s:
        raise ConfigError("empty data expression")
    # split on +/- that start a new term (not exponent signs)
    parts = re.findall(r"[+-]?(?:[0-9.]+(?:[eE][+-]?\d+)?\*?)?[a-z]+(?:\(\d*x\)|_\d+)?", s)
    if "".join(parts) != s:
        raise ConfigError(f"cannot parse data expression {expr!r}")
    u = TorusField.zeros(K)
    for p in parts:
        sign = -1.0 if p.startswith("-") else 1.0
        m = _TERM.match(p.lstrip("+-"))
        if not m:
            raise ConfigError(f"bad term {p!r} in {expr!r}")
        coef = m.group("coef")
        a = sign * (float(coef) if coef not in ("", None) else 1.0)
        if m.group("fn"):
            k = int(m.group("k") or 1)
            if k > K:
                raise ConfigError(f"mode {k} exceeds K={K}")
            u = u + (TorusField.cos_mode(K, k, a) if m.group("fn") == "cos" else TorusField.sin_mode(K, k, a))
        elif m.group("fam"):
            N = int(m.group("N"))
            tag = "single_cos" if m.group("fam") == "phi" else "paired_cos"
            fam = experiments.DataFamily(tag, N, a)
            if fam.kmax > K:
                raise ConfigError(f"{p} needs K >= {fam.kmax}")
            u = u + fam.field(K)
        else:
            u = u + experiments.rough_field(K, a, seed=seed)
    return u


def _floats(s: str) -> list:
    try:
        return [float(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _ints(s: str) -> list:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


# ---------------------------------------------------------------------------
# plot data


PLOT_SERIES = {
    # name: (record name, series, x column, y column)
    "mode1_vs_N": ("cascade", "cascade", "N", "abs_u_1"),
    "oracle1_vs_N": ("cascade", "cascade", "N", "abs_oracle_1"),
    "mode2_vs_N": ("cascade", "cascade", "N", "abs_u_2"),
    "data_Hm1.5_vs_N": ("cascade", "cascade", "N", "data_H-1.5"),
    "data_Hm1_vs_N": ("cascade", "cascade", "N", "data_H-1"),
    "data_l2_vs_K": ("smoothing", "data_l2", "K", "l2"),
    "D_vs_delta": ("analyticity", "second_difference", "delta", "D"),
}


def emit_plot_data(record: RunRecord, series_names, out_dir) -> list:
    """One (x, y) CSV per requested plot series; re-emission overwrites identically.

    Besides the names in PLOT_SERIES, "series:xcol:ycol" selects any two
    columns of a record series.
    """
    out_dir = Path(out_dir)
    paths = []
    for name in series_names:
        if name in PLOT_SERIES:
            rec_name, series, xc, yc = PLOT_SERIES[name]
            if record.name != rec_name:
                raise ValueError(f"plot series {name!r} needs a {rec_name} record, got {record.name}")
        elif name.count(":") == 2:
            series, xc, yc = name.split(":")
        else:
            raise ValueError(f"unknown plot series {name!r}; known: {sorted(PLOT_SERIES)}")
        table = record.series.get(series)
        if table is None or xc not in table or yc not in table:
            raise ValueError(f"record {record.name} has no columns {xc!r}, {yc!r} in series {series!r}")
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{name.replace(':', '_')}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([xc, yc])
            for x, y in zip(table[xc], table[yc]):
                w.writerow([repr(x) if isinstance(x, float) else x, repr(y) if isinstance(y, float) else y])
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(a) -> list:
    u0 = parse_data(a.data, a.K, a.seed)
    cfg = SolverConfig(a.K, a.dt, a.T, scheme=a.scheme, record_every=a.record_every)
    with Timer() as tm:
        traj = solve_ivp(u0, cfg)
    modes = [k for k in a.modes if abs(k) <= a.K]
    rec = RunRecord("solve", {"K": a.K, "dt": a.dt, "T": a.T, "data": a.data, "scheme": a.scheme,
                              "record_every": a.record_every}, a.seed)
    cols = {"t": traj.times.tolist(), "L2": traj.norms(0.0).tolist(), "H-1": traj.norms(-1.0).tolist()}
    for k in modes:
        cols[f"abs_u_{k}"] = np.abs(traj.mode(k)).tolist()
    rec.add_series("trajectory", **cols)
    rec.summary = {"final_L2": cols["L2"][-1], "final_H-1": cols["H-1"][-1], "steps": cfg.n_steps}
    rec.wall_time = tm.elapsed
    return [rec]


def _cmd_cascade(a) -> list:
    fam = experiments.DataFamily(a.family, 1, a.delta)
    rec = experiments.cascade_experiment(fam, a.N_list, a.t, track_modes=a.modes, K=a.K)
    return [rec]


def _cmd_smoothing(a) -> list:
    data = experiments.DataFamily("rough_Hminus1", delta=a.delta, seed=a.seed)
    return [experiments.smoothing_experiment(data, a.t_list, a.m_list, a.K_list, a.dt)]


def _cmd_analyticity(a) -> list:
    u0 = parse_data(a.data, a.K, a.seed)
    v = parse_data(a.direction, a.K, a.seed + 1)
    return [experiments.analyticity_experiment(u0, v, a.deltas, a.t, a.dt)]


def _cmd_norms(a) -> list:
    phi = parse_data(a.data, a.K, a.seed)
    U = checks.free_solution_field(phi).sample(a.K, a.M)
    with Timer() as tm:
        vals = {
            "Xsb1": nm.xsb1_norm(U, a.s, 0.5),
            "Xsb1_eps": nm.xsb1_eps_norm(U, a.s, 0.5, a.eps),
            "Xsb_inf": nm.xsb_inf_norm(U, a.s, 0.5),
            "Ysb": nm.y_norm(U, a.s, 0.5),
            "Zs_minus_half": nm.z_norm(U, a.s),
            "TildeLinfH": nm.tilde_linf_h_norm(U, -1.0),
            "Sobolev_sup": nm.linf_h_norm(U, a.s),
            "L2st": U.l2_norm(),
            "S_tilde": nm.resolution_norm(U, a.eps, a.s).value,
            "Z_beta": nm.z_beta_norm(U, a.beta, a.eps).value,
            "data_H-1": sobolev_norm(phi, -1.0),
        }
        report = nm.norm_report(U, nm.X_eps(a.s, 0.5, a.eps))
    rec = RunRecord("norms", {"data": a.data, "K": a.K, "M": a.M, "s": a.s, "eps": a.eps, "beta": a.beta},
                    a.seed, summary=vals)
    rec.add_series("norms", name=list(vals), value=list(vals.values()))
    rec.add_series("atoms", N=[r["N"] for r in report.rows], L=[r["L"] for r in report.rows],
                   weight=[r["weight"] for r in report.rows], mass=[r["mass"] for r in report.rows])
    rec.wall_time = tm.elapsed
    return [rec]


def _cmd_bilinear(a) -> list:
    recs = []
    for name in a.suites:
        if name == "est-bil3":
            recs.append(checks.suite_time_restriction(trials=a.trials, seed=a.seed))
        elif name in checks.SUITES:
            recs.append(checks.SUITES[name](trials=a.trials, seed=a.seed))
        else:
            raise ConfigError(f"unknown suite {name!r}; choose from {sorted(checks.SUITES) + ['est-bil3']}")
    return recs


def _cmd_lemma(a) -> list:
    if a.which == "resonance":
        sign = checks.resonance_sign_scan(a.kmax)
        rec = RunRecord("resonance", {"kmax": a.kmax}, None, summary={"sign": sign})
        rec.add_series("sign", kmax=[a.kmax], sign=[sign])
        return [rec]
    if a.N1 is not None:
        r = checks.check_bilinear_lemma(a.N1, a.N2, a.L1, a.L2, a.trials, a.N, a.which == "second",
                                        a.dsigma, a.seed)
        rec = RunRecord(f"lemma2-{a.which}", {k: getattr(a, k) for k in ("N1", "N2", "L1", "L2", "N", "dsigma",
                                                                          "trials")}, a.seed,
                        summary={"max_ratio": r})
        rec.add_series("ratio", max_ratio=[r])
        return [rec]
    return [checks.suite_lemma2(a.trials, a.seed, second=a.which == "second")]


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        flags = sorted({o for act in self._actions for o in act.option_strings})
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\nvalid flags: {' '.join(flags)}\n")
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kdvb", description="KdV-Burgers numerical lab")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"output root (default ${OUTPUT_ENV} or ./runs)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    common.add_argument("--plot", type=lambda s: [x for x in s.split(",") if x], default=[],
                        help="plot series to emit, comma separated")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="integrate from given data")
    s.add_argument("--K", type=int, default=64)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--T", type=float, default=0.1)
    s.add_argument("--data", default="cos(x)", help='e.g. "cos(x) + 0.5*sin(2x)", "0.05*paired_16", "0.1*rough"')
    s.add_argument("--scheme", choices=("exponential_rk4", "picard"), default="exponential_rk4")
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--modes", type=_ints, default=[1, 2])
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("cascade", parents=[common], help="high-to-low frequency cascade")
    s.add_argument("--family", choices=("single_cos", "paired_cos"), default="paired_cos")
    s.add_argument("--N-list", type=_ints, default=[16, 32, 64])
    s.add_argument("--t", type=float, default=0.01)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--modes", type=_ints, default=[1, 2])
    s.add_argument("--K", type=int, default=None)
    s.set_defaults(func=_cmd_cascade)

    s = sub.add_parser("smoothing", parents=[common], help="rough H^-1 data smoothing")
    s.add_argument("--K-list", type=_ints, default=[128, 256])
    s.add_argument("--t-list", type=_floats, default=[0.0, 0.01, 0.05, 0.1])
    s.add_argument("--m-list", type=_floats, default=[0, 1, 2, 4])
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--dt", type=float, default=1e-3)
    s.set_defaults(func=_cmd_smoothing)

    s = sub.add_parser("analyticity", parents=[common], help="second-difference scaling")
    s.add_argument("--K", type=int, default=16)
    s.add_argument("--data", default="cos(x)")
    s.add_argument("--direction", default="sin(2x)")
    s.add_argument("--deltas", type=_floats, default=[1e-2, 1e-3, 1e-4])
    s.add_argument("--t", type=float, default=0.1)
    s.add_argument("--dt", type=float, default=1e-3)
    s.set_defaults(func=_cmd_analyticity)

    s = sub.add_parser("norms", parents=[common], help="space-time norms of eta(t) W(t) phi")
    s.add_argument("--K", type=int, default=8)
    s.add_argument("--M", type=int, default=256)
    s.add_argument("--data", default="cos(x) + 0.5*sin(2x)")
    s.add_argument("--s", type=float, default=-1.0)
    s.add_argument("--eps", type=float, default=nm.DEFAULT_EPS)
    s.add_argument("--beta", type=float, default=1.0)
    s.set_defaults(func=_cmd_norms)

    s = sub.add_parser("bilinear-check", parents=[common], help="sampled inequality suites")
    s.add_argument("--suites", type=lambda x: x.split(","), default=["est-bil"],
                   help=f"comma list from {sorted(checks.SUITES) + ['est-bil3']}")
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=_cmd_bilinear)

    s = sub.add_parser("lemma-check", parents=[common], help="convolution bounds and resonance identity")
    s.add_argument("--which", choices=("first", "second", "resonance"), default="first")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--N1", type=float, default=None)
    s.add_argument("--N2", type=float, default=None)
    s.add_argument("--L1", type=float, default=None)
    s.add_argument("--L2", type=float, default=None)
    s.add_argument("--N", type=float, default=1.0)
    s.add_argument("--dsigma", type=float, default=1.0)
    s.add_argument("--kmax", type=int, default=10)
    s.set_defaults(func=_cmd_lemma)
    return p


def _split_overrides(argv):
    """Turn trailing key=value words into --key value."""
    out = []
    for w in argv:
        if not w.startswith("-") and "=" in w and re.match(r"^[A-Za-z_][\w-]*=", w):
            k, v = w.split("=", 1)
            out += [f"--{k.replace('_', '-')}" if len(k) > 1 else f"--{k}", v]
        else:
            out.append(w)
    return out


def _run_dir(root, command: str) -> Path:
    root = Path(root or os.environ.get(OUTPUT_ENV) or "runs")
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    d = root / f"{command}-{stamp}"
    d.mkdir(parents=True, exist_ok=False)
    return d


def _print_summary(rec: RunRecord, path: Path):
    print(f"[{rec.name}] {path}  ({rec.wall_time:.2f} s)")
    for k, v in rec.summary.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        elif isinstance(v, list) and v and all(isinstance(x, float) for x in v):
            v = "[" + ", ".join(f"{x:.6g}" for x in v) + "]"
        print(f"  {k:<28} {v}")


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(_split_overrides(argv))
        if extra:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            sub.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        records = args.func(args)
        out = _run_dir(args.out, args.command)
        for rec in records:
            if args.format in ("json", "both"):
                path = persist(rec, out / f"{rec.name}.json", csv_files=args.format == "both")
            else:
                path = out
                for name, cols in rec.series.items():
                    write_series_csv(series_csv_path(out / f"{rec.name}.json", name), cols)
            if args.command == "solve":
                _write_trajectory_csv(rec, out / "trajectory.csv")
            if args.plot:
                emit_plot_data(rec, args.plot, out)
            _print_summary(rec, path)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def _write_trajectory_csv(rec: RunRecord, path: Path):
    write_series_csv(path, rec.series["trajectory"])


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
