"""Command-line front end.

    rmz run <config-file> [--out file.csv]
    rmz experiment <name> --out <dir> [--jobs n]
    rmz oracle burgers --t <t> --n <N>

Exit status is 0 on success, 1 for configuration errors and 2 when a run
fails (blow-up, step-size underflow or an exception).
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .driver import COMPLETED, RunConfig, RunResult, run
from .oracle import OracleError, exact_resolved_energy

log = logging.getLogger("rmz")

__all__ = [
    "ConfigError",
    "parse_config",
    "format_config",
    "emit_csv",
    "read_csv",
    "ExperimentSpec",
    "experiment_spec",
    "run_experiment",
    "scale_ratio",
    "slope_through_origin",
    "main",
]

EXPERIMENTS = ("fig1-burgers", "fig2-euler", "fig3-coefficient-sweep", "fig4-stability")
EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2

# Euler runs stop here; the Taylor-Green cascade reaches the smallest
# resolved scales of an 8^3 model well before this
EULER_T_END = 10.0
BURGERS_T_END = 100.0


# ---------------------------------------------------------------- config


class ConfigError(ValueError):
    """Configuration problem tied to a key and, when known, a line."""

    def __init__(self, key, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}")
        self.key = key
        self.line = line


def _int(text):
    value = float(text)
    if not value.is_integer() or not math.isfinite(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _float(text):
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _floats(text):
    return tuple(_float(x) for x in text.replace(",", " ").split())


_PARSERS = {
    "equation": str,
    "N": _int,
    "order": _int,
    "variant": str,
    "solve": str,
    "TOL": _float,
    "rel_tol": _float,
    "abs_tol": _float,
    "t_end": _float,
    "ic": str,
    "sample_dt": _float,
    "svd_cutoff": _float,
    "drop_row": _int,
    "blowup_factor": _float,
    "coefficients": _floats,
}


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key = value`` text (``#`` starts a comment).

    Unspecified keys take the :class:`RunConfig` defaults.

    Raises
    ------
    ConfigError
        naming the offending key (and line, when the key was given).
    """
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(body, "expected key = value", lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError(body, "missing key", lineno)
        if key not in _PARSERS:
            raise ConfigError(key, "unknown key", lineno)
        if key in values:
            raise ConfigError(key, f"duplicate key (first set on line {lines[key]})", lineno)
        if not value:
            raise ConfigError(key, "missing value", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}", lineno) from None
        lines[key] = lineno
    try:
        return RunConfig(**values)
    except ValueError as exc:
        key = _blame(str(exc), values)
        raise ConfigError(key, str(exc), lines.get(key)) from None


_MESSAGE_KEYS = {"tolerances": "TOL", "initial condition": "ic"}


def _blame(message, values):
    """Best guess at the key an invariant violation refers to."""
    for prefix, key in _MESSAGE_KEYS.items():
        if message.startswith(prefix):
            if key == "TOL":
                bad = [k for k in ("TOL", "rel_tol", "abs_tol") if values.get(k, 1) <= 0]
                return bad[0] if bad else key
            return key
    for key in sorted(_PARSERS, key=len, reverse=True):
        if message.startswith(key) or f" {key} " in f" {message} ":
            return key
    return next(iter(values), "config")


def format_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config` (``repr`` floats round-trip exactly)."""
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        out.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- output


def _num(x):
    if x is None:
        return "none"
    return f"{float(x):.17g}"


def csv_header(order: int) -> list:
    return ["t", "energy"] + [f"E{i}" for i in range(2, order + 2)]


def emit_csv(result: RunResult, path) -> Path:
    """Write the sampled series and the ``.coeffs`` sidecar.

    Rows hold ``t, energy = E1/2, E2 .. E_{order+1}`` in 17 significant
    digits, so parsing recovers the stored doubles exactly.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(csv_header(result.config.order))
            for t, e, m in zip(result.t, result.energy, result.moments):
                w.writerow([_num(t), _num(e)] + [_num(x) for x in m])
        sidecar = path.with_suffix(".coeffs")
        sidecar.write_text(coeffs_text(result))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def coeffs_text(result: RunResult) -> str:
    c = result.coefficients
    lines = [
        f"variant = {result.config.variant}",
        f"solve = {result.config.solve}",
        f"status = {result.status}",
        f"switch_time = {_num(result.switch_time)}",
    ]
    if c is not None:
        lines += [f"a{i + 1} = {_num(v)}" for i, v in enumerate(c.values)]
        if c.sigma is not None:
            lines.append("sigma = " + " ".join(_num(s) for s in c.sigma))
        lines.append(f"cond = {_num(c.cond)}")
        lines.append(f"solved_cond = {_num(c.solved_cond)}")
    lines.append(f"failure_time = {_num(result.failure_time)}")
    if result.message:
        lines.append(f"message = {result.message}")
    return "\n".join(lines) + "\n"


def read_csv(path):
    """Return ``(header, rows)`` with rows as float arrays."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = np.array([[float(x) for x in row] for row in r], dtype=float)
    return header, rows.reshape(-1, len(header))


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_num(x) if isinstance(x, (float, np.floating)) or x is None else x
                        for x in row])
    return path


# ---------------------------------------------------------------- experiments


@dataclass
class ExperimentSpec:
    name: str
    out: Path
    runs: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)


def scale_ratio(N: int, k_active: int = 1) -> float:
    """Largest active initial wavenumber over ``N/2``."""
    return k_active / (N // 2)


def slope_through_origin(r, a) -> float:
    """Least-squares slope of ``a = s r``."""
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    return float(np.dot(r, a) / np.dot(r, r))


def experiment_spec(name: str, out, full_scale: bool = False) -> ExperimentSpec:
    """Runs of an experiment suite.  ``full_scale`` enables the 16^3 renormalized
    Euler run, which needs a 32^3 full system up to the switch."""
    spec = ExperimentSpec(name, Path(out))
    B = RunConfig(equation="burgers", N=16, t_end=BURGERS_T_END)
    E = RunConfig(equation="euler3d", N=8, t_end=EULER_T_END)
    if name == "fig1-burgers":
        spec.runs = {
            "tmodel": B.replace(variant="tmodel", order=1),
            "rmz1": B.replace(order=1, solve="full-solve"),
            "rmz2": B.replace(order=2, solve="full-solve"),
            "rmz3": B.replace(order=3, solve="full-solve"),
            "rmz3-pinned": B.replace(order=3, solve="pinned-markovian"),
        }
    elif name == "fig2-euler":
        spec.runs = {
            "tmodel-8": E.replace(variant="tmodel", order=1),
            "tmodel-16": E.replace(variant="tmodel", order=1, N=16),
            "rmz3-8": E.replace(order=3),
        }
        rmz16 = E.replace(order=3, N=16)
        if full_scale:
            spec.runs["rmz3-16"] = rmz16
        else:
            spec.skipped["rmz3-16"] = rmz16
    elif name == "fig3-coefficient-sweep":
        for N in (4, 8, 16, 32):
            spec.runs[f"burgers-{N}"] = B.replace(N=N, order=1, t_end=2.0)
        for N in (4, 8):
            spec.runs[f"euler-{N}"] = E.replace(N=N, order=1, t_end=5.0)
    elif name == "fig4-stability":
        spec.runs = {
            "burgers-rmz3": B.replace(order=3),
            "burgers-mz3": B.replace(order=3, variant="mz-unrenormalized"),
            "euler-rmz3": E.replace(order=3),
            "euler-mz3": E.replace(order=3, variant="mz-unrenormalized"),
        }
    else:
        raise ConfigError("experiment", f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    return spec


MANIFEST_HEADER = ["run", "file", "equation", "N", "order", "variant", "solve", "status",
                   "switch_time", "failure_time", "steps", "wall_time", "message"]


def _execute(name, cfg, out):
    """Run one configuration and write its files; never raises."""
    file = Path(out) / f"{name}.csv"
    row = {"run": name, "file": file.name, "equation": cfg.equation, "N": cfg.N,
           "order": cfg.order, "variant": cfg.variant, "solve": cfg.solve}
    try:
        result = run(cfg)
        emit_csv(result, file)
        (Path(out) / f"{name}.cfg").write_text(format_config(cfg))
        row.update(status=result.status, switch_time=result.switch_time,
                   failure_time=result.failure_time, steps=result.steps,
                   wall_time=result.wall_time, message=result.message)
        coeffs = None if result.coefficients is None else list(result.coefficients.values)
    except Exception as exc:  # recorded per run; the suite carries on
        log.exception("run %s failed", name)
        row.update(status="error", message=f"{type(exc).__name__}: {exc}")
        result, coeffs = None, None
    series = None if result is None else (list(result.t), list(result.energy))
    return row, series, coeffs


def _manifest_row(row):
    return [row.get(k) if k not in ("switch_time", "failure_time", "wall_time")
            else (None if row.get(k) is None else float(row[k])) for k in MANIFEST_HEADER]


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> dict:
    """Execute ``spec``, writing one CSV per run, ``manifest.csv`` and the
    figure.  Returns ``{run name: (manifest row, (t, energy), coefficients)}``."""
    from .plotting import plot_coefficients, plot_energy

    out = spec.out
    out.mkdir(parents=True, exist_ok=True)
    names = list(spec.runs)
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_execute, names, [spec.runs[n] for n in names],
                                 [out] * len(names)))
    else:
        done = [_execute(n, spec.runs[n], out) for n in names]
    results = dict(zip(names, done))

    rows = [_manifest_row(r) for r, _, _ in done]
    for name, cfg in spec.skipped.items():
        rows.append([name, "", cfg.equation, cfg.N, cfg.order, cfg.variant, cfg.solve,
                     "skipped", None, None, None, None, "enable with --full-scale"])

    curves = {n: s for n, (_, s, _) in results.items() if s is not None}
    if spec.name == "fig1-burgers":
        t = np.arange(0.0, BURGERS_T_END + 0.5)
        e = [exact_resolved_energy(x, 16, include_edge=False) for x in t]
        write_table(out / "oracle.csv", ["t", "energy"], zip(t, e))
        rows.insert(0, ["oracle", "oracle.csv", "burgers", 16, None, "exact", None,
                        COMPLETED, None, None, None, None, ""])
        curves = {"exact": (t, e), **curves}
        plot_energy(curves, out / "fig1-burgers.png", "Burgers, N = 16", markers=["exact"])
    elif spec.name == "fig2-euler":
        plot_energy(curves, out / "fig2-euler.png", "Euler, Taylor-Green", logy=False)
    elif spec.name == "fig3-coefficient-sweep":
        _fig3_tables(results, out, plot_coefficients)
    elif spec.name == "fig4-stability":
        for eq in ("burgers", "euler"):
            sub = {n: c for n, c in curves.items() if n.startswith(eq)}
            plot_energy(sub, out / f"fig4-{eq}.png", f"{eq}: renormalized vs bare, order 3")
    write_table(out / "manifest.csv", MANIFEST_HEADER, rows)
    return results


def _fig3_tables(results, out, plot_coefficients):
    table, series = [], {}
    for name, (row, _, coeffs) in results.items():
        eq, N = row["equation"], int(row["N"])
        a = coeffs[1] if coeffs is not None and row["switch_time"] is not None else None
        table.append([eq, N, scale_ratio(N), a, row["switch_time"], row["status"]])
        if a is not None:
            series.setdefault(eq, ([], []))
            series[eq][0].append(scale_ratio(N))
            series[eq][1].append(a)
    write_table(out / "coefficients.csv",
                ["equation", "N", "ratio", "coefficient", "switch_time", "status"], table)
    slope = None
    if "burgers" in series and series["burgers"][0]:
        slope = slope_through_origin(*series["burgers"])
    (out / "slope.txt").write_text(f"slope = {_num(slope)}\n")
    plot_coefficients(series, out / "fig3-coefficients.png", slope)


# ---------------------------------------------------------------- entry point


def _cmd_run(args):
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else path.with_suffix(".csv")
    try:
        result = run(cfg)
        emit_csv(result, out)
    except Exception as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN
    print(f"{out}: {result.status}, {len(result.t)} samples"
          + (f", switch at t={result.switch_time:.6g}" if result.switch_time is not None else ""))
    if result.status != COMPLETED:
        print(f"run failed: {result.message}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_OK


def _cmd_experiment(args):
    try:
        spec = experiment_spec(args.name, args.out, args.full_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_experiment(spec, jobs=args.jobs)
    for name, (row, _, _) in results.items():
        print(f"{name:16s} {row['status']}")
    errors = [n for n, (row, _, _) in results.items() if row["status"] == "error"]
    return EXIT_RUN if errors else EXIT_OK


def _cmd_oracle(args):
    if args.n < 2 or args.n % 2:
        print("config error: n: must be even and >= 2", file=sys.stderr)
        return EXIT_CONFIG
    if args.t < 0:
        print("config error: t: must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        e = exact_resolved_energy(args.t, args.n, include_edge=not args.exclude_edge)
    except OracleError as exc:
        print(f"oracle failed: {exc}", file=sys.stderr)
        return EXIT_RUN
    print(f"{e:.15g}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="rmz", description="Renormalized Mori-Zwanzig reduced models")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a single configuration file")
    p.add_argument("config", help="key = value configuration file")
    p.add_argument("--out", help="CSV path (default: config path with .csv)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("experiment", help="run an experiment suite")
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="runs executed in parallel")
    p.add_argument("--full-scale", action="store_true",
                   help="include the 16^3 renormalized Euler run")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("oracle", help="exact resolved energy")
    p.add_argument("equation", choices=["burgers"])
    p.add_argument("--t", type=float, required=True, help="time")
    p.add_argument("--n", type=int, required=True, help="resolved modes N")
    p.add_argument("--exclude-edge", action="store_true",
                   help="drop the unpaired -N/2 mode")
    p.set_defaults(func=_cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
