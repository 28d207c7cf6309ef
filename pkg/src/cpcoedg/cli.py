"""Command-line front end: benchmark runs, convergence tables and CP audits.

Example::

    cpcoedg run --problem tov --order 4 --cells 100 --out results
    cpcoedg run --problem frw1 --order 2 --convergence 30,60,90,120,150
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import (
    PROBLEMS, build, error_norms, get_problem, rate, reference_solver, sample_solution,
)
from .fluid import AdmissibilityError
from .integrator import SolverConfig

log = logging.getLogger("cpcoedg")

PRECISIONS = {"double": np.float64, "extended": np.longdouble}
OE_CHOICES = ("compact", "conventional", "uniform", "off")
VARIABLES = ("rho", "v", "A", "B")
NORMS = ("L1", "L2", "Linf")

DEFAULTS = dict(
    problem="tov", order=4, cells=100, cfl=None, t_final=None, precision="double",
    oe="compact", limiter="on", convergence=None, out=".", audit=False,
    reference=False, initial="uniform",
)


class ConfigError(ValueError):
    pass


# configuration ---------------------------------------------------------------
def read_config_file(path):
    """key = value lines (``#`` comments) or a JSON object."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
    else:
        data = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            data[key] = val
    out = {}
    for key, val in data.items():
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        out[key] = val
    return out


def _to_bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _cells_list(v):
    if v is None or isinstance(v, list):
        return v
    try:
        return [int(x) for x in str(v).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--convergence expects comma separated integers, got {v!r}") from exc


def resolve_config(args):
    """Merge defaults < config file < explicit flags and validate."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    try:
        cfg["order"] = int(cfg["order"])
        cfg["cells"] = int(cfg["cells"])
        cfg["cfl"] = None if cfg["cfl"] in (None, "", "none") else float(cfg["cfl"])
        cfg["t_final"] = None if cfg["t_final"] in (None, "", "none") else float(cfg["t_final"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid numeric setting: {exc}") from exc
    cfg["audit"] = _to_bool(cfg["audit"])
    cfg["reference"] = _to_bool(cfg["reference"])
    cfg["convergence"] = _cells_list(cfg["convergence"])
    if isinstance(cfg["limiter"], bool):
        cfg["limiter"] = "on" if cfg["limiter"] else "off"

    if cfg["problem"] not in PROBLEMS:
        raise ConfigError(f"unknown problem {cfg['problem']!r}; choose from {', '.join(PROBLEMS)}")
    if cfg["order"] not in (2, 3, 4):
        raise ConfigError(f"order must be 2, 3 or 4 (polynomial degree 1..3), got {cfg['order']}")
    for n in [cfg["cells"]] + (cfg["convergence"] or []):
        if n < 4:
            raise ConfigError(f"cell count must be at least 4, got {n}")
    if cfg["cfl"] is not None and cfg["cfl"] <= 0:
        raise ConfigError(f"CFL number must be positive, got {cfg['cfl']}")
    if cfg["precision"] not in PRECISIONS:
        raise ConfigError(f"precision must be one of {', '.join(PRECISIONS)}")
    if cfg["oe"] not in OE_CHOICES:
        raise ConfigError(f"--oe must be one of {', '.join(OE_CHOICES)}")
    if cfg["limiter"] not in ("on", "off"):
        raise ConfigError("--limiter must be on or off")
    if cfg["initial"] not in ("uniform", "steady"):
        raise ConfigError("initial must be uniform or steady")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    if not out.is_dir():
        raise ConfigError(f"output path {out} is not a directory")
    return cfg


def solver_config(cfg):
    oe = cfg["oe"]
    return SolverConfig(
        order=cfg["order"], cfl=cfg["cfl"],
        oe="compact" if oe == "uniform" else oe,
        damping="uniform" if oe == "uniform" else "componentwise",
        limiter=cfg["limiter"] == "on", audit=cfg["audit"],
    )


# tables ---------------------------------------------------------------------
def convergence_rows(rows, var):
    """(N, [(err, rate or None) per norm]) for one variable."""
    out = []
    for i, (n, errs) in enumerate(rows):
        cells = []
        for k in range(3):
            r = None
            if i > 0:
                n0, e0 = rows[i - 1]
                r = rate(e0[var][k], errs[var][k], n0, n)
            cells.append((errs[var][k], r))
        out.append((n, cells))
    return out


def emit_convergence_table(rows, variables=VARIABLES):
    """Aligned text table and CSV text for a list of (N, errors) rows.

    Rates use the two-point formula ln(e1/e2)/ln(N2/N1); a single row gives
    a table without rate columns.
    """
    with_rate = len(rows) > 1
    text_lines = []
    csv_rows = []
    header = ["variable", "N"]
    for nm in NORMS:
        header += [f"{nm}_error"] + ([f"{nm}_rate"] if with_rate else [])
    for var in variables:
        text_lines.append(f"{var}")
        head = f"{'N':>6}" + "".join(
            f"  {nm + ' err':>12}" + (f"  {'order':>6}" if with_rate else "") for nm in NORMS
        )
        text_lines.append(head)
        for n, cells in convergence_rows(rows, var):
            line = f"{n:>6}"
            rec = [var, n]
            for err, r in cells:
                line += f"  {err:>12.4e}"
                rec.append(f"{err:.6e}")
                if with_rate:
                    line += f"  {'-' if r is None else f'{r:.2f}':>6}"
                    rec.append("" if r is None else f"{r:.4f}")
            text_lines.append(line)
            csv_rows.append(rec)
        text_lines.append("")
    return "\n".join(text_lines), [header] + csv_rows


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _tag(cfg, n):
    return f"{cfg['problem']}_k{cfg['order'] - 1}_N{n}_{cfg['oe']}"


# runs -----------------------------------------------------------------------
def _problem(cfg):
    if cfg["problem"] == "accretion":
        return get_problem("accretion", initial=cfg["initial"])
    return get_problem(cfg["problem"])


def run_single(cfg, n, out):
    problem = _problem(cfg)
    dtype = PRECISIONS[cfg["precision"]]
    solver, state = build(problem, cfg["order"], n, solver_config(cfg), dtype)
    t_end = problem.t_end if cfg["t_final"] is None else cfg["t_final"]
    t0 = time.perf_counter()
    state = solver.run(state, t_end, progress_every=500)
    wall = time.perf_counter() - t0
    d = solver.disc
    s, num = sample_solution(d, solver.model, state, d.k + 1)
    avg = d.averages(state.U)
    rows = [["cell", "r", "rho", "v", "A", "B", "T00", "T01", "T00_avg", "T01_avg"]]
    n_pts = d.k + 1
    for j in range(n):
        for q in range(n_pts):
            i = j * n_pts + q
            rows.append([j] + [f"{float(x):.16e}" for x in (
                s.r.ravel()[i], num["rho"].ravel()[i], num["v"].ravel()[i], num["A"].ravel()[i],
                num["B"].ravel()[i], num["T00"].ravel()[i], num["T01"].ravel()[i],
                avg[0, j], avg[1, j],
            )])
    tag = _tag(cfg, n)
    _write_csv(out / f"{tag}_solution.csv", rows)
    a = solver.audit
    summary = dict(
        problem=cfg["problem"], order=cfg["order"], cells=n, t_final=float(state.t),
        steps=a.steps, min_admissibility=a.min_admissibility,
        limiter_activations=a.activations, metric_violations=a.metric_violations,
        min_A=a.min_A, max_A=a.max_A, min_B=a.min_B,
    )
    log.info("wall time %.2fs", wall)
    errs = None
    if problem.exact is not None:
        errs = error_norms(d, solver.model, state, problem.exact)
    if cfg["audit"]:
        audit_rows = [["event", "min_admissibility", "activations", "theta_min"]]
        audit_rows += [[r["where"], f"{r['min_admissibility']:.6e}", r["activations"],
                        f"{r['theta_min']:.6e}"] for r in a.rows]
        _write_csv(out / f"{tag}_audit.csv", audit_rows)
    return solver, state, summary, errs


def cmd_run(cfg):
    out = Path(cfg["out"])
    ladder = cfg["convergence"] or [cfg["cells"]]
    results = []
    for n in ladder:
        try:
            solver, state, summary, errs = run_single(cfg, n, out)
        except AdmissibilityError as exc:
            log.error("CP failure: %s", exc)
            return 3
        print(" ".join(f"{k}={v}" for k, v in summary.items()))
        results.append((n, errs, summary))
    _write_csv(out / f"{cfg['problem']}_k{cfg['order'] - 1}_{cfg['oe']}_summary.csv",
               [list(results[0][2])] + [list(s.values()) for _, _, s in results])
    rows = [(n, e) for n, e, _ in results if e is not None]
    if rows:
        text, table = emit_convergence_table(rows)
        print(text)
        base = out / f"{cfg['problem']}_k{cfg['order'] - 1}_{cfg['oe']}_convergence"
        base.with_suffix(".txt").write_text(text + "\n")
        _write_csv(base.with_suffix(".csv"), table)
    if cfg["reference"]:
        problem = _problem(cfg)
        centres, avg, _ = reference_solver(problem, 4000, PRECISIONS[cfg["precision"]])
        _write_csv(out / f"{cfg['problem']}_reference_N4000.csv",
                   [["r", "T00_avg", "T01_avg"]]
                   + [[f"{float(c):.16e}", f"{float(a0):.16e}", f"{float(a1):.16e}"]
                      for c, a0, a1 in zip(centres, avg[0], avg[1])])
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="cpcoedg", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a benchmark or a convergence ladder")
    r.add_argument("--config", help="key = value or JSON file; flags take precedence")
    r.add_argument("--problem", choices=PROBLEMS)
    r.add_argument("--order", type=int, help="scheme order 2..4 (degree 1..3)")
    r.add_argument("--cells", type=int)
    r.add_argument("--cfl", type=float)
    r.add_argument("--t-final", dest="t_final", type=float)
    r.add_argument("--precision", choices=tuple(PRECISIONS))
    r.add_argument("--oe", choices=OE_CHOICES,
                   help="compact (default), conventional per-stage, uniform damping, or off")
    r.add_argument("--limiter", choices=("on", "off"))
    r.add_argument("--convergence", help="comma separated cell counts, e.g. 30,60,120")
    r.add_argument("--initial", choices=("uniform", "steady"), help="accretion initial data")
    r.add_argument("--out", help="output directory")
    r.add_argument("--audit", action="store_const", const=True, default=None,
                   help="write per-stage CP audit CSV")
    r.add_argument("--reference", action="store_const", const=True, default=None,
                   help="also write the N=4000 first-order reference")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    return cmd_run(cfg)


if __name__ == "__main__":
    sys.exit(main())
