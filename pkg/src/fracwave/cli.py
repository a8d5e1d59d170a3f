"""Flat key=value command line driver.

Every invocation is a list of key=value tokens, e.g.

    fracwave command=temporal-study example=ex1 alpha=1.4,1.5,1.8 \
        N=128,256,512,1024 output=table.csv

Commands: solve, temporal-study, spatial-study, caputo-check, bound-report.
Studies write one CSV row per refinement with the stable header

    alpha,N,Ms,r,error,oc,seconds,cg_iters

and print an aligned table with measured wall times.  The seconds column
in the CSV is fixed at 0.000 unless timing=wall is requested, so default
serial runs are byte-reproducible.  FRACWAVE_THREADS overrides threads=.
"""

import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .caputo_l1 import truncation_study
from .graded_time import build_graded_mesh, gronwall_step_condition, recommended_grading
from .kirchhoff_solver import apriori_bound_report, solve_all
from .mms_harness import (
    ConvergenceReport,
    ReportRow,
    coupled_ms,
    get_case,
    observed_order,
    run_single_case,
    trajectory_rows,
)
from .fem_space import build_spatial_mesh

COMMANDS = ("solve", "temporal-study", "spatial-study", "caputo-check", "bound-report")
CSV_HEADER = "alpha,N,Ms,r,error,oc,seconds,cg_iters"
TRAJECTORY_HEADER = "n,t_n,h1_error,l2_error,bound_quantity"
DEFAULT_N_CAP = 4096


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = None
    example: str = "ex1"
    alpha: list = field(default_factory=list)
    N: list = field(default_factory=list)
    Ms: list = field(default_factory=list)
    r: float = None
    quadrature: int = 3
    tol: float = 1e-12
    output: str = None
    threads: int = 1
    beta: float = None
    sigma: float = None
    timing: str = "fixed"


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {text!r}") from None


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key} expects an integer, got {text!r}") from None


def _parse_list(key, text, convert):
    return [convert(key, part) for part in text.split(",") if part != ""]


def parse_config(source):
    """Parse key=value tokens (a string is split on whitespace first).

    Validates every field against the solver preconditions before any work
    starts; errors name the offending key.
    """
    tokens = source.split() if isinstance(source, str) else list(source)
    cfg = RunConfig()
    seen = set()
    for token in tokens:
        if "=" not in token:
            raise ConfigError(f"expected key=value, got {token!r}")
        key, _, value = token.partition("=")
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}")
        seen.add(key)
        if key == "command":
            cfg.command = value
        elif key == "example":
            cfg.example = value
        elif key == "alpha":
            cfg.alpha = _parse_list(key, value, _parse_float)
        elif key == "N":
            cfg.N = _parse_list(key, value, _parse_int)
        elif key == "Ms":
            cfg.Ms = _parse_list(key, value, _parse_int)
        elif key == "r":
            cfg.r = _parse_float(key, value)
        elif key == "quadrature":
            cfg.quadrature = _parse_int(key, value)
        elif key == "tol":
            cfg.tol = _parse_float(key, value)
        elif key == "output":
            cfg.output = value
        elif key == "threads":
            cfg.threads = _parse_int(key, value)
        elif key == "beta":
            cfg.beta = _parse_float(key, value)
        elif key == "sigma":
            cfg.sigma = _parse_float(key, value)
        elif key == "timing":
            cfg.timing = value
        else:
            raise ConfigError(f"unknown key {key!r}")

    env_threads = os.environ.get("FRACWAVE_THREADS")
    if env_threads is not None:
        cfg.threads = _parse_int("FRACWAVE_THREADS", env_threads)

    if cfg.command is None:
        raise ConfigError("command is required (one of " + ", ".join(COMMANDS) + ")")
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {cfg.command!r}")
    if cfg.example not in ("ex1", "ex2"):
        raise ConfigError(f"example must be ex1 or ex2, got {cfg.example!r}")
    for a in cfg.alpha:
        if not 1 < a < 2:
            raise ConfigError(f"alpha entries must lie in (1, 2), got {a}")
    for n in cfg.N:
        if n < 2:
            raise ConfigError(f"N entries must be >= 2, got {n}")
    for ms in cfg.Ms:
        if ms < 2:
            raise ConfigError(f"Ms entries must be >= 2, got {ms}")
    if cfg.r is not None and not cfg.r >= 1:
        raise ConfigError(f"r must satisfy r >= 1, got {cfg.r}")
    if not 1 <= cfg.quadrature <= 7:
        raise ConfigError(f"quadrature must lie in 1..7, got {cfg.quadrature}")
    if not cfg.tol > 0:
        raise ConfigError(f"tol must be positive, got {cfg.tol}")
    if cfg.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg.threads}")
    if cfg.beta is not None and not 0 < cfg.beta < 1:
        raise ConfigError(f"beta must lie in (0, 1), got {cfg.beta}")
    if cfg.sigma is not None and not cfg.sigma > 0:
        raise ConfigError(f"sigma must be positive, got {cfg.sigma}")
    if cfg.timing not in ("fixed", "wall"):
        raise ConfigError(f"timing must be fixed or wall, got {cfg.timing!r}")

    if cfg.command in ("temporal-study", "spatial-study", "bound-report", "solve"):
        if not cfg.alpha:
            raise ConfigError(f"{cfg.command} needs alpha")
    if cfg.command == "temporal-study" and len(cfg.N) < 2:
        raise ConfigError("temporal-study needs N with at least two entries")
    if cfg.command == "spatial-study" and len(cfg.Ms) < 2:
        raise ConfigError("spatial-study needs Ms with at least two entries")
    if cfg.command == "bound-report" and not cfg.N:
        raise ConfigError("bound-report needs N")
    if cfg.command == "solve":
        if len(cfg.alpha) != 1:
            raise ConfigError("solve needs exactly one alpha")
        if len(cfg.N) != 1:
            raise ConfigError("solve needs exactly one N")
        if len(cfg.Ms) > 1:
            raise ConfigError("solve accepts at most one Ms")
    if cfg.command == "caputo-check":
        if cfg.beta is None or cfg.sigma is None:
            raise ConfigError("caputo-check needs beta and sigma")
        if len(cfg.N) < 2:
            raise ConfigError("caputo-check needs N with at least two entries")
    return cfg


def _fmt_error(e):
    return f"{e:.2E}"


def _fmt_oc(oc):
    return "" if oc is None else f"{oc:.6f}"


def _csv_lines(rows, timing):
    lines = [CSV_HEADER]
    for row in rows:
        seconds = row.seconds if timing == "wall" else 0.0
        lines.append(
            f"{row.alpha:g},{row.N},{row.Ms},{row.r:.6f},"
            f"{_fmt_error(row.error)},{_fmt_oc(row.oc)},"
            f"{seconds:.3f},{row.cg_iters}"
        )
    return "\n".join(lines) + "\n"


def _print_table(rows, value_label="error"):
    header = (
        f"{'alpha':>6} {'N':>6} {'Ms':>6} {'r':>9} "
        f"{value_label:>10} {'oc':>9} {'seconds':>9} {'cg':>5}"
    )
    print(header)
    for row in rows:
        oc = "-" if row.oc is None else f"{row.oc:.6f}"
        note = "  (N capped)" if row.capped else ""
        print(
            f"{row.alpha:>6g} {row.N:>6} {row.Ms:>6} {row.r:>9.6f} "
            f"{_fmt_error(row.error):>10} {oc:>9} {row.seconds:>9.3f} "
            f"{row.cg_iters:>5}{note}"
        )


def _write_output(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _study_task(args):
    example, alpha, N, Ms, r, quad, tol, capped = args
    case = get_case(example, alpha)
    row = run_single_case(case, N, Ms, r, quad_order=quad, tol=tol)
    row.capped = capped
    return row


def _run_tasks(tasks, threads):
    if threads == 1:
        return [_study_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_study_task, tasks))


def _grouped_rows(cfg, keys_of):
    """Run one study task per (alpha, refinement) and attach orders per alpha."""
    tasks = []
    for alpha in sorted(cfg.alpha):
        for N, Ms, capped in keys_of(alpha):
            tasks.append(
                (cfg.example, alpha, N, Ms, cfg.r, cfg.quadrature, cfg.tol, capped)
            )
    rows = _run_tasks(tasks, cfg.threads)
    per_alpha = len(rows) // len(cfg.alpha)
    out = []
    for i in range(0, len(rows), per_alpha):
        group = rows[i : i + per_alpha]
        key_attr = "N" if cfg.command == "temporal-study" else "Ms"
        ocs = observed_order([(getattr(r_, key_attr), r_.error) for r_ in group])
        for row, oc in zip(group[:-1], ocs):
            row.oc = oc
        out.extend(group)
    return out


def _cmd_temporal(cfg):
    n_sorted = sorted(cfg.N)

    def keys_of(alpha):
        beta = 0.5 * alpha
        return [(N, coupled_ms(N, beta), False) for N in n_sorted]

    rows = _grouped_rows(cfg, keys_of)
    _print_table(rows)
    return rows


def _cmd_spatial(cfg):
    ms_sorted = sorted(cfg.Ms)

    def keys_of(alpha):
        beta = 0.5 * alpha
        out = []
        for Ms in ms_sorted:
            n = max(2, 2 * int(round(0.5 * float(Ms) ** (2.0 / (2.0 - beta)))))
            capped = n > DEFAULT_N_CAP
            out.append((min(n, DEFAULT_N_CAP), Ms, capped))
        return out

    rows = _grouped_rows(cfg, keys_of)
    _print_table(rows)
    for row in rows:
        if row.capped:
            print(
                f"note: alpha={row.alpha:g} Ms={row.Ms} coupled N exceeded "
                f"{DEFAULT_N_CAP} and was capped"
            )
    return rows


def _cmd_caputo_check(cfg):
    r = cfg.r if cfg.r is not None else recommended_grading(cfg.beta)
    start = time.perf_counter()
    table = truncation_study(cfg.beta, cfg.sigma, sorted(cfg.N), r)
    elapsed = time.perf_counter() - start
    rows = [
        ReportRow(alpha=2.0 * cfg.beta, N=N, Ms=0, r=r, error=err, seconds=elapsed)
        for N, err in table
    ]
    ocs = observed_order(table)
    for row, oc in zip(rows[:-1], ocs):
        row.oc = oc
    _print_table(rows, value_label="wt_error")
    print(f"weighted truncation orders for beta={cfg.beta:g}, sigma={cfg.sigma:g}")
    return rows


def _cmd_bound_report(cfg):
    rows = []
    for alpha in sorted(cfg.alpha):
        case = get_case(cfg.example, alpha)
        beta = 0.5 * alpha
        r = cfg.r if cfg.r is not None else recommended_grading(beta)
        for N in sorted(cfg.N):
            Ms = coupled_ms(N, beta)
            start = time.perf_counter()
            tmesh = build_graded_mesh(case.T, N, r)
            smesh = build_spatial_mesh(case.domain, Ms)
            state = solve_all(
                case.problem_spec(), tmesh, smesh, cfg.quadrature, cfg.tol
            )
            bound = float(apriori_bound_report(state).max())
            elapsed = time.perf_counter() - start
            ok = gronwall_step_condition(tmesh, beta, 1.0)
            rows.append(
                ReportRow(
                    alpha=alpha,
                    N=N,
                    Ms=Ms,
                    r=r,
                    error=bound,
                    seconds=elapsed,
                    cg_iters=max(state.cg_iters, default=0),
                )
            )
            print(
                f"alpha={alpha:g} N={N}: max bound quantity {bound:.6e}, "
                f"step condition (lam=1) {'holds' if ok else 'violated'}"
            )
    _print_table(rows, value_label="bound")
    return rows


def _cmd_solve(cfg):
    alpha = cfg.alpha[0]
    beta = 0.5 * alpha
    N = cfg.N[0]
    Ms = cfg.Ms[0] if cfg.Ms else coupled_ms(N, beta)
    r = cfg.r if cfg.r is not None else recommended_grading(beta)
    case = get_case(cfg.example, alpha)
    tmesh = build_graded_mesh(case.T, N, r)
    smesh = build_spatial_mesh(case.domain, Ms)
    start = time.perf_counter()
    state = solve_all(case.problem_spec(), tmesh, smesh, cfg.quadrature, cfg.tol)
    elapsed = time.perf_counter() - start
    levels = trajectory_rows(case, state, cfg.quadrature)
    lines = [TRAJECTORY_HEADER]
    for n, tn, h1, l2, bound in levels:
        lines.append(f"{n},{tn:.10g},{h1:.6E},{l2:.6E},{bound:.6E}")
    text = "\n".join(lines) + "\n"
    worst = max(h1 for _, _, h1, _, _ in levels)
    ok = gronwall_step_condition(tmesh, beta, 1.0)
    print(
        f"alpha={alpha:g} N={N} Ms={Ms}: max H1 error {_fmt_error(worst)}, "
        f"{elapsed:.3f} s, step condition (lam=1) {'holds' if ok else 'violated'}"
    )
    return text


def run(cfg):
    """Execute a parsed configuration; returns the process exit status."""
    try:
        if cfg.command == "solve":
            text = _cmd_solve(cfg)
            path = cfg.output or "trajectory.csv"
        else:
            if cfg.command == "temporal-study":
                rows = _cmd_temporal(cfg)
            elif cfg.command == "spatial-study":
                rows = _cmd_spatial(cfg)
            elif cfg.command == "caputo-check":
                rows = _cmd_caputo_check(cfg)
            else:
                rows = _cmd_bound_report(cfg)
            text = _csv_lines(rows, cfg.timing)
            path = cfg.output or "report.csv"
        _write_output(path, text)
        print(f"wrote {path}")
        return 0
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) == 1 and "=" not in argv[0] and os.path.isfile(argv[0]):
        with open(argv[0]) as fh:
            argv = fh.read().split()
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
