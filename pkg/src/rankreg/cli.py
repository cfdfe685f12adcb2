"""Command-line entry point: ``rankreg <command> [options]``.

Exit codes: 0 success, 1 estimator error, 2 input error. Errors are written
to stderr as ``{"error": {"code": ..., "exit": ..., "message": ...}}``.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

from . import did, iv, ols, rdd
from .data import Estimate, PanelSample, Sample
from .errors import InternalError, InvalidInput, RankRegError
from .io import emit_plotdata, load_csv, to_csv, to_json, write_text
from .ranks import Jitter, ecdf, fan_park_bounds, jitter_values, rank_ate

COMMANDS = ("ols", "ols-general", "tsls", "did", "rdd", "bounds", "simulate")
ESTIMATE_COLUMNS = ("value", "estimator", "estimand", "n", "diagnostics")
SIM_COLUMNS = ("n", "mean", "sd", "abs_err", "oracle", "mcse", "reps_ok", "reps_failed", "run_id", "estimator")


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    columns: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    output: str = "json"
    out_path: Optional[str] = None

    def echo(self) -> dict:
        return asdict(self)


def _add_io(p: argparse.ArgumentParser, roles: Sequence[str]) -> None:
    p.add_argument("--input", "-i", dest="input_path", help="CSV file with a header row")
    p.add_argument("--y", default="y", help="outcome column (default: y)")
    if "w" in roles:
        p.add_argument("--w", default="w", help="treatment column (default: w)")
    if "x" in roles:
        p.add_argument("--x", nargs="+", default=[], help="covariate columns")
    if "z" in roles:
        p.add_argument("--z", default="z", help="instrument column (default: z)")
    if "run" in roles:
        p.add_argument("--run", default="run", help="running-variable column (default: run)")
    if "y_pre" in roles:
        p.add_argument("--y-pre", dest="y_pre", default="y_pre", help="pre-period outcome column")
    p.add_argument("--tie-policy", choices=("literal", "jitter"), default="literal")
    p.add_argument("--jitter-epsilon", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", dest="output", choices=("json", "csv"), default="json")
    p.add_argument("--out", dest="out_path")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankreg", description="Rank regressions with explicit estimand labels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ols", help="rank-OLS with a binary treatment")
    _add_io(p, ("w", "x"))
    p.add_argument("--ref", choices=("all", "treated", "control"), default="all")
    p.add_argument("--interact", action="store_true", help="add W x centered-covariate interactions")
    _add_output(p)

    p = sub.add_parser("ols-general", help="rank-OLS on a transformed multi-valued treatment")
    _add_io(p, ("w", "x"))
    p.add_argument("--transform", choices=("identity", "rank", "dichotomize_at", "step"), default="identity")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--breakpoints", type=float, nargs="+", default=[])
    p.add_argument("--normalize", action="store_true")
    _add_output(p)

    p = sub.add_parser("tsls", help="rank-2SLS with a binary instrument")
    _add_io(p, ("w", "z"))
    p.add_argument("--ref", choices=("all", "treated", "control", "complier"), default="all")
    p.add_argument("--zeta", type=float, default=0.5)
    _add_output(p)

    p = sub.add_parser("did", help="rank difference-in-differences")
    _add_io(p, ("w", "y_pre"))
    p.add_argument("--ref", choices=("all", "treated", "control"), default="all")
    p.add_argument("--modified", action="store_true", help="rank against the changes-in-changes counterfactual")
    _add_output(p)

    p = sub.add_parser("rdd", help="sharp regression discontinuity on ranks")
    _add_io(p, ("run",))
    p.add_argument("--cutoff", type=float, default=0.0)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--bandwidth-constant", type=float)
    p.add_argument("--kernel", choices=rdd.KERNELS, default="triangular")
    p.add_argument("--ref", choices=("all", "treated", "control"), default="all")
    p.add_argument("--modified", action="store_true", help="kernel U-statistic for the cutoff rank-ATE")
    _add_output(p)

    p = sub.add_parser("bounds", help="rank-ATE and Fan-Park bounds from the two arms")
    _add_io(p, ("w",))
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo convergence run against an oracle")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--theorem", help="run the stored plan for one convergence claim")
    group.add_argument("--fixture", help="named design; requires --estimator")
    p.add_argument("--estimator")
    p.add_argument("--oracle", help="override the estimand the runs are compared with")
    p.add_argument("--ns", type=int, nargs="+")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, help="replace the design's stored seed")
    p.add_argument("--zeta", type=float)
    p.add_argument("--bandwidth-constant", type=float)
    p.add_argument("--plotdata", help="also write long-format replication records here")
    _add_output(p)
    return parser


def _config_tokens(parser: argparse.ArgumentParser, command: str, path: str) -> list[str]:
    """Turn a ``key = value`` file into flags for ``command``'s sub-parser."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[run]\n" + fh.read())
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise InvalidInput(f"bad config file {path}: {exc}") from None
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    actions = {}
    for action in sub._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                actions[opt[2:].replace("-", "_")] = (opt, action)
    tokens: list[str] = []
    for key, raw in cp["run"].items():
        norm = key.replace("-", "_")
        if norm in ("config", "command"):
            continue
        if norm not in actions:
            raise InvalidInput(f"unknown config key {key!r} for {command}")
        opt, action = actions[norm]
        if isinstance(action, argparse._StoreTrueAction):
            if raw.strip().lower() in ("1", "true", "yes", "on"):
                tokens.append(opt)
            continue
        values = raw.replace(",", " ").split() if action.nargs in ("+", "*") else [raw.strip()]
        tokens.extend([opt, *values])
    return tokens


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    argv = list(argv)
    pos = next((k for k, a in enumerate(argv) if a in COMMANDS), None)
    if pos is not None:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv[pos + 1:])
        if known.config:
            argv = argv[: pos + 1] + _config_tokens(parser, argv[pos], known.config) + argv[pos + 1:]
    return parser.parse_args(argv)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    roles = ("y", "w", "x", "z", "run", "y_pre")
    columns = {r: getattr(ns, r) for r in roles if hasattr(ns, r) and ns.command != "simulate"}
    skip = set(roles) | {"command", "input_path", "output", "out_path", "config"}
    options = {k: v for k, v in sorted(vars(ns).items()) if k not in skip}
    return RunConfig(ns.command, getattr(ns, "input_path", None), columns, options, ns.output, ns.out_path)


def _load(cfg: RunConfig, binary: Sequence[str], panel: bool = False):
    if cfg.input_path is None:
        raise InvalidInput(f"{cfg.command} needs --input")
    data = load_csv(cfg.input_path, cfg.columns, binary=binary, panel=panel)
    if cfg.options.get("tie_policy") == "jitter":
        jit = Jitter(int(cfg.options["seed"]), float(cfg.options["jitter_epsilon"]))
        if panel:
            second = Jitter(jit.seed + 1, jit.epsilon)
            data = PanelSample(jitter_values(data.y0, jit), jitter_values(data.y1, second), data.w)
        else:
            data = Sample(jitter_values(data.y, jit), data.w, data.x, data.z, data.run, data.y_pre)
    return data


def _run_ols(cfg: RunConfig) -> Estimate:
    s = _load(cfg, ("w",))
    ref, interact = cfg.options["ref"], cfg.options["interact"]
    if ref != "all":
        if s.n_covariates or interact:
            raise InvalidInput("reference-group ranking is only defined without covariates")
        return ols.rank_ols_refgroup(s, ref)
    if s.n_covariates or interact:
        return ols.rank_ols_cov(s, interact=interact)
    return ols.rank_ols_nocov(s)


def _run_ols_general(cfg: RunConfig) -> Estimate:
    s = _load(cfg, ())
    o = cfg.options
    t = ols.TreatmentTransform(
        o["transform"],
        threshold=o["threshold"] if o["transform"] == "dichotomize_at" else None,
        breakpoints=tuple(o["breakpoints"]) if o["transform"] == "step" else (),
        normalize=o["normalize"],
    )
    return ols.rank_ols_general(s, t)


def _run_tsls(cfg: RunConfig) -> Estimate:
    s = _load(cfg, ("w", "z"))
    if cfg.options["ref"] == "complier":
        return iv.rank_2sls_complier(s, cfg.options["zeta"])
    return iv.rank_2sls(s, cfg.options["ref"])


def _run_did(cfg: RunConfig) -> Estimate:
    p = _load(cfg, ("w",), panel=True)
    if cfg.options["modified"]:
        return did.rank_mdid(p, did.cic_counterfactual(p))
    return did.rank_did(p, cfg.options["ref"])


def _run_rdd(cfg: RunConfig) -> Estimate:
    o = cfg.options
    columns = {k: v for k, v in cfg.columns.items() if k in ("y", "run")}
    if cfg.input_path is None:
        raise InvalidInput("rdd needs --input")
    # treatment is implied by the cutoff, so the running variable fills the w slot
    raw = load_csv(cfg.input_path, {**columns, "w": columns["run"]}, binary=())
    w = (raw.run >= o["cutoff"]).astype(float)
    y = raw.y
    if o["tie_policy"] == "jitter":
        y = jitter_values(y, Jitter(int(o["seed"]), float(o["jitter_epsilon"])))
    s = Sample(y=y, w=w, run=raw.run)
    rc = rdd.RddConfig(o["cutoff"], o["bandwidth"], o["bandwidth_constant"], rdd.Kernel(o["kernel"]))
    return rdd.rank_mrdd(s, rc) if o["modified"] else rdd.rank_rdd(s, rc, o["ref"])


def _run_bounds(cfg: RunConfig) -> dict:
    s = _load(cfg, ("w",))
    treated = s.w == 1
    if treated.all() or not treated.any():
        raise InvalidInput("bounds need both treated and control units")
    f1, f0 = ecdf(s.y[treated]), ecdf(s.y[~treated])
    b = fan_park_bounds(f1, f0)
    return {"estimator": "fan_park_bounds", "estimand": "P(Y(1) >= Y(0)) - 1/2",
            "n": s.n, "lower": b.lower, "upper": b.upper, "rank_ate": rank_ate(f1, f0)}


def _run_simulate(cfg: RunConfig) -> list:
    from .simlab import fixtures
    from .simlab.runner import ESTIMATORS, convergence_run

    o = cfg.options
    if o["theorem"] is not None:
        plan = fixtures.theorem_plan(o["theorem"])
        runs, ns, reps = plan.runs, plan.ns, plan.reps
    else:
        if not o["estimator"]:
            raise InvalidInput("--fixture needs --estimator")
        if o["estimator"] not in ESTIMATORS:
            raise InvalidInput(f"unknown estimator {o['estimator']!r}; choose from {sorted(ESTIMATORS)}")
        opts = dict(fixtures.RDD_OPTIONS) if "rdd" in o["estimator"] else {}
        runs = (fixtures.PlannedRun(o["fixture"], o["estimator"], opts, o["oracle"]),)
        ns, reps = (1000, 4000), 10
    ns = tuple(o["ns"] or ns)
    reps = int(o["reps"] or reps)
    tables = []
    for k, run in enumerate(runs):
        spec = fixtures.fixture(run.fixture)
        if o["seed"] is not None:
            spec = type(spec)(spec.name, spec.kind, spec.params, int(o["seed"]))
        opts = dict(run.options)
        if o["zeta"] is not None and run.estimator == "rank_2sls_complier":
            opts["zeta"] = o["zeta"]
        if o["bandwidth_constant"] is not None and "rdd" in run.estimator:
            opts["bandwidth_constant"] = o["bandwidth_constant"]
        run_id = f"{k}:{run.fixture}:{run.estimator}"
        if opts:
            run_id += ":" + ",".join(f"{a}={opts[a]}" for a in sorted(opts))
        oracle = (o["oracle"] if o["theorem"] is None else None) or run.oracle
        tables.append(convergence_run(spec, run.estimator, ns, reps, opts, oracle, run_id))
    return tables


def _format_estimate(record: dict, cfg: RunConfig) -> str:
    if cfg.output == "json":
        return to_json({**record, "config": cfg.echo()})
    columns = list(ESTIMATE_COLUMNS) if "value" in record else list(record)
    return to_csv([record], columns)


def _format_tables(tables: list, cfg: RunConfig) -> str:
    if cfg.output == "json":
        return to_json({"config": cfg.echo(), "runs": [t.as_dict() for t in tables]})
    rows = [{**row, "run_id": t.run_id, "estimator": t.estimator} for t in tables for row in t.rows]
    return to_csv(rows, SIM_COLUMNS)


DISPATCH = {
    "ols": _run_ols,
    "ols-general": _run_ols_general,
    "tsls": _run_tsls,
    "did": _run_did,
    "rdd": _run_rdd,
    "bounds": _run_bounds,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured command and write its output; returns the exit code."""
    if cfg.command == "simulate":
        tables = _run_simulate(cfg)
        write_text(_format_tables(tables, cfg), cfg.out_path)
        if cfg.options.get("plotdata"):
            emit_plotdata(tables, cfg.options["plotdata"], "csv")
        return 0
    if cfg.command not in DISPATCH:
        raise InvalidInput(f"unknown command {cfg.command!r}")
    result = DISPATCH[cfg.command](cfg)
    record = result.to_dict() if isinstance(result, Estimate) else result
    write_text(_format_estimate(record, cfg), cfg.out_path)
    return 0


def _report(err: RankRegError) -> int:
    sys.stderr.write(to_json({"error": err.to_dict()}))
    return err.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(parse_args(argv))
        return run(cfg)
    except RankRegError as err:
        return _report(err)
    except OSError as exc:
        return _report(InvalidInput(f"{exc.filename or ''}: {exc.strerror}"))
    except Exception as exc:  # keep the exit-code contract even for bugs
        return _report(InternalError(f"{type(exc).__name__}: {exc}"))


if __name__ == "__main__":
    sys.exit(main())
