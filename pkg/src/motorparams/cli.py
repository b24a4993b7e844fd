"""Command-line interface: ``motorparams {estimate,batch,synth,report}``.

Solver flags may also come from a config file given with ``--config``.  The
file holds one ``key = value`` pair per line; keys are the long flag names
without the leading dashes (``max-iter`` and ``max_iter`` are equivalent),
``#`` starts a comment and blank lines are ignored.  Flags given on the
command line override the file.

Exit codes: 0 success, 1 usage or configuration error, 2 corpus parse failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

from . import batch as batch_mod
from . import corpus as corpus_mod
from .descent import DescentConfig, RestrictionConfig, Strategy
from .errors import MotorParamsError, ParseError
from .evolution import GaConfig
from .formulation import NameplateData, residuals, to_targets
from .hybrid import HybridConfig

EXIT_OK, EXIT_USAGE, EXIT_PARSE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag name -> (type, help)
SOLVER_FLAGS = {
    "algorithm": (str, "NR, LM, DNR, GA, NRGA, LMGA or DNRGA (default DNRGA)"),
    "kr": (float, "restriction r_s = kr * r_r1 for plain descent"),
    "kx": (float, "restriction x_r2 = kx * x_s for plain descent"),
    "max-iter": (int, "descent iteration cap"),
    "threshold": (float, "convergence threshold on the squared error"),
    "lambda0": (float, "initial damping factor"),
    "beta": (float, "damping increase factor"),
    "gamma": (float, "damping decrease factor"),
    "strategy": (str, "LM damping update: gain-ratio or error-term"),
    "pop": (int, "population size"),
    "pool": (int, "mating pool size"),
    "elite": (int, "elite count"),
    "crossover-fraction": (float, "fraction of children made by crossover"),
    "generations": (int, "GA generations after initialisation"),
    "seed": (int, "run seed"),
    "parallelism": (int, "worker processes for batch runs"),
}


def read_config_file(path) -> dict:
    """Parse a ``key = value`` config file into a dict of raw strings."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-").lower()
        if key not in SOLVER_FLAGS and key not in ("out", "format"):
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def merged_options(args) -> dict:
    """Config-file values overlaid with explicit command-line flags, typed."""
    raw = read_config_file(args.config) if getattr(args, "config", None) else {}
    opts = {}
    for key, value in raw.items():
        typ = SOLVER_FLAGS[key][0] if key in SOLVER_FLAGS else str
        try:
            opts[key] = typ(value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    for key in list(SOLVER_FLAGS) + ["out", "format"]:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            opts[key] = value
    return opts


def build_run_config(opts: dict, **extra) -> batch_mod.RunConfig:
    """Translate merged options into a :class:`RunConfig`."""
    algo = opts.get("algorithm", "DNRGA").upper().replace("-", "")
    d = DescentConfig()
    damping = d.damping
    if "strategy" in opts:
        try:
            damping = dataclasses.replace(damping, strategy=Strategy(opts["strategy"]))
        except ValueError:
            raise UsageError(f"unknown strategy {opts['strategy']!r}") from None
    damping = dataclasses.replace(damping, **{k: opts[k] for k in ("beta", "gamma") if k in opts})
    if "lambda0" in opts:
        damping = dataclasses.replace(damping, lambda0=opts["lambda0"])
    restr = RestrictionConfig(opts.get("kr", d.restrictions.k_r), opts.get("kx", d.restrictions.k_x))
    descent = dataclasses.replace(
        d,
        max_iterations=opts.get("max-iter", d.max_iterations),
        convergence_threshold=opts.get("threshold", d.convergence_threshold),
        restrictions=restr,
        damping=damping,
    )
    sizes = {
        "n_pop": opts.get("pop"),
        "n_pool": opts.get("pool"),
        "n_elite": opts.get("elite"),
        "crossover_fraction": opts.get("crossover-fraction"),
        "max_generations": opts.get("generations"),
    }
    sizes = {k: v for k, v in sizes.items() if v is not None}
    ga_sizes = sizes if algo == "GA" else {}
    hyb_sizes = sizes if algo.endswith("GA") and algo != "GA" else {}
    thr = {"convergence_threshold": opts["threshold"]} if "threshold" in opts else {}
    ga = GaConfig(**ga_sizes, **thr)
    hybrid = HybridConfig(**hyb_sizes, inner_cfg=descent)
    return batch_mod.RunConfig(
        algorithm=algo,
        descent=descent,
        ga=ga,
        hybrid=hybrid,
        parallelism=opts.get("parallelism", 1),
        seed=opts.get("seed", 0),
        **extra,
    )


def _add_solver_flags(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    for name, (typ, help_) in SOLVER_FLAGS.items():
        kwargs = {"type": typ, "default": None, "help": help_}
        if name == "strategy":
            kwargs["choices"] = [s.value for s in Strategy]
        p.add_argument(f"--{name}", **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="motorparams", description="Induction-motor double-cage parameter estimation.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate one motor from flags or a one-row CSV")
    _add_solver_flags(est)
    est.add_argument("--csv", help="nameplate CSV; the first retained row is used")
    for flag, help_ in (
        ("voltage", "rated line voltage [V]"), ("freq", "supply frequency [Hz]"),
        ("speed", "full-load speed [rpm]"), ("current", "full-load current [A]"),
        ("power-kw", "rated mechanical power [kW]"), ("pf", "full-load power factor"),
        ("eff", "full-load efficiency"), ("tb", "breakdown / rated torque"),
        ("tlr", "locked-rotor / rated torque"), ("ilr", "locked-rotor / rated current"),
    ):
        est.add_argument(f"--{flag}", type=float, help=help_)
    est.add_argument("--poles", type=int, help="pole count (inferred when omitted)")
    est.add_argument("--out", help="write the result as JSON to this file")
    est.add_argument("--format", choices=["text", "json"], default=None)

    bat = sub.add_parser("batch", help="solve every motor of a corpus and report statistics")
    _add_solver_flags(bat)
    src = bat.add_mutually_exclusive_group()
    src.add_argument("--corpus", help="nameplate CSV")
    src.add_argument("--synthetic", type=int, metavar="N", help="generate N synthetic motors")
    bat.add_argument("--standard", default="IEC", choices=corpus_mod.STANDARDS)
    bat.add_argument("--synth-seed", type=int, default=0)
    bat.add_argument("--out", help="per-motor results file")
    bat.add_argument("--format", choices=["csv", "jsonl"], default=None, help="results file format")
    bat.add_argument("--report-format", choices=["markdown", "csv", "json"], default="markdown")
    bat.add_argument("--stats-out", help="write the statistics JSON to this file")

    syn = sub.add_parser("synth", help="emit a synthetic corpus CSV")
    syn.add_argument("--count", type=int, required=True)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--standard", default="IEC", choices=corpus_mod.STANDARDS)
    syn.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="re-render statistics from persisted results")
    rep.add_argument("results", nargs="+", help="per-motor results files (csv or jsonl)")
    rep.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    rep.add_argument("--out")
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _plate_from_args(args) -> NameplateData:
    names = ("voltage", "freq", "speed", "current", "power_kw", "pf", "eff", "tb", "tlr", "ilr")
    missing = [n.replace("_", "-") for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing nameplate flags: " + ", ".join("--" + m for m in missing))
    return NameplateData(
        u_n=args.voltage, freq=args.freq, n_fl=args.speed, i_s_fl=args.current,
        p_m_fl=args.power_kw * 1000.0, pf_fl=args.pf, eff_fl=args.eff,
        t_b_ratio=args.tb, t_lr_ratio=args.tlr, i_lr_ratio=args.ilr, poles=args.poles,
    )


def cmd_estimate(args) -> int:
    opts = merged_options(args)
    if args.csv:
        records, _ = corpus_mod.load_corpus(args.csv)
        if not records:
            raise UsageError("no usable motor in the CSV")
        record = records[0]
    else:
        plate = _plate_from_args(args)
        record = corpus_mod.MotorRecord("cli", "NEMA" if abs(plate.freq - 60) < 1 else "IEC", plate)
    cfg = build_run_config(opts)
    outcome = batch_mod.solve_record(record, cfg)
    res = residuals(outcome.params, to_targets(record.plate))
    payload = {
        "id": record.id,
        "algorithm": cfg.algorithm,
        "converged": outcome.converged,
        "squared_error": outcome.squared_error,
        "iterations": outcome.iterations,
        "evaluations": outcome.evaluations,
        "feasible": outcome.feasible,
        "failure_reason": None if outcome.failure_reason is None else str(getattr(outcome.failure_reason, "value", outcome.failure_reason)),
        "params": outcome.params.as_dict(),
        "residuals": list(res.f),
    }
    fmt = opts.get("format") or ("json" if args.out else "text")
    if fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [f"{cfg.label}: converged={outcome.converged} squared_error={outcome.squared_error:.3e} "
                 f"iterations={outcome.iterations}"]
        lines += [f"  {k:5s} = {v:.6g}" for k, v in payload["params"].items()]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_batch(args) -> int:
    opts = merged_options(args)
    extra = {"output": opts.get("out"), "fmt": opts.get("format") or "csv"}
    if args.corpus:
        extra["corpus_path"] = args.corpus
    elif args.synthetic is not None:
        extra["synthetic"] = batch_mod.SyntheticSpec(args.synthetic, args.synth_seed, args.standard)
    else:
        raise UsageError("batch needs --corpus or --synthetic")
    cfg = build_run_config(opts, **extra)
    stats, _ = batch_mod.run_batch(cfg)
    if args.stats_out:
        Path(args.stats_out).write_text(stats.to_json(), encoding="utf-8")
    sys.stdout.write(batch_mod.report(stats, args.report_format))
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    records = corpus_mod.generate_synthetic(args.count, args.seed, args.standard)
    corpus_mod.write_corpus(records, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    stats = []
    for path in args.results:
        try:
            rows = corpus_mod.read_results(path)
        except OSError as exc:
            raise UsageError(str(exc)) from None
        stats.append(batch_mod.compute_stats(rows))
    _emit(batch_mod.report(stats, args.format), args.out)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "batch": cmd_batch, "synth": cmd_synth, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, ValueError, MotorParamsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
