"""Batch runs over a motor corpus, aggregate statistics and report rendering."""

from __future__ import annotations

import csv
import dataclasses
import enum
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from . import corpus as corpus_mod
from .circuit import CircuitParams
from .corpus import BANDS, STANDARDS, MotorRecord, ResultRow, band_of, result_row
from .descent import DescentConfig, Method, SolveOutcome, solve
from .evolution import GaConfig, solve_ga
from .formulation import to_targets
from .hybrid import HybridConfig, solve_hybrid

ALGORITHMS = ("NR", "LM", "DNR", "GA", "NRGA", "LMGA", "DNRGA")
LABELS = {
    "NR": "Newton-Raphson",
    "LM": "Levenberg-Marquardt",
    "DNR": "Damped NR",
    "GA": "Genetic Algorithm",
    "NRGA": "Hybrid NR-GA",
    "LMGA": "Hybrid LM-GA",
    "DNRGA": "Hybrid DNR-GA",
}


@dataclass(frozen=True)
class SyntheticSpec:
    count: int
    seed: int = 0
    standard: str = "IEC"


@dataclass(frozen=True)
class RunConfig:
    """One batch run: algorithm, solver settings, corpus and output."""

    algorithm: str = "DNRGA"
    descent: DescentConfig = field(default_factory=DescentConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    corpus_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    output: Optional[str] = None
    fmt: str = "csv"
    parallelism: int = 1
    seed: int = 0

    def __post_init__(self):
        algo = self.algorithm.upper().replace("-", "")
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algo)
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.corpus_path is not None and self.synthetic is not None:
            raise ValueError("choose either a corpus file or a synthetic corpus")

    @property
    def label(self) -> str:
        return LABELS[self.algorithm]


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def config_digest(cfg: RunConfig) -> str:
    """Short stable hash of everything that influences per-motor outcomes."""
    relevant = {"algorithm": cfg.algorithm, "seed": cfg.seed}
    if cfg.algorithm in ("NR", "LM", "DNR"):
        relevant["descent"] = _jsonable(cfg.descent)
    elif cfg.algorithm == "GA":
        relevant["ga"] = _jsonable(cfg.ga)
    else:
        relevant["hybrid"] = _jsonable(cfg.hybrid)
    blob = json.dumps(relevant, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def motor_seed(run_seed: int, motor_id: str) -> int:
    digest = hashlib.sha256(f"{run_seed}:{motor_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def solve_record(record: MotorRecord, cfg: RunConfig) -> SolveOutcome:
    """Solve one motor with the configured algorithm and its derived seed."""
    targets = to_targets(record.plate)
    seed = motor_seed(cfg.seed, record.id)
    algo = cfg.algorithm
    if algo in ("NR", "LM", "DNR"):
        return solve(targets, dataclasses.replace(cfg.descent, seed=seed), algo)
    if algo == "GA":
        return solve_ga(targets, dataclasses.replace(cfg.ga, seed=seed))
    inner = dataclasses.replace(cfg.hybrid.inner_cfg, seed=seed)
    hcfg = dataclasses.replace(cfg.hybrid, seed=seed, inner=Method(algo[:-2]), inner_cfg=inner)
    return solve_hybrid(targets, hcfg)


def _failed(exc: Exception) -> SolveOutcome:
    nan = CircuitParams(*([math.nan] * 8))
    return SolveOutcome(params=nan, squared_error=math.nan, iterations=0, converged=False,
                        failure_reason=type(exc).__name__)


def _run_one(args):
    record, cfg, digest = args
    t0 = time.perf_counter()
    try:
        outcome = solve_record(record, cfg)
    except Exception as exc:  # recorded, never fatal for the batch
        outcome = _failed(exc)
    wall = time.perf_counter() - t0
    return result_row(record, outcome, cfg.algorithm, digest, wall)


def load_records(cfg: RunConfig):
    if cfg.corpus_path is not None:
        records, _ = corpus_mod.load_corpus(cfg.corpus_path)
        return records
    if cfg.synthetic is not None:
        s = cfg.synthetic
        return corpus_mod.generate_synthetic(s.count, s.seed, s.standard)
    return []


def run_batch(cfg: RunConfig, records: Optional[Sequence[MotorRecord]] = None):
    """Solve every motor and aggregate.

    ``records`` overrides the corpus source named in ``cfg``.  Per-motor
    results are ordered by motor id and written to ``cfg.output`` when set.
    Returns ``(stats, rows)``.
    """
    if records is None:
        records = load_records(cfg)
    digest = config_digest(cfg)
    jobs = [(r, cfg, digest) for r in records]
    if cfg.parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            rows = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * cfg.parallelism))))
    else:
        rows = [_run_one(j) for j in jobs]
    rows.sort(key=lambda r: r.id)
    if cfg.output:
        corpus_mod.write_results(rows, cfg.output, cfg.fmt)
    return compute_stats(rows, cfg.label), rows


# -- statistics --------------------------------------------------------------

@dataclass
class GroupStats:
    n_motors: int = 0
    n_converged: int = 0
    convergence_rate: Optional[float] = None
    avg_squared_error: Optional[float] = None
    max_squared_error: Optional[float] = None


@dataclass
class CorpusStats:
    algorithm: str
    overall: GroupStats
    by_standard: dict
    by_band: dict
    avg_seconds: Optional[float] = None
    max_seconds: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text) -> "CorpusStats":
        data = json.loads(text) if isinstance(text, str) else text
        return cls(
            algorithm=data["algorithm"],
            overall=GroupStats(**data["overall"]),
            by_standard={k: GroupStats(**v) for k, v in data["by_standard"].items()},
            by_band={s: {b: GroupStats(**v) for b, v in bands.items()} for s, bands in data["by_band"].items()},
            avg_seconds=data["avg_seconds"],
            max_seconds=data["max_seconds"],
        )


def _group(rows) -> GroupStats:
    n = len(rows)
    if n == 0:
        return GroupStats()
    conv = sum(1 for r in rows if r.converged)
    errs = [r.squared_error for r in rows if math.isfinite(r.squared_error)]
    return GroupStats(
        n_motors=n,
        n_converged=conv,
        convergence_rate=conv / n,
        avg_squared_error=math.fsum(errs) / len(errs) if errs else None,
        max_squared_error=max(errs) if errs else None,
    )


def compute_stats(rows: Sequence[ResultRow], algorithm: str = "") -> CorpusStats:
    """Aggregate per-motor rows overall, per standard and per power band."""
    if not algorithm and rows:
        algorithm = LABELS.get(rows[0].algorithm, rows[0].algorithm)
    by_standard = {s: _group([r for r in rows if r.standard == s]) for s in STANDARDS}
    by_band = {
        s: {b.label: _group([r for r in rows if r.standard == s and band_of(r.power_kw) == b]) for b in BANDS}
        for s in STANDARDS
    }
    times = [r.wall_time for r in rows]
    return CorpusStats(
        algorithm=algorithm,
        overall=_group(list(rows)),
        by_standard=by_standard,
        by_band=by_band,
        avg_seconds=math.fsum(times) / len(times) if times else None,
        max_seconds=max(times) if times else None,
    )


# -- rendering ---------------------------------------------------------------

def format_convergence(g: GroupStats) -> str:
    """Cell in the ``count (pct%)`` style, e.g. ``685 (17.1%)``."""
    if g.n_motors == 0:
        return "-"
    pct = 100.0 * g.convergence_rate
    text = "0.0" if pct == 0 else f"{pct:.3g}"
    if "." not in text and "e" not in text:
        text += ".0"
    return f"{g.n_converged} ({text}%)"


def format_error(v: Optional[float]) -> str:
    return "-" if v is None else f"{v:.4g}"


def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


def render_markdown(stats: Sequence[CorpusStats]) -> str:
    out = ["## Summary", ""]
    header = ["Case"]
    for s in STANDARDS:
        header += [f"{s} Convergence", f"{s} Avg Error²", f"{s} Max Error²"]
    rows = []
    for st in stats:
        row = [st.algorithm]
        for s in STANDARDS:
            g = st.by_standard[s]
            row += [format_convergence(g), format_error(g.avg_squared_error), format_error(g.max_squared_error)]
        rows.append(row)
    out.append(_md_table(header, rows))
    for s in STANDARDS:
        if not any(st.by_standard[s].n_motors for st in stats):
            continue
        out += ["", f"## By rated power ({s})", ""]
        header = ["Case"]
        for b in BANDS:
            header += [f"{b.label} Convergence", f"{b.label} Avg Error²"]
        rows = []
        for st in stats:
            row = [st.algorithm]
            for b in BANDS:
                g = st.by_band[s][b.label]
                row += [format_convergence(g), format_error(g.avg_squared_error)]
            rows.append(row)
        out.append(_md_table(header, rows))
        out += ["", f"Motors per band ({s}): " + ", ".join(
            f"{b.label}: {stats[0].by_band[s][b.label].n_motors}" for b in BANDS)]
    out += ["", "## Solution time", ""]
    out.append(_md_table(
        ["Algorithm", "Average (s)", "Maximum (s)"],
        [[st.algorithm, format_error(st.avg_seconds), format_error(st.max_seconds)] for st in stats],
    ))
    return "\n".join(out) + "\n"


STATS_COLUMNS = ("algorithm", "standard", "band", "n_motors", "n_converged", "convergence_rate",
                 "avg_squared_error", "max_squared_error", "avg_seconds", "max_seconds")


def render_csv(stats: Sequence[CorpusStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)

    def emit(st, standard, band, g, timing=(None, None)):
        vals = [st.algorithm, standard, band, g.n_motors, g.n_converged, g.convergence_rate,
                g.avg_squared_error, g.max_squared_error, *timing]
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in vals])

    for st in stats:
        emit(st, "all", "all", st.overall, (st.avg_seconds, st.max_seconds))
        for s in STANDARDS:
            emit(st, s, "all", st.by_standard[s])
            for b in BANDS:
                emit(st, s, b.label, st.by_band[s][b.label])
    return buf.getvalue()


def render_json(stats: Sequence[CorpusStats]) -> str:
    return json.dumps([asdict(s) for s in stats], indent=2) + "\n"


def report(stats, fmt: str = "markdown") -> str:
    """Render one or several :class:`CorpusStats` as Markdown, CSV or JSON."""
    if isinstance(stats, CorpusStats):
        stats = [stats]
    fmt = fmt.lower()
    if fmt in ("markdown", "md"):
        return render_markdown(stats)
    if fmt == "csv":
        return render_csv(stats)
    if fmt == "json":
        return render_json(stats)
    raise ValueError(f"unknown report format {fmt!r}")


def stats_from_json(text: str) -> list:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [CorpusStats.from_json(d) for d in data]
