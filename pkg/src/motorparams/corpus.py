"""Motor corpora: CSV ingestion with cleansing, synthetic generation, results I/O.

Input CSV columns (header names are case-insensitive)::

    id, standard, voltage_v, freq_hz, speed_rpm, current_a, power_kw,
    pf, eff, tb_ratio, tlr_ratio, ilr_ratio, poles (optional)

Synthetic corpora written by :func:`write_corpus` add ``truth_<param>``
columns carrying the generating circuit parameters.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import circuit
from .circuit import INIT_RANGES, PARAM_NAMES, CircuitParams
from .errors import ParseError, ResourceError, ValidationError
from .formulation import NameplateData

STANDARDS = ("IEC", "NEMA")
NOMINAL = {"IEC": (400.0, 50.0), "NEMA": (460.0, 60.0)}

COLUMNS = (
    "id", "standard", "voltage_v", "freq_hz", "speed_rpm", "current_a", "power_kw",
    "pf", "eff", "tb_ratio", "tlr_ratio", "ilr_ratio", "poles",
)
_NUMERIC = COLUMNS[2:]
_REQUIRED = ("voltage_v", "freq_hz", "speed_rpm", "current_a", "power_kw",
             "pf", "eff", "tb_ratio", "tlr_ratio", "ilr_ratio")
TRUTH_COLUMNS = tuple(f"truth_{n}" for n in PARAM_NAMES)


@dataclass(frozen=True)
class MotorRecord:
    id: str
    standard: str
    plate: NameplateData
    truth: Optional[CircuitParams] = None

    @property
    def provenance(self) -> str:
        return "Synthetic" if self.truth is not None else "File"

    @property
    def power_kw(self) -> float:
        return self.plate.p_m_fl / 1000.0


@dataclass
class CleansingReport:
    duplicates_removed: int = 0
    missing_fields_removed: int = 0
    inconsistent_removed: int = 0
    retained: int = 0

    @property
    def total(self) -> int:
        return self.duplicates_removed + self.missing_fields_removed + self.inconsistent_removed + self.retained


@dataclass(frozen=True)
class PowerBand:
    lo: float
    hi: float
    label: str

    def __contains__(self, p_kw) -> bool:
        return band_of(p_kw) == self


BANDS = (
    PowerBand(0.37, 3.6, "0.37-3.6kW"),
    PowerBand(4.0, 15.0, "4-15kW"),
    PowerBand(18.5, 75.0, "18.5-75kW"),
    PowerBand(90.0, 185.0, "90-185kW"),
    PowerBand(200.0, 630.0, "200-630kW"),
    PowerBand(630.0, math.inf, ">630kW"),
)


def band_of(p_kw: float) -> PowerBand:
    """Rated-power band; ratings in a gap go to the nearer edge, ties upward."""
    if not p_kw > 0:
        raise ValueError(f"rating must be positive, got {p_kw!r}")
    if p_kw > 630.0:
        return BANDS[-1]
    for lower, upper in zip(BANDS[:-2], BANDS[1:-1]):
        if p_kw <= lower.hi:
            return lower
        if p_kw < upper.lo:
            return lower if p_kw < 0.5 * (lower.hi + upper.lo) else upper
    return BANDS[-2]


# -- CSV ingestion -----------------------------------------------------------

def _normalise_header(header, column_map):
    mapping = {k.lower(): v.lower() for k, v in (column_map or {}).items()}
    return [mapping.get(h.strip().lower(), h.strip().lower()) for h in header]


def _parse_float(text, row, col):
    text = (text or "").strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", row=row, column=col) from None


def _plate_from_values(v) -> NameplateData:
    poles = v.get("poles")
    return NameplateData(
        u_n=v["voltage_v"],
        freq=v["freq_hz"],
        n_fl=v["speed_rpm"],
        i_s_fl=v["current_a"],
        p_m_fl=v["power_kw"] * 1000.0,
        pf_fl=v["pf"],
        eff_fl=v["eff"],
        t_b_ratio=v["tb_ratio"],
        t_lr_ratio=v["tlr_ratio"],
        i_lr_ratio=v["ilr_ratio"],
        poles=int(poles) if poles else None,
    )


def inconsistency(plate: NameplateData) -> Optional[str]:
    """Reason a plate is physically inconsistent, or ``None``."""
    if not (plate.u_n > 0 and plate.freq > 0 and plate.i_s_fl > 0 and plate.p_m_fl > 0 and plate.n_fl > 0):
        return "non-positive rating"
    if plate.poles is not None and (plate.poles < 2 or plate.poles % 2):
        return "invalid pole count"
    if not (0 < plate.pf_fl <= 1):
        return "power factor outside (0, 1]"
    if not (0 < plate.eff_fl <= 1):
        return "efficiency outside (0, 1]"
    if plate.t_b_ratio < 1:
        return "full-load torque exceeds breakdown torque"
    if not (plate.t_lr_ratio > 0 and plate.i_lr_ratio > 0):
        return "non-positive locked-rotor data"
    try:
        n_sync = plate.sync_speed()
    except ValidationError:
        return "speed above synchronous speed"
    if plate.n_fl >= n_sync:
        return "speed above synchronous speed"
    return None


def load_corpus(path, column_map: Optional[dict] = None):
    """Read a nameplate CSV and cleanse it.

    Rows are dropped, in order, as duplicates (identical nameplate values),
    for missing pf/efficiency/torque or other required data, and for
    inconsistent data.  Returns ``(records, report)``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return [], CleansingReport()
        header = _normalise_header(header, column_map)
        missing_cols = [c for c in _REQUIRED if c not in header]
        if missing_cols:
            raise ParseError(f"missing columns {missing_cols}", row=1)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not any(cell.strip() for cell in raw):
                continue
            if len(raw) > len(header):
                raise ParseError("too many fields", row=lineno)
            cells = dict(zip(header, raw))
            values = {c: _parse_float(cells.get(c), lineno, c) for c in _NUMERIC if c in header}
            truth = None
            if all(c in header for c in TRUTH_COLUMNS):
                tv = [_parse_float(cells.get(c), lineno, c) for c in TRUTH_COLUMNS]
                if all(t is not None for t in tv):
                    truth = CircuitParams(*tv)
            rows.append((lineno, cells, values, truth))

    report = CleansingReport()
    seen = set()
    records = []
    for lineno, cells, values, truth in rows:
        key = tuple(values.get(c) for c in _NUMERIC)
        if key in seen:
            report.duplicates_removed += 1
            continue
        seen.add(key)
        if any(values.get(c) is None for c in _REQUIRED):
            report.missing_fields_removed += 1
            continue
        plate = _plate_from_values(values)
        if inconsistency(plate) is not None:
            report.inconsistent_removed += 1
            continue
        ident = (cells.get("id") or "").strip() or f"row{lineno}"
        standard = (cells.get("standard") or "").strip().upper()
        if standard not in STANDARDS:
            standard = "NEMA" if abs(plate.freq - 60.0) < 1 else "IEC"
        records.append(MotorRecord(ident, standard, plate, truth))
        report.retained += 1
    return records, report


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_corpus(records: Sequence[MotorRecord], path) -> None:
    """Write records in the input CSV schema (plus truth columns if known)."""
    with_truth = any(r.truth is not None for r in records)
    header = list(COLUMNS) + (list(TRUTH_COLUMNS) if with_truth else [])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in records:
            p = r.plate
            row = [r.id, r.standard, p.u_n, p.freq, p.n_fl, p.i_s_fl, p.p_m_fl / 1000.0,
                   p.pf_fl, p.eff_fl, p.t_b_ratio, p.t_lr_ratio, p.i_lr_ratio, p.poles]
            if with_truth:
                row += list(r.truth.as_array()) if r.truth is not None else [None] * 8
            w.writerow([_fmt(float(v)) if isinstance(v, (float, np.floating)) else _fmt(v) for v in row])


# -- synthetic corpora -------------------------------------------------------

@dataclass(frozen=True)
class SyntheticWindows:
    """Acceptance windows that reject electrically implausible draws."""

    s_max: tuple = (0.01, 0.9)
    efficiency: tuple = (0.5, 0.999)
    power_kw: tuple = (0.37, 1000.0)
    poles: tuple = (2, 4, 6, 8)


def _rated_slip(x, s_max):
    """Slip at which the stator draws exactly 1 pu current, or ``None``."""

    def excess(s):
        return float(circuit.evaluate(x, s)["i_stator"]) - 1.0

    lo = 1e-7
    if not (excess(lo) < 0 < excess(s_max)):
        return None
    return brentq(excess, lo, s_max, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)


def synthetic_plate(x: np.ndarray, s_f: float, power_kw: float, standard: str, poles: int) -> NameplateData:
    """Nameplate exactly reproduced by ``x`` at rated slip ``s_f``.

    The per-unit system of ``x`` is the one in which the rated stator
    current is 1 pu, so ``s_f`` must satisfy ``|I(s_f)| = 1``.
    """
    u_n, freq = NOMINAL[standard]
    fl = circuit.evaluate(x, s_f)
    lr = circuit.evaluate(x, 1.0)
    _, t_b, _ = circuit.breakdown_array(x[None, :])
    p_mech = float(fl["p_mech"])
    p_in = float(fl["p_in"])
    i_fl = float(fl["i_stator"])
    t_n = p_mech / (1.0 - s_f)
    p_w = power_kw * 1000.0
    n_sync = 120.0 * freq / poles
    return NameplateData(
        u_n=u_n,
        freq=freq,
        n_fl=n_sync * (1.0 - s_f),
        i_s_fl=p_w / (p_mech * math.sqrt(3.0) * u_n),
        p_m_fl=p_w,
        pf_fl=p_in / i_fl,
        eff_fl=p_mech / p_in,
        t_b_ratio=float(t_b[0]) / t_n,
        t_lr_ratio=float(lr["torque"]) / t_n,
        i_lr_ratio=float(lr["i_stator"]) / i_fl,
        poles=poles,
    )


def generate_synthetic(count: int, seed: int, standard: str = "IEC",
                       windows: SyntheticWindows = SyntheticWindows()) -> list:
    """Draw ``count`` motors with known parameters and exactly consistent plates.

    Parameters are sampled uniformly from the initial-estimate envelope and
    rejected unless they satisfy the double-cage ordering, the ``s_max`` and
    efficiency windows, and admit a rated point with 1 pu current.  Ratings
    are log-uniform over ``windows.power_kw``.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    standard = standard.upper()
    if standard not in STANDARDS:
        raise ValueError(f"unknown standard {standard!r}")
    rng = np.random.default_rng([int(seed), STANDARDS.index(standard)])
    budget = 1000 * count
    attempts = 0
    out = []
    log_lo, log_hi = (math.log(p) for p in windows.power_kw)
    while len(out) < count:
        attempts += 1
        if attempts > budget:
            raise ResourceError(f"rejection rate above 99.9% after {attempts - 1} draws")
        x = circuit.sample_uniform(rng, INIT_RANGES, 1)[0]
        if not circuit.feasible_mask(x):
            continue
        s_max, _, _ = circuit.breakdown_array(x[None, :])
        s_max = float(s_max[0])
        if not (windows.s_max[0] < s_max < windows.s_max[1]):
            continue
        s_f = _rated_slip(x, s_max)
        if s_f is None:
            continue
        eff = float(circuit.evaluate(x, s_f)["efficiency"])
        if not (windows.efficiency[0] < eff < windows.efficiency[1]):
            continue
        power = float(math.exp(rng.uniform(log_lo, log_hi)))
        poles = int(rng.choice(windows.poles))
        plate = synthetic_plate(x, s_f, power, standard, poles)
        out.append(MotorRecord(f"{standard}-{seed}-{len(out):05d}", standard, plate, CircuitParams.from_array(x)))
    return out


# -- per-motor results -------------------------------------------------------

@dataclass
class ResultRow:
    id: str
    standard: str
    power_kw: float
    algorithm: str
    config_digest: str
    converged: bool
    squared_error: float
    iterations: int
    evaluations: int
    r_s: float
    x_s: float
    x_m: float
    r_r1: float
    x_r1: float
    r_r2: float
    x_r2: float
    r_c: float
    feasible: bool
    failure_reason: str
    wall_time: float

    @property
    def params(self) -> CircuitParams:
        return CircuitParams(*(getattr(self, n) for n in PARAM_NAMES))


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))
_INT_FIELDS = {"iterations", "evaluations"}
_BOOL_FIELDS = {"converged", "feasible"}
_STR_FIELDS = {"id", "standard", "algorithm", "config_digest", "failure_reason"}


def result_row(record: MotorRecord, outcome, algorithm: str, config_digest: str, wall_time: float) -> ResultRow:
    p = outcome.params
    reason = outcome.failure_reason
    return ResultRow(
        id=record.id,
        standard=record.standard,
        power_kw=record.power_kw,
        algorithm=algorithm,
        config_digest=config_digest,
        converged=bool(outcome.converged),
        squared_error=float(outcome.squared_error),
        iterations=int(outcome.iterations),
        evaluations=int(getattr(outcome, "evaluations", 0)),
        **{n: float(getattr(p, n)) for n in PARAM_NAMES},
        feasible=bool(p.is_feasible()),
        failure_reason="" if reason is None else getattr(reason, "value", str(reason)),
        wall_time=float(wall_time),
    )


def persist_results(records: Sequence[MotorRecord], outcomes: Sequence, path, fmt: str = "csv",
                    algorithm: str = "", config_digest: str = "", wall_times: Optional[Sequence[float]] = None) -> None:
    """Write one row per motor; see :data:`RESULT_COLUMNS` for the schema."""
    if len(records) != len(outcomes):
        raise ValueError("records and outcomes differ in length")
    times = wall_times if wall_times is not None else [0.0] * len(records)
    rows = [result_row(r, o, algorithm, config_digest, t) for r, o, t in zip(records, outcomes, times)]
    write_results(rows, path, fmt)


def write_results(rows: Iterable[ResultRow], path, fmt: str = "csv") -> None:
    fmt = fmt.lower()
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_COLUMNS)
            for row in rows:
                w.writerow([_fmt(v) for v in asdict(row).values()])
        elif fmt in ("jsonl", "jsonlines"):
            for row in rows:
                fh.write(json.dumps(asdict(row)) + "\n")
        else:
            raise ValueError(f"unknown results format {fmt!r}")


def _coerce(name, text):
    if name in _STR_FIELDS:
        return text
    if name in _BOOL_FIELDS:
        return text in (True, "True", "true", "1")
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def read_results(path, fmt: Optional[str] = None) -> list:
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".json", ".jsonlines") else "csv"
    fmt = fmt.lower()
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            for lineno, rec in enumerate(csv.DictReader(fh), start=2):
                try:
                    rows.append(ResultRow(**{k: _coerce(k, rec[k]) for k in RESULT_COLUMNS}))
                except (KeyError, ValueError) as exc:
                    raise ParseError(f"bad result row: {exc}", row=lineno) from None
        else:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    rows.append(ResultRow(**json.loads(line)))
    return rows
