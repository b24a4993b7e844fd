r"""Steady-state double-cage induction motor equivalent circuit.

Topology (all quantities per unit, one phase)::

         r_s    j x_s         +-----------+-----------+
    o---/\/\/---mmmm---+------+           |           |
                       |      |        r_r1/s      r_r2/s
                      r_c   j x_m      j x_r1      j x_r2
                       |      |           |           |
    o------------------+------+-----------+-----------+

The core-loss resistance ``r_c`` and the magnetising reactance ``x_m`` both
shunt the magnetising node, in parallel with the two rotor cages.  Torque is
expressed in synchronous watts, i.e. equal to the air-gap power, so that
``torque * (1 - slip) == p_mech`` holds exactly.

Every array function here accepts parameter arrays shaped ``(..., 8)`` in
:data:`PARAM_NAMES` order and broadcasts against the slip argument.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import DegenerateError, DomainError, MultimodalWarning

PARAM_NAMES = ("r_s", "x_s", "x_m", "r_r1", "x_r1", "r_r2", "x_r2", "r_c")
R_S, X_S, X_M, R_R1, X_R1, R_R2, X_R2, R_C = range(8)

SWEEP_POINTS = 200
SWEEP_MIN_SLIP = 1e-4
GOLDEN_TOL = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Uniform sampling envelope (pu) used for initial estimates and synthetic data.
INIT_RANGES = (
    (0.0, 0.15),
    (0.0, 0.15),
    (0.0, 5.0),
    (0.0, 0.15),
    (0.0, 0.30),
    (0.0, 0.15),
    (0.0, 0.15),
    (0.0, 100.0),
)
MIN_PARAM = 1e-6


@dataclass(frozen=True)
class CircuitParams:
    """The eight slip-invariant parameters of the double-cage model (pu)."""

    r_s: float
    x_s: float
    x_m: float
    r_r1: float
    x_r1: float
    r_r2: float
    x_r2: float
    r_c: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values) -> "CircuitParams":
        values = np.asarray(values, dtype=float).reshape(8)
        return cls(*(float(v) for v in values))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def is_positive(self) -> bool:
        return all(v > 0 for v in astuple(self))

    def is_feasible(self) -> bool:
        """Double-cage ordering: ``x_r1 > x_r2`` and ``r_r2 > r_r1``."""
        return self.x_r1 > self.x_r2 and self.r_r2 > self.r_r1

    def replace(self, **changes) -> "CircuitParams":
        data = self.as_dict()
        data.update(changes)
        return CircuitParams(**data)


@dataclass(frozen=True)
class OperatingPoint:
    slip: float
    p_mech: float
    q_in: float
    p_in: float
    torque: float
    i_stator: float
    efficiency: float


def as_param_array(params) -> np.ndarray:
    if isinstance(params, CircuitParams):
        return params.as_array()
    arr = np.asarray(params, dtype=float)
    if arr.shape[-1] != 8:
        raise ValueError(f"expected trailing dimension 8, got shape {arr.shape}")
    return arr


def feasible_mask(x) -> np.ndarray:
    x = as_param_array(x)
    return (x[..., X_R1] > x[..., X_R2]) & (x[..., R_R2] > x[..., R_R1])


def _check_slip(slip):
    s = np.asarray(slip, dtype=float)
    if np.any(~(s > 0)):
        raise DomainError(f"slip must be > 0, got {slip!r}")
    if np.any(s > 1):
        raise DomainError(f"slip must be <= 1, got {slip!r}")


def rotor_impedance(x, slip):
    """Parallel combination of the two rotor cages at ``slip``."""
    x = as_param_array(x)
    z1 = x[..., R_R1] / slip + 1j * x[..., X_R1]
    z2 = x[..., R_R2] / slip + 1j * x[..., X_R2]
    return z1 * z2 / (z1 + z2)


def _shunt_admittance(x):
    return 1.0 / x[..., R_C] - 1j / x[..., X_M]


def impedance_array(x, slip):
    """Vectorised input impedance; no domain checks."""
    x = as_param_array(x)
    y_m = _shunt_admittance(x) + 1.0 / rotor_impedance(x, slip)
    return x[..., R_S] + 1j * x[..., X_S] + 1.0 / y_m


def input_impedance(params, slip: float) -> complex:
    """Impedance seen from the stator terminals at ``slip``."""
    _check_slip(slip)
    return complex(impedance_array(as_param_array(params), float(slip)))


def evaluate(x, slip, voltage=1.0) -> dict:
    """Solve the circuit for arrays of parameters and slips.

    Returns a dict of arrays: ``z_in``, ``i_s`` (stator current phasor),
    ``v_m`` (magnetising-node voltage), ``p_in``, ``q_in``, ``p_airgap``,
    ``p_mech``, ``torque``, ``i_stator``, ``efficiency``, ``stator_loss``,
    ``rotor_loss`` and ``core_loss``.
    """
    x = as_param_array(x)
    z_s = x[..., R_S] + 1j * x[..., X_S]
    y_r = 1.0 / rotor_impedance(x, slip)
    z_m = 1.0 / (_shunt_admittance(x) + y_r)
    z_in = z_s + z_m
    i_s = voltage / z_in
    v_m = i_s * z_m
    s_in = voltage * np.conj(i_s)
    vm2 = np.abs(v_m) ** 2
    i2 = np.abs(i_s) ** 2
    p_airgap = vm2 * y_r.real
    p_mech = p_airgap * (1.0 - slip)
    p_in = s_in.real
    with np.errstate(divide="ignore", invalid="ignore"):
        eff = p_mech / p_in
    return {
        "z_in": z_in,
        "i_s": i_s,
        "v_m": v_m,
        "p_in": p_in,
        "q_in": s_in.imag,
        "p_airgap": p_airgap,
        "p_mech": p_mech,
        "torque": p_airgap,
        "i_stator": np.sqrt(i2),
        "efficiency": eff,
        "stator_loss": i2 * x[..., R_S],
        "rotor_loss": p_airgap * slip,
        "core_loss": vm2 / x[..., R_C],
    }


def operating_point(params, slip: float, voltage: float = 1.0) -> OperatingPoint:
    _check_slip(slip)
    if not voltage > 0:
        raise DomainError(f"voltage must be > 0, got {voltage!r}")
    x = as_param_array(params)
    if x.ndim != 1:
        raise ValueError("operating_point expects a single parameter set")
    with np.errstate(all="ignore"):
        out = evaluate(x, float(slip), voltage)
    if abs(out["z_in"]) < 1e-12:
        raise DegenerateError("input impedance is numerically zero")
    return OperatingPoint(
        slip=float(slip),
        p_mech=float(out["p_mech"]),
        q_in=float(out["q_in"]),
        p_in=float(out["p_in"]),
        torque=float(out["torque"]),
        i_stator=float(out["i_stator"]),
        efficiency=float(out["efficiency"]),
    )


def _thevenin(x):
    """Thevenin source seen by the rotor at 1 pu terminal voltage."""
    z_s = x[..., R_S] + 1j * x[..., X_S]
    z_p = 1.0 / _shunt_admittance(x)
    v_th = z_p / (z_s + z_p)
    z_th = z_s * z_p / (z_s + z_p)
    return np.abs(v_th) ** 2, z_th


def sample_uniform(rng: np.random.Generator, ranges, size: int) -> np.ndarray:
    """Draw ``size`` rows uniformly within ``ranges``, redrawing values < 1e-6."""
    lo = np.array([r[0] for r in ranges], dtype=float)
    hi = np.array([r[1] for r in ranges], dtype=float)
    out = rng.uniform(lo, hi, size=(size, len(lo)))
    low = (out < MIN_PARAM) & (hi >= MIN_PARAM)
    while low.any():
        redraw = rng.uniform(lo, hi, size=out.shape)
        out = np.where(low, redraw, out)
        low = (out < MIN_PARAM) & (hi >= MIN_PARAM)
    return out


def _torque_thevenin(x, v2, z_th, slip):
    z_r = rotor_impedance(x, slip)
    return v2 * z_r.real / np.abs(z_th + z_r) ** 2


def torque(x, slip, voltage=1.0):
    """Electromagnetic torque (synchronous watts) for arrays of params/slips."""
    x = as_param_array(x)
    v2, z_th = _thevenin(x)
    return voltage**2 * _torque_thevenin(x, v2, z_th, slip)


def _count_peaks(curve):
    interior = (curve[..., 1:-1] > curve[..., :-2]) & (curve[..., 1:-1] >= curve[..., 2:])
    n = interior.sum(axis=-1)
    n += curve[..., -1] > curve[..., -2]
    return n


def breakdown_array(x):
    """Vectorised breakdown search over parameter sets shaped ``(n, 8)``.

    Returns ``(s_max, t_b, peaks)`` where ``peaks`` counts local maxima found
    on the bracketing sweep.
    """
    x = np.atleast_2d(as_param_array(x))
    n = x.shape[0]
    grid = np.logspace(math.log10(SWEEP_MIN_SLIP), 0.0, SWEEP_POINTS)
    v2, z_th = _thevenin(x)
    xc = x[:, None, :]
    curve = _torque_thevenin(xc, v2[:, None], z_th[:, None], grid[None, :])
    curve = np.where(np.isfinite(curve), curve, -np.inf)
    k = np.argmax(curve, axis=1)
    rows = np.arange(n)
    sweep_best = curve[rows, k]
    a = grid[np.maximum(k - 1, 0)]
    b = grid[np.minimum(k + 1, SWEEP_POINTS - 1)]

    r1, x1, r2, x2 = x[:, R_R1], x[:, X_R1], x[:, R_R2], x[:, X_R2]

    def f(s):
        z1 = r1 / s + 1j * x1
        z2 = r2 / s + 1j * x2
        z_r = z1 * z2 / (z1 + z2)
        w = z_th + z_r
        return v2 * z_r.real / (w.real * w.real + w.imag * w.imag)

    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    # Rows stop updating once converged, so each row's result is
    # independent of the rest of the batch.
    live = b - a > GOLDEN_TOL
    while live.any():
        left = fc > fd
        go_l, go_r = live & left, live & ~left
        b = np.where(go_l, d, b)
        a = np.where(go_r, c, a)
        probe = np.where(left, b - _INVPHI * (b - a), a + _INVPHI * (b - a))
        fp = f(probe)
        c, d = np.where(go_l, probe, np.where(go_r, d, c)), np.where(go_l, c, np.where(go_r, probe, d))
        fc, fd = np.where(go_l, fp, np.where(go_r, fd, fc)), np.where(go_l, fc, np.where(go_r, fp, fd))
        live = b - a > GOLDEN_TOL
    s_max = 0.5 * (a + b)
    t_b = f(s_max)
    worse = ~(t_b >= sweep_best)
    s_max = np.where(worse, grid[k], s_max)
    t_b = np.where(worse, sweep_best, t_b)
    return s_max, t_b, _count_peaks(curve)


def breakdown_torque(params) -> tuple[float, float]:
    """Return ``(s_max, t_b)``: the slip of maximum torque and that torque.

    A log-spaced sweep over ``[1e-4, 1]`` brackets the global maximum and a
    golden-section search refines it to ``|ds| < 1e-9``.  Emits
    :class:`MultimodalWarning` when the sweep sees two humps whose heights
    differ by more than 1e-6 pu.
    """
    x = as_param_array(params)
    if x.ndim != 1:
        raise ValueError("breakdown_torque expects a single parameter set")
    s_max, t_b, peaks = breakdown_array(x[None, :])
    if peaks[0] > 1:
        grid = np.logspace(math.log10(SWEEP_MIN_SLIP), 0.0, SWEEP_POINTS)
        curve = torque(x, grid)
        i = np.flatnonzero(
            np.r_[False, (curve[1:-1] > curve[:-2]) & (curve[1:-1] >= curve[2:]), curve[-1] > curve[-2]]
        )
        tops = np.sort(curve[i])[::-1]
        if tops[0] - tops[1] > 1e-6:
            warnings.warn(
                f"torque curve has {len(i)} local maxima; returning the global one",
                MultimodalWarning,
                stacklevel=2,
            )
    return float(s_max[0]), float(t_b[0])
