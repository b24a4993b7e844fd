"""Nameplate data, per-unit targets and the six-equation residual system."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import circuit
from .circuit import CircuitParams, as_param_array
from .errors import NonFiniteError, ValidationError

RESIDUAL_NAMES = ("p_m_fl", "q_fl", "t_b", "t_lr", "i_lr", "eff_fl")

# x_s, x_m, r_r1, x_r1, r_r2, r_c -- r_s and x_r2 are tied or fixed
DEFAULT_FREE = (1, 2, 3, 4, 5, 7)
SENTINEL = 1.0


@dataclass(frozen=True)
class NameplateData:
    """Manufacturer data for one motor (SI units, ratios normalised to rated).

    ``t_n`` is accepted for completeness but the rated torque used for the
    torque ratios is always derived from ``p_m_fl`` and the rated slip.
    """

    u_n: float
    freq: float
    n_fl: float
    i_s_fl: float
    p_m_fl: float
    pf_fl: float
    eff_fl: float
    t_b_ratio: float
    t_lr_ratio: float
    i_lr_ratio: float
    poles: Optional[int] = None
    t_n: Optional[float] = None

    def pole_count(self) -> int:
        return self.poles if self.poles else infer_poles(self.freq, self.n_fl)

    def sync_speed(self) -> float:
        return 120.0 * self.freq / self.pole_count()


@dataclass(frozen=True)
class TargetVector:
    p_m_fl: float
    q_fl: float
    t_b: float
    t_lr: float
    i_lr: float
    eff_fl: float
    s_f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_m_fl, self.q_fl, self.t_b, self.t_lr, self.i_lr, self.eff_fl])


@dataclass(frozen=True)
class ResidualVector:
    f: tuple
    squared_error: float
    nonfinite: bool = False


def infer_poles(freq: float, n_fl: float) -> int:
    """Largest even pole count whose synchronous speed still exceeds ``n_fl``."""
    if not (freq > 0 and n_fl > 0):
        raise ValidationError("frequency and speed must be positive")
    p = 2 * int(60.0 * freq / n_fl)
    while p >= 2 and 120.0 * freq / p <= n_fl:
        p -= 2
    if p < 2:
        raise ValidationError(f"speed {n_fl} rpm exceeds the 2-pole synchronous speed")
    return p


def to_targets(plate: NameplateData) -> TargetVector:
    """Convert nameplate data to per-unit targets.

    Bases: rated apparent input power ``sqrt(3) * u_n * i_s_fl`` and rated
    voltage, which makes rated current exactly 1 pu.
    """
    if not (0 < plate.pf_fl <= 1):
        raise ValidationError(f"power factor {plate.pf_fl} outside (0, 1]")
    if not (0 < plate.eff_fl <= 1):
        raise ValidationError(f"efficiency {plate.eff_fl} outside (0, 1]")
    n_sync = plate.sync_speed()
    if plate.n_fl >= n_sync:
        raise ValidationError(f"rated speed {plate.n_fl} >= synchronous speed {n_sync}")
    s_f = (n_sync - plate.n_fl) / n_sync
    s_base = math.sqrt(3.0) * plate.u_n * plate.i_s_fl
    p_m = plate.p_m_fl / s_base
    p_in = p_m / plate.eff_fl
    q = p_in * math.tan(math.acos(plate.pf_fl))
    t_n = p_m / (1.0 - s_f)
    return TargetVector(
        p_m_fl=p_m,
        q_fl=q,
        t_b=plate.t_b_ratio * t_n,
        t_lr=plate.t_lr_ratio * t_n,
        i_lr=plate.i_lr_ratio,
        eff_fl=plate.eff_fl,
        s_f=s_f,
    )


def plate_consistency(plate: NameplateData) -> float:
    """Mismatch ``|1 - p_in/pf|`` between the current base and pf/eff data."""
    p_in = plate.p_m_fl / (math.sqrt(3.0) * plate.u_n * plate.i_s_fl) / plate.eff_fl
    return abs(1.0 - p_in / plate.pf_fl)


def model_quantities(x, s_f: float) -> np.ndarray:
    """Model-side magnitudes ``(P, Q, T_b, T_lr, I_lr, eff)`` at 1 pu voltage.

    ``x`` is ``(n, 8)``; returns ``(n, 6)``.
    """
    x = np.atleast_2d(as_param_array(x))
    with np.errstate(all="ignore"):
        fl = circuit.evaluate(x, s_f)
        lr = circuit.evaluate(x, 1.0)
        _, t_b, _ = circuit.breakdown_array(x)
    return np.stack(
        [fl["p_mech"], fl["q_in"], t_b, lr["torque"], lr["i_stator"], fl["efficiency"]],
        axis=-1,
    )


def residual_array(x, targets: TargetVector):
    """Normalised residuals for a batch of genomes.

    Returns ``(F, bad)`` with ``F`` shaped ``(n, 6)`` and ``bad`` a boolean
    ``(n,)`` mask of rows where a non-finite entry was replaced by the
    sentinel value 1.0.  Targets equal to zero are not normalised.
    """
    t = targets.as_array()
    scale = np.where(t != 0, t, 1.0)
    with np.errstate(all="ignore"):
        f = (t - model_quantities(x, targets.s_f)) / scale
    finite = np.isfinite(f)
    bad = ~finite.all(axis=-1)
    if bad.any():
        f = np.where(finite, f, SENTINEL)
    return f, bad


def squared_error_array(x, targets: TargetVector) -> np.ndarray:
    f, _ = residual_array(x, targets)
    return np.einsum("ij,ij->i", f, f)


def residuals(params, targets: TargetVector) -> ResidualVector:
    f, bad = residual_array(as_param_array(params)[None, :], targets)
    f = f[0]
    return ResidualVector(f=tuple(float(v) for v in f), squared_error=float(f @ f), nonfinite=bool(bad[0]))


def forward_difference(fun: Callable, x, h: float = 1e-6) -> np.ndarray:
    """Forward-difference Jacobian of a batched vector function.

    ``fun`` maps ``(m, n)`` to ``(m, k)``; all ``n + 1`` evaluation points are
    passed in a single call.
    """
    x = np.asarray(x, dtype=float)
    pts = np.repeat(x[None, :], x.size + 1, axis=0)
    pts[1:] += h * np.eye(x.size)
    vals = np.asarray(fun(pts))
    return ((vals[1:] - vals[0]) / h).T


def jacobian(
    params,
    targets: TargetVector,
    free_mask: Sequence[int] = DEFAULT_FREE,
    h: float = 1e-6,
    restrictions=None,
) -> np.ndarray:
    """Forward-difference Jacobian of the residuals over six free parameters.

    With ``restrictions`` (anything exposing ``k_r`` and ``k_x``), ``r_s`` and
    ``x_r2`` are recomputed from ``r_r1`` and ``x_s`` after each perturbation;
    otherwise the non-free parameters are held fixed.
    """
    free = list(free_mask)
    if len(free) != 6 or len(set(free)) != 6:
        raise ValueError("free_mask must select exactly 6 distinct parameters")
    if not h > 0:
        raise ValueError("h must be positive")
    base = as_param_array(params).copy()

    def fun(z):
        full = np.repeat(base[None, :], z.shape[0], axis=0)
        full[:, free] = z
        if restrictions is not None:
            full[:, circuit.R_S] = restrictions.k_r * full[:, circuit.R_R1]
            full[:, circuit.X_R2] = restrictions.k_x * full[:, circuit.X_S]
        return residual_array(full, targets)[0]

    jac = forward_difference(fun, base[free], h)
    if not np.all(np.isfinite(jac)):
        raise NonFiniteError("Jacobian has non-finite entries")
    return jac


def forward_targets(params, s_f: float) -> TargetVector:
    """Targets that ``params`` reproduce exactly at full-load slip ``s_f``."""
    q = model_quantities(as_param_array(params)[None, :], s_f)[0]
    return TargetVector(*(float(v) for v in q), s_f=float(s_f))


__all__ = [
    "CircuitParams",
    "DEFAULT_FREE",
    "NameplateData",
    "ResidualVector",
    "TargetVector",
    "forward_difference",
    "forward_targets",
    "infer_poles",
    "jacobian",
    "model_quantities",
    "plate_consistency",
    "residual_array",
    "residuals",
    "squared_error_array",
    "to_targets",
]
