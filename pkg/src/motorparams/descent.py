"""Descent solvers: Newton-Raphson, Levenberg-Marquardt and damped NR.

The 8-parameter model has only six equations, so the solvers work on six
free parameters ``(x_s, x_m, r_r1, x_r1, r_r2, r_c)``.  The remaining two are
either tied by linear restrictions (``r_s = k_r * r_r1``,
``x_r2 = k_x * x_s``) or held fixed, which is how the hybrid solver drives
them.

The iteration core is batched: several independent problems advance in
lockstep so that their residual evaluations share one vectorised call.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import circuit
from .circuit import INIT_RANGES, MIN_PARAM, R_R1, R_S, X_R2, X_S, CircuitParams
from .formulation import DEFAULT_FREE, TargetVector, residual_array

FREE = DEFAULT_FREE
COND_LIMIT = 1e14
MAX_DAMPING_RETRIES = 5


class Strategy(str, enum.Enum):
    GAIN_RATIO = "gain-ratio"
    ERROR_TERM = "error-term"


class Method(str, enum.Enum):
    NR = "NR"
    LM = "LM"
    DNR = "DNR"


class Failure(str, enum.Enum):
    SINGULAR_JACOBIAN = "SingularJacobian"
    NON_FINITE = "NonFinite"
    MAX_ITERATIONS = "MaxIterations"
    INTERRUPTED = "Interrupted"


@dataclass(frozen=True)
class RestrictionConfig:
    k_r: float = 1.0
    k_x: float = 0.5

    def __post_init__(self):
        if not (self.k_r > 0 and self.k_x > 0):
            raise ValueError("restriction constants must be positive")


RESTRICTION_PRESETS = {
    "default": RestrictionConfig(k_r=1.0, k_x=0.5),
    "alternative": RestrictionConfig(k_r=0.5, k_x=1.0),
}


@dataclass(frozen=True)
class DampingConfig:
    lambda0: float = 1e-2
    beta: float = 3.0
    gamma: float = 3.0
    rho1: float = 0.25
    rho2: float = 0.75
    strategy: Strategy = Strategy.ERROR_TERM

    def __post_init__(self):
        if not (self.beta > 1 and self.gamma > 1):
            raise ValueError("beta and gamma must exceed 1")
        if not (0 < self.rho1 < self.rho2 < 1):
            raise ValueError("need 0 < rho1 < rho2 < 1")
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be non-negative")
        object.__setattr__(self, "strategy", Strategy(self.strategy))


# Typical machine used as a deterministic starting point (free parameters only).
TYPICAL_GUESS = {"x_s": 0.08, "x_m": 2.5, "r_r1": 0.03, "x_r1": 0.15, "r_r2": 0.08, "r_c": 30.0}


@dataclass(frozen=True)
class DescentConfig:
    """Settings shared by the three descent solvers.

    ``initial_guess`` of ``None`` samples the six free parameters once from
    the uniform envelope using ``seed``; a :class:`CircuitParams` is used
    as-is (its ``r_s`` and ``x_r2`` are replaced by the restrictions).

    ``dnr_form`` selects the damped-NR update: ``"regularized"`` solves with
    ``J + lambda*I``; ``"additive"`` applies ``J^-1 + lambda*I`` literally.

    ``positivity`` controls how steps that would drive a parameter towards
    zero are handled.  ``"scale"`` shortens the whole step so that no
    parameter falls below ``boundary_fraction`` of its current value;
    ``"relative"`` floors each parameter at that fraction individually;
    ``"clamp"`` only applies the absolute 1e-6 floor.  All modes keep the
    1e-6 floor.

    ``record_history`` keeps the accepted iterates (starting point first)
    and the damping factor after every iteration.
    """

    max_iterations: int = 30
    convergence_threshold: float = 1e-5
    step_size: float = 1.0
    fd_step: float = 1e-6
    restrictions: RestrictionConfig = field(default_factory=RestrictionConfig)
    damping: DampingConfig = field(default_factory=DampingConfig)
    initial_guess: Optional[CircuitParams] = None
    seed: int = 0
    dnr_form: str = "regularized"
    record_history: bool = False
    positivity: str = "scale"
    boundary_fraction: float = 0.5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.convergence_threshold > 0 and self.fd_step > 0 and self.step_size > 0):
            raise ValueError("thresholds and steps must be positive")
        if self.dnr_form not in ("regularized", "additive"):
            raise ValueError(f"unknown dnr_form {self.dnr_form!r}")
        if self.positivity not in ("scale", "relative", "clamp"):
            raise ValueError(f"unknown positivity mode {self.positivity!r}")
        if not (0.0 <= self.boundary_fraction < 1.0):
            raise ValueError("boundary_fraction must lie in [0, 1)")


@dataclass
class SolveOutcome:
    params: CircuitParams
    squared_error: float
    iterations: int
    converged: bool
    failure_reason: Optional[Failure] = None
    history: Optional[list] = None
    evaluations: int = 0

    @property
    def feasible(self) -> bool:
        return self.params.is_feasible()


@dataclass
class DescentResult:
    """Outcome of the generic iteration on free variables."""

    x: np.ndarray
    squared_error: float
    iterations: int
    converged: bool
    failure_reason: Optional[Failure]
    history: Optional[list] = None
    damping: Optional[list] = None


def typical_guess() -> CircuitParams:
    g = TYPICAL_GUESS
    return CircuitParams(r_s=g["r_r1"], x_s=g["x_s"], x_m=g["x_m"], r_r1=g["r_r1"], x_r1=g["x_r1"],
                         r_r2=g["r_r2"], x_r2=g["x_s"], r_c=g["r_c"])


def apply_restrictions(free_params, cfg: RestrictionConfig) -> CircuitParams:
    """Assemble the full parameter set from ``(x_s, x_m, r_r1, x_r1, r_r2, r_c)``."""
    return CircuitParams.from_array(expand_restricted(np.asarray(free_params, dtype=float), cfg))


def expand_restricted(z, cfg: RestrictionConfig) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    full = np.empty(z.shape[:-1] + (8,))
    full[..., FREE] = z
    full[..., R_S] = cfg.k_r * full[..., R_R1]
    full[..., X_R2] = cfg.k_x * full[..., X_S]
    return full


def expand_fixed(z, r_s, x_r2) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    full = np.empty(z.shape[:-1] + (8,))
    full[..., FREE] = z
    full[..., R_S] = r_s
    full[..., X_R2] = x_r2
    return full


def sample_free(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws of the six free parameters from the initial envelope."""
    ranges = [INIT_RANGES[i] for i in FREE]
    return circuit.sample_uniform(rng, ranges, size)


def initial_free(cfg: DescentConfig) -> np.ndarray:
    if cfg.initial_guess is not None:
        return cfg.initial_guess.as_array()[list(FREE)]
    return sample_free(np.random.default_rng(cfg.seed), 1)[0]


def _solve_batch(mat, rhs):
    """Batched LU solves; rows with condition number above the limit fail."""
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(mat)
    ok = np.isfinite(cond) & (cond <= COND_LIMIT)
    out = np.full(rhs.shape, np.nan)
    if ok.any():
        out[ok] = np.linalg.solve(mat[ok], rhs[ok][..., None])[..., 0]
    return out, ok


def _bounded_trial(x, step, lower, mode, tau):
    trial = x - step
    if lower is None:
        return trial
    if mode == "relative":
        trial = np.maximum(trial, tau * x)
    elif mode == "scale":
        with np.errstate(all="ignore"):
            lim = np.where(trial < tau * x, (1.0 - tau) * x / step, np.inf)
        t = np.minimum(1.0, lim.min(axis=1))
        trial = x - t[:, None] * step
    return np.maximum(trial, lower)


def iterate(
    fun: Callable,
    x0,
    method="NR",
    cfg: Optional[DescentConfig] = None,
    lower: Optional[float] = MIN_PARAM,
    stop_on_first: bool = False,
):
    """Run one descent method on a batch of independent problems.

    ``fun(points, owner)`` evaluates residuals for ``points`` shaped ``(k, n)``
    where ``owner[i]`` is the problem index that point ``i`` belongs to; it
    returns an array shaped ``(k, m)``.  ``x0`` is ``(p, n)`` for ``p``
    problems.  When ``stop_on_first`` is set, the whole batch halts at the
    first iteration in which any problem converges; still-running problems
    are then reported as :attr:`Failure.INTERRUPTED`.

    Returns a list of :class:`DescentResult`, one per problem.
    """
    cfg = cfg or DescentConfig()
    method = Method(method)
    damp = cfg.damping
    x = np.array(np.atleast_2d(x0), dtype=float)
    p, n = x.shape
    thr = cfg.convergence_threshold
    h = cfg.fd_step
    eye = np.eye(n)

    f = np.asarray(fun(x, np.arange(p)), dtype=float)
    err = np.einsum("ij,ij->i", f, f)
    lam = np.full(p, float(damp.lambda0))
    best_x, best_err = x.copy(), err.copy()
    iters = np.zeros(p, dtype=int)
    failure = [None] * p
    active = np.ones(p, dtype=bool)
    history = [[x[i].copy()] for i in range(p)] if cfg.record_history else None
    damping = [[float(lam[i])] for i in range(p)] if cfg.record_history else None

    done = err < thr
    active &= ~done
    if stop_on_first and done.any():
        for j in np.flatnonzero(active):
            failure[j] = Failure.INTERRUPTED
        active[:] = False

    while active.any():
        idx = np.flatnonzero(active)
        k = idx.size
        pts = np.repeat(x[idx], n, axis=0) + h * np.tile(eye, (k, 1))
        fp = np.asarray(fun(pts, np.repeat(idx, n)), dtype=float).reshape(k, n, -1)
        jac = np.transpose((fp - f[idx][:, None, :]) / h, (0, 2, 1))
        fi = f[idx]
        lam_i = lam[idx]

        if method is Method.NR:
            step, ok = _solve_batch(jac, fi)
            step = cfg.step_size * step
        elif method is Method.DNR:
            step = np.full((k, n), np.nan)
            ok = np.zeros(k, dtype=bool)
            pending = np.ones(k, dtype=bool)
            for _ in range(MAX_DAMPING_RETRIES + 1):
                rows = np.flatnonzero(pending)
                if cfg.dnr_form == "regularized":
                    mat = jac[rows] + lam_i[rows, None, None] * eye
                    s_r, ok_r = _solve_batch(mat, fi[rows])
                else:
                    s_r, ok_r = _solve_batch(jac[rows], fi[rows])
                    s_r = s_r + lam_i[rows, None] * fi[rows]
                step[rows[ok_r]] = s_r[ok_r]
                ok[rows[ok_r]] = True
                pending[rows[ok_r]] = False
                if not pending.any():
                    break
                lam_i[pending] *= damp.beta
            step = cfg.step_size * step
        else:
            grad = np.einsum("kji,kj->ki", jac, fi)
            hess = np.einsum("kji,kjl->kil", jac, jac)
            diag = np.einsum("kii->ki", hess)
            step = np.full((k, n), np.nan)
            ok = np.zeros(k, dtype=bool)
            pending = np.ones(k, dtype=bool)
            for _ in range(MAX_DAMPING_RETRIES + 1):
                rows = np.flatnonzero(pending)
                mat = hess[rows] + lam_i[rows, None, None] * (diag[rows][:, :, None] * eye)
                s_r, ok_r = _solve_batch(mat, grad[rows])
                step[rows[ok_r]] = s_r[ok_r]
                ok[rows[ok_r]] = True
                pending[rows[ok_r]] = False
                if not pending.any():
                    break
                lam_i[pending] *= damp.beta

        lam[idx] = lam_i
        for j in idx[~ok]:
            failure[j] = Failure.SINGULAR_JACOBIAN
            active[j] = False

        trial = _bounded_trial(x[idx], step, lower, cfg.positivity, cfg.boundary_fraction)
        finite = np.all(np.isfinite(trial), axis=1)
        for j in idx[ok & ~finite]:
            failure[j] = Failure.NON_FINITE
            active[j] = False

        go = ok & finite
        gi = idx[go]
        iters[idx] += 1
        if gi.size:
            t = trial[go]
            ft = np.asarray(fun(t, gi), dtype=float)
            et = np.einsum("ij,ij->i", ft, ft)
            e0 = err[gi]
            lam_g = lam[gi]
            if method is Method.NR:
                accept = np.ones(gi.size, dtype=bool)
            elif method is Method.DNR:
                worse = et > e0
                accept = ~worse | (lam_g == 0)
                lam_g = np.where(et < e0, lam_g / damp.gamma, np.where(worse, lam_g * damp.beta, lam_g))
            elif damp.strategy is Strategy.ERROR_TERM:
                accept = et < e0
                lam_g = np.where(et < e0, lam_g / damp.gamma, np.where(et > e0, lam_g * damp.beta, lam_g))
            else:
                dx = -step[go]
                g = np.einsum("kji,kj->ki", jac[go], fi[go])
                pred = 0.5 * np.einsum("ki,ki->k", dx, lam_g[:, None] * dx - g)
                with np.errstate(all="ignore"):
                    rho = 0.5 * (e0 - et) / pred
                accept = et < e0
                lam_g = np.where(rho < damp.rho1, lam_g * damp.beta, np.where(rho > damp.rho2, lam_g / damp.gamma, lam_g))
            lam[gi] = lam_g
            acc = gi[accept]
            x[acc] = t[accept]
            f[acc] = ft[accept]
            err[acc] = et[accept]
            if history is not None:
                for j in acc:
                    history[j].append(x[j].copy())
                for j in gi:
                    damping[j].append(float(lam[j]))
            better = err[gi] < best_err[gi]
            upd = gi[better]
            best_x[upd] = x[upd]
            best_err[upd] = err[upd]

        conv = active & (best_err < thr)
        active &= ~conv
        if stop_on_first and conv.any():
            for j in np.flatnonzero(active):
                failure[j] = Failure.INTERRUPTED
            active[:] = False
        spent = active & (iters >= cfg.max_iterations)
        for j in np.flatnonzero(spent):
            failure[j] = Failure.MAX_ITERATIONS
        active &= ~spent

    results = []
    for i in range(p):
        converged = bool(best_err[i] < thr)
        results.append(
            DescentResult(
                x=best_x[i].copy(),
                squared_error=float(best_err[i]),
                iterations=int(iters[i]),
                converged=converged,
                failure_reason=None if converged else failure[i],
                history=history[i] if history is not None else None,
                damping=damping[i] if damping is not None else None,
            )
        )
    return results


def restricted_problem(targets: TargetVector, restrictions: RestrictionConfig):
    """Residual callback for ``iterate`` under linear restrictions."""

    def fun(z, owner):
        return residual_array(expand_restricted(z, restrictions), targets)[0]

    return fun


def fixed_pair_problem(targets: TargetVector, r_s, x_r2):
    """Residual callback with per-problem fixed ``(r_s, x_r2)`` pairs."""
    r_s = np.atleast_1d(np.asarray(r_s, dtype=float))
    x_r2 = np.atleast_1d(np.asarray(x_r2, dtype=float))

    def fun(z, owner):
        return residual_array(expand_fixed(z, r_s[owner], x_r2[owner]), targets)[0]

    return fun


def _outcome(res: DescentResult, expand) -> SolveOutcome:
    hist = [CircuitParams.from_array(expand(h)) for h in res.history] if res.history is not None else None
    return SolveOutcome(
        params=CircuitParams.from_array(expand(res.x)),
        squared_error=res.squared_error,
        iterations=res.iterations,
        converged=res.converged,
        failure_reason=res.failure_reason,
        history=hist,
    )


def solve(targets: TargetVector, cfg: Optional[DescentConfig] = None, method="NR") -> SolveOutcome:
    cfg = cfg or DescentConfig()
    restr = cfg.restrictions
    z0 = initial_free(cfg)
    res = iterate(restricted_problem(targets, restr), z0[None, :], method, cfg)[0]
    return _outcome(res, lambda z: expand_restricted(z, restr))


def solve_nr(targets: TargetVector, cfg: Optional[DescentConfig] = None) -> SolveOutcome:
    """Newton-Raphson with step-size coefficient ``cfg.step_size``.

    Returns the best iterate seen, not necessarily the last one.
    """
    return solve(targets, cfg, Method.NR)


def solve_lm(targets: TargetVector, cfg: Optional[DescentConfig] = None) -> SolveOutcome:
    """Levenberg-Marquardt with Marquardt's diagonal scaling.

    Steps that increase the squared error are rolled back.
    """
    return solve(targets, cfg, Method.LM)


def solve_dnr(targets: TargetVector, cfg: Optional[DescentConfig] = None) -> SolveOutcome:
    """Damped Newton-Raphson; damping follows the error-term rule."""
    return solve(targets, cfg, Method.DNR)


def solve_fixed_pairs(
    targets: TargetVector,
    pairs,
    guesses,
    cfg: Optional[DescentConfig] = None,
    method="DNR",
    stop_on_first: bool = False,
) -> list:
    """Solve several problems with ``(r_s, x_r2)`` held at the given pairs.

    ``pairs`` is ``(p, 2)``; ``guesses`` the matching ``(p, 6)`` starting
    values of the free parameters.
    """
    cfg = cfg or DescentConfig()
    pairs = np.atleast_2d(np.asarray(pairs, dtype=float))
    fun = fixed_pair_problem(targets, pairs[:, 0], pairs[:, 1])
    results = iterate(fun, guesses, method, cfg, stop_on_first=stop_on_first)
    return [
        _outcome(r, lambda z, rs=pair[0], xr=pair[1]: expand_fixed(z, rs, xr))
        for r, pair in zip(results, pairs)
    ]
