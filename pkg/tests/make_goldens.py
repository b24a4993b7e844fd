"""Regenerate ``tests/data/goldens.json`` from the mpmath oracle.

Run from the repository root: ``python3 tests/make_goldens.py``.  The
package is never imported, so the goldens stay independent of it.
"""

import json
from pathlib import Path

import numpy as np

import oracle

RANGES = [(0, .15), (0, .15), (0, 5), (0, .15), (0, .3), (0, .15), (0, .15), (0, 100)]
GOLDEN = (0.031, 0.10, 3.1, 0.018, 0.18, 0.12, 0.09, 42.0)
SLIPS = (0.005, 0.02, 0.1, 0.5, 1.0)
HAND_EXAMPLE = (0.02, 0.08, 1e9, 0.02, 0.12, 0.10, 0.04, 1e9)

# Nameplate example: 400 V, 181 A, 100 kW, eff 0.95, pf 0.87, 1480 rpm, 50 Hz, 4 poles.
PLATE = dict(u_n=400.0, i_s_fl=181.0, p_m_fl=100e3, eff_fl=0.95, pf_fl=0.87, n_fl=1480.0, freq=50.0, poles=4)


def frozen_sets(n=19, seed=20240611):
    rng = np.random.default_rng(seed)
    out = [GOLDEN]
    while len(out) < n + 1:
        x = [max(rng.uniform(lo, hi), 1e-3) for lo, hi in RANGES]
        if x[4] > x[6] and x[5] > x[3]:
            out.append(tuple(float(v) for v in x))
    return out


def s(v):
    return oracle.mp.nstr(v, 40)


def plate_targets():
    mp = oracle.mp
    p = {k: mp.mpf(repr(v)) for k, v in PLATE.items()}
    n_sync = 120 * p["freq"] / p["poles"]
    s_f = (n_sync - p["n_fl"]) / n_sync
    s_base = mp.sqrt(3) * p["u_n"] * p["i_s_fl"]
    p_m = p["p_m_fl"] / s_base
    p_in = p_m / p["eff_fl"]
    q = p_in * mp.sqrt(1 - p["pf_fl"] ** 2) / p["pf_fl"]
    t_n = p_m / (1 - s_f)
    # Torque and current ratios chosen for a typical design.
    ratios = {"t_b_ratio": mp.mpf("2.6"), "t_lr_ratio": mp.mpf("1.9"), "i_lr_ratio": mp.mpf("6.5")}
    vec = [p_m, q, ratios["t_b_ratio"] * t_n, ratios["t_lr_ratio"] * t_n, ratios["i_lr_ratio"], p["eff_fl"]]
    return s_f, s_base, vec, {k: float(v) for k, v in ratios.items()}


def main():
    data = {"operating_points": [], "hand_example": {}, "breakdown": {}, "plate": {}, "residuals": {}}
    for params in frozen_sets():
        for slip in SLIPS:
            sol = oracle.solve(params, slip)
            data["operating_points"].append({
                "params": list(params),
                "slip": slip,
                "z_in": [s(oracle.mp.re(sol["z_in"])), s(oracle.mp.im(sol["z_in"]))],
                **{k: s(sol[k]) for k in ("p_mech", "q_in", "p_in", "torque", "i_stator", "efficiency")},
            })

    z = oracle.solve(HAND_EXAMPLE, 1.0)["z_in"]
    data["hand_example"] = {"params": list(HAND_EXAMPLE), "z_in": [s(z.real), s(z.imag)]}

    s_max, t_b = oracle.breakdown(GOLDEN)
    grid = np.logspace(-4, 0, 1_000_000)
    curve = _sweep(GOLDEN, grid)
    k = int(np.argmax(curve))
    data["breakdown"] = {
        "params": list(GOLDEN),
        "s_max": s(s_max),
        "t_b": s(t_b),
        "sweep_s_max": repr(float(grid[k])),
        "sweep_t_b": repr(float(curve[k])),
        "sweep_spacing": repr(float(grid[k + 1] / grid[k] - 1)),
    }

    s_f, s_base, vec, ratios = plate_targets()
    data["plate"] = {
        **PLATE,
        **ratios,
        "s_f": s(s_f),
        "s_base": s(s_base),
        "targets": [s(v) for v in vec],
    }
    model = oracle.targets(GOLDEN, s_f)
    data["residuals"] = {
        "params": list(GOLDEN),
        "f": [s((t - m) / t) for t, m in zip(vec, model)],
    }
    path = Path(__file__).parent / "data" / "goldens.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(data, indent=1) + "\n")
    print("wrote", path)


def _sweep(params, grid):
    """Plain float64 torque sweep written independently of the package."""
    r_s, x_s, x_m, r1, x1, r2, x2, r_c = params
    z1 = r1 / grid + 1j * x1
    z2 = r2 / grid + 1j * x2
    z_rot = z1 * z2 / (z1 + z2)
    y_node = 1 / r_c + 1 / (1j * x_m) + 1 / z_rot
    z_node = 1 / y_node
    i_s = 1 / (r_s + 1j * x_s + z_node)
    i_rot = i_s * z_node / z_rot
    return np.abs(i_rot) ** 2 * z_rot.real


if __name__ == "__main__":
    main()
