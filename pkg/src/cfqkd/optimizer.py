"""Brute-force minimax search over Eve's attack parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _jit
from .analytic import (
    attack_stats,
    baseline_stats,
    click_probability,
    ratio_report,
    solve_y,
    solve_z0,
)
from .model import (
    AttackParams,
    AttackScenario,
    DegenerateBaselineError,
    Discrimination,
    ProtocolConfig,
    RatioReport,
)

DEFAULT_GRID_STEP = 0.001
# grid values within this of the kernel minimum are re-scored exactly
_TIE_WINDOW = 1e-12

_KIND = {
    AttackScenario.COMBINED_NODISC: 0,
    AttackScenario.COMBINED_FULLDISC: 1,
    AttackScenario.COMBINED_D1D2: 2,
    AttackScenario.COMBINED_D0D2: 3,
}


@dataclass(frozen=True)
class OptimizationResult:
    params: AttackParams
    report: RatioReport
    grid_step: float
    evaluations: int
    # winner of the grid_step/10 re-scan around ``params``
    refined_params: AttackParams | None = None
    refined_report: RatioReport | None = None


def _kernel_constants(cfg: ProtocolConfig) -> np.ndarray:
    base = baseline_stats(cfg)
    mu = cfg.mean_photon_number
    r, t = cfg.reflectivity, cfg.transmissivity
    s = cfg.channel_transmission
    return np.array(
        [
            base.p_d0,
            base.p_d1,
            base.p_d2,
            base.p_d0_opp,
            click_probability(cfg.eta_d2, cfg.eve_channel_transmission * t * mu),
            click_probability(cfg.eta_eve, t * mu),
            click_probability(cfg.eta_d0, s * s * r * r * mu),
            click_probability(cfg.eta_d1, s * s * r * t * mu),
            click_probability(cfg.eta_d0, s * s * mu),
            click_probability(cfg.eta_d0, s * s * (r * r + t * t) * mu),
            click_probability(cfg.eta_d1, s * s * 2 * r * t * mu),
        ]
    )


@_jit.njit(cache=True, nogil=True)
def _objective_grid_numba(kind, xs, zs, c):
    b0, b1, b2, b0o = c[0], c[1], c[2], c[3]
    q2, pe = c[4], c[5]
    d0s, d1s, d0o, fake0, fake1 = c[6], c[7], c[8], c[9], c[10]
    empty = 1.0 - pe
    out = np.empty((xs.shape[0], zs.shape[0]))
    for i in range(xs.shape[0]):
        x = xs[i]
        first = 0.25 * (1.0 - x) * q2
        cap = 0.5 * x * pe
        gap = b2 - first
        y = 1.0
        if cap > 0.0 and gap < cap:
            y = min(1.0, max(0.0, gap / cap))
        r2 = (first + cap * y) / b2
        for j in range(zs.shape[0]):
            z = zs[j]
            if kind == 0:
                r0 = (0.5 * (1.0 - x) * d0s + 0.5 * x * empty * z * fake0) / b0
                r1 = (0.5 * (1.0 - x) * d1s + 0.5 * x * empty * z * fake1) / b1
                r0o = 0.5 * (1.0 - x * empty * (1.0 - z)) * d0o / b0o
            elif kind == 1:
                r0 = 1.0
                r1 = 1.0
                r0o = 0.5 * (1.0 - x * empty) * d0o / b0o
            elif kind == 2:
                r0 = 0.5 * (1.0 - x * empty) * d0s / b0
                r1 = 1.0
                r0o = 0.5 * (1.0 - x * empty) * d0o / b0o
            else:
                untouched = 0.5 * (1.0 - x) * d0o
                z0 = 1.0
                if cap > 0.0 and b0o - untouched < cap:
                    z0 = min(1.0, max(0.0, (b0o - untouched) / cap))
                r0 = 1.0
                r1 = 0.5 * (1.0 - x * empty) * d1s / b1
                r0o = (untouched + cap * z0) / b0o
            out[i, j] = max(abs(r0 - 1.0), abs(r1 - 1.0), abs(r2 - 1.0), abs(r0o - 1.0))
    return out


def _fill(gap, cap):
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.clip(gap / cap, 0.0, 1.0)
    return np.where((cap > 0) & (gap < cap), frac, 1.0)


def _objective_grid_numpy(kind, xs, zs, c):
    b0, b1, b2, b0o, q2, pe, d0s, d1s, d0o, fake0, fake1 = c
    empty = 1.0 - pe
    x = xs[:, None]
    z = zs[None, :]
    first = 0.25 * (1.0 - x) * q2
    cap = 0.5 * x * pe
    r2 = (first + cap * _fill(b2 - first, cap)) / b2
    if kind == 0:
        r0 = (0.5 * (1.0 - x) * d0s + 0.5 * x * empty * z * fake0) / b0
        r1 = (0.5 * (1.0 - x) * d1s + 0.5 * x * empty * z * fake1) / b1
        r0o = 0.5 * (1.0 - x * empty * (1.0 - z)) * d0o / b0o
    elif kind == 1:
        r0 = r1 = np.ones_like(x)
        r0o = 0.5 * (1.0 - x * empty) * d0o / b0o
    elif kind == 2:
        r0 = 0.5 * (1.0 - x * empty) * d0s / b0
        r1 = np.ones_like(x)
        r0o = 0.5 * (1.0 - x * empty) * d0o / b0o
    else:
        untouched = 0.5 * (1.0 - x) * d0o
        r0 = np.ones_like(x)
        r1 = 0.5 * (1.0 - x * empty) * d1s / b1
        r0o = (untouched + cap * _fill(b0o - untouched, cap)) / b0o
    dev = np.maximum.reduce([np.abs(np.broadcast_to(r, (xs.size, zs.size)) - 1.0) for r in (r0, r1, r2, r0o)])
    return np.ascontiguousarray(dev)


def objective_grid(kind: int, xs: np.ndarray, zs: np.ndarray, consts: np.ndarray, *, backend: str | None = None) -> np.ndarray:
    """Max ratio deviation for every (x, z) pair; rows follow ``xs``."""
    backend = backend or _jit.backend_name()
    fn = _objective_grid_numba if backend == "numba" else _objective_grid_numpy
    return fn(kind, np.asarray(xs, dtype=np.float64), np.asarray(zs, dtype=np.float64), consts)


def grid_points(step: float, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Points ``low, low + step, ...`` up to ``high`` inclusive, clipped to [0, 1].

    When ``1/step`` is an integer the points are exact multiples ``i/n`` so
    that e.g. 0.042 is represented exactly as the nearest double.
    """
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"grid step must be positive, got {step!r}")
    n = round(1.0 / step)
    if n > 0 and abs(n * step - 1.0) < 1e-9:
        lo = max(0, math.ceil(low * n - 1e-9))
        hi = min(n, math.floor(high * n + 1e-9))
        return np.arange(lo, hi + 1) / n
    k = math.floor((high - low) / step + 1e-9)
    pts = low + step * np.arange(k + 1)
    if high - pts[-1] > 1e-12:
        pts = np.append(pts, high)
    return np.clip(pts, 0.0, 1.0)


def _params_for(cfg: ProtocolConfig, scenario: AttackScenario, x: float, z: float) -> AttackParams:
    x = float(x)
    z0 = solve_z0(cfg, x) if scenario is AttackScenario.COMBINED_D0D2 else 0.0
    z = float(z) if scenario is AttackScenario.COMBINED_NODISC else 0.0
    return AttackParams(x=x, y=float(solve_y(cfg, x)), z=z, z0=float(z0))


def _search(cfg, scenario, xs, zs):
    base = baseline_stats(cfg)
    devs = objective_grid(_KIND[scenario], xs, zs, _kernel_constants(cfg))
    best = float(devs.min())
    if not math.isfinite(best):
        raise DegenerateBaselineError("objective is not finite on the grid")
    winner = None
    for i, j in zip(*np.nonzero(devs <= best + _TIE_WINDOW)):
        params = _params_for(cfg, scenario, xs[i], zs[j])
        report = ratio_report(attack_stats(cfg, scenario, params), base)
        key = (report.max_deviation, params.x, params.z)
        if winner is None or key < winner[0]:
            winner = (key, params, report)
    return winner[1], winner[2], devs.size


def optimize(cfg: ProtocolConfig, scenario: AttackScenario, grid_step: float = DEFAULT_GRID_STEP, *, refine: bool = True) -> OptimizationResult:
    """Find the attack parameters minimising the worst ratio deviation.

    ``x`` (and ``z`` for the no-discrimination attack) are scanned on a grid
    of spacing ``grid_step``; ``y`` and ``z0`` are solved exactly for each
    ``x``. Ties go to the smallest ``x``, then the smallest ``z``.
    """
    if not scenario.is_combined:
        raise ValueError(f"{scenario.value} has no free attack parameters")
    if scenario.discrimination is not cfg.discrimination:
        raise ValueError(
            f"scenario {scenario.value} needs discrimination={scenario.discrimination.value}, "
            f"config has {cfg.discrimination.value}"
        )
    if not (0 < grid_step <= 1):
        raise ValueError(f"grid_step must lie in (0, 1], got {grid_step!r}")

    ratio_report(baseline_stats(cfg), baseline_stats(cfg))  # degenerate configs fail here
    two_d = scenario is AttackScenario.COMBINED_NODISC
    xs = grid_points(grid_step)
    zs = xs if two_d else np.zeros(1)
    params, report, evaluations = _search(cfg, scenario, xs, zs)

    refined_params = refined_report = None
    if refine:
        fine = grid_step / 10
        rxs = grid_points(fine, params.x - grid_step, params.x + grid_step)
        rxs = rxs[(rxs >= 0) & (rxs <= 1)]
        rzs = grid_points(fine, params.z - grid_step, params.z + grid_step) if two_d else np.zeros(1)
        rzs = rzs[(rzs >= 0) & (rzs <= 1)]
        refined_params, refined_report, n = _search(cfg, scenario, rxs, rzs)
        evaluations += n

    return OptimizationResult(
        params=params,
        report=report,
        grid_step=grid_step,
        evaluations=evaluations,
        refined_params=refined_params,
        refined_report=refined_report,
    )


@dataclass(frozen=True)
class TableCell:
    table: str
    discrimination: Discrimination
    column: str
    config: ProtocolConfig
    result: OptimizationResult


# sub-table order used in both published tables
TABLE_DISCRIMINATIONS = (
    Discrimination.NONE,
    Discrimination.ALL,
    Discrimination.D1D2,
    Discrimination.D0D2,
)

TABLE_TITLES = {
    Discrimination.NONE: "No polarization discrimination",
    Discrimination.ALL: "Polarization discrimination in D0, D1 and D2",
    Discrimination.D1D2: "Polarization discrimination in D1 and D2 only",
    Discrimination.D0D2: "Polarization discrimination in D0 and D2 only",
}


def table_columns(table: str) -> list[tuple[str, dict]]:
    """Column labels and config overrides of a published table (``"I"`` or ``"II"``)."""
    if table == "I":
        return [(f"R={r}", dict(reflectivity=r)) for r in (0.5, 0.4, 0.1)]
    if table == "II":
        return [
            (
                f"sigma={s}, sigma'={sp}, eta_E={ee}",
                dict(channel_transmission=s, eve_channel_transmission=sp, eta_eve=ee),
            )
            for s, sp, ee in ((0.6, 0.72, 0.9), (0.1, 0.1, 0.1), (0.1, 0.1, 0.9))
        ]
    raise ValueError(f"unknown table {table!r}; expected 'I' or 'II'")


def reproduce_tables(table: str, grid_step: float = DEFAULT_GRID_STEP, discriminations: Sequence[Discrimination] = TABLE_DISCRIMINATIONS) -> list[TableCell]:
    """Optimise every cell of a published attack-efficiency table.

    Both tables share eta_0 = eta_1 = eta_2 = 0.1 and a mean photon number of
    0.1. Table I fixes eta_E = 0.1, sigma = 0.1, sigma' = 1.2 sigma and varies
    R; Table II fixes R = 0.5 and varies the channel and Eve's detector.
    """
    reference = ProtocolConfig()
    cells = []
    for disc in discriminations:
        scenario = AttackScenario.combined_for(disc)
        for label, overrides in table_columns(table):
            cfg = reference.replace(discrimination=disc, **overrides)
            cells.append(TableCell(table, disc, label, cfg, optimize(cfg, scenario, grid_step)))
    return cells
