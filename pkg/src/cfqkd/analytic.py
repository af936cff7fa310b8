"""Closed-form detector statistics for the honest protocol and the combined attacks."""
from __future__ import annotations

import math

from scipy.optimize import brentq

from .model import (
    AttackParams,
    AttackScenario,
    DegenerateBaselineError,
    DetectionStats,
    ProtocolConfig,
    RatioReport,
)


def click_probability(eta: float, mean_photons: float) -> float:
    """Probability that a binary detector of efficiency ``eta`` fires on a coherent state."""
    return -math.expm1(-eta * mean_photons)


def baseline_stats(cfg: ProtocolConfig) -> DetectionStats:
    mu = cfg.mean_photon_number
    r, t = cfg.reflectivity, cfg.transmissivity
    s = cfg.channel_transmission
    return DetectionStats(
        p_d0=0.5 * click_probability(cfg.eta_d0, s * s * r * r * mu),
        p_d1=0.5 * click_probability(cfg.eta_d1, s * s * r * t * mu),
        p_d2=0.5 * click_probability(cfg.eta_d2, s * t * mu),
        p_d0_opp=0.5 * click_probability(cfg.eta_d0, s * s * mu),
    )


def eve_detection_probability(cfg: ProtocolConfig) -> float:
    """Probability that Eve's measurement of Alice's channel pulse finds photons."""
    return click_probability(cfg.eta_eve, cfg.transmissivity * cfg.mean_photon_number)


def _bob_unmeasured_rate(cfg: ProtocolConfig, x: float) -> float:
    # blind-and-reduce-losses branch: Bob only sees light when Eve's
    # polarization differs from his, hence the extra 1/2
    mu, t = cfg.mean_photon_number, cfg.transmissivity
    return 0.25 * (1 - x) * click_probability(cfg.eta_d2, cfg.eve_channel_transmission * t * mu)


def _forced_click_budget(cfg: ProtocolConfig, x: float) -> float:
    return 0.5 * x * eve_detection_probability(cfg)


def _fill_fraction(gap: float, cap: float) -> float:
    if cap == 0 or gap >= cap:
        return 1.0
    return min(1.0, max(0.0, gap / cap))


def solve_y(cfg: ProtocolConfig, x: float) -> float:
    """Forced-click probability that tops Bob's D2 rate back up to its expected value.

    Returns 1 when even y = 1 leaves a deficit (or when ``x = 0``, where the
    value has no effect).
    """
    gap = baseline_stats(cfg).p_d2 - _bob_unmeasured_rate(cfg, x)
    return _fill_fraction(gap, _forced_click_budget(cfg, x))


def solve_z0(cfg: ProtocolConfig, x: float) -> float:
    """Forced D0 click probability restoring the different-polarization D0 rate."""
    expected = baseline_stats(cfg).p_d0_opp
    untouched = 0.5 * (1 - x) * click_probability(cfg.eta_d0, cfg.channel_transmission**2 * cfg.mean_photon_number)
    return _fill_fraction(expected - untouched, _forced_click_budget(cfg, x))


def attack_stats(cfg: ProtocolConfig, scenario: AttackScenario, params: AttackParams) -> DetectionStats:
    """Detector statistics under one of the four combined attacks.

    ``params.y`` and ``params.z0`` are used as given; call :func:`solve_y` and
    :func:`solve_z0` to obtain Eve's optimal choices for a given ``x``.
    """
    if not scenario.is_combined:
        raise ValueError(
            f"{scenario.value} has no closed form here; use baseline_stats or the Monte Carlo engine"
        )
    if scenario.discrimination is not cfg.discrimination:
        raise ValueError(
            f"scenario {scenario.value} targets discrimination={scenario.discrimination.value}, "
            f"config has {cfg.discrimination.value}"
        )

    mu = cfg.mean_photon_number
    r, t = cfg.reflectivity, cfg.transmissivity
    s = cfg.channel_transmission
    x = params.x
    base = baseline_stats(cfg)
    # probability Eve's measurement finds nothing and she has to improvise
    empty = math.exp(-cfg.eta_eve * t * mu)

    p_d2 = _bob_unmeasured_rate(cfg, x) + _forced_click_budget(cfg, x) * params.y
    d0_same = click_probability(cfg.eta_d0, s * s * r * r * mu)
    d1_same = click_probability(cfg.eta_d1, s * s * r * t * mu)
    d0_opp = click_probability(cfg.eta_d0, s * s * mu)

    if scenario is AttackScenario.COMBINED_NODISC:
        z = params.z
        p_d0 = 0.5 * (1 - x) * d0_same + 0.5 * x * empty * z * click_probability(
            cfg.eta_d0, s * s * (r * r + t * t) * mu
        )
        p_d1 = 0.5 * (1 - x) * d1_same + 0.5 * x * empty * z * click_probability(
            cfg.eta_d1, s * s * 2 * r * t * mu
        )
        p_d0_opp = 0.5 * (1 - x * empty * (1 - z)) * d0_opp
    elif scenario is AttackScenario.COMBINED_FULLDISC:
        p_d0, p_d1 = base.p_d0, base.p_d1
        p_d0_opp = 0.5 * (1 - x * empty) * d0_opp
    elif scenario is AttackScenario.COMBINED_D1D2:
        p_d0 = 0.5 * (1 - x * empty) * d0_same
        p_d1 = base.p_d1
        p_d0_opp = 0.5 * (1 - x * empty) * d0_opp
    else:
        p_d0 = base.p_d0
        p_d1 = 0.5 * (1 - x * empty) * d1_same
        p_d0_opp = 0.5 * (1 - x) * d0_opp + _forced_click_budget(cfg, x) * params.z0

    return DetectionStats(p_d0=p_d0, p_d1=p_d1, p_d2=p_d2, p_d0_opp=p_d0_opp)


def ratio_report(attack: DetectionStats, baseline: DetectionStats) -> RatioReport:
    ratios = []
    for (name, value), (_, expected) in zip(attack.items(), baseline.items()):
        if expected == 0:
            raise DegenerateBaselineError(f"baseline {name} is zero; ratio undefined")
        ratios.append(value / expected)
    return RatioReport(*ratios)


def _loss_deviation(cfg: ProtocolConfig, delta_db: float) -> float:
    reference = baseline_stats(cfg)
    lossier = cfg.replace(
        channel_transmission=cfg.channel_transmission * 10.0 ** (-delta_db / 10.0),
        eve_channel_transmission=cfg.eve_channel_transmission,
    )
    report = ratio_report(baseline_stats(lossier), reference)
    return min(abs(r - 1.0) for r in report.as_tuple())


def loss_fluctuation_equivalent(cfg: ProtocolConfig, deviation: float, max_db: float = 3.0) -> float:
    """Extra one-way channel loss (dB) that shifts every statistic by at least ``deviation``.

    The returned figure is the smallest loss increase for which the least
    affected of the four baseline statistics moves by ``deviation`` relative
    to its nominal value. Statistics that depend on the round trip move twice
    as fast (in dB) as Bob's one-way D2 rate, so D2 sets the figure.
    """
    if not (0 < deviation < 1):
        raise ValueError(f"deviation must lie in (0, 1), got {deviation!r}")
    if _loss_deviation(cfg, max_db) < deviation:
        raise ValueError(f"deviation {deviation} not reachable within {max_db} dB")
    return brentq(lambda d: _loss_deviation(cfg, d) - deviation, 0.0, max_db, xtol=1e-9)
