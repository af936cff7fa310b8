"""Mean-field optics of one protocol round.

Every round ends in one of a small number of *situations*: the pair of
polarization choices, the branch of Eve's decision tree and one binary
decision inside that branch. For each situation this module propagates
coherent-state amplitudes through Alice's beam splitter and records, per
detector branch, the click probability and whether Eve has blinded the
branch or forces it to fire. The pulse kernels only draw uniforms and look
results up here.

Detector branches are D0-H, D0-V, D1-H, D1-V and D2 (Bob's D2 always sees
only his chosen polarization). A detector without polarization resolution
is two branches that Eve can only blind or force together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import AttackParams, AttackScenario, Discrimination, ProtocolConfig

# branches of Eve's decision tree
HONEST, BLIND_REDUCE, INFORMED, EMPTY = range(4)
# detector modes
NORMAL, BLINDED, FORCED = range(3)
D0H, D0V, D1H, D1V, D2 = range(5)
N_DETECTORS = 5
N_SITUATIONS = 32

# scenario codes understood by the kernels
SCENARIO_CODES = {
    AttackScenario.BASELINE: 0,
    AttackScenario.BLIND_REDUCE_LOSSES: 1,
    AttackScenario.COMBINED_NODISC: 2,
    AttackScenario.COMBINED_FULLDISC: 3,
    AttackScenario.COMBINED_D1D2: 4,
    AttackScenario.COMBINED_D0D2: 5,
}


def situation_index(branch: int, alice: int, bob: int, flag: int) -> int:
    return ((branch * 2 + alice) * 2 + bob) * 2 + flag


@dataclass(frozen=True)
class _Round:
    """Light arriving at Alice's beam splitter and the detector modes."""

    retained: np.ndarray  # amplitude per polarization, Alice's delay arm
    returned: np.ndarray  # amplitude per polarization, channel arm
    bob_mean: float
    modes: tuple[int, int, int, int, int]


@dataclass(frozen=True)
class OpticsTable:
    probs: np.ndarray  # (N_SITUATIONS, N_DETECTORS) float64
    modes: np.ndarray  # (N_SITUATIONS, N_DETECTORS) int8
    eve_count_cdf: np.ndarray  # cumulative Poisson law of Eve's photon count
    side_probability: float  # Eve detects a stored pulse while mimicking Bob
    eve_transmission: float


def eve_transmission(cfg: ProtocolConfig, scenario: AttackScenario) -> float:
    """One-way transmission of the channel Eve substitutes for the honest one."""
    if scenario is AttackScenario.BLIND_REDUCE_LOSSES:
        doubled = 2.0 * cfg.channel_transmission
        if doubled > 1.0:
            raise ValueError(
                "blind-and-reduce-losses needs a channel transmission <= 0.5 "
                f"(Eve halves the loss), got {cfg.channel_transmission}"
            )
        return doubled
    return cfg.eve_channel_transmission


def _poisson_cdf(mean: float, tol: float = 1e-17, kmax: int = 64) -> np.ndarray:
    cdf = []
    term = math.exp(-mean)
    total = 0.0
    for k in range(kmax):
        total += term
        cdf.append(min(total, 1.0))
        if 1.0 - total < tol:
            break
        term *= mean / (k + 1)
    cdf[-1] = 1.0
    return np.array(cdf)


def _blind_alice(disc: Discrimination, pol: int | None) -> list[int]:
    """Modes for Alice's four branches when Eve blinds polarization ``pol``.

    ``pol=None`` blinds every branch. Detectors that cannot resolve
    polarization are blinded whole.
    """
    modes = [NORMAL] * 4
    for first, resolves in ((D0H, disc.d0_resolves), (D1H, disc.d1_resolves)):
        for p in (0, 1):
            if pol is None or not resolves or p == pol:
                modes[first + p] = BLINDED
    return modes


def _round(cfg, scenario, branch, a, b, flag, alpha, sigma_eve) -> _Round:
    r, t = cfg.reflectivity, cfg.transmissivity
    s = cfg.channel_transmission
    disc = cfg.discrimination

    retained = np.zeros(2, dtype=complex)
    retained[a] = math.sqrt(r) * s * alpha
    returned = np.zeros(2, dtype=complex)
    # what comes back from an honest Bob who reflects the pulse (pi phase)
    reflected = -1j * math.sqrt(t) * s * alpha
    channel_at_bob = t * alpha * alpha  # times one-way transmission

    bob_mean = 0.0
    alice = [NORMAL] * 4
    bob = NORMAL

    if branch == HONEST:
        if a == b:
            bob_mean = channel_at_bob * s
        else:
            returned[a] = reflected
    elif branch == BLIND_REDUCE:
        eve_pol = flag
        if eve_pol == b:
            bob = BLINDED
            if a != b:
                # passed to Bob, reflected, attenuated back to the honest loss
                returned[a] = reflected
            # a == b: the stored pulse is what Bob would have absorbed; drop it
        else:
            if a == b:
                bob_mean = channel_at_bob * sigma_eve
            else:
                # stored in Eve's delay line and released with the honest loss
                returned[a] = reflected
    elif branch == INFORMED:
        if a == b:
            bob = FORCED if flag else BLINDED
            if disc is Discrimination.NONE:
                alice = _blind_alice(disc, None)
        elif disc is Discrimination.D0D2:
            alice = _blind_alice(disc, None)
            if flag:
                alice[D0H + a] = FORCED
        else:
            returned[a] = reflected  # faked state
    else:  # EMPTY: Eve found no photons and blinded Bob with diagonal light
        bob = BLINDED
        if disc is Discrimination.NONE:
            if flag:
                returned[1 - b] = reflected
            else:
                alice = _blind_alice(disc, None)
        else:
            alice = _blind_alice(disc, 1 - b)

    return _Round(retained, returned, bob_mean, (*alice, bob))


def build_table(cfg: ProtocolConfig, scenario: AttackScenario, single_photon: bool = False) -> OpticsTable:
    """Click probabilities and detector modes for every situation.

    With ``single_photon`` the table holds the probability that the photon is
    registered by each branch (the branches are then mutually exclusive);
    otherwise each entry is the independent coherent-state click probability.
    """
    alpha = 1.0 if single_photon else math.sqrt(cfg.mean_photon_number)
    sigma_eve = eve_transmission(cfg, scenario)
    r, t = cfg.reflectivity, cfg.transmissivity
    etas = (cfg.eta_d0, cfg.eta_d0, cfg.eta_d1, cfg.eta_d1, cfg.eta_d2)

    probs = np.zeros((N_SITUATIONS, N_DETECTORS))
    modes = np.zeros((N_SITUATIONS, N_DETECTORS), dtype=np.int8)
    for branch in (HONEST, BLIND_REDUCE, INFORMED, EMPTY):
        for a in (0, 1):
            for b in (0, 1):
                for flag in (0, 1):
                    rnd = _round(cfg, scenario, branch, a, b, flag, alpha, sigma_eve)
                    port0 = math.sqrt(r) * rnd.retained + 1j * math.sqrt(t) * rnd.returned
                    port1 = 1j * math.sqrt(t) * rnd.retained + math.sqrt(r) * rnd.returned
                    means = [*np.abs(port0) ** 2, *np.abs(port1) ** 2, rnd.bob_mean]
                    row = situation_index(branch, a, b, flag)
                    for det, (eta, mean) in enumerate(zip(etas, means)):
                        if single_photon:
                            probs[row, det] = eta * mean
                        else:
                            probs[row, det] = -math.expm1(-eta * mean)
                    modes[row] = rnd.modes
                    if single_photon and probs[row].sum() > 1.0 + 1e-12:
                        raise ValueError(f"situation {row}: detection probabilities exceed 1")

    side = 0.0
    if scenario.is_combined:
        side = -math.expm1(-cfg.eta_eve * sigma_eve * t * cfg.mean_photon_number)
    return OpticsTable(
        probs=probs,
        modes=modes,
        eve_count_cdf=_poisson_cdf(cfg.eta_eve * t * cfg.mean_photon_number),
        side_probability=side,
        eve_transmission=sigma_eve,
    )


def expected_stats(
    table: OpticsTable, scenario: AttackScenario, params: AttackParams, single_photon: bool = False
) -> tuple[float, float, float, float]:
    """Exact per-pulse statistics implied by a table.

    Enumerates the decision tree with its branch probabilities. Used to check
    the table against the closed forms without any sampling, and as the
    reference for single-photon runs.
    """
    code = SCENARIO_CODES[scenario]
    weights = np.zeros(N_SITUATIONS)
    p_found = 1.0 - table.eve_count_cdf[0]
    for a in (0, 1):
        for b in (0, 1):
            w = 0.25
            if code == 0:
                weights[situation_index(HONEST, a, b, 0)] += w
                continue
            measure = params.x if code >= 2 else 0.0
            for e in (0, 1):
                weights[situation_index(BLIND_REDUCE, a, b, e)] += w * (1 - measure) * 0.5
            if code < 2:
                continue
            if a == b:
                decide = params.y
            elif code == 5:
                decide = params.z0
            else:
                decide = 0.0
            weights[situation_index(INFORMED, a, b, 1)] += w * measure * p_found * decide
            weights[situation_index(INFORMED, a, b, 0)] += w * measure * p_found * (1 - decide)
            fake = params.z if code == 2 else 0.0
            weights[situation_index(EMPTY, a, b, 1)] += w * measure * (1 - p_found) * fake
            weights[situation_index(EMPTY, a, b, 0)] += w * measure * (1 - p_found) * (1 - fake)

    click = np.where(table.modes == FORCED, 1.0, np.where(table.modes == BLINDED, 0.0, table.probs))
    if single_photon:
        # one photon, so the two polarization branches exclude each other
        p_d0 = click[:, D0H] + click[:, D0V]
        p_d1 = click[:, D1H] + click[:, D1V]
    else:
        p_d0 = 1.0 - (1.0 - click[:, D0H]) * (1.0 - click[:, D0V])
        p_d1 = 1.0 - (1.0 - click[:, D1H]) * (1.0 - click[:, D1V])
    same = np.zeros(N_SITUATIONS, dtype=bool)
    for branch in range(4):
        for a in (0, 1):
            for flag in (0, 1):
                same[situation_index(branch, a, a, flag)] = True
    return (
        float(weights[same] @ p_d0[same]),
        float(weights @ p_d1),
        float(weights @ click[:, D2]),
        float(weights[~same] @ p_d0[~same]),
    )
