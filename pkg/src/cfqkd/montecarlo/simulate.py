"""Pulse-level Monte Carlo of the protocol with and without Eve."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterator, NamedTuple

import numpy as np

from .. import _jit
from ..model import AttackParams, AttackScenario, DetectionStats, Polarization, ProtocolConfig
from . import kernels
from .kernels import ACTION_BLIND_REDUCE, ACTION_MEASURE, FIELDS, N_FIELDS
from .optics import SCENARIO_CODES, build_table
from .rng import stream_key

BATCH_SIZE = 1 << 18


class Source(Enum):
    SINGLE_PHOTON = "single-photon"
    COHERENT = "coherent"


@dataclass(frozen=True)
class PulseRecord:
    """One simulated round.

    ``eve_action`` is ``None``, ``("blind-reduce", eve_pol)`` or
    ``("measure", photon_count)``. A detector counts as blinded only when
    every polarization branch of it is blinded; a forced click is not a
    blinded detector.
    """

    alice_pol: Polarization
    bob_pol: Polarization
    eve_action: tuple | None
    d0_click: bool
    d1_click: bool
    d2_click: bool
    d0_blinded: bool
    d1_blinded: bool
    d2_blinded: bool
    eve_knows_bob: bool
    eve_knows_alice: bool

    @classmethod
    def from_row(cls, row) -> "PulseRecord":
        action = int(row[2])
        if action == ACTION_BLIND_REDUCE:
            eve = ("blind-reduce", Polarization(int(row[3])))
        elif action == ACTION_MEASURE:
            eve = ("measure", int(row[3]))
        else:
            eve = None
        flags = [bool(v) for v in row[4:]]
        return cls(Polarization(int(row[0])), Polarization(int(row[1])), eve, *flags)


@dataclass(frozen=True)
class SimulationSummary:
    pulses: int
    empirical: DetectionStats
    counts: dict
    sifted_key_length: int
    qber: float
    eve_key_recovery: float
    records: np.ndarray | None = None

    def iter_records(self) -> Iterator[PulseRecord]:
        if self.records is None:
            raise ValueError("simulation was run without keep_records=True")
        for row in self.records:
            yield PulseRecord.from_row(row)


def _tally(rows: np.ndarray) -> np.ndarray:
    a, b = rows[:, 0], rows[:, 1]
    d0, d1, d2 = rows[:, 4] == 1, rows[:, 5] == 1, rows[:, 6] == 1
    same = a == b
    knows_bob, knows_alice = rows[:, 10] == 1, rows[:, 11] == 1
    # Faraday rotation is ignored, so a D1 click means the two choices
    # coincided and Bob reads Alice's bit straight off his own choice.
    bob_bit = b
    eve_bit = np.where(knows_bob, b, np.where(knows_alice, a, -1))
    return np.array(
        [
            np.count_nonzero(d0 & same),
            np.count_nonzero(d1),
            np.count_nonzero(d2),
            np.count_nonzero(d0 & ~same),
            np.count_nonzero(d1 & (bob_bit != a)),
            np.count_nonzero(d1 & (eve_bit == a)),
        ],
        dtype=np.int64,
    )


def simulate(
    cfg: ProtocolConfig,
    scenario: AttackScenario,
    params: AttackParams | None = None,
    source: Source = Source.COHERENT,
    pulses: int = 1_000_000,
    seed: int = 0,
    *,
    keep_records: bool = False,
    workers: int = 1,
    backend: str | None = None,
) -> SimulationSummary:
    """Simulate ``pulses`` rounds and tally the four monitored statistics.

    Results depend only on ``(cfg, scenario, params, source, pulses, seed)``;
    batch size, ``workers`` and backend do not change a single bit.
    """
    params = params or AttackParams()
    source = Source(source)
    if isinstance(pulses, bool) or int(pulses) != pulses or pulses < 1:
        raise ValueError(f"pulses must be a positive integer, got {pulses!r}")
    pulses = int(pulses)
    single = source is Source.SINGLE_PHOTON
    if single and scenario.is_combined:
        raise ValueError("the combined attacks exploit multi-photon pulses; use a coherent source")
    if scenario.is_combined and scenario.discrimination is not cfg.discrimination:
        raise ValueError(
            f"scenario {scenario.value} targets discrimination={scenario.discrimination.value}, "
            f"config has {cfg.discrimination.value}"
        )

    table = build_table(cfg, scenario, single_photon=single)
    key = stream_key(seed)
    backend = backend or _jit.backend_name()
    kernel = kernels.sample_pulses_numba if backend == "numba" else kernels.sample_pulses_numpy
    kernel_args = (
        SCENARIO_CODES[scenario],
        single,
        params.x,
        params.y,
        params.z,
        params.z0,
        table.probs,
        table.modes,
        table.eve_count_cdf,
        table.side_probability,
    )

    records = np.empty((pulses, N_FIELDS), dtype=np.int16) if keep_records else None
    starts = range(0, pulses, BATCH_SIZE)

    def run(start: int) -> np.ndarray:
        n = min(BATCH_SIZE, pulses - start)
        out = records[start : start + n] if keep_records else np.empty((n, N_FIELDS), dtype=np.int16)
        kernel(key, start, out, *kernel_args)
        return _tally(out)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(run, starts))
    else:
        tallies = [run(start) for start in starts]
    n_d0, n_d1, n_d2, n_d0_opp, bob_errors, eve_correct = np.sum(tallies, axis=0).tolist()

    sifted = n_d1
    return SimulationSummary(
        pulses=pulses,
        empirical=DetectionStats(
            p_d0=n_d0 / pulses, p_d1=n_d1 / pulses, p_d2=n_d2 / pulses, p_d0_opp=n_d0_opp / pulses
        ),
        counts={"p_d0": n_d0, "p_d1": n_d1, "p_d2": n_d2, "p_d0_opp": n_d0_opp},
        sifted_key_length=sifted,
        qber=bob_errors / sifted if sifted else 0.0,
        eve_key_recovery=eve_correct / sifted if sifted else 0.0,
        records=records,
    )


class StatComparison(NamedTuple):
    """Standard score of one empirical statistic.

    ``exact`` is ``"match"`` or ``"mismatch"`` when the expected probability is
    0 or 1, where no standard error exists, and ``None`` otherwise.
    """

    z: float
    exact: str | None = None


def compare_to_analytic(summary: SimulationSummary, expected: DetectionStats) -> dict[str, StatComparison]:
    n = summary.pulses
    if n <= 0:
        raise ValueError("summary has no pulses")
    out = {}
    for name, p in expected.items():
        count = summary.counts[name]
        if p <= 0.0 or p >= 1.0:
            hit = count == round(p * n)
            out[name] = StatComparison(0.0 if hit else math.inf, "match" if hit else "mismatch")
            continue
        out[name] = StatComparison((count / n - p) / math.sqrt(p * (1 - p) / n))
    return out


def write_records(summary: SimulationSummary, fh: IO[str]) -> None:
    """Write one CSV line per pulse with a header.

    ``eve_action`` is 0/1/2 (none, blind-reduce, measure) and ``eve_value``
    holds Eve's polarization (0=H, 1=V) or her photon count respectively.
    Polarizations are 0=H, 1=V; booleans are 0/1.
    """
    if summary.records is None:
        raise ValueError("simulation was run without keep_records=True")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(FIELDS)
    writer.writerows(summary.records.tolist())
