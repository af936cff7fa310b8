"""Shared domain types, parameter validation and unit conversions."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Mapping


class ConfigError(ValueError):
    """A configuration value is missing, malformed or out of range.

    ``field`` names the offending configuration key.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateBaselineError(ArithmeticError):
    """A ratio against a zero baseline probability was requested."""


class Polarization(Enum):
    H = 0
    V = 1

    @property
    def orthogonal(self) -> "Polarization":
        return Polarization(1 - self.value)


class Discrimination(Enum):
    """Which detectors resolve the polarization of the light they receive.

    Bob's D2 always does (it sits behind a polarizing beam splitter), so only
    Alice's detectors vary.
    """

    NONE = "none"
    ALL = "all"
    D1D2 = "d1d2"
    D0D2 = "d0d2"

    @property
    def d0_resolves(self) -> bool:
        return self in (Discrimination.ALL, Discrimination.D0D2)

    @property
    def d1_resolves(self) -> bool:
        return self in (Discrimination.ALL, Discrimination.D1D2)


class AttackScenario(Enum):
    BASELINE = "baseline"
    BLIND_REDUCE_LOSSES = "blind-reduce-losses"
    COMBINED_NODISC = "combined-nodisc"
    COMBINED_FULLDISC = "combined-fulldisc"
    COMBINED_D1D2 = "combined-d1d2"
    COMBINED_D0D2 = "combined-d0d2"

    @property
    def is_combined(self) -> bool:
        return self in _REQUIRED_DISCRIMINATION

    @property
    def discrimination(self) -> Discrimination | None:
        """Detector arrangement a combined attack is designed against."""
        return _REQUIRED_DISCRIMINATION.get(self)

    @classmethod
    def combined_for(cls, discrimination: Discrimination) -> "AttackScenario":
        for scenario, disc in _REQUIRED_DISCRIMINATION.items():
            if disc is discrimination:
                return scenario
        raise ValueError(discrimination)


_REQUIRED_DISCRIMINATION = {
    AttackScenario.COMBINED_NODISC: Discrimination.NONE,
    AttackScenario.COMBINED_FULLDISC: Discrimination.ALL,
    AttackScenario.COMBINED_D1D2: Discrimination.D1D2,
    AttackScenario.COMBINED_D0D2: Discrimination.D0D2,
}


def _check_unit(name: str, value: float, *, open_low: bool = False) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(name, f"expected a real number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, f"must be finite, got {value!r}")
    low_ok = value > 0 if open_low else value >= 0
    if not (low_ok and value <= 1):
        interval = "(0, 1]" if open_low else "[0, 1]"
        raise ConfigError(name, f"must lie in {interval}, got {value!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    """Physical parameters of one Alice/channel/Bob instance.

    ``mean_photon_number`` is the mean photon number of Alice's coherent
    pulse before her beam splitter. ``channel_transmission`` is the one-way
    transmission of the honest channel and ``eve_channel_transmission`` the
    one-way transmission Eve achieves with her improved fibre. The
    transmissivity is always derived as ``1 - reflectivity``.
    """

    mean_photon_number: float = 0.1
    reflectivity: float = 0.5
    channel_transmission: float = 0.1
    eve_channel_transmission: float = 0.12
    eta_d0: float = 0.1
    eta_d1: float = 0.1
    eta_d2: float = 0.1
    eta_eve: float = 0.1
    discrimination: Discrimination = Discrimination.NONE

    def __post_init__(self):
        mu = self.mean_photon_number
        if isinstance(mu, bool) or not isinstance(mu, (int, float)):
            raise ConfigError("mean_photon_number", f"expected a real number, got {mu!r}")
        if not (math.isfinite(mu) and mu >= 0):
            raise ConfigError("mean_photon_number", f"must be finite and >= 0, got {mu!r}")
        _check_unit("reflectivity", self.reflectivity)
        _check_unit("channel_transmission", self.channel_transmission, open_low=True)
        _check_unit("eve_channel_transmission", self.eve_channel_transmission, open_low=True)
        for name in ("eta_d0", "eta_d1", "eta_d2", "eta_eve"):
            _check_unit(name, getattr(self, name))
        if not isinstance(self.discrimination, Discrimination):
            raise ConfigError("discrimination", f"unknown setting {self.discrimination!r}")
        if self.eve_channel_transmission < self.channel_transmission:
            raise ConfigError(
                "eve_channel_transmission",
                f"must be >= channel_transmission ({self.channel_transmission}), "
                f"got {self.eve_channel_transmission}",
            )

    @property
    def transmissivity(self) -> float:
        return 1.0 - self.reflectivity

    def replace(self, **changes: Any) -> "ProtocolConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return validate_config(values)


CONFIG_KEYS = tuple(f.name for f in fields(ProtocolConfig)) + ("transmissivity",)


def validate_config(raw: Mapping[str, Any]) -> ProtocolConfig:
    """Build a :class:`ProtocolConfig` from loosely typed values.

    Values may be numbers or strings (as read from a config file). Missing keys
    take the defaults of the Table I reference setup. ``transmissivity`` may be
    given for documentation, but it must agree with ``1 - reflectivity``.
    """
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")

    values: dict[str, Any] = {}
    for key, value in raw.items():
        if key == "discrimination":
            if isinstance(value, Discrimination):
                values[key] = value
                continue
            try:
                values[key] = Discrimination(str(value).strip().lower())
            except ValueError:
                choices = ", ".join(d.value for d in Discrimination)
                raise ConfigError(key, f"expected one of {choices}, got {value!r}") from None
            continue
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(key, f"not a number: {value!r}") from None
        elif isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        values[key] = value

    transmissivity = values.pop("transmissivity", None)
    cfg = ProtocolConfig(**values)
    if transmissivity is not None:
        _check_unit("transmissivity", transmissivity)
        if abs(transmissivity - cfg.transmissivity) > 1e-12:
            raise ConfigError(
                "transmissivity",
                f"must equal 1 - reflectivity = {cfg.transmissivity}, got {transmissivity}",
            )
    return cfg


@dataclass(frozen=True)
class AttackParams:
    """Eve's strategy knobs.

    x
        probability that Eve measures Alice's channel pulse.
    y
        probability of forcing a D2 click when she has perfect information.
    z
        probability of sending a faked state after a zero-photon measurement
        (no-discrimination attack only).
    z0
        probability of forcing a D0 click in the perfect-information,
        different-polarization case (D0/D2 discrimination attack only).
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    z0: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "z0"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a real number, got {value!r}")
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class DetectionStats:
    """Per-pulse click probabilities of the four monitored statistics.

    ``p_d0`` and ``p_d1`` count clicks on same-polarization pulses, ``p_d0_opp``
    counts D0 clicks on different-polarization pulses; all are normalised by
    the total number of pulses, so the 1/2 choice probability is built in.
    """

    p_d0: float
    p_d1: float
    p_d2: float
    p_d0_opp: float

    def __post_init__(self):
        for name, value in self.items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    def items(self) -> tuple[tuple[str, float], ...]:
        return (
            ("p_d0", self.p_d0),
            ("p_d1", self.p_d1),
            ("p_d2", self.p_d2),
            ("p_d0_opp", self.p_d0_opp),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_d0, self.p_d1, self.p_d2, self.p_d0_opp)


@dataclass(frozen=True)
class RatioReport:
    r_d0: float
    r_d1: float
    r_d2: float
    r_d0_opp: float

    @property
    def max_deviation(self) -> float:
        return max(abs(r - 1.0) for r in self.as_tuple())

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r_d0, self.r_d1, self.r_d2, self.r_d0_opp)


def transmission_from_db(loss_db: float) -> float:
    """Convert a loss in dB to a power transmission factor."""
    if not math.isfinite(loss_db) or loss_db < 0:
        raise ValueError(f"loss must be finite and non-negative, got {loss_db!r}")
    return 10.0 ** (-loss_db / 10.0)


def db_from_transmission(transmission: float) -> float:
    if not (math.isfinite(transmission) and 0 < transmission <= 1):
        raise ValueError(f"transmission must lie in (0, 1], got {transmission!r}")
    # -0.0 for a lossless channel would print oddly
    return -10.0 * math.log10(transmission) + 0.0
