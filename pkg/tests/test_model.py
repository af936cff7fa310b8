import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfqkd.model import (
    CONFIG_KEYS,
    AttackParams,
    AttackScenario,
    ConfigError,
    DetectionStats,
    Discrimination,
    Polarization,
    ProtocolConfig,
    RatioReport,
    db_from_transmission,
    transmission_from_db,
    validate_config,
)


def test_orthogonal_is_involution():
    assert Polarization.H.orthogonal is Polarization.V
    assert Polarization.V.orthogonal is Polarization.H
    for p in Polarization:
        assert p.orthogonal.orthogonal is p
    assert len(Polarization) == 2


def test_reference_config_is_valid():
    cfg = validate_config(
        dict(
            mean_photon_number=0.1,
            reflectivity=0.5,
            channel_transmission=0.1,
            eve_channel_transmission=0.12,
            eta_d0=0.1,
            eta_d1=0.1,
            eta_d2=0.1,
            eta_eve=0.1,
            discrimination="none",
        )
    )
    assert cfg == ProtocolConfig()
    assert cfg.transmissivity == 0.5


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"reflectivity": 1.3}, "reflectivity"),
        ({"channel_transmission": 0.1, "eve_channel_transmission": 0.05}, "eve_channel_transmission"),
        ({"channel_transmission": 0.0, "eve_channel_transmission": 0.1}, "channel_transmission"),
        ({"eta_d2": -0.1}, "eta_d2"),
        ({"eta_eve": float("nan")}, "eta_eve"),
        ({"mean_photon_number": -1}, "mean_photon_number"),
        ({"mean_photon_number": "lots"}, "mean_photon_number"),
        ({"discrimination": "some"}, "discrimination"),
        ({"reflectivity": 0.3, "transmissivity": 0.6}, "transmissivity"),
        ({"colour": 1}, "colour"),
    ],
)
def test_validation_names_the_field(raw, field):
    with pytest.raises(ConfigError) as info:
        validate_config(raw)
    assert info.value.field == field
    assert field in str(info.value)


def test_transmissivity_is_derived():
    cfg = validate_config({"reflectivity": "0.4", "transmissivity": "0.6"})
    assert cfg.reflectivity + cfg.transmissivity == 1.0


def test_replace_revalidates():
    cfg = ProtocolConfig()
    assert cfg.replace(reflectivity=0.1).reflectivity == 0.1
    with pytest.raises(ConfigError):
        cfg.replace(eve_channel_transmission=0.05)


def test_config_keys_cover_fields():
    assert set(CONFIG_KEYS) >= {"mean_photon_number", "reflectivity", "transmissivity", "discrimination"}


def test_scenario_discrimination_pairs():
    pairs = {
        AttackScenario.COMBINED_NODISC: Discrimination.NONE,
        AttackScenario.COMBINED_FULLDISC: Discrimination.ALL,
        AttackScenario.COMBINED_D1D2: Discrimination.D1D2,
        AttackScenario.COMBINED_D0D2: Discrimination.D0D2,
    }
    for scenario, disc in pairs.items():
        assert scenario.is_combined
        assert scenario.discrimination is disc
        assert AttackScenario.combined_for(disc) is scenario
    assert not AttackScenario.BASELINE.is_combined
    assert AttackScenario.BLIND_REDUCE_LOSSES.discrimination is None


@pytest.mark.parametrize("bad", [dict(x=1.5), dict(y=-0.1), dict(z=2), dict(z0=float("nan"))])
def test_attack_params_range(bad):
    with pytest.raises(ValueError):
        AttackParams(**bad)


def test_detection_stats_range():
    with pytest.raises(ValueError):
        DetectionStats(0.1, 0.1, 1.2, 0.1)


def test_max_deviation_definition():
    report = RatioReport(1.01, 0.97, 1.0, 1.02)
    assert report.max_deviation == max(abs(r - 1.0) for r in report.as_tuple())


def test_db_examples():
    assert transmission_from_db(10.0) == pytest.approx(0.1, abs=1e-15)
    assert transmission_from_db(0.0) == 1.0
    with mpmath.workdps(40):
        oracle = float(mpmath.power(10, -mpmath.mpf("0.30103")))
    assert transmission_from_db(3.0103) == pytest.approx(oracle, rel=1e-14)
    assert abs(transmission_from_db(3.0103) - 0.5) < 1e-5
    assert db_from_transmission(1.0) == 0.0


@pytest.mark.parametrize("bad", [-0.1, math.inf, math.nan])
def test_db_rejects(bad):
    with pytest.raises(ValueError):
        transmission_from_db(bad)


@pytest.mark.parametrize("bad", [0.0, 1.5, -0.2, math.nan])
def test_transmission_rejects(bad):
    with pytest.raises(ValueError):
        db_from_transmission(bad)


@given(st.floats(min_value=0.0, max_value=60.0))
def test_db_round_trip(loss):
    assert abs(db_from_transmission(transmission_from_db(loss)) - loss) <= 1e-12
