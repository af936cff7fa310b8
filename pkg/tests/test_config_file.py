import pytest

from cfqkd.config_file import dump_config, load_config, parse_assignments
from cfqkd.model import ConfigError, Discrimination, ProtocolConfig


def test_parse_comments_and_blanks(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("# reference\n\nreflectivity = 0.4   # R\ndiscrimination = D0D2\n")
    cfg = load_config(path)
    assert cfg.reflectivity == 0.4
    assert cfg.discrimination is Discrimination.D0D2


def test_overrides_win(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("mean_photon_number = 0.5\n")
    assert load_config(path, {"mean_photon_number": "0"}).mean_photon_number == 0.0


def test_round_trip():
    cfg = ProtocolConfig(reflectivity=0.1, eta_eve=0.9, discrimination=Discrimination.ALL)
    assert load_config(None, None) == ProtocolConfig()
    assert parse_assignments(dump_config(cfg).splitlines())
    from cfqkd.model import validate_config

    assert validate_config(parse_assignments(dump_config(cfg).splitlines())) == cfg


@pytest.mark.parametrize(
    "text, field",
    [("reflectivity 0.4\n", "reflectivity 0.4"), ("gain = 3\n", "gain"), ("reflectivity = 2\n", "reflectivity")],
)
def test_errors_name_field(tmp_path, text, field):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.field == field


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "nope.cfg")
    assert info.value.field == "config"
