import json
import math

import pytest

from utils.chain_functions import Christandl, Custom, KFamily, MlFamily
from utils.config_functions import (
    DEFAULT_TOLERANCES,
    config_echo,
    load_config,
    load_environment,
    parse_config_text,
    reference_scenarios,
    with_tolerance,
)
from utils.errors import ConfigurationError, QstLabWarning

ML12_TEXT = """
# ML(1,2) chain on four sites
name = ml12
chain.n_sites = 4
chain.family = ml
chain.m = 1
chain.l = 2

psi0.preset = real_packet
t_max = 1.5tau
steps = 300
tol.certify = 1e-10
out.csv = results/ml12.csv
"""


def test_defaults():
    config = parse_config_text("chain.n_sites = 4\n")
    assert config.chain.family == Christandl()
    assert config.chain.j0 == 1.0
    assert config.psi0 == "site1"
    assert config.t_max == pytest.approx(math.pi)
    assert config.tau_multiple == 2.0
    assert config.steps == 400
    assert not config.repro
    assert config.tolerance("parity") == DEFAULT_TOLERANCES["parity"]
    assert config.output("csv") is None


def test_full_text_scenario():
    config = parse_config_text(ML12_TEXT)
    assert config.name == "ml12"
    assert config.chain.family == MlFamily(1, 2)
    assert config.t_max == pytest.approx(1.5 * 3 * math.pi / 2)
    assert config.tau_multiple == 1.5
    assert config.steps == 300
    assert config.tolerance("certify") == 1e-10
    assert config.tolerance("relations") == 1e-9
    assert config.output("csv") == "results/ml12.csv"
    assert config.packet().amplitude(1) == pytest.approx(5 / 6)


def test_uniform_family_and_explicit_packet():
    config = parse_config_text("chain.n_sites = 3\nchain.family = uniform\nchain.j0 = 0.5\npsi0 = 0.6,0; 0,0.8\n")
    assert config.chain.family == Custom((0.5, 0.5))
    assert config.t_max == pytest.approx(math.pi)
    assert config.tau_multiple is None
    assert config.psi0 == (0.6 + 0j, 0.8j, 0j)


@pytest.mark.parametrize("text,field", [
    ("chain.n_sites = 4.5\n", "chain.n_sites"),
    ("chain.n_sites = 5\nchain.family = ml\nchain.m = 1\nchain.l = 2\n", "chain.n_sites"),
    ("chain.n_sites = 4\nchain.family = ladder\n", "chain.family"),
    ("chain.n_sites = 4\nchain.family = custom\n", "chain.couplings"),
    ("chain.n_sites = 4\nchain.family = custom\nchain.couplings = 1,2\n", "chain.couplings"),
    ("chain.n_sites = 4\nchain.family = k\nchain.k = -1\n", "chain.k"),
    ("chain.n_sites = 4\nchain.j0 = -2\n", "chain.j0"),
    ("chain.n_sites = 4\ncolour = red\n", "colour"),
    ("chain.n_sites = 4\nchain.n_sites = 6\n", "chain.n_sites"),
    ("chain.n_sites = 4\nsteps\n", "line 2"),
    ("chain.n_sites = 4\nsteps = 1\n", "steps"),
    ("chain.n_sites = 4\nt_max = -1\n", "t_max"),
    ("chain.n_sites = 4\nt_max = soon\n", "t_max"),
    ("chain.n_sites = 4\nchain.family = custom\nchain.couplings = 1,1,1\nt_max = 2tau\n", "t_max"),
    ("chain.n_sites = 4\npsi0 = 1,0; 1,0\n", "psi0"),
    ("chain.n_sites = 2\npsi0 = 1,0; 0,0; 0,0\n", "psi0"),
    ("chain.n_sites = 4\npsi0 = 1,0\npsi0.preset = site1\n", "psi0"),
    ("chain.n_sites = 4\npsi0.preset = gaussian\n", "psi0.preset"),
    ("chain.n_sites = 4\nrepro = maybe\n", "repro"),
    ("chain.n_sites = 4\ntol.certify = tight\n", "tol.certify"),
])
def test_errors_name_the_field(text, field):
    with pytest.raises(ConfigurationError) as info:
        parse_config_text(text)
    assert info.value.field == field
    assert str(info.value).startswith(field)
    assert info.value.exit_code == 2


def test_reproduction_grid_rounding():
    config = parse_config_text("chain.n_sites = 4\nsteps = 401\nrepro = true\n")
    assert config.steps == 404
    assert config.t_max == pytest.approx(math.pi)


def test_reproduction_resets_t_max():
    with pytest.warns(QstLabWarning, match="2tau"):
        config = parse_config_text("chain.n_sites = 4\nt_max = 1tau\nrepro = yes\n")
    assert config.tau_multiple == 2.0
    assert config.t_max == pytest.approx(math.pi)


def test_reproduction_needs_a_characteristic_time():
    with pytest.raises(ConfigurationError) as info:
        parse_config_text("chain.n_sites = 3\nchain.family = uniform\nrepro = true\n")
    assert info.value.field == "t_max"


@pytest.mark.parametrize("text", [
    "chain.n_sites = 4\n",
    ML12_TEXT,
    "chain.n_sites = 3\nchain.family = uniform\nchain.j0 = 0.5\npsi0 = 0.6,0; 0,0.8\nt_max = 7.25\n",
    "chain.n_sites = 6\nchain.family = k\nchain.k = 4\npsi0.preset = complex_packet\nrepro = true\nout.report = r.json\n",
])
def test_echo_round_trip(text):
    config = parse_config_text(text)
    assert parse_config_text(config_echo(config)) == config


def test_load_json_config(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "name": "json",
        "chain": {"n_sites": 4, "family": "ml", "m": 1, "l": 2},
        "psi0": [[0.6, 0.0], [0.0, 0.8]],
        "t_max": "2tau",
        "steps": 401,
    }))
    config = load_config(path)
    assert config.chain.family == MlFamily(1, 2)
    assert config.psi0 == (0.6 + 0j, 0.8j, 0j, 0j)
    assert config.t_max == pytest.approx(3 * math.pi)
    assert config.steps == 401


def test_load_text_config(write_config):
    config = load_config(write_config(ML12_TEXT))
    assert config == parse_config_text(ML12_TEXT)


def test_json_schema_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"chain": {"n_sites": 4, "family": "ladder"}}))
    with pytest.raises(ConfigurationError) as info:
        load_config(path)
    assert info.value.field == "chain.family"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError) as info:
        load_config(path)
    assert info.value.field == "config"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError) as info:
        load_config(tmp_path / "absent.cfg")
    assert info.value.field == "config"


def test_with_tolerance():
    config = with_tolerance(parse_config_text(ML12_TEXT), 1e-6)
    assert {value for _, value in config.tolerances} == {1e-6}
    assert config.tolerance("parity") == 1e-6


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("QSTLAB_TOL", "1e-7")
    monkeypatch.setenv("QSTLAB_THREADS", "4")
    env = load_environment(str(tmp_path / "missing.env"))
    assert env["tol"] == 1e-7
    assert env["threads"] == 4


def test_environment_from_dotenv_file(monkeypatch, tmp_path):
    for key in ("QSTLAB_OUT_DIR", "QSTLAB_TOL"):
        # setenv first so teardown removes whatever the .env file loads.
        monkeypatch.setenv(key, "placeholder")
        monkeypatch.delenv(key)
    env_file = tmp_path / ".env"
    env_file.write_text("QSTLAB_OUT_DIR=results\n")
    env = load_environment(str(env_file))
    assert env["out_dir"] == "results"
    assert env["tol"] is None


def test_bad_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("QSTLAB_THREADS", "many")
    with pytest.raises(ConfigurationError) as info:
        load_environment(str(tmp_path / "missing.env"))
    assert info.value.field == "environment"


def test_reference_scenarios():
    scenarios = reference_scenarios(steps=401)
    assert set(scenarios) == {"k0_real", "k4_real", "k0_complex", "k4_complex", "ml12_real"}
    for config in scenarios.values():
        assert config.repro
        assert config.steps == 404
        assert config.tau_multiple == 2.0
        assert config.chain.n_sites == 4
    assert scenarios["k4_real"].chain.family == KFamily(4)
    assert scenarios["k0_complex"].psi0 == "complex_packet"
    assert scenarios["ml12_real"].t_max == pytest.approx(3 * math.pi)
