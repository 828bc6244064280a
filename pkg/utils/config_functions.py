import json
import math
import os
import warnings
from collections.abc import MutableMapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import jsonschema
from dotenv import load_dotenv

from utils.chain_functions import (
    ChainSpec,
    Christandl,
    Custom,
    KFamily,
    MlFamily,
)
from utils.errors import ConfigurationError, QstLabWarning, UnsupportedError, ValidationError
from utils.packet_functions import PACKET_PRESETS, WavePacket, normalized_packet, preset_packet
from utils.transfer_functions import characteristic_time

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

ENV_DEFAULTS = {
    "QSTLAB_OUT_DIR": "out",
    "QSTLAB_TOL": "",
    "QSTLAB_THREADS": "1",
    "QSTLAB_RUN_LOG": "registro_runs.csv",
}

DEFAULT_TOLERANCES = {
    "certify": 1e-9,
    "relations": 1e-9,
    "commensurability": 1e-9,
    "parity": 1e-8,
}

PACKET_PRESET_NAMES = ("site1", "mirror_pair") + tuple(PACKET_PRESETS)
FAMILY_NAMES = ("christandl", "k", "ml", "custom", "uniform")

_SCALAR = {"type": ["number", "string"]}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "chain.n_sites": {"type": ["integer", "string"]},
        "chain.j0": _SCALAR,
        "chain.family": {"type": "string", "enum": list(FAMILY_NAMES)},
        "chain.k": {"type": ["integer", "string"]},
        "chain.m": {"type": ["integer", "string"]},
        "chain.l": {"type": ["integer", "string"]},
        "chain.couplings": {"type": ["string", "array"], "items": {"type": "number"}},
        "psi0": {"type": ["string", "array"]},
        "psi0.preset": {"type": "string", "enum": list(PACKET_PRESET_NAMES)},
        "t_max": _SCALAR,
        "steps": {"type": ["integer", "string"]},
        "repro": {"type": ["boolean", "string"]},
    },
    "patternProperties": {
        r"^tol\.[a-z_]+$": _SCALAR,
        r"^out\.(csv|report|pdf)$": {"type": "string"},
    },
    "required": ["chain.n_sites"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ScenarioConfig:
    chain: ChainSpec
    psi0: Union[str, Tuple[complex, ...]] = "site1"
    t_max: float = math.pi
    steps: int = 400
    name: str = "scenario"
    tau_multiple: Optional[float] = None
    repro: bool = False
    tolerances: Tuple[Tuple[str, float], ...] = tuple(sorted(DEFAULT_TOLERANCES.items()))
    outputs: Tuple[Tuple[str, str], ...] = ()

    def tolerance(self, key: str) -> float:
        return dict(self.tolerances).get(key, DEFAULT_TOLERANCES.get(key, 1e-9))

    def output(self, key: str) -> Optional[str]:
        return dict(self.outputs).get(key)

    def packet(self) -> WavePacket:
        if isinstance(self.psi0, str):
            return preset_packet(self.psi0, self.chain.n_sites)
        return normalized_packet(self.psi0)


# =============================================================================
# ENVIRONMENT
# =============================================================================


def load_environment(env_file: Optional[str] = None) -> Dict[str, str]:
    """
    Lab defaults from the process environment, seeded by a .env file.

    Returns:
        Dictionary with out_dir, tol, threads and run_log
    """
    load_dotenv(env_file)
    values = {key: os.getenv(key, default) for key, default in ENV_DEFAULTS.items()}
    try:
        # Empty tolerance keeps the per-check defaults.
        tol = float(values["QSTLAB_TOL"]) if values["QSTLAB_TOL"] else None
        threads = int(values["QSTLAB_THREADS"])
    except ValueError as e:
        raise ConfigurationError(f"bad environment default: {e}", "environment") from e
    return {
        "out_dir": values["QSTLAB_OUT_DIR"],
        "tol": tol,
        "threads": threads,
        "run_log": values["QSTLAB_RUN_LOG"],
    }


# =============================================================================
# PARSING
# =============================================================================


def flatten_dict(d, parent_key="", sep="."):
    items = []
    for k, v in d.items():
        new_key = f"{parent_key}{sep}{k}" if parent_key else k
        if isinstance(v, MutableMapping):
            items.extend(flatten_dict(v, new_key, sep=sep).items())
        else:
            items.append((new_key, v))
    return dict(items)


def _parse_text(text: str) -> Dict[str, str]:
    flat = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {number} is not 'key = value'", f"line {number}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in flat:
            raise ConfigurationError("key given twice", key)
        flat[key] = value
    return flat


def _as_int(flat: dict, key: str, default=None) -> int:
    value = flat.get(key, default)
    if value is None:
        raise ConfigurationError("missing value", key)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"expected an integer, got {value!r}", key)
    if not number.is_integer():
        raise ConfigurationError(f"expected an integer, got {value!r}", key)
    return int(number)


def _as_float(flat: dict, key: str, default=None) -> float:
    value = flat.get(key, default)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"expected a real number, got {value!r}", key)
    if not math.isfinite(number):
        raise ConfigurationError("value must be finite", key)
    return number


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"expected a boolean, got {value!r}", "repro")


def _parse_complex_list(value) -> Tuple[complex, ...]:
    """'re,im; re,im; ...' or a JSON list of numbers / [re, im] pairs."""
    if isinstance(value, str):
        entries = [chunk.strip() for chunk in value.split(";") if chunk.strip()]
        pairs = [entry.split(",") for entry in entries]
    else:
        pairs = [entry if isinstance(entry, (list, tuple)) else [entry, 0.0] for entry in value]
    amplitudes = []
    for pair in pairs:
        if len(pair) == 1:
            pair = [pair[0], 0.0]
        if len(pair) != 2:
            raise ConfigurationError(f"expected 're,im', got {pair!r}", "psi0")
        try:
            amplitudes.append(complex(float(pair[0]), float(pair[1])))
        except (TypeError, ValueError):
            raise ConfigurationError(f"expected 're,im', got {pair!r}", "psi0")
    return tuple(amplitudes)


def _parse_family(flat: dict, n_sites: int, j0: float):
    name = str(flat.get("chain.family", "christandl")).strip().lower()
    if name == "christandl":
        return Christandl()
    if name == "k":
        return KFamily(_as_int(flat, "chain.k", 0))
    if name == "ml":
        return MlFamily(_as_int(flat, "chain.m", 0), _as_int(flat, "chain.l", 0))
    if name == "uniform":
        return Custom((j0,) * (n_sites - 1))
    if name == "custom":
        raw = flat.get("chain.couplings")
        if raw is None:
            raise ConfigurationError("custom family needs couplings", "chain.couplings")
        chunks = raw.split(",") if isinstance(raw, str) else raw
        try:
            values = tuple(float(c) for c in chunks)
        except (TypeError, ValueError):
            raise ConfigurationError(f"bad coupling list {raw!r}", "chain.couplings")
        if len(values) != n_sites - 1:
            raise ConfigurationError(f"expected {n_sites - 1} couplings, got {len(values)}", "chain.couplings")
        return Custom(values)
    raise ConfigurationError(f"unknown family '{name}'", "chain.family")


def _parse_t_max(raw, chain: ChainSpec) -> Tuple[float, Optional[float]]:
    text = str(raw).strip().lower()
    if text.endswith("tau"):
        multiple = _as_float({"t_max": text[:-3] or "1"}, "t_max")
        try:
            tau = characteristic_time(chain.family, chain.j0)
        except UnsupportedError:
            raise ConfigurationError("tau multiples need a family with a closed-form tau", "t_max")
        return multiple * tau, multiple
    return _as_float({"t_max": raw}, "t_max"), None


def config_from_flat(flat: dict) -> ScenarioConfig:
    """
    Build a ScenarioConfig from dotted keys.

    Raises:
        ConfigurationError: With the offending dotted field name
    """
    known = set(CONFIG_SCHEMA["properties"])
    for key in flat:
        if key not in known and not key.startswith(("tol.", "out.")):
            raise ConfigurationError("unknown key", key)

    n_sites = _as_int(flat, "chain.n_sites")
    j0 = _as_float(flat, "chain.j0", 1.0)
    chain = ChainSpec(n_sites, j0, _parse_family(flat, n_sites, j0))

    if "psi0" in flat and "psi0.preset" in flat:
        raise ConfigurationError("give either psi0 or psi0.preset", "psi0")
    if "psi0" in flat:
        psi0 = _parse_complex_list(flat["psi0"])
        if len(psi0) > n_sites:
            raise ConfigurationError(f"{len(psi0)} amplitudes for {n_sites} sites", "psi0")
        psi0 = psi0 + (0j,) * (n_sites - len(psi0))
    else:
        psi0 = str(flat.get("psi0.preset", "site1"))
        if psi0 not in PACKET_PRESET_NAMES:
            raise ConfigurationError(f"unknown preset '{psi0}'", "psi0.preset")

    t_max, multiple = _parse_t_max(flat.get("t_max", "2tau" if not isinstance(chain.family, Custom) else math.pi), chain)
    steps = _as_int(flat, "steps", 400)
    repro = _as_bool(flat.get("repro", False))
    if repro:
        if multiple != 2.0:
            if multiple is None:
                raise ConfigurationError("reproduction grids need t_max = 2tau", "t_max")
            warnings.warn("reproduction mode resets t_max to 2tau", QstLabWarning)
            t_max, multiple = _parse_t_max("2tau", chain)
        if steps % 4:
            steps += 4 - steps % 4
    if steps < 2:
        raise ConfigurationError("steps must be at least 2", "steps")
    if t_max <= 0:
        raise ConfigurationError("t_max must be positive", "t_max")

    tolerances = dict(DEFAULT_TOLERANCES)
    outputs = {}
    for key, value in flat.items():
        if key.startswith("tol."):
            tolerances[key[4:]] = _as_float(flat, key)
        elif key.startswith("out."):
            outputs[key[4:]] = str(value)

    config = ScenarioConfig(
        chain=chain,
        psi0=psi0,
        t_max=t_max,
        steps=steps,
        name=str(flat.get("name", "scenario")),
        tau_multiple=multiple,
        repro=repro,
        tolerances=tuple(sorted(tolerances.items())),
        outputs=tuple(sorted(outputs.items())),
    )
    try:
        config.packet()
    except ValidationError as e:
        raise ConfigurationError(str(e), "psi0") from e
    return config


def parse_config_text(text: str) -> ScenarioConfig:
    return config_from_flat(_parse_text(text))


def load_config(path: str) -> ScenarioConfig:
    """
    Read a scenario from flat 'key = value' text or, for .json files, JSON.

    Raises:
        ConfigurationError: On unreadable files or invalid fields
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e}", "config") from e
    if path.suffix.lower() != ".json":
        return parse_config_text(text)
    try:
        flat = flatten_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON in {path}: {e}", "config") from e
    try:
        jsonschema.validate(flat, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        field_name = ".".join(str(p) for p in e.absolute_path) or "config"
        raise ConfigurationError(e.message, field_name) from e
    return config_from_flat(flat)


def config_echo(config: ScenarioConfig) -> str:
    """Canonical text form; parse_config_text(config_echo(c)) == c."""
    chain = config.chain
    lines = [
        f"name = {config.name}",
        f"chain.n_sites = {chain.n_sites}",
        f"chain.j0 = {chain.j0!r}",
    ]
    family = chain.family
    if isinstance(family, Christandl):
        lines.append("chain.family = christandl")
    elif isinstance(family, KFamily):
        lines += ["chain.family = k", f"chain.k = {family.k}"]
    elif isinstance(family, MlFamily):
        lines += ["chain.family = ml", f"chain.m = {family.m}", f"chain.l = {family.l}"]
    else:
        lines += ["chain.family = custom", "chain.couplings = " + ",".join(repr(v) for v in family.values)]
    if isinstance(config.psi0, str):
        lines.append(f"psi0.preset = {config.psi0}")
    else:
        lines.append("psi0 = " + "; ".join(f"{c.real!r},{c.imag!r}" for c in config.psi0))
    lines.append(f"t_max = {config.tau_multiple!r}tau" if config.tau_multiple is not None else f"t_max = {config.t_max!r}")
    lines.append(f"steps = {config.steps}")
    lines.append(f"repro = {str(config.repro).lower()}")
    lines += [f"tol.{key} = {value!r}" for key, value in config.tolerances]
    lines += [f"out.{key} = {value}" for key, value in config.outputs]
    return "\n".join(lines) + "\n"


def with_tolerance(config: ScenarioConfig, value: float) -> ScenarioConfig:
    """Every named tolerance replaced by one value (the --tol flag)."""
    return replace(config, tolerances=tuple((key, float(value)) for key, _ in config.tolerances))


# =============================================================================
# REFERENCE SCENARIOS
# =============================================================================


def reference_scenarios(steps: int = 4000) -> Dict[str, ScenarioConfig]:
    """Reference scenarios on [0, 2 tau]: real and complex packets, k = 0, 4 and (m, l) = (1, 2)."""
    chains = {
        "k0": {"chain.family": "christandl"},
        "k4": {"chain.family": "k", "chain.k": 4},
        "ml12": {"chain.family": "ml", "chain.m": 1, "chain.l": 2},
    }
    layout = {
        "k0_real": ("k0", "real_packet"),
        "k4_real": ("k4", "real_packet"),
        "k0_complex": ("k0", "complex_packet"),
        "k4_complex": ("k4", "complex_packet"),
        "ml12_real": ("ml12", "real_packet"),
    }
    scenarios = {}
    for name, (chain_key, preset) in layout.items():
        flat = {"name": name, "chain.n_sites": 4, "psi0.preset": preset,
                "t_max": "2tau", "steps": steps, "repro": True}
        flat.update(chains[chain_key])
        scenarios[name] = config_from_flat(flat)
    return scenarios
