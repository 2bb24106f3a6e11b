"""JSON configuration parsing for experiments and the CLI."""

import copy
import json
import re

from .exceptions import ConfigurationError
from .experiments import ExperimentConfig
from .simulate import (
    GaussianFunctionalSpec,
    LinearSpec,
    MarkovSpec,
    iid_gauss,
    ma1,
    slow_decay,
    two_state,
)

EXPERIMENT_KEYS = {"kind", "process", "n", "replicates", "thetas", "master_seed",
                   "tolerances", "output", "n_grid", "n_ladder"}
DEFAULTS = {"n": 4096, "replicates": 2000, "thetas": [], "master_seed": 1,
            "tolerances": {}, "output": {}, "n_grid": 128}

_PROCESS_KEYS = {
    "linear": {"kind", "coeffs", "innovation", "name", "J"},
    "markov": {"kind", "transition", "f", "stationary", "name"},
    "gaussian_functional": {"kind", "phi", "h", "centering", "name"},
}
_PRESET_KEYS = {"preset", "p", "J", "coeffs", "innovation", "f"}
_PRESET_CALL = re.compile(r"^\s*(\w+)\s*\(\s*([^)]*)\)\s*$")


def decode_json(text):
    """Parse bytes or str as a JSON object, reporting the byte offset of syntax errors."""
    if isinstance(text, (bytes, bytearray)):
        raw = bytes(text)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigurationError(f"config is not valid UTF-8 (byte offset {exc.start})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise ConfigurationError(f"malformed JSON at byte offset {offset}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigurationError("config must be a JSON object")
    return obj


def _reject_unknown(obj, allowed, where):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {', '.join(unknown)}")


def _preset(name, params):
    if name == "iid_gauss":
        return iid_gauss()
    if name == "ma1":
        return ma1(params.get("coeffs", (1.0, 0.5)), params.get("innovation", "gaussian"))
    if name == "slow_decay":
        return slow_decay(int(params.get("J", 100_000)), params.get("innovation", "gaussian"))
    if name == "two_state":
        if "p" not in params:
            raise ConfigurationError("two_state preset needs a switch probability p")
        return two_state(float(params["p"]), params.get("f", (1.0, -1.0)))
    raise ConfigurationError(
        f"unknown process preset {name!r}; expected iid_gauss, ma1, slow_decay or two_state"
    )


def parse_process(obj):
    """Build a process spec from a preset string or a process object."""
    if isinstance(obj, str):
        m = _PRESET_CALL.match(obj)
        if m:
            name, arg = m.groups()
            key = "J" if name == "slow_decay" else "p"
            return _preset(name, {key: float(arg)} if arg.strip() else {})
        return _preset(obj.strip(), {})
    if not isinstance(obj, dict):
        raise ConfigurationError("process must be a preset name or an object")
    if "preset" in obj:
        _reject_unknown(obj, _PRESET_KEYS, "process")
        return _preset(obj["preset"], obj)
    kind = obj.get("kind")
    if kind not in _PROCESS_KEYS:
        raise ConfigurationError(
            f"process kind must be one of {sorted(_PROCESS_KEYS)}, got {kind!r}"
        )
    _reject_unknown(obj, _PROCESS_KEYS[kind], "process")
    if kind == "linear":
        if obj.get("name") == "slow_decay":
            return slow_decay(int(obj.get("J", 100_000)), obj.get("innovation", "gaussian"))
        if "coeffs" not in obj:
            raise ConfigurationError("linear process needs coeffs (or name 'slow_decay')")
        return LinearSpec(obj["coeffs"], innovation=obj.get("innovation", "gaussian"),
                          name=obj.get("name", "linear"))
    if kind == "markov":
        for key in ("transition", "f"):
            if key not in obj:
                raise ConfigurationError(f"markov process needs {key}")
        return MarkovSpec(obj["transition"], obj["f"], obj.get("stationary"),
                          name=obj.get("name", "markov"))
    if "phi" not in obj:
        raise ConfigurationError("gaussian_functional process needs phi")
    return GaussianFunctionalSpec(obj["phi"], obj.get("h", "sign"), obj.get("centering"),
                                  name=obj.get("name", "gaussian_functional"))


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(obj, overrides):
    """Set dotted ``key=value`` pairs on a raw config dict; values are JSON when they parse."""
    obj = copy.deepcopy(obj)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        target = obj
        for part in parts[:-1]:
            nxt = target.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                target[part] = nxt
            target = nxt
        target[parts[-1]] = _parse_value(value)
    return obj


def config_from_dict(obj, kind=None):
    if kind is not None:
        if obj.get("kind", kind) != kind:
            raise ConfigurationError(f"config kind {obj['kind']!r} does not match subcommand ({kind})")
        obj = {**obj, "kind": kind}
    _reject_unknown(obj, EXPERIMENT_KEYS, "config")
    for key in ("kind", "process"):
        if key not in obj:
            raise ConfigurationError(f"config is missing required key {key!r}")
    merged = {**DEFAULTS, **obj}
    if not isinstance(merged["thetas"], list):
        raise ConfigurationError("thetas must be a list of radians")
    for name in ("tolerances", "output"):
        if not isinstance(merged[name], dict):
            raise ConfigurationError(f"{name} must be an object")
    return ExperimentConfig(
        kind=merged["kind"],
        process=parse_process(merged["process"]),
        n=merged["n"],
        replicates=merged["replicates"],
        thetas=tuple(merged["thetas"]),
        master_seed=merged["master_seed"],
        tolerances=merged["tolerances"],
        output=merged["output"],
        n_grid=merged["n_grid"],
        n_ladder=tuple(merged["n_ladder"]) if merged.get("n_ladder") else None,
    )


def parse_config(text, overrides=(), kind=None):
    """Parse JSON text (bytes or str) into a validated :class:`ExperimentConfig`."""
    return config_from_dict(apply_overrides(decode_json(text), overrides), kind=kind)
