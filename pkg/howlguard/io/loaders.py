import json
import os
import pathlib
from dataclasses import fields, replace
from numbers import Real
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import yaml

from ..errors import ValidationError
from ..modules import (InitialSpec, PARAMETER_REGISTRY, ReinforcementModel, Scenario,
                       Schedule, THRESHOLD_REGISTRY)

SEED_ENV = "HOWLGUARD_SEED"

REQUIRED_KEYS = ("id", "k", "schedule", "steps")
OPTIONAL_KEYS = ("initial", "model", "reliability", "seed", "attenuator", "mode", "params",
                 "task_channel", "resolution_channel", "decision_threshold", "expect")
MODEL_KEYS = tuple(f.name for f in fields(ReinforcementModel))
SCHEDULE_KEYS = {
    "explicit": ("kind", "channels"),
    "constant": ("kind", "channel"),
    "round_robin": ("kind", "channels"),
    "random": ("kind", "seed", "channels"),
}

PathOrText = Union[str, os.PathLike]


def _check_keys(doc, allowed, where):
    for key in doc:
        if key not in allowed:
            raise ValidationError(f"unknown field: {where}{key}")


def _integer(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    return value


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    return float(value)


def _boolean(value, name):
    if not isinstance(value, bool):
        raise ValidationError(f"{name} must be true or false, got {value!r}")
    return value


def _string(value, name):
    if not isinstance(value, str):
        raise ValidationError(f"{name} must be a string, got {value!r}")
    return value


def _channel_list(value, name):
    if not isinstance(value, list):
        raise ValidationError(f"{name} must be a list of channel indices, got {value!r}")
    return tuple(_integer(v, f"{name} entry") for v in value)


def _parse_schedule(doc) -> Schedule:
    if isinstance(doc, list):
        return Schedule("explicit", _channel_list(doc, "schedule"))
    if not isinstance(doc, Mapping) or "kind" not in doc:
        raise ValidationError(f"schedule must be a list or an object with a 'kind', got {doc!r}")
    kind = _string(doc["kind"], "schedule.kind")
    if kind not in SCHEDULE_KEYS:
        raise ValidationError(f"schedule.kind must be one of {list(SCHEDULE_KEYS)}, got {kind}")
    _check_keys(doc, SCHEDULE_KEYS[kind], "schedule.")
    if kind == "constant":
        if "channel" not in doc:
            raise ValidationError("schedule.channel is required for a constant schedule")
        return Schedule.constant(_integer(doc["channel"], "schedule.channel"))
    channels = _channel_list(doc.get("channels", []), "schedule.channels")
    seed = doc.get("seed")
    return Schedule(kind, channels, None if seed is None else _integer(seed, "schedule.seed"))


def _parse_initial(doc) -> InitialSpec:
    if doc == "uniform":
        return InitialSpec()
    if isinstance(doc, Mapping) and len(doc) == 1:
        if "one_hot" in doc:
            return InitialSpec("one_hot", index=_integer(doc["one_hot"], "initial.one_hot"))
        if "explicit" in doc:
            values = doc["explicit"]
            if not isinstance(values, list):
                raise ValidationError(f"initial.explicit must be a list of weights, got {values!r}")
            return InitialSpec("explicit", values=tuple(_number(v, "initial.explicit entry") for v in values))
    raise ValidationError(f"initial must be \"uniform\", {{\"one_hot\": i}} or {{\"explicit\": [...]}}, got {doc!r}")


def _parse_model(doc) -> ReinforcementModel:
    if not isinstance(doc, Mapping):
        raise ValidationError(f"model must be an object, got {doc!r}")
    _check_keys(doc, MODEL_KEYS, "model.")
    kwargs = {}
    for key, value in doc.items():
        if key in ("accumulation", "selection"):
            kwargs[key] = _string(value, f"model.{key}")
        elif key == "normalized":
            kwargs[key] = _boolean(value, "model.normalized")
        else:
            kwargs[key] = _number(value, f"model.{key}")
    return ReinforcementModel(**kwargs)


def _parse_params(doc) -> Dict[str, float]:
    if not isinstance(doc, Mapping):
        raise ValidationError(f"params must be an object, got {doc!r}")
    _check_keys(doc, PARAMETER_REGISTRY, "params.")
    return {key: _number(value, f"params.{key}") for key, value in doc.items()}


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    """Validate a parsed scenario document and build the `Scenario`.

    Raises
    ------
    ValidationError
        Naming the offending field, for unknown or missing fields and for
        values of the wrong type or out of range.
    """
    if not isinstance(doc, Mapping):
        raise ValidationError(f"a scenario must be a JSON object, got {type(doc).__name__}")
    _check_keys(doc, REQUIRED_KEYS + OPTIONAL_KEYS, "")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ValidationError(f"missing field: {key}")
    kwargs = {
        "id": _string(doc["id"], "id"),
        "k": _integer(doc["k"], "k"),
        "schedule": _parse_schedule(doc["schedule"]),
        "steps": _integer(doc["steps"], "steps"),
    }
    if "initial" in doc:
        kwargs["initial"] = _parse_initial(doc["initial"])
    if "model" in doc:
        kwargs["model"] = _parse_model(doc["model"])
    if doc.get("reliability") is not None:
        values = doc["reliability"]
        if not isinstance(values, list):
            raise ValidationError(f"reliability must be a list, got {values!r}")
        kwargs["reliability"] = tuple(_number(v, "reliability entry") for v in values)
    if "seed" in doc:
        kwargs["seed"] = _integer(doc["seed"], "seed")
    if "attenuator" in doc:
        kwargs["attenuator"] = _boolean(doc["attenuator"], "attenuator")
    if "mode" in doc:
        kwargs["mode"] = _string(doc["mode"], "mode")
    if "params" in doc:
        kwargs["params"] = _parse_params(doc["params"])
    for key in ("task_channel", "resolution_channel"):
        if doc.get(key) is not None:
            kwargs[key] = _integer(doc[key], key)
    if doc.get("decision_threshold") is not None:
        kwargs["decision_threshold"] = _number(doc["decision_threshold"], "decision_threshold")
    if doc.get("expect") is not None:
        kwargs["expect"] = _string(doc["expect"], "expect")
    return Scenario(**kwargs)


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Inverse of `scenario_from_dict`; optional fields are left out when unset."""
    schedule = scenario.schedule
    if schedule.kind == "explicit":
        schedule_doc = list(schedule.channels)
    elif schedule.kind == "constant":
        schedule_doc = {"kind": "constant", "channel": schedule.channels[0]}
    else:
        schedule_doc = {"kind": schedule.kind}
        if schedule.channels:
            schedule_doc["channels"] = list(schedule.channels)
        if schedule.seed is not None:
            schedule_doc["seed"] = schedule.seed

    initial = scenario.initial
    if initial.kind == "uniform":
        initial_doc = "uniform"
    elif initial.kind == "one_hot":
        initial_doc = {"one_hot": initial.index}
    else:
        initial_doc = {"explicit": list(initial.values)}

    doc = {
        "id": scenario.id,
        "k": scenario.k,
        "initial": initial_doc,
        "schedule": schedule_doc,
        "steps": scenario.steps,
        "model": {f.name: getattr(scenario.model, f.name) for f in fields(scenario.model)},
        "seed": scenario.seed,
        "attenuator": scenario.attenuator,
        "mode": scenario.mode,
    }
    if scenario.reliability is not None:
        doc["reliability"] = list(scenario.reliability)
    if scenario.params:
        doc["params"] = dict(scenario.params)
    for key in ("task_channel", "resolution_channel", "decision_threshold", "expect"):
        if getattr(scenario, key) is not None:
            doc[key] = getattr(scenario, key)
    return doc


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def apply_seed_env(scenario: Scenario, env: Optional[Mapping[str, str]] = None) -> Scenario:
    """Override the scenario seed from `HOWLGUARD_SEED` when it is set in `env`."""
    env = os.environ if env is None else env
    value = env.get(SEED_ENV)
    if value is None or value == "":
        return scenario
    try:
        seed = int(value)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {value!r}")
    if seed < 0:
        raise ValidationError(f"{SEED_ENV} must be >= 0, got {seed}")
    return replace(scenario, seed=seed)


def load_scenario(source: PathOrText, env: Optional[Mapping[str, str]] = None) -> Scenario:
    """Load a scenario from a JSON file path or a JSON document.

    Parameters
    ----------
    source
        Path to a UTF-8 JSON file, or the JSON text itself (anything whose
        first non-blank character is `{`).

    env, optional
        Environment mapping; when given, `HOWLGUARD_SEED` in it overrides the
        scenario seed.
    """
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        path = pathlib.Path(source)
        if not path.is_file():
            raise ValidationError(f"scenario file not found: {path.as_posix()}")
        text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"could not parse scenario: {e}") from e
    scenario = scenario_from_dict(doc)
    if env is not None:
        scenario = apply_seed_env(scenario, env)
    return scenario


def load_config(path: PathOrText) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Read attenuator parameter and detector threshold overrides from YAML.

    The file holds up to two mappings, `params` and `thresholds`.

    Returns
    -------
    tuple of dict
        The parameter patch and the threshold patch.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path.as_posix()}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            config = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ValidationError(f"could not parse config {path.as_posix()}: {exc}") from exc
    if config is None:
        return {}, {}
    if not isinstance(config, dict):
        raise ValidationError(f"{path.as_posix()} must parse as a dictionary")
    _check_keys(config, ("params", "thresholds"), "")
    patches = []
    for section, registry in (("params", PARAMETER_REGISTRY), ("thresholds", THRESHOLD_REGISTRY)):
        values = config.get(section) or {}
        if not isinstance(values, dict):
            raise ValidationError(f"{section} must be a mapping, got {values!r}")
        _check_keys(values, registry, f"{section}.")
        patch = {}
        for key, value in values.items():
            if registry[key].type is int:
                patch[key] = _integer(value, f"{section}.{key}")
            else:
                patch[key] = _number(value, f"{section}.{key}")
        patches.append(patch)
    return patches[0], patches[1]
