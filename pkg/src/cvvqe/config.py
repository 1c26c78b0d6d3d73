"""Experiment configuration: JSON schema, defaults and the resolved echo."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .models import BoseHubbardParams
from .vqe import AnsatzConfig, OptimizerConfig

SCAN_ALIASES = {"U": "U", "t": "t", "J": "t", "mu": "mu", "μ": "mu", "subtractions": "subtractions"}

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_sites": {"type": "integer", "minimum": 2},
                "hopping": _NUM,
                "interaction": _NUM,
                "chemical_potential": _NUM,
                "boundary": {"enum": ["open", "periodic"]},
            },
        },
        "ansatz": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "subtractions": {"type": "integer", "minimum": 0},
                "subtraction_mode": _POS_INT,
                "ladder_ops": {
                    "type": ["array", "null"],
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["mode", "kind"],
                        "properties": {
                            "mode": _POS_INT,
                            "kind": {"enum": ["annihilation", "creation"]},
                        },
                    },
                },
                "layers": _POS_INT,
                "purity_target": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "tap_reflectivity": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iterations": _POS_INT,
                "gradient_step": {"type": "number", "exclusiveMinimum": 0},
                "convergence_tol": {"type": "number", "exclusiveMinimum": 0},
                "restarts": _POS_INT,
                "init_scale": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "scan": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "required": ["name", "values"],
            "properties": {
                "name": {"enum": sorted(SCAN_ALIASES)},
                "values": {"type": "array", "minItems": 1, "items": _NUM},
            },
        },
        "ed_cutoffs": {"type": "array", "items": _POS_INT},
        "output_path": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULTS = {
    "model": {
        "n_sites": 2,
        "hopping": 1.0,
        "interaction": 1.0,
        "chemical_potential": 1.0,
        "boundary": "open",
    },
    "ansatz": {
        "subtractions": 1,
        "subtraction_mode": 1,
        "ladder_ops": None,
        "layers": 1,
        "purity_target": 1.0,
        "tap_reflectivity": 0.05,
    },
    "optimizer": {
        "max_iterations": 500,
        "gradient_step": 1e-5,
        "convergence_tol": 1e-7,
        "restarts": 8,
        "init_scale": 0.1,
    },
    "scan": None,
    "ed_cutoffs": [4, 12],
    "output_path": "results",
    "seed": 0,
}


class ConfigError(ValueError):
    pass


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    resolved: dict

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentConfig:
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {where}: {exc.message}") from None
        resolved = _merge(DEFAULTS, raw)
        cfg = cls(resolved)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)

    def with_overrides(self, seed: int | None = None, output_path: str | None = None) -> ExperimentConfig:
        raw = copy.deepcopy(self.resolved)
        if seed is not None:
            raw["seed"] = seed
        if output_path is not None:
            raw["output_path"] = output_path
        return ExperimentConfig.from_dict(raw)

    def check(self):
        model = self.model()
        ans = self.resolved["ansatz"]
        if ans["ladder_ops"] is not None and self.scan_name == "subtractions":
            raise ConfigError("a subtractions scan needs ansatz.ladder_ops to be unset")
        self.ansatz(model.n_sites)
        if self.scan_name == "subtractions":
            if any(v < 0 or v != int(v) for v in self.scan_values):
                raise ConfigError("subtraction counts must be non-negative integers")

    # typed views
    def model(self, scan_value=None) -> BoseHubbardParams:
        m = self.resolved["model"]
        try:
            params = BoseHubbardParams(**m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        key = {"U": "interaction", "t": "hopping", "mu": "chemical_potential"}.get(self.scan_name)
        if scan_value is not None and key:
            params = params.replace(**{key: float(scan_value)})
        return params

    def ansatz(self, n_modes: int, scan_value=None) -> AnsatzConfig:
        a = self.resolved["ansatz"]
        common = dict(layers=a["layers"], purity_target=a["purity_target"],
                      tap_reflectivity=a["tap_reflectivity"])
        if a["subtraction_mode"] > n_modes:
            raise ConfigError("subtraction_mode exceeds the number of sites")
        try:
            if a["ladder_ops"] is not None:
                ops = [(op["mode"] - 1, op["kind"] == "creation") for op in a["ladder_ops"]]
                return AnsatzConfig(n_modes, tuple(ops), **common)
            k = a["subtractions"]
            if scan_value is not None and self.scan_name == "subtractions":
                k = int(scan_value)
            return AnsatzConfig.subtractions(n_modes, k, a["subtraction_mode"] - 1, **common)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def optimizer(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(rng_seed=seed, **self.resolved["optimizer"])

    @property
    def scan_name(self) -> str | None:
        scan = self.resolved["scan"]
        return SCAN_ALIASES[scan["name"]] if scan else None

    @property
    def scan_values(self) -> list:
        scan = self.resolved["scan"]
        return list(scan["values"]) if scan else [None]

    @property
    def ed_cutoffs(self) -> list[int]:
        return list(self.resolved["ed_cutoffs"])

    @property
    def seed(self) -> int:
        return self.resolved["seed"]

    @property
    def output_path(self) -> Path:
        return Path(self.resolved["output_path"])

    def canonical_json(self) -> str:
        return json.dumps(self.resolved, sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def hash(self) -> str:
        """Digest of everything that determines the numbers (the output location is excluded)."""
        content = {k: v for k, v in self.resolved.items() if k != "output_path"}
        text = json.dumps(content, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
