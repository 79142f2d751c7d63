"""JSON scenario files: parsing, validation and serialization.

Layout::

    {
      "network":   {"K", "R", "gains" (R rows of K), "noise" (R),
                    "targets": {"unit": "dB" | "linear", "values": [...]},
                    "assignment": [1-based base per user]   (optional)},
      "algorithm": {"family": "linear" | "mpa" | "macro" | "macro-over" | "ubpc"
                              | "drpc" | "clamped-<family>" | "fixture",
                    "a", "alpha", "p_min", "p_max", "lower", "upper", "fixture"},
      "run":       {"mode": "sync" | "async", "p0", "tol", "max_iter", "D",
                    "seed", "window", "async_model": "bounded" | "total"},
      "output":    {"trace", "report"}
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .zoo import NetworkScenario, UbpcParams, IntervalUncertainty, db_to_linear

BASE_FAMILIES = ("linear", "mpa", "macro", "macro-over", "ubpc", "drpc")
FIXTURES = ("example1", "example2", "example3", "no-fixed-point")


class ScenarioError(ValueError):
    """Malformed scenario; ``where`` names the offending field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _req(block: dict, key: str, path: str):
    if key not in block:
        raise ScenarioError(f"{path}.{key}", "missing required field")
    return block[key]


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(path, f"expected a number, got {x!r}")
    return float(x)


def _int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioError(path, f"expected an integer, got {x!r}")
    return x


def _vector(x, path: str, length: int | None = None) -> list[float]:
    if not isinstance(x, list):
        raise ScenarioError(path, "expected an array of numbers")
    out = [_number(v, f"{path}[{i}]") for i, v in enumerate(x)]
    if length is not None and len(out) != length:
        raise ScenarioError(path, f"expected {length} entries, got {len(out)}")
    return out


def _matrix(x, path: str, rows: int, cols: int) -> list[list[float]]:
    if not isinstance(x, list) or len(x) != rows:
        raise ScenarioError(path, f"expected {rows} rows")
    return [_vector(row, f"{path}[{i}]", cols) for i, row in enumerate(x)]


@dataclass
class NetworkBlock:
    K: int
    R: int
    gains: list[list[float]]
    noise: list[float]
    target_values: list[float]
    target_unit: str
    assignment: list[int] | None = None

    @classmethod
    def parse(cls, raw, path: str = "network") -> NetworkBlock:
        if not isinstance(raw, dict):
            raise ScenarioError(path, "expected an object")
        k = _int(_req(raw, "K", path), f"{path}.K")
        r = _int(_req(raw, "R", path), f"{path}.R")
        if k < 1 or r < 1:
            raise ScenarioError(path, "K and R must be >= 1")
        gains = _matrix(_req(raw, "gains", path), f"{path}.gains", r, k)
        noise = _vector(_req(raw, "noise", path), f"{path}.noise", r)
        targets = _req(raw, "targets", path)
        if not isinstance(targets, dict):
            raise ScenarioError(f"{path}.targets", "expected {unit, values}")
        unit = _req(targets, "unit", f"{path}.targets")
        if unit not in ("dB", "linear"):
            raise ScenarioError(f"{path}.targets.unit", f"unit must be 'dB' or 'linear', got {unit!r}")
        values = _vector(_req(targets, "values", f"{path}.targets"), f"{path}.targets.values", k)
        assignment = raw.get("assignment")
        if assignment is not None:
            if not isinstance(assignment, list) or len(assignment) != k:
                raise ScenarioError(f"{path}.assignment", f"expected {k} base indices")
            assignment = [_int(a, f"{path}.assignment[{i}]") for i, a in enumerate(assignment)]
            for i, a in enumerate(assignment):
                if not 1 <= a <= r:
                    raise ScenarioError(f"{path}.assignment[{i}]", f"base index must be in 1..{r}")
        return cls(k, r, gains, noise, values, unit, assignment)

    def to_dict(self) -> dict:
        out = {"K": self.K, "R": self.R, "gains": self.gains, "noise": self.noise,
               "targets": {"unit": self.target_unit, "values": self.target_values}}
        if self.assignment is not None:
            out["assignment"] = self.assignment
        return out

    def scenario(self) -> NetworkScenario:
        targets = np.asarray(self.target_values, float)
        if self.target_unit == "dB":
            targets = db_to_linear(targets)
        assignment = None if self.assignment is None else np.asarray(self.assignment) - 1
        try:
            return NetworkScenario(np.asarray(self.gains), np.asarray(self.noise), targets, assignment)
        except ValueError as exc:
            raise ScenarioError("network", str(exc)) from None


@dataclass
class AlgorithmBlock:
    family: str
    a: list[float] | None = None
    alpha: list[float] | float | None = None
    p_min: list[float] | None = None
    p_max: list[float] | None = None
    lower: list[list[float]] | None = None
    upper: list[list[float]] | None = None
    fixture: str | None = None

    @property
    def base_family(self) -> str:
        return self.family.removeprefix("clamped-")

    @property
    def clamped(self) -> bool:
        return self.family.startswith("clamped-")

    @classmethod
    def parse(cls, raw, k: int | None, path: str = "algorithm") -> AlgorithmBlock:
        if not isinstance(raw, dict):
            raise ScenarioError(path, "expected an object")
        family = _req(raw, "family", path)
        base = family.removeprefix("clamped-") if isinstance(family, str) else None
        if base not in (*BASE_FAMILIES, "fixture"):
            raise ScenarioError(f"{path}.family", f"unknown family {family!r}")
        out = cls(family)
        if base == "fixture":
            name = _req(raw, "fixture", path)
            if name not in FIXTURES:
                raise ScenarioError(f"{path}.fixture", f"unknown fixture {name!r}")
            out.fixture = name
            k = 1
        elif k is None:
            raise ScenarioError("network", f"family {family!r} needs a network block")
        if base == "ubpc":
            out.a = _vector(_req(raw, "a", path), f"{path}.a", k)
            alpha = _req(raw, "alpha", path)
            out.alpha = (_vector(alpha, f"{path}.alpha", k) if isinstance(alpha, list)
                         else _number(alpha, f"{path}.alpha"))
        if base == "drpc":
            out.lower = _matrix(_req(raw, "lower", path), f"{path}.lower", k, k)
            out.upper = _matrix(_req(raw, "upper", path), f"{path}.upper", k, k)
        if out.clamped:
            out.p_min = _vector(_req(raw, "p_min", path), f"{path}.p_min", k)
            out.p_max = _vector(_req(raw, "p_max", path), f"{path}.p_max", k)
        return out

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name != "family" and val is not None:
                out[f.name] = val
        return out

    def ubpc_params(self, k: int) -> UbpcParams:
        alpha = self.alpha if isinstance(self.alpha, list) else [self.alpha] * k
        try:
            return UbpcParams(np.asarray(self.a), np.asarray(alpha))
        except ValueError as exc:
            raise ScenarioError("algorithm", str(exc)) from None

    def uncertainty(self) -> IntervalUncertainty:
        try:
            return IntervalUncertainty(np.asarray(self.lower), np.asarray(self.upper))
        except ValueError as exc:
            raise ScenarioError("algorithm", str(exc)) from None


@dataclass
class RunBlock:
    mode: str = "sync"
    p0: list[float] | None = None
    tol: float = 1e-10
    max_iter: int = 10_000
    D: int = 0
    seed: int = 0
    window: int | None = None
    async_model: str = "bounded"

    @classmethod
    def parse(cls, raw, k: int, path: str = "run") -> RunBlock:
        if raw is None:
            return cls()
        if not isinstance(raw, dict):
            raise ScenarioError(path, "expected an object")
        out = cls()
        mode = raw.get("mode", "sync")
        if mode not in ("sync", "async"):
            raise ScenarioError(f"{path}.mode", f"mode must be 'sync' or 'async', got {mode!r}")
        out.mode = mode
        if "p0" in raw:
            out.p0 = _vector(raw["p0"], f"{path}.p0", k)
        if "tol" in raw:
            out.tol = _number(raw["tol"], f"{path}.tol")
        for key in ("max_iter", "D", "seed"):
            if key in raw:
                setattr(out, key, _int(raw[key], f"{path}.{key}"))
        if raw.get("window") is not None:
            out.window = _int(raw["window"], f"{path}.window")
        model = raw.get("async_model", "bounded")
        if model not in ("bounded", "total"):
            raise ScenarioError(f"{path}.async_model", f"unknown model {model!r}")
        out.async_model = model
        if out.tol <= 0 or out.max_iter < 1 or out.D < 0:
            raise ScenarioError(path, "need tol > 0, max_iter >= 1, D >= 0")
        return out

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


@dataclass
class OutputBlock:
    trace: str = "trace.csv"
    report: str = "report.json"

    @classmethod
    def parse(cls, raw, path: str = "output") -> OutputBlock:
        if raw is None:
            return cls()
        if not isinstance(raw, dict):
            raise ScenarioError(path, "expected an object")
        return cls(str(raw.get("trace", "trace.csv")), str(raw.get("report", "report.json")))

    def to_dict(self) -> dict:
        return {"trace": self.trace, "report": self.report}


@dataclass
class ScenarioFile:
    algorithm: AlgorithmBlock
    network: NetworkBlock | None = None
    run: RunBlock = field(default_factory=RunBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    @property
    def n_users(self) -> int:
        return 1 if self.network is None else self.network.K

    @classmethod
    def from_dict(cls, raw) -> ScenarioFile:
        if not isinstance(raw, dict):
            raise ScenarioError("<root>", "expected an object")
        unknown = set(raw) - {"network", "algorithm", "run", "output"}
        if unknown:
            raise ScenarioError("<root>", f"unknown blocks {sorted(unknown)}")
        network = NetworkBlock.parse(raw["network"]) if raw.get("network") is not None else None
        k = network.K if network else None
        algorithm = AlgorithmBlock.parse(_req(raw, "algorithm", "<root>"), k)
        n = k if k is not None else 1
        return cls(algorithm, network, RunBlock.parse(raw.get("run"), n), OutputBlock.parse(raw.get("output")))

    def to_dict(self) -> dict:
        out = {}
        if self.network is not None:
            out["network"] = self.network.to_dict()
        out["algorithm"] = self.algorithm.to_dict()
        out["run"] = self.run.to_dict()
        out["output"] = self.output.to_dict()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> ScenarioFile:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> ScenarioFile:
        return cls.loads(Path(path).read_text())
