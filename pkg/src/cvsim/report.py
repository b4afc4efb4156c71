"""Experiment reports: human table, JSON and CSV renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .gaussian import GaussianState, UnitsConvention, db

REPORT_VERSION = 1
# matrix-valued entries are left to the JSON and CSV renderings
_HIDDEN = {"mean", "cov", "empirical_cov"}


def variance_entry(v: float, units: UnitsConvention, reference: float = 1.0) -> dict:
    """A variance in reporting units with its dB value against ``reference`` (computational units)."""
    return {"linear": float(units.variance(v)), "db": float(db(v, reference))}


def verdict(value: float, bound: float, relation: str = "<") -> dict:
    ok = value < bound if relation == "<" else value > bound
    return {"passed": bool(ok), "value": float(value), "relation": relation, "bound": float(bound)}


def state_entry(state: GaussianState, units: UnitsConvention) -> dict:
    out = {"mean": units.amplitude(state.mean).tolist(), "cov": units.variance(state.cov).tolist()}
    for i in range(state.n_modes):
        out[f"var_x{i + 1}"] = variance_entry(state.cov[2 * i, 2 * i], units)
        out[f"var_p{i + 1}"] = variance_entry(state.cov[2 * i + 1, 2 * i + 1], units)
    return out


@dataclass
class Report:
    experiment: str
    parameters: dict
    results: dict
    units: UnitsConvention = field(default_factory=UnitsConvention)
    seed: int | None = None
    oracle: dict | None = None

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "tool_version": __version__,
            "experiment": self.experiment,
            "units": {"vacuum_variance": self.units.reporting_vacuum_variance},
            "seed": self.seed,
            "parameters": self.parameters,
            "results": self.results,
            "oracle": self.oracle,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)

    def rows(self) -> list[tuple[str, str, object, str]]:
        """One ``(experiment, key, value, unit)`` row per scalar result."""
        rows = []
        for key, value in _flatten({"results": self.results, "oracle": self.oracle or {}}):
            rows.append((self.experiment, key, value, _unit(key)))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "key", "value", "unit"])
        w.writerows(self.rows())
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.experiment}  (vacuum variance = {self.units.reporting_vacuum_variance:g})"]
        for k, v in self.parameters.items():
            lines.append(f"  {k:<28} {v}")
        lines.append("")
        for key, value, unit in ((k, v, u) for _, k, v, u in self.rows()):
            if _HIDDEN & set(key.split(".")):
                continue
            shown = f"{value:.6g}" if isinstance(value, float) else str(value)
            lines.append(f"  {key:<40} {shown} {unit}".rstrip())
        return "\n".join(lines) + "\n"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    elif obj is not None:
        yield prefix, obj.item() if isinstance(obj, np.generic) else obj


def _unit(key: str) -> str:
    last = key.rsplit(".", 1)[-1]
    if last == "db":
        return "dB"
    if last == "linear":
        return "var"
    if last == "passed":
        return "bool"
    return ""
