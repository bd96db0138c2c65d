"""Config files, CSV/JSON output, lattice snapshots and SVG figures."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svgplot
from .cycle import FORM_KEYS, CycleConfig, CycleRecord, Phase, SignChangeEvent, hysteresis_path
from .lattice import Lattice
from .sampler import SamplerConfig

CSV_HEADER = ["iteration", "beta", "entropy", *FORM_KEYS, "K", "H", "k1", "k2", "k3", "phase"]

SNAPSHOT_MAGIC = b"GMRF"
SNAPSHOT_VERSION = 1


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config

def _parse_int(text):
    return int(text, 10)


def _parse_float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _parse_optional_float(text):
    return None if text.lower() in ("none", "auto", "") else _parse_float(text)


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean")


_TOP_KEYS = {
    "side": _parse_int,
    "delta_beta": _parse_float,
    "half_cycle_steps": _parse_int,
    "sweeps_per_step": _parse_int,
    "seed": _parse_int,
    "ridge": _parse_optional_float,
    "reestimate": _parse_bool,
    "rescale": _parse_bool,
    "initial_mu": _parse_float,
    "initial_sigma_sq": _parse_float,
}
_SAMPLER_KEYS = {
    "sampler.mode": str,
    "sampler.proposal_std": _parse_optional_float,
    "sampler.sweep_order": str,
}


def parse_config(path) -> CycleConfig:
    """Read a flat ``key = value`` file (``#`` starts a comment).

    Missing keys take the :class:`CycleConfig` defaults.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    top, sampler = {}, {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _TOP_KEYS:
            parser, target, name = _TOP_KEYS[key], top, key
        elif key in _SAMPLER_KEYS:
            parser, target, name = _SAMPLER_KEYS[key], sampler, key.split(".", 1)[1]
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            target[name] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: malformed value for {key}: {value!r} ({exc})") from None
    try:
        return CycleConfig(sampler=SamplerConfig(**sampler), **top)
    except ValueError as exc:
        raise ConfigError(f"{path}: invalid configuration: {exc}") from None


def config_to_dict(config: CycleConfig) -> dict:
    d = dataclasses.asdict(config)
    d["sampler"] = {k: (v.value if hasattr(v, "value") else v) for k, v in d["sampler"].items()}
    d["beta_max"] = config.beta_max
    return d


# --------------------------------------------------------------------- csv

def _fmt(v: float) -> str:
    return format(v, ".17g")


def emit_csv(records, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow([
                    r.iteration, _fmt(r.beta), _fmt(r.entropy),
                    *(_fmt(r.form_components[k]) for k in FORM_KEYS),
                    _fmt(r.gaussian_k), _fmt(r.mean_h),
                    *(_fmt(v) for v in r.principal),
                    Phase(r.phase).value,
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> list[CycleRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    out = []
    for row in rows[1:]:
        vals = dict(zip(CSV_HEADER, row))
        out.append(CycleRecord(
            iteration=int(vals["iteration"]),
            beta=float(vals["beta"]),
            entropy=float(vals["entropy"]),
            form_components={k: float(vals[k]) for k in FORM_KEYS},
            gaussian_k=float(vals["K"]),
            mean_h=float(vals["H"]),
            principal=(float(vals["k1"]), float(vals["k2"]), float(vals["k3"])),
            phase=Phase(vals["phase"]),
        ))
    return out


# ------------------------------------------------------------------ json

def summary(config: CycleConfig, records, events, runtime_seconds: float) -> dict:
    ent = [r.entropy for r in records]
    return {
        "config": config_to_dict(config),
        "events": [
            {"iteration": e.iteration, "beta": e.beta, "direction": e.direction.value}
            for e in events
        ],
        "min_entropy": min(ent) if ent else None,
        "max_entropy": max(ent) if ent else None,
        "hysteresis_area_k": hysteresis_path(records, "gaussian_k").area,
        "hysteresis_area_h": hysteresis_path(records, "mean_h").area,
        "runtime_seconds": runtime_seconds,
    }


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass
class RunManifest:
    config: CycleConfig
    started_at: str
    tool_version: str
    output_paths: list

    def to_dict(self) -> dict:
        return {
            "config": config_to_dict(self.config),
            "started_at": self.started_at,
            "tool_version": self.tool_version,
            "output_paths": [str(p) for p in self.output_paths],
        }

    def missing_outputs(self) -> list:
        return [p for p in self.output_paths if not os.path.exists(p)]


# -------------------------------------------------------------- snapshots

def write_snapshot(lattice: Lattice, path) -> None:
    """``GMRF`` + version byte + u32 side + side^2 little-endian float64, row-major."""
    side = lattice.side
    body = np.ascontiguousarray(lattice.values, dtype="<f8").tobytes()
    with Path(path).open("wb") as fh:
        fh.write(SNAPSHOT_MAGIC + struct.pack("<BI", SNAPSHOT_VERSION, side) + body)


def read_snapshot(path) -> Lattice:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"snapshot not found: {path}")
    data = path.read_bytes()
    head = len(SNAPSHOT_MAGIC) + 5
    if len(data) < head or data[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a GMRF snapshot")
    version, side = struct.unpack("<BI", data[4:head])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    if len(data) - head != side * side * 8:
        raise ValueError(f"{path}: expected {side * side} values, file size mismatch")
    values = np.frombuffer(data, dtype="<f8", offset=head).reshape(side, side)
    return Lattice(values.astype(np.float64))


# ------------------------------------------------------------------ plots

PLOT_FILES = (
    "beta.svg",
    "entropy.svg",
    "second_form_TQ.svg",
    "gaussian_curvature.svg",
    "mean_principal_curvatures.svg",
    "hysteresis_K_entropy.svg",
    "hysteresis_H_entropy.svg",
)


def emit_plots(records, events, out_dir) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    it = [r.iteration for r in records]
    col = lambda f: [f(r) for r in records]  # noqa: E731
    paths = [str(out / name) for name in PLOT_FILES]

    svgplot.line_plot(paths[0], "Inverse temperature", "iteration", "beta",
                      [svgplot.Series("beta", it, col(lambda r: r.beta))])
    svgplot.line_plot(paths[1], "Entropy", "iteration", "entropy",
                      [svgplot.Series("entropy", it, col(lambda r: r.entropy))])
    svgplot.line_plot(paths[2], "Second form components", "iteration", "value",
                      [svgplot.Series("T", it, col(lambda r: r.form_components["T"])),
                       svgplot.Series("Q", it, col(lambda r: r.form_components["Q"]))])
    by_iter = {r.iteration: r for r in records}
    markers = [(e.iteration, by_iter[e.iteration].gaussian_k) for e in events
               if e.iteration in by_iter]
    svgplot.line_plot(paths[3], "Gaussian curvature", "iteration", "K",
                      [svgplot.Series("K", it, col(lambda r: r.gaussian_k))],
                      markers=markers, zero_line=True)
    svgplot.line_plot(paths[4], "Mean and principal curvatures", "iteration", "curvature",
                      [svgplot.Series("H", it, col(lambda r: r.mean_h)),
                       svgplot.Series("k1", it, col(lambda r: r.principal[0])),
                       svgplot.Series("k2", it, col(lambda r: r.principal[1])),
                       svgplot.Series("k3", it, col(lambda r: r.principal[2]))],
                      zero_line=True)
    for path, quantity, label in ((paths[5], "gaussian_k", "K"), (paths[6], "mean_h", "H")):
        loop = hysteresis_path(records, quantity)
        svgplot.line_plot(path, f"Entropy against {label}", label, "entropy",
                          [svgplot.Series("heating", *loop.heating.T),
                           svgplot.Series("cooling", *loop.cooling.T)])
    return paths
