"""Batch experiments: static runs, habitat swaps, and the artifacts they leave behind.

A run directory holds

* ``manifest.txt``: ``key = value`` lines, enough to repeat the run exactly;
* ``steps.csv``: one row per generation;
* ``pheromone_tNNNNN.pgm`` / ``.txt``: rendered and raw pheromone snapshots;
* ``histogram.csv``: gray-level histogram of the final rendered map;
* ``labels.pgm`` / ``labels.csv``: watershed output when segmentation is on;
* ``FAILED``: present only if the run aborted.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .habitat import GrayImage, edge_band, make_synthetic, read_pgm, rotate180, write_pgm
from .swarm import Colony, PheromoneField, SwarmParams, init_colony, step_sfps
from .vps import VpsParams, init_svps_colony, step_svps
from .watershed import segment, write_label_csv, write_label_pgm

log = logging.getLogger(__name__)

DEFAULT_SNAPSHOTS = (20, 100, 250, 500)
POLARITIES = ("bright_edges", "paper_inverted")
SEGMENT_SOURCES = ("none", "classical", "pheromone")
CSV_FIELDS = ("t", "population", "births", "deaths", "mean_energy", "moved",
              "total_deposit", "max_delta_gl", "region_occupancy")


class Occupancy(NamedTuple):
    fraction: float
    extinct: bool


# --------------------------------------------------------------------------
# Metrics


def render_pheromone(field: PheromoneField, polarity: str = "bright_edges") -> GrayImage:
    """Linear map of the field onto 0..255 (max -> 255); ``paper_inverted`` flips it."""
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
    top = field.sigma.max()
    levels = np.round(255.0 * field.sigma / top) if top > 0 else np.zeros_like(field.sigma)
    if polarity == "paper_inverted":
        levels = 255 - levels
    return GrayImage(levels.astype(np.uint8))


def gray_histogram(img: GrayImage) -> np.ndarray:
    return np.bincount(img.pixels.ravel(), minlength=256)


def region_occupancy(colony: Colony, region: np.ndarray) -> Occupancy:
    """Fraction of live ants standing inside the boolean ``region`` mask."""
    region = np.asarray(region, dtype=bool)
    if not region.any():
        raise ValueError("region must contain at least one cell")
    if colony.population == 0:
        return Occupancy(0.0, True)
    inside = np.count_nonzero(region[colony.ys, colony.xs])
    return Occupancy(inside / colony.population, False)


# --------------------------------------------------------------------------
# Configuration


def load_habitat(spec: str) -> GrayImage:
    """``synthetic:<kind>:<W>x<H>[:k=v,...]`` or a PGM path."""
    if not spec.startswith("synthetic:"):
        return read_pgm(spec)
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(f"synthetic spec must be kind:WxH[:params], got {spec[10:]!r}")
    kind, dims = parts[1], parts[2]
    try:
        w, h = (int(v) for v in dims.lower().split("x"))
    except ValueError:
        raise ValueError(f"bad synthetic dimensions {dims!r}; expected WxH") from None
    params = {}
    if len(parts) == 4 and parts[3]:
        for item in parts[3].split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad synthetic parameter {item!r}; expected key=value")
            num = float(value)
            params[key.strip()] = int(num) if num.is_integer() else num
    return make_synthetic(kind, w, h, **params)


def parse_region(spec: str, habitat_a: GrayImage, habitat_b: GrayImage | None) -> np.ndarray:
    """``rect:x0,y0,x1,y1`` (inclusive), ``edges-a:R`` or ``edges-b:R``."""
    kind, _, arg = spec.partition(":")
    if kind == "rect":
        x0, y0, x1, y1 = (int(v) for v in arg.split(","))
        mask = np.zeros(habitat_a.shape, dtype=bool)
        mask[y0:y1 + 1, x0:x1 + 1] = True
    elif kind in ("edges-a", "edges-b"):
        img = habitat_a if kind == "edges-a" else habitat_b
        if img is None:
            raise ValueError("edges-b region needs a second habitat")
        mask = edge_band(img, int(arg or 2))
    else:
        raise ValueError(f"unknown region kind {kind!r}")
    if not mask.any():
        raise ValueError(f"region {spec!r} is empty")
    return mask


@dataclass(frozen=True)
class ExperimentConfig:
    habitat_a: str
    mode: str = "svps"
    habitat_b: str | None = None  # path, synthetic spec, or "rot180" (habitat_a turned 180 degrees)
    swap_t: int | None = None
    steps: int = 500
    snapshot_ts: tuple[int, ...] = DEFAULT_SNAPSHOTS
    swarm: SwarmParams = field(default_factory=SwarmParams)
    vps: VpsParams = field(default_factory=VpsParams)
    out_dir: str = "run"
    metrics_region: str | None = None
    count: int | None = None
    segment: str = "none"
    polarity: str = "paper_inverted"
    mean_window: tuple[int, int] = (1, 100)

    def __post_init__(self):
        if self.mode not in ("sfps", "svps"):
            raise ValueError(f"mode must be sfps or svps, got {self.mode!r}")
        if self.steps < 0:
            raise ValueError(f"steps must be non-negative, got {self.steps}")
        if self.swap_t is not None:
            if self.habitat_b is None:
                raise ValueError("swap_t needs a second habitat")
            if not 0 <= self.swap_t < self.steps:
                raise ValueError(f"swap_t {self.swap_t} must lie in [0, steps={self.steps})")
        bad = [t for t in self.snapshot_ts if not 1 <= t <= self.steps]
        if bad:
            raise ValueError(f"snapshot steps {bad} fall outside [1, {self.steps}]")
        if self.segment not in SEGMENT_SOURCES:
            raise ValueError(f"segment must be one of {SEGMENT_SOURCES}, got {self.segment!r}")
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")
        lo, hi = self.mean_window
        if not 1 <= lo <= hi:
            raise ValueError(f"mean window {lo}:{hi} must satisfy 1 <= start <= end")
        object.__setattr__(self, "snapshot_ts", tuple(sorted(set(self.snapshot_ts))))


# --------------------------------------------------------------------------
# Manifest


def _fmt(v) -> str:
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def manifest_lines(config: ExperimentConfig) -> list[str]:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name in ("swarm", "vps"):
            for k, v in asdict(value).items():
                lines.append(f"{f.name}.{k} = {_fmt(v)}")
        else:
            lines.append(f"{f.name} = {_fmt(value)}")
    return lines


def _parse_value(kind, text: str):
    if text == "":
        return None
    if kind == "floats":
        return tuple(float(v) for v in text.split(","))
    if kind == "ints":
        return tuple(int(v) for v in text.split(","))
    return kind(text)


_CONFIG_KINDS = {
    "habitat_a": str, "mode": str, "habitat_b": str, "swap_t": int, "steps": int,
    "snapshot_ts": "ints", "out_dir": str, "metrics_region": str, "count": int,
    "segment": str, "polarity": str, "mean_window": "ints",
}
_SWARM_KINDS = {"beta": float, "delta": float, "eta": float, "p": float, "evap": float,
                "evap_mode": str, "s_frac": float, "seed": int, "bias": "floats"}
_VPS_KINDS = {"alpha": float, "mu": float, "w_n": "floats"}


def load_manifest(path) -> ExperimentConfig:
    """Rebuild the configuration echoed in a run's ``manifest.txt``."""
    top, swarm, vps = {}, {}, {}
    for raw in Path(path).read_text().splitlines():
        key, sep, value = raw.partition(" = ")
        if not sep:
            key, value = raw.rstrip(" =").rstrip(), ""
        if key.startswith("swarm."):
            name = key[6:]
            swarm[name] = _parse_value(_SWARM_KINDS[name], value)
        elif key.startswith("vps."):
            name = key[4:]
            vps[name] = _parse_value(_VPS_KINDS[name], value)
        elif key in _CONFIG_KINDS:
            top[key] = _parse_value(_CONFIG_KINDS[key], value)
    top["snapshot_ts"] = top.get("snapshot_ts") or ()
    return ExperimentConfig(swarm=SwarmParams(**swarm), vps=VpsParams(**vps), **top)


# --------------------------------------------------------------------------
# Running


@dataclass
class RunArtifacts:
    out_dir: Path
    files: list[Path]
    colony: Colony
    rows: list[dict]
    mean_population_pct: float
    ant_steps: int

    @property
    def populations(self) -> np.ndarray:
        return np.array([r["population"] for r in self.rows])


def _write_snapshot(out: Path, colony: Colony, polarity: str) -> list[Path]:
    stem = out / f"pheromone_t{colony.t:05d}"
    pgm, txt = stem.with_suffix(".pgm"), stem.with_suffix(".txt")
    write_pgm(pgm, render_pheromone(colony.field, polarity))
    np.savetxt(txt, colony.field.sigma, fmt="%.17g")
    return [pgm, txt]


def _mean_population_pct(rows: list[dict], window: tuple[int, int], cells: int) -> float:
    lo, hi = window
    pops = [r["population"] for r in rows if lo <= r["t"] <= hi]
    return 100.0 * float(np.mean(pops)) / cells if pops else math.nan


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunArtifacts:
    """Run ``config`` and write its artifacts.

    The habitat swap at ``swap_t`` happens after generation ``swap_t`` and
    replaces only the image; ants, energies, the pheromone field and the
    running contrast maximum carry over.  On failure a ``FAILED`` marker with
    the diagnostic is left in the output directory and the error re-raised.
    """
    out = Path(config.out_dir)
    files: list[Path] = []
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / "FAILED").unlink(missing_ok=True)
    try:
        habitat_a = load_habitat(config.habitat_a)
        habitat_b = None
        if config.habitat_b == "rot180":
            habitat_b = rotate180(habitat_a)
        elif config.habitat_b is not None:
            habitat_b = load_habitat(config.habitat_b)
        if habitat_b is not None and habitat_b.shape != habitat_a.shape:
            raise ValueError(f"habitat_b is {habitat_b.width}x{habitat_b.height} but habitat_a is "
                             f"{habitat_a.width}x{habitat_a.height}")
        region = (parse_region(config.metrics_region, habitat_a, habitat_b)
                  if config.metrics_region else None)

        if config.mode == "svps":
            colony = init_svps_colony(habitat_a, config.swarm, config.vps, config.count)
        else:
            colony = init_colony(habitat_a, config.swarm, config.count)

        if write:
            (out / "manifest.txt").write_text("\n".join(manifest_lines(config)) + "\n")
            files.append(out / "manifest.txt")
            files += _write_snapshot(out, colony, config.polarity)

        rows: list[dict] = []
        ant_steps = 0
        snapshots = set(config.snapshot_ts)
        for _ in range(config.steps):
            if config.swap_t is not None and colony.t == config.swap_t:
                colony.set_habitat(habitat_b)
                log.info("t=%d: habitat swapped", colony.t)
            ant_steps += colony.population
            if config.mode == "svps":
                r = step_svps(colony, config.vps)
                row = dict(t=r.t, population=r.population, births=r.births, deaths=r.deaths,
                           mean_energy=r.mean_energy, moved=r.moved, total_deposit=r.total_deposit,
                           max_delta_gl=r.max_delta_gl)
            else:
                r = step_sfps(colony)
                row = dict(t=r.t, population=r.population, births=0, deaths=0,
                           mean_energy=float(colony.energies.mean()) if colony.population else math.nan,
                           moved=r.moved, total_deposit=r.total_deposit, max_delta_gl=r.max_delta_gl)
            row["region_occupancy"] = (region_occupancy(colony, region).fraction
                                       if region is not None else "")
            rows.append(row)
            if write and colony.t in snapshots:
                files += _write_snapshot(out, colony, config.polarity)

        cells = habitat_a.width * habitat_a.height
        mean_pct = _mean_population_pct(rows, config.mean_window, cells)
        if write and config.steps > 0:
            files += _write_tables(out, colony, rows, config)
            with (out / "manifest.txt").open("a") as fh:
                fh.write(f"result.mean_population_pct = {mean_pct!r}\n")
                fh.write(f"result.final_population = {colony.population}\n")
                fh.write(f"result.ant_steps = {ant_steps}\n")
        return RunArtifacts(out, files, colony, rows, mean_pct, ant_steps)
    except Exception as exc:
        if write:
            (out / "FAILED").write_text(f"{type(exc).__name__}: {exc}\n")
        raise


def _write_tables(out: Path, colony: Colony, rows: list[dict], config: ExperimentConfig) -> list[Path]:
    written = [out / "steps.csv", out / "histogram.csv"]
    with written[0].open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
    hist = gray_histogram(render_pheromone(colony.field, config.polarity))
    with written[1].open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "count"])
        w.writerows(enumerate(hist.tolist()))
    if config.segment != "none":
        labels = segment(colony.habitat, config.segment, colony.field)
        write_label_pgm(out / "labels.pgm", labels)
        write_label_csv(out / "labels.csv", labels)
        written += [out / "labels.pgm", out / "labels.csv"]
    return written


def rerun_from_manifest(path, out_dir=None) -> RunArtifacts:
    config = load_manifest(path)
    if out_dir is not None:
        config = replace(config, out_dir=str(out_dir))
    return run_experiment(config)
