"""Fixed-population ant swarm on a toroidal image habitat.

Each generation every ant, in a fresh random order, steps to one of its free
Moore neighbors.  The choice is a roulette wheel over the product of a
pheromone response and an inertial turn bias.  The ant then deposits a base
amount of pheromone plus a bonus proportional to the local gray-level
contrast of its move.  After all ants have moved the whole field decays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels
from .habitat import CellCoord, GrayImage, median_map

EVAP_MODES = ("multiplicative_percent", "subtractive")


class Heading(IntEnum):
    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7

    @property
    def offset(self) -> tuple[int, int]:
        return int(_kernels.DX[self]), int(_kernels.DY[self])

    def turn_to(self, other: "Heading") -> int:
        """Signed turn in degrees from this heading to ``other``, in (-180, 180]."""
        steps = (int(other) - int(self)) % 8
        return 45 * steps if steps <= 4 else 45 * (steps - 8)


# Weight per clockwise turn of k * 45 degrees, k = 0..7
DEFAULT_BIAS = (1.0, 1 / 2, 1 / 4, 1 / 12, 1 / 20, 1 / 12, 1 / 4, 1 / 2)


def bias_table(w0=1.0, w45=1 / 2, w90=1 / 4, w135=1 / 12, w180=1 / 20) -> tuple[float, ...]:
    """Expand symmetric turn weights into the 8-entry clockwise table."""
    table = (w0, w45, w90, w135, w180, w135, w90, w45)
    if not all(w > 0 and math.isfinite(w) for w in table):
        raise ValueError("directional bias weights must be finite and > 0")
    return tuple(float(w) for w in table)


@dataclass(frozen=True)
class SwarmParams:
    beta: float = 3.5
    delta: float = 0.2
    eta: float = 0.07
    p: float = 1.5
    evap: float = 1.0
    evap_mode: str = "multiplicative_percent"
    s_frac: float = 0.30
    seed: int = 0
    bias: tuple[float, ...] = DEFAULT_BIAS

    def __post_init__(self):
        for name in ("beta", "delta", "eta", "p", "evap", "s_frac"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0 < self.s_frac <= 1:
            raise ValueError(f"s_frac must lie in (0, 1], got {self.s_frac}")
        if self.evap_mode not in EVAP_MODES:
            raise ValueError(f"evap_mode must be one of {EVAP_MODES}, got {self.evap_mode!r}")
        if self.evap_mode == "multiplicative_percent" and self.evap > 100:
            raise ValueError(f"percentage evaporation cannot exceed 100, got {self.evap}")
        if len(self.bias) != 8 or not all(w > 0 and math.isfinite(w) for w in self.bias):
            raise ValueError("bias must hold 8 finite positive weights")
        object.__setattr__(self, "bias", tuple(float(w) for w in self.bias))


class PheromoneField:
    """Non-negative pheromone density per cell."""

    def __init__(self, width: int, height: int, sigma=None):
        if sigma is None:
            sigma = np.zeros((height, width))
        sigma = np.array(sigma, dtype=np.float64)
        if sigma.shape != (height, width):
            raise ValueError(f"sigma shape {sigma.shape} does not match {width}x{height}")
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("pheromone densities must be finite and non-negative")
        self.sigma = sigma

    @property
    def width(self) -> int:
        return self.sigma.shape[1]

    @property
    def height(self) -> int:
        return self.sigma.shape[0]

    def __getitem__(self, c) -> float:
        x, y = c
        return float(self.sigma[y % self.height, x % self.width])

    def total(self) -> float:
        return float(self.sigma.sum())

    def copy(self) -> "PheromoneField":
        return PheromoneField(self.width, self.height, self.sigma)


@dataclass
class Ant:
    """Snapshot of one ant; mutating it does not affect the colony."""

    id: int
    pos: CellCoord
    heading: Heading
    age: int
    energy: float


@dataclass
class StepReport:
    t: int
    moved: int
    total_deposit: float
    max_delta_gl: float
    population: int


@dataclass(eq=False)
class Colony:
    """Swarm state.  Ant attributes are stored column-wise in parallel arrays.

    ``occupancy[y, x]`` holds the array slot of the ant on that cell or -1.
    Slots are renumbered when ants die; ``ids`` are stable for an ant's life.
    """

    habitat: GrayImage
    params: SwarmParams
    field: PheromoneField
    xs: np.ndarray
    ys: np.ndarray
    headings: np.ndarray
    ages: np.ndarray
    energies: np.ndarray
    ids: np.ndarray
    occupancy: np.ndarray
    rng: np.random.Generator
    demo_rng: np.random.Generator
    max_delta_gl: float = 0.0
    t: int = 0
    next_id: int = 0
    last_delta_gl: np.ndarray = field(default=None, repr=False)
    _median: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._median is None:
            self._median = median_map(self.habitat)
        if self.last_delta_gl is None:
            self.last_delta_gl = np.zeros(self.population)

    @property
    def population(self) -> int:
        return int(self.xs.shape[0])

    @property
    def width(self) -> int:
        return self.habitat.width

    @property
    def height(self) -> int:
        return self.habitat.height

    @property
    def median(self) -> np.ndarray:
        return self._median

    def ant(self, slot: int) -> Ant:
        return Ant(int(self.ids[slot]), CellCoord(int(self.xs[slot]), int(self.ys[slot])),
                   Heading(int(self.headings[slot])), int(self.ages[slot]), float(self.energies[slot]))

    @property
    def ants(self) -> list[Ant]:
        return [self.ant(i) for i in range(self.population)]

    def slot_of(self, ant_id: int) -> int:
        hits = np.flatnonzero(self.ids == ant_id)
        if hits.size == 0:
            raise KeyError(f"no live ant with id {ant_id}")
        return int(hits[0])

    def occupant(self, c) -> int | None:
        """Id of the ant on cell ``c``, or None."""
        x, y = c
        slot = self.occupancy[y % self.height, x % self.width]
        return None if slot < 0 else int(self.ids[slot])

    def set_habitat(self, img: GrayImage) -> None:
        """Swap the landscape; ants, field and running contrast maximum persist."""
        if img.shape != self.habitat.shape:
            raise ValueError(f"habitat dimensions {img.width}x{img.height} differ from "
                             f"{self.width}x{self.height}")
        self.habitat = img
        self._median = median_map(img)

    def keep(self, mask: np.ndarray) -> None:
        """Drop every ant whose entry in ``mask`` is False and renumber slots."""
        for name in ("xs", "ys", "headings", "ages", "energies", "ids", "last_delta_gl"):
            setattr(self, name, getattr(self, name)[mask])
        self.occupancy.fill(-1)
        self.occupancy[self.ys, self.xs] = np.arange(self.population, dtype=np.int64)

    def append(self, xs, ys, headings, energy: float) -> None:
        """Add newborn ants.  Their cells must already be marked in ``occupancy``."""
        k = len(xs)
        self.xs = np.concatenate([self.xs, np.asarray(xs, dtype=np.int64)])
        self.ys = np.concatenate([self.ys, np.asarray(ys, dtype=np.int64)])
        self.headings = np.concatenate([self.headings, np.asarray(headings, dtype=np.int64)])
        self.ages = np.concatenate([self.ages, np.zeros(k, dtype=np.int64)])
        self.energies = np.concatenate([self.energies, np.full(k, float(energy))])
        self.ids = np.concatenate([self.ids, np.arange(self.next_id, self.next_id + k, dtype=np.int64)])
        self.last_delta_gl = np.concatenate([self.last_delta_gl, np.zeros(k)])
        self.next_id += k

    def check_invariants(self) -> None:
        """Raise AssertionError if occupancy, positions or the field are inconsistent."""
        n = self.population
        for name in ("ys", "headings", "ages", "energies", "ids"):
            assert getattr(self, name).shape == (n,), f"{name} length mismatch"
        assert np.all((self.xs >= 0) & (self.xs < self.width)), "x out of range"
        assert np.all((self.ys >= 0) & (self.ys < self.height)), "y out of range"
        flat = self.ys * self.width + self.xs
        assert np.unique(flat).size == n, "two ants share a cell"
        assert np.count_nonzero(self.occupancy >= 0) == n, "occupancy count differs from population"
        assert np.array_equal(self.occupancy[self.ys, self.xs], np.arange(n)), "occupancy/slot mismatch"
        assert np.unique(self.ids).size == n, "duplicate ant ids"
        assert np.all(self.field.sigma >= 0), "negative pheromone"
        assert np.all(np.isfinite(self.field.sigma)), "non-finite pheromone"


def response(sigma: float, params: SwarmParams) -> float:
    """Pheromone attraction ``(1 + s / (1 + delta * s)) ** beta``."""
    return (1.0 + sigma / (1.0 + params.delta * sigma)) ** params.beta


def init_colony(habitat: GrayImage, params: SwarmParams, count_override: int | None = None,
                energy: float = 1.0) -> Colony:
    """Place ants on distinct random cells with random headings.

    The seed is split into three independent streams: placement, movement
    (``colony.rng``) and demography (``colony.demo_rng``, only used by the
    varying-population engine).
    """
    cells = habitat.width * habitat.height
    count = math.floor(params.s_frac * cells) if count_override is None else int(count_override)
    if count > cells:
        raise ValueError(f"cannot place {count} ants on {cells} cells")
    if count < 0:
        raise ValueError(f"ant count must be non-negative, got {count}")
    init_ss, move_ss, demo_ss = np.random.SeedSequence(params.seed).spawn(3)
    init_rng = np.random.default_rng(init_ss)
    flat = init_rng.choice(cells, size=count, replace=False).astype(np.int64)
    headings = init_rng.integers(0, 8, size=count).astype(np.int64)
    xs, ys = flat % habitat.width, flat // habitat.width
    occupancy = np.full(habitat.shape, -1, dtype=np.int64)
    occupancy[ys, xs] = np.arange(count)
    return Colony(
        habitat=habitat, params=params,
        field=PheromoneField(habitat.width, habitat.height),
        xs=xs, ys=ys, headings=headings,
        ages=np.zeros(count, dtype=np.int64),
        energies=np.full(count, float(energy)),
        ids=np.arange(count, dtype=np.int64),
        occupancy=occupancy,
        rng=np.random.default_rng(move_ss),
        demo_rng=np.random.default_rng(demo_ss),
        next_id=count,
    )


def _weights(colony: Colony, ant: Ant) -> np.ndarray:
    w = np.empty(8)
    p = colony.params
    _kernels.move_weights(int(ant.pos.x), int(ant.pos.y), int(ant.heading), colony.occupancy,
                          colony.field.sigma, p.beta, p.delta, np.asarray(p.bias), w)
    return w


def transition_probabilities(colony: Colony, ant: Ant) -> dict[Heading, float]:
    """Move probabilities over the ant's free neighbors, keyed by direction.

    Empty when every neighbor is occupied.
    """
    w = _weights(colony, ant)
    total = w.sum()
    return {Heading(d): float(w[d] / total) for d in range(8) if w[d] > 0}


def choose_move(colony: Colony, ant: Ant) -> CellCoord | None:
    """Spin the roulette wheel once; None if the ant is surrounded."""
    w = _weights(colony, ant)
    if not np.any(w > 0):
        return None
    d = _kernels.roulette(w, colony.rng.random())
    dx, dy = Heading(d).offset
    return CellCoord((ant.pos.x + dx) % colony.width, (ant.pos.y + dy) % colony.height)


def draw_moves(colony: Colony, ant: Ant, n: int) -> np.ndarray:
    """``n`` independent roulette spins for ``ant`` without moving it.

    Returns heading indices (-1 when surrounded).  Consumes ``n`` draws from
    ``colony.rng``, identical to ``n`` calls of :func:`choose_move`.
    """
    w = _weights(colony, ant)
    out = np.empty(n, dtype=np.int64)
    _kernels.roulette_many(w, colony.rng.random(n), out)
    return out


def deposit_amount(delta_gl: float, params: SwarmParams) -> float:
    return params.eta + params.p * delta_gl / 255.0


def deposit(colony: Colony, ant: Ant, src, dst) -> float:
    """Add the arrival deposit for a move ``src -> dst`` and return it."""
    g = abs(colony.median[src[1] % colony.height, src[0] % colony.width]
            - colony.median[dst[1] % colony.height, dst[0] % colony.width])
    amount = deposit_amount(g, colony.params)
    colony.field.sigma[dst[1] % colony.height, dst[0] % colony.width] += amount
    colony.max_delta_gl = max(colony.max_delta_gl, float(g))
    return amount


def evaporate(field: PheromoneField, params: SwarmParams) -> None:
    if params.evap_mode == "multiplicative_percent":
        field.sigma *= 1.0 - params.evap / 100.0
    else:
        np.subtract(field.sigma, params.evap, out=field.sigma)
        np.maximum(field.sigma, 0.0, out=field.sigma)


def move_all(colony: Colony) -> tuple[int, float]:
    """Movement and deposition for one generation.

    Fills ``colony.last_delta_gl`` with each ant's move contrast and returns
    ``(moved, total_deposit)``.
    """
    n = colony.population
    order = colony.rng.permutation(n)
    u = colony.rng.random(n)
    p = colony.params
    dgl = np.zeros(n)
    moved, dep, colony.max_delta_gl = _kernels.move_phase(
        colony.xs, colony.ys, colony.headings, colony.occupancy, colony.field.sigma,
        colony.median, order, u, p.beta, p.delta, p.eta, p.p, np.asarray(p.bias),
        float(colony.max_delta_gl), dgl)
    colony.last_delta_gl = dgl
    return int(moved), float(dep)


def step_sfps(colony: Colony) -> StepReport:
    """Advance the fixed-size swarm by one generation."""
    moved, dep = move_all(colony)
    evaporate(colony.field, colony.params)
    colony.ages += 1
    colony.t += 1
    return StepReport(colony.t, moved, dep, colony.max_delta_gl, colony.population)
