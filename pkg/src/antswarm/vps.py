"""Self-regulated population size.

Ants carry energy that drains by a fixed amount each generation and is
topped back up in proportion to the contrast of their last move.  Low-energy
ants die stochastically.  An ant with at least one neighbor may spawn an
offspring onto a free adjacent cell, more readily in moderately crowded,
high-contrast places.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .habitat import GrayImage
from .swarm import Colony, SwarmParams, evaporate, init_colony, move_all

# Reproduction weight by number of occupied Moore neighbors (0..8)
DEFAULT_W_N = (0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0)


@dataclass(frozen=True)
class VpsParams:
    alpha: float = 0.025
    mu: float = 0.1
    w_n: tuple[float, ...] = DEFAULT_W_N

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not 0 <= self.mu <= 1:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if len(self.w_n) != 9 or not all(0 <= w <= 1 for w in self.w_n):
            raise ValueError("w_n must hold 9 weights in [0, 1]")
        object.__setattr__(self, "w_n", tuple(float(w) for w in self.w_n))


@dataclass
class VpsStepReport:
    t: int
    births: int
    deaths: int
    population: int
    mean_energy: float
    moved: int
    total_deposit: float
    max_delta_gl: float


def _ratio(delta_gl, max_delta_gl):
    return delta_gl / max_delta_gl if max_delta_gl > 0 else 0.0 * delta_gl


def initial_energy(params: VpsParams) -> float:
    return 1.0 + params.alpha


def update_energy(e_prev, delta_gl, max_delta_gl: float, params: VpsParams):
    """Drain ``alpha`` and refund ``alpha`` times the normalized contrast.

    Written as ``e - alpha * (1 - ratio)`` so a move at the running maximum
    leaves the energy bit-for-bit unchanged.  Accepts scalars or arrays.
    """
    return e_prev - params.alpha * (1.0 - _ratio(delta_gl, max_delta_gl))


def death_probability(energy):
    return np.clip(1.0 - np.asarray(energy, dtype=np.float64), 0.0, 1.0)


def death_trial(energy: float, rng: np.random.Generator) -> bool:
    """True if the ant dies; always consumes exactly one uniform draw."""
    return bool(rng.random() < death_probability(energy))


def reproduction_probability(n_occupied: int, delta_gl: float, max_delta_gl: float,
                             params: VpsParams) -> float:
    if not 0 <= n_occupied <= 8:
        raise ValueError(f"n_occupied must lie in [0, 8], got {n_occupied}")
    return params.w_n[n_occupied] * (params.mu + (1.0 - params.mu) * _ratio(delta_gl, max_delta_gl))


def init_svps_colony(habitat: GrayImage, swarm: SwarmParams, params: VpsParams,
                     count_override: int | None = None) -> Colony:
    return init_colony(habitat, swarm, count_override, energy=initial_energy(params))


def step_svps(colony: Colony, params: VpsParams) -> VpsStepReport:
    """One generation: move, energy, death, reproduction, evaporation."""
    moved, dep = move_all(colony)
    dgl = colony.last_delta_gl
    colony.energies = update_energy(colony.energies, dgl, colony.max_delta_gl, params)

    rng = colony.demo_rng
    n = colony.population
    dies = rng.random(n) < death_probability(colony.energies)
    deaths = int(np.count_nonzero(dies))
    if deaths:
        colony.keep(~dies)
    colony.ages += 1

    m = colony.population
    order = rng.permutation(m)
    u_birth = rng.random(m)
    u_place = rng.random(m)
    new_heads = rng.integers(0, 8, size=m)
    out_x = np.empty(m, dtype=np.int64)
    out_y = np.empty(m, dtype=np.int64)
    births = int(_kernels.reproduce_phase(
        colony.xs, colony.ys, colony.occupancy, order, colony.last_delta_gl,
        float(colony.max_delta_gl), np.asarray(params.w_n), params.mu,
        u_birth, u_place, m, out_x, out_y))
    if births:
        colony.append(out_x[:births], out_y[:births], new_heads[:births], initial_energy(params))

    evaporate(colony.field, colony.params)
    colony.t += 1
    mean_e = float(colony.energies.mean()) if colony.population else math.nan
    return VpsStepReport(colony.t, births, deaths, colony.population, mean_e,
                         moved, dep, colony.max_delta_gl)
