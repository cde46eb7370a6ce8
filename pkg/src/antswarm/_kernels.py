"""Compiled inner loops.

Ants are processed strictly one after another so that every ant sees the
occupancy left by the ones before it.  All randomness is drawn by the caller
and passed in as arrays, which keeps the kernels pure and the random stream
owned by the Python side.
"""
import numpy as np
from numba import njit

# Heading index -> unit offset, clockwise from north (y grows downwards)
DX = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
DY = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)


@njit(cache=True)
def response(sigma, beta, delta):
    return (1.0 + sigma / (1.0 + delta * sigma)) ** beta


@njit(cache=True)
def roulette(weights, u):
    """Index picked by a roulette wheel spun to ``u`` in [0, 1); -1 if all weights are zero."""
    total = 0.0
    last = -1
    for k in range(weights.shape[0]):
        if weights[k] > 0.0:
            total += weights[k]
            last = k
    if last < 0:
        return -1
    target = u * total
    acc = 0.0
    for k in range(weights.shape[0]):
        if weights[k] > 0.0:
            acc += weights[k]
            if target < acc:
                return k
    return last


@njit(cache=True)
def roulette_many(weights, u, out):
    for i in range(u.shape[0]):
        out[i] = roulette(weights, u[i])


@njit(cache=True)
def move_weights(x, y, h, occ, sigma, beta, delta, bias, out):
    height, width = occ.shape
    for d in range(8):
        nx = (x + DX[d]) % width
        ny = (y + DY[d]) % height
        if occ[ny, nx] >= 0:
            out[d] = 0.0
        else:
            out[d] = response(sigma[ny, nx], beta, delta) * bias[(d - h) % 8]


@njit(cache=True)
def move_phase(xs, ys, heads, occ, sigma, med, order, u,
               beta, delta, eta, p, bias, max_dgl, dgl_out):
    """Move every ant once, depositing pheromone on arrival.

    Returns ``(moved, total_deposit, max_dgl)``.  ``dgl_out[i]`` receives the
    contrast of ant ``i``'s move (0 for blocked ants).
    """
    height, width = occ.shape
    w = np.empty(8)
    moved = 0
    total_dep = 0.0
    for j in range(order.shape[0]):
        i = order[j]
        x = xs[i]
        y = ys[i]
        move_weights(x, y, heads[i], occ, sigma, beta, delta, bias, w)
        d = roulette(w, u[i])
        if d < 0:
            dgl_out[i] = 0.0
            continue
        nx = (x + DX[d]) % width
        ny = (y + DY[d]) % height
        occ[y, x] = -1
        occ[ny, nx] = i
        xs[i] = nx
        ys[i] = ny
        heads[i] = d
        g = abs(med[y, x] - med[ny, nx])
        dgl_out[i] = g
        if g > max_dgl:
            max_dgl = g
        dep = eta + p * g / 255.0
        sigma[ny, nx] += dep
        total_dep += dep
        moved += 1
    return moved, total_dep, max_dgl


@njit(cache=True)
def reproduce_phase(xs, ys, occ, order, dgl, max_dgl, w_n, mu,
                    u_birth, u_place, first_slot, out_x, out_y):
    """Reproduction sweep over the ants in ``order``.

    Offspring take slots ``first_slot, first_slot + 1, ...`` in ``occ`` and
    their coordinates are written to ``out_x``/``out_y``.  Returns the
    number of births.
    """
    height, width = occ.shape
    free_x = np.empty(8, dtype=np.int64)
    free_y = np.empty(8, dtype=np.int64)
    births = 0
    for j in range(order.shape[0]):
        i = order[j]
        x = xs[i]
        y = ys[i]
        n = 0
        nfree = 0
        for d in range(8):
            nx = (x + DX[d]) % width
            ny = (y + DY[d]) % height
            if occ[ny, nx] >= 0:
                n += 1
            else:
                free_x[nfree] = nx
                free_y[nfree] = ny
                nfree += 1
        if n == 0 or nfree == 0:
            continue
        ratio = dgl[i] / max_dgl if max_dgl > 0.0 else 0.0
        pr = w_n[n] * (mu + (1.0 - mu) * ratio)
        if u_birth[j] >= pr:
            continue
        k = int(u_place[j] * nfree)
        if k >= nfree:
            k = nfree - 1
        occ[free_y[k], free_x[k]] = first_slot + births
        out_x[births] = free_x[k]
        out_y[births] = free_y[k]
        births += 1
    return births
