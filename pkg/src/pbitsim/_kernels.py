"""Compiled inner loops. Everything here is array-in/array-out; the public
modules own validation, seeding and bookkeeping."""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def lfsr_shift(state, width, tap_shifts, nshift):
    # Fibonacci, right-shifting: feedback = XOR of bits (width - tap)
    top = width - 1
    for _ in range(nshift):
        fb = 0
        for s in tap_shifts:
            fb ^= (state >> s) & 1
        state = (state >> 1) | (fb << top)
    return state


@njit(cache=True, nogil=True)
def lfsr_draw(states, width, tap_shifts, nshift, nsteps,
              node_cell, node_shore, node_index, n_lanes, dac_bits, rev8, out):
    """Advance every cell register once per step and fill ``out[t, node]``
    with the node's uniform value in [-1, 1]."""
    n = node_cell.shape[0]
    drop = 8 - dac_bits
    half = ((1 << dac_bits) - 1) / 2.0
    for t in range(nsteps):
        for c in range(states.shape[0]):
            states[c] = lfsr_shift(states[c], width, tap_shifts, nshift)
        for i in range(n):
            word = states[node_cell[i]]
            lane = node_index[i] % n_lanes
            u = (word >> (8 * lane)) & 0xFF
            if node_shore[i] == 1:
                u = rev8[u]
            u = u >> drop
            out[t, i] = (u - half) / half


@njit(cache=True, nogil=True)
def gibbs_run(indptr, nbr, nbr_w, h, gain, offset, free, orders,
              betas, rands, states, t0, burn_in,
              edge_a, edge_b, edge_w, designated,
              mean_acc, pair_acc, hist, energy_out, best_energy, best_state):
    """Run ``rands.shape[1]`` sweeps on each of ``rands.shape[0]`` chains.

    Node ``i`` at sweep ``t`` of chain ``b`` always consumes ``rands[b, t, i]``
    so results do not depend on update order or on how work is split.
    Statistics accumulate for global sweep indices ``t0 + t >= burn_in``.
    """
    B = rands.shape[0]
    T = rands.shape[1]
    n = states.shape[1]
    n_orders = orders.shape[0]
    k = designated.shape[0]
    E = edge_a.shape[0]
    for b in range(B):
        m = states[b]
        for t in range(T):
            order = orders[(b * T + t) % n_orders]
            beta = betas[t]
            r = rands[b, t]
            for p in range(n):
                i = order[p]
                if not free[i]:
                    continue
                field = h[i] + offset[i]
                for q in range(indptr[i], indptr[i + 1]):
                    field += nbr_w[q] * m[nbr[q]]
                if np.tanh(beta * gain[i] * field) + r[i] >= 0.0:
                    m[i] = 1
                else:
                    m[i] = -1
            e = 0.0
            for q in range(E):
                e -= edge_w[q] * m[edge_a[q]] * m[edge_b[q]]
            for i in range(n):
                e -= h[i] * m[i]
            energy_out[b, t] = e
            if e < best_energy[b]:
                best_energy[b] = e
                for i in range(n):
                    best_state[b, i] = m[i]
            if t0 + t >= burn_in:
                for i in range(n):
                    mean_acc[i] += m[i]
                for q in range(E):
                    pair_acc[q] += m[edge_a[q]] * m[edge_b[q]]
                idx = 0
                for j in range(k):
                    idx = (idx << 1) | (1 if m[designated[j]] > 0 else 0)
                hist[idx] += 1
