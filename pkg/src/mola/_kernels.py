"""Compiled inner loops for the samplers.

All kernels operate on a flat uint8 grid, a float64 (cells, 3) score
array, and a precomputed Moore-neighbor index table ((cells, 8) int32, -1
for out-of-bounds), drawing randomness from a numpy Generator so the host
code controls seeding. Objective bookkeeping uses the double-counted
compactness convention throughout (flipping one matching pair changes
phi_c by 2).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Metropolis randomness is drawn in batches of this many proposals.
_BATCH = 16384


def neighbor_table(rows: int, cols: int) -> np.ndarray:
    """(rows*cols, 8) flat indices of Moore neighbors; -1 when out of bounds."""
    nbr = np.full((rows * cols, 8), -1, dtype=np.int32)
    for i in range(rows):
        for j in range(cols):
            e = 0
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di == 0 and dj == 0:
                        continue
                    ni, nj = i + di, j + dj
                    if 0 <= ni < rows and 0 <= nj < cols:
                        nbr[i * cols + j, e] = ni * cols + nj
                    e += 1
    return nbr


@njit(cache=True)
def phi_c_full(flat, nbr):
    total = 0
    for c in range(flat.size):
        u = flat[c]
        for e in range(8):
            nb = nbr[c, e]
            if nb >= 0 and flat[nb] == u:
                total += 1
    return total


@njit(cache=True)
def phi_s_full(flat, scores):
    total = 0.0
    for c in range(flat.size):
        total += scores[c, flat[c]]
    return total


@njit(cache=True)
def metropolis_sweeps(flat, scores, nbr, pc, ps, temp, n_sweeps, rng):
    """Run n_sweeps full Metropolis sweeps in place.

    One sweep = one proposal per cell on average; each proposal picks a
    uniform cell and a uniform different use and accepts with
    min(1, exp(-dphi/T)). Returns accumulated (d_phi_c, d_phi_s,
    n_accepted) over all proposals.
    """
    nm = flat.size
    acc_c = 0
    acc_s = 0.0
    n_accept = 0
    remaining = n_sweeps * nm
    while remaining > 0:
        b = min(remaining, _BATCH)
        cells = rng.integers(0, nm, size=b)
        offsets = rng.integers(1, 3, size=b)
        uniforms = rng.random(b)
        for t in range(b):
            c = cells[t]
            k = flat[c]
            kp = (k + offsets[t]) % 3
            n_old = 0
            n_new = 0
            for e in range(8):
                nb = nbr[c, e]
                if nb >= 0:
                    u = flat[nb]
                    if u == k:
                        n_old += 1
                    elif u == kp:
                        n_new += 1
            d_c = 2 * (n_new - n_old)
            d_s = scores[c, kp] - scores[c, k]
            dphi = -pc * d_c - ps * d_s
            if dphi <= 0.0 or uniforms[t] < np.exp(-dphi / temp):
                flat[c] = kp
                acc_c += d_c
                acc_s += d_s
                n_accept += 1
        remaining -= b
    return acc_c, acc_s, n_accept


@njit(cache=True)
def _cluster_steps_impl(
    flat, scores, nbr, pc, ps, temp, n_steps, rng, stack, members, stamps, stamp0
):
    nm = flat.size
    p_bond = 1.0 - np.exp(-2.0 * pc / temp)
    acc_c = 0
    acc_s = 0.0
    n_accept = 0
    stamp = stamp0
    for _ in range(n_steps):
        stamp += 1
        seed = rng.integers(0, nm)
        k = flat[seed]
        kp = (k + 1 + rng.integers(0, 2)) % 3
        top = 0
        stack[top] = seed
        top += 1
        stamps[seed] = stamp
        n_members = 0
        # Grow over same-use Moore bonds; each candidate bond is examined at
        # most once because stamped cells are skipped.
        while top > 0:
            top -= 1
            cur = stack[top]
            members[n_members] = cur
            n_members += 1
            for e in range(8):
                nb = nbr[cur, e]
                if nb >= 0 and flat[nb] == k and stamps[nb] != stamp:
                    if rng.random() < p_bond:
                        stamps[nb] = stamp
                        stack[top] = nb
                        top += 1
        # Suitability change of relabeling the cluster; the compactness part
        # is exactly balanced by the growth rule, so only the field enters
        # the acceptance test.
        d_s = 0.0
        for m in range(n_members):
            cur = members[m]
            d_s += scores[cur, kp] - scores[cur, k]
        dphi_field = -ps * d_s
        if dphi_field <= 0.0 or rng.random() < np.exp(-dphi_field / temp):
            b_old = 0
            b_new = 0
            for m in range(n_members):
                cur = members[m]
                for e in range(8):
                    nb = nbr[cur, e]
                    if nb >= 0 and stamps[nb] != stamp:
                        u = flat[nb]
                        if u == k:
                            b_old += 1
                        elif u == kp:
                            b_new += 1
            for m in range(n_members):
                flat[members[m]] = kp
            acc_c += 2 * (b_new - b_old)
            acc_s += d_s
            n_accept += 1
    return acc_c, acc_s, n_accept, stamp


@njit(cache=True)
def cluster_steps(flat, scores, nbr, pc, ps, temp, n_steps, rng):
    """Run n_steps cluster updates in place; buffers are scratch-allocated.

    Returns accumulated (d_phi_c, d_phi_s, n_accepted).
    """
    nm = flat.size
    stack = np.empty(nm, dtype=np.int64)
    members = np.empty(nm, dtype=np.int64)
    stamps = np.zeros(nm, dtype=np.int64)
    acc_c, acc_s, n_accept, _ = _cluster_steps_impl(
        flat, scores, nbr, pc, ps, temp, n_steps, rng, stack, members, stamps, 0
    )
    return acc_c, acc_s, n_accept


@njit(cache=True)
def _record_sample(flat, scores, nbr, slot, out_maps, out_phi_c, out_phi_s, out_counts):
    n0 = 0
    n1 = 0
    n2 = 0
    for c in range(flat.size):
        u = flat[c]
        out_maps[slot, c] = u
        if u == 0:
            n0 += 1
        elif u == 1:
            n1 += 1
        else:
            n2 += 1
    out_phi_c[slot] = phi_c_full(flat, nbr)
    out_phi_s[slot] = phi_s_full(flat, scores)
    out_counts[slot, 0] = n0
    out_counts[slot, 1] = n1
    out_counts[slot, 2] = n2


@njit(cache=True)
def run_chain_metropolis(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng,
    out_maps, out_phi_c, out_phi_s, out_counts,
):
    """Burn in, then record n_samples states spaced by interval sweeps.

    Recorded objectives are recomputed from scratch at each emission, so the
    records stay exact regardless of accumulated rounding. Returns the
    kernel's accumulated (d_phi_c, d_phi_s) for drift diagnostics.
    """
    acc_c, acc_s, _ = metropolis_sweeps(flat, scores, nbr, pc, ps, temp, burn_in, rng)
    for s in range(n_samples):
        d_c, d_s, _ = metropolis_sweeps(flat, scores, nbr, pc, ps, temp, interval, rng)
        acc_c += d_c
        acc_s += d_s
        _record_sample(flat, scores, nbr, s, out_maps, out_phi_c, out_phi_s, out_counts)
    return acc_c, acc_s


@njit(cache=True)
def run_chain_cluster(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng,
    out_maps, out_phi_c, out_phi_s, out_counts,
):
    """Cluster-engine counterpart of run_chain_metropolis (1 sweep = 1 step)."""
    nm = flat.size
    stack = np.empty(nm, dtype=np.int64)
    members = np.empty(nm, dtype=np.int64)
    stamps = np.zeros(nm, dtype=np.int64)
    acc_c, acc_s, _, stamp = _cluster_steps_impl(
        flat, scores, nbr, pc, ps, temp, burn_in, rng, stack, members, stamps, 0
    )
    for s in range(n_samples):
        d_c, d_s, _, stamp = _cluster_steps_impl(
            flat, scores, nbr, pc, ps, temp, interval, rng, stack, members, stamps, stamp
        )
        acc_c += d_c
        acc_s += d_s
        _record_sample(flat, scores, nbr, s, out_maps, out_phi_c, out_phi_s, out_counts)
    return acc_c, acc_s


@njit(cache=True)
def _encode_state(flat):
    idx = 0
    for c in range(flat.size):
        idx = idx * 3 + flat[c]
    return idx


@njit(cache=True)
def hist_chain_metropolis(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng, counts
):
    """Accumulate per-state visit counts (for grids small enough to index)."""
    metropolis_sweeps(flat, scores, nbr, pc, ps, temp, burn_in, rng)
    for _ in range(n_samples):
        metropolis_sweeps(flat, scores, nbr, pc, ps, temp, interval, rng)
        counts[_encode_state(flat)] += 1


@njit(cache=True)
def hist_chain_cluster(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng, counts
):
    nm = flat.size
    stack = np.empty(nm, dtype=np.int64)
    members = np.empty(nm, dtype=np.int64)
    stamps = np.zeros(nm, dtype=np.int64)
    _, _, _, stamp = _cluster_steps_impl(
        flat, scores, nbr, pc, ps, temp, burn_in, rng, stack, members, stamps, 0
    )
    for _ in range(n_samples):
        _, _, _, stamp = _cluster_steps_impl(
            flat, scores, nbr, pc, ps, temp, interval, rng, stack, members, stamps, stamp
        )
        counts[_encode_state(flat)] += 1


@njit(cache=True)
def run_chain_mixed(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng,
    out_maps, out_phi_c, out_phi_s, out_counts,
):
    """Mixed engine: one sweep = one Metropolis sweep then one cluster step.

    Both kernels preserve the stationary law, so their composition does too;
    single-site moves equilibrate against the field while cluster moves
    relabel whole same-use domains.
    """
    nm = flat.size
    stack = np.empty(nm, dtype=np.int64)
    members = np.empty(nm, dtype=np.int64)
    stamps = np.zeros(nm, dtype=np.int64)
    acc_c = 0
    acc_s = 0.0
    stamp = 0
    for _ in range(burn_in):
        d_c, d_s, _ = metropolis_sweeps(flat, scores, nbr, pc, ps, temp, 1, rng)
        acc_c += d_c
        acc_s += d_s
        d_c, d_s, _, stamp = _cluster_steps_impl(
            flat, scores, nbr, pc, ps, temp, 1, rng, stack, members, stamps, stamp
        )
        acc_c += d_c
        acc_s += d_s
    for s in range(n_samples):
        for _ in range(interval):
            d_c, d_s, _ = metropolis_sweeps(flat, scores, nbr, pc, ps, temp, 1, rng)
            acc_c += d_c
            acc_s += d_s
            d_c, d_s, _, stamp = _cluster_steps_impl(
                flat, scores, nbr, pc, ps, temp, 1, rng, stack, members, stamps, stamp
            )
            acc_c += d_c
            acc_s += d_s
        _record_sample(flat, scores, nbr, s, out_maps, out_phi_c, out_phi_s, out_counts)
    return acc_c, acc_s


@njit(cache=True)
def hist_chain_mixed(
    flat, scores, nbr, pc, ps, temp, burn_in, interval, n_samples, rng, counts
):
    nm = flat.size
    stack = np.empty(nm, dtype=np.int64)
    members = np.empty(nm, dtype=np.int64)
    stamps = np.zeros(nm, dtype=np.int64)
    stamp = 0
    for _ in range(burn_in):
        metropolis_sweeps(flat, scores, nbr, pc, ps, temp, 1, rng)
        _, _, _, stamp = _cluster_steps_impl(
            flat, scores, nbr, pc, ps, temp, 1, rng, stack, members, stamps, stamp
        )
    for _ in range(n_samples):
        for _ in range(interval):
            metropolis_sweeps(flat, scores, nbr, pc, ps, temp, 1, rng)
            _, _, _, stamp = _cluster_steps_impl(
                flat, scores, nbr, pc, ps, temp, 1, rng, stack, members, stamps, stamp
            )
        counts[_encode_state(flat)] += 1
