"""Compiled inner loops (numba) for the Riccati iteration and the simulator.

Everything here is deterministic given its inputs: the simulation kernel
consumes a single numpy Generator sequentially, and the Riccati loop is pure
floating-point iteration.  No global state.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def riccati_fixed_point(linv, rhs0, inv_cdn, lam, tol, cap):
    """Monotone fixed-point iteration for the oscillation Riccati equation.

    Solves A_c X + X B_c = rhs0 + lam * X diag(inv_cdn) X starting from
    X = 0, where ``linv`` is the inverse of the column-major Kronecker
    operator I (x) A_c + B_c^T (x) I.  Returns (X, iterations, last_diff).
    Stops on successive-iterate tolerance, on iteration cap, or when the
    diff has stopped improving (machine floor).
    """
    m = rhs0.shape[0]
    mm = m * m
    x = np.zeros((m, m))
    t1 = np.empty((m, m))
    vec = np.empty(mm)
    it = 0
    best = 1e300
    stall = 0
    diff = 1e300
    while it < cap:
        it += 1
        for i in range(m):
            for j in range(m):
                s = 0.0
                for k in range(m):
                    s += x[i, k] * inv_cdn[k] * x[k, j]
                t1[i, j] = rhs0[i, j] + lam * s
        for j in range(m):
            for i in range(m):
                vec[j * m + i] = t1[i, j]
        diff = 0.0
        for j in range(m):
            for i in range(m):
                row = j * m + i
                s = 0.0
                for k in range(mm):
                    s += linv[row, k] * vec[k]
                d = abs(s - x[i, j])
                if d > diff:
                    diff = d
                x[i, j] = s
        if diff <= tol:
            break
        if diff < best:
            best = diff
            stall = 0
        else:
            stall += 1
            if stall >= 30:
                break
    return x, it, diff


@njit(cache=True)
def simulate_path(gen, horizon, warmup, grid, mu, sigma, lam, q_rate,
                  q_off, mv_thresh, bd_rate, bd_thresh, bd_exit_phase,
                  bd_kappa, occ, full, zero_t, phase_t, regen_count):
    """Run one exact flip-flop path and accumulate occupation statistics.

    State is (level, kappa, phase) with kappa = 1 moving up, 2 moving down.
    Interior events compete: phase-process event (total rate lam + sum of
    off-diagonal Q row), hit of level 0 (deterministic given the slope),
    regeneration-timer expiry.  Ties resolve timer first, then hit; both
    are measure-zero.  Whether a phase event flips kappa or moves the phase
    is decided by a geometric countdown: event identities are independent
    Bernoulli draws, so the number of flips before the next move is
    geometric and survives interruptions by hits or boundary sojourns; the
    countdown is redrawn whenever the phase changes.  At level 0 the
    outcome tables (bd_*) encode the boundary behavior: row i holds the
    cumulative-exponential thresholds of the competing boundary outcomes,
    bd_exit_phase the target phase and bd_kappa the target kappa of each.

    Occupation below each grid level is accounted exactly per linear
    segment.  ``idx`` maintains the invariant "first grid index with
    grid[idx] >= current level" at all times; a segment that crosses no
    grid point only extends a register accumulator, flushed into ``full``
    (a suffix mark: cumulative sum over the grid axis gives the total time
    fully below each level) whenever the target (phase, index) cell
    changes.  Crossing segments write the partial times into ``occ``.
    The first ``warmup`` time units are excluded from all accumulators and
    regeneration cycles are counted only when they start after the warmup.

    Returns (n_cycles, cycle_sum, cycle_sumsq).
    """
    m = mu.shape[0]
    ng = grid.shape[0]
    sq = np.sqrt(lam)
    c_arr = np.empty((2, m))
    inv_abs = np.empty((2, m))
    inv_r = np.empty(m)
    inv_log1m = np.empty(m)  # 1 / log(1 - p_move); 0 marks "no moves"
    for i in range(m):
        c_arr[0, i] = mu[i] + sigma[i] * sq
        c_arr[1, i] = mu[i] - sigma[i] * sq
        inv_abs[0, i] = 1.0 / c_arr[0, i]
        inv_abs[1, i] = -1.0 / c_arr[1, i]
        s = 0.0
        for j in range(m):
            s += q_off[i, j]
        inv_r[i] = 1.0 / (lam + s)
        if s > 0.0:
            inv_log1m[i] = 1.0 / np.log1p(-s * inv_r[i])
        else:
            inv_log1m[i] = 0.0
    inv_bd = np.empty(m)
    for i in range(m):
        s = 0.0
        for k in range(bd_rate.shape[1]):
            s += bd_rate[i, k]
        inv_bd[i] = 1.0 / s
    inv_q = 1.0 / q_rate
    never = np.int64(2**62)

    t = 0.0
    y = 0.0
    kappa = 2
    phi = 0
    deadline = gen.standard_exponential() * inv_q
    expired = False
    last_regen = 0.0
    n_cycles = 0
    cyc_sum = 0.0
    cyc_sq = 0.0
    idx = 0  # first grid index with grid[idx] >= y, maintained throughout
    c = c_arr[1, phi]
    iac = inv_abs[1, phi]
    ir = inv_r[phi]
    if inv_log1m[phi] != 0.0:
        flips_left = np.int64(np.log(1.0 - gen.random()) * inv_log1m[phi])
    else:
        flips_left = never
    # register accumulators: time fully below grid[cur_j] in phase cur_phi,
    # and time in phase pphi
    acc = 0.0
    cur_phi = 0
    cur_j = 0
    pacc = 0.0
    pphi = 0

    while t < horizon:
        if kappa == 2 and y <= 0.0:
            y = 0.0
            dt = gen.standard_exponential() * inv_bd[phi]
            t_next = t + dt
            if t_next > horizon:
                t_next = horizon
            regen_now = (not expired) and deadline <= t_next
            if regen_now:
                t_next = deadline
            if t_next > warmup:
                a = t if t > warmup else warmup
                d = t_next - a
                zero_t[phi] += d
                pacc += d
                if phi != cur_phi or cur_j != 0:
                    if acc != 0.0:
                        full[cur_phi, cur_j] += acc
                        acc = 0.0
                    cur_phi = phi
                    cur_j = 0
                acc += d
            t = t_next
            if regen_now:
                # timer fired while at the boundary: immediate regeneration
                if last_regen >= warmup:
                    n_cycles += 1
                    cc = t - last_regen
                    cyc_sum += cc
                    cyc_sq += cc * cc
                    regen_count[phi] += 1.0
                last_regen = t
                deadline = t + gen.standard_exponential() * inv_q
                expired = False
                continue
            if t >= horizon:
                break
            e = gen.standard_exponential()
            k = 0
            while e >= bd_thresh[phi, k]:
                k += 1
            kappa = bd_kappa[phi, k]
            new_phi = bd_exit_phase[phi, k]
            if new_phi != phi:
                phase_t[pphi] += pacc
                pacc = 0.0
                pphi = new_phi
                phi = new_phi
                ir = inv_r[phi]
                if inv_log1m[phi] != 0.0:
                    flips_left = np.int64(np.log(1.0 - gen.random()) * inv_log1m[phi])
                else:
                    flips_left = never
            c = c_arr[kappa - 1, phi]
            iac = inv_abs[kappa - 1, phi]
        else:
            dt = gen.standard_exponential() * ir
            kind = 0  # 0 phase event, 1 hit of 0, 2 timer expiry, 3 horizon
            y1 = y + c * dt
            if kappa == 2 and y1 <= 0.0:
                dt = y * iac
                kind = 1
            if not expired:
                dt_tm = deadline - t
                if dt_tm <= dt:
                    dt = dt_tm
                    kind = 2
                    y1 = y + c * dt
            t_next = t + dt
            if t_next >= horizon:
                dt = horizon - t
                t_next = horizon
                kind = 3
                y1 = y + c * dt
            if kind == 1:
                y1 = 0.0
            if t >= warmup:
                pacc += dt
                if y1 > y:
                    if idx < ng:
                        if y1 <= grid[idx]:
                            if phi != cur_phi or idx != cur_j:
                                if acc != 0.0:
                                    full[cur_phi, cur_j] += acc
                                    acc = 0.0
                                cur_phi = phi
                                cur_j = idx
                            acc += dt
                        else:
                            if acc != 0.0:
                                full[cur_phi, cur_j] += acc
                                acc = 0.0
                            j = idx
                            while j < ng and grid[j] < y1:
                                occ[phi, j] += (grid[j] - y) * iac
                                j += 1
                            idx = j
                            if j < ng:
                                cur_phi = phi
                                cur_j = j
                                acc = dt
                    # idx == ng: the whole segment lies above every grid level
                else:
                    if idx >= ng:
                        if grid[ng - 1] >= y1:
                            if acc != 0.0:
                                full[cur_phi, cur_j] += acc
                                acc = 0.0
                            while idx > 0 and grid[idx - 1] >= y1:
                                idx -= 1
                            j = idx
                            while j < ng and grid[j] < y:
                                occ[phi, j] += (grid[j] - y1) * iac
                                j += 1
                            if j < ng:
                                cur_phi = phi
                                cur_j = j
                                acc = dt
                    elif idx == 0 or grid[idx - 1] < y1:
                        if phi != cur_phi or idx != cur_j:
                            if acc != 0.0:
                                full[cur_phi, cur_j] += acc
                                acc = 0.0
                            cur_phi = phi
                            cur_j = idx
                        acc += dt
                    else:
                        if acc != 0.0:
                            full[cur_phi, cur_j] += acc
                            acc = 0.0
                        while idx > 0 and grid[idx - 1] >= y1:
                            idx -= 1
                        j = idx
                        while j < ng and grid[j] < y:
                            occ[phi, j] += (grid[j] - y1) * iac
                            j += 1
                        if j < ng:
                            cur_phi = phi
                            cur_j = j
                            acc = dt
            elif t_next > warmup:
                # segment straddles the warm-up end: account the tail only
                d = t_next - warmup
                pacc += d
                y0a = y + c * (warmup - t)
                if y0a < y1:
                    lo = y0a
                    hi = y1
                else:
                    lo = y1
                    hi = y0a
                if acc != 0.0:
                    full[cur_phi, cur_j] += acc
                    acc = 0.0
                while idx > 0 and grid[idx - 1] >= lo:
                    idx -= 1
                while idx < ng and grid[idx] < lo:
                    idx += 1
                j = idx
                while j < ng and grid[j] < hi:
                    occ[phi, j] += (grid[j] - lo) * iac
                    j += 1
                if j < ng:
                    cur_phi = phi
                    cur_j = j
                    acc = d
                while idx < ng and grid[idx] < y1:
                    idx += 1
                while idx > 0 and grid[idx - 1] >= y1:
                    idx -= 1
            else:
                # before warm-up: no accounting, but keep the idx invariant
                while idx < ng and grid[idx] < y1:
                    idx += 1
                while idx > 0 and grid[idx - 1] >= y1:
                    idx -= 1
            y = y1
            t = t_next
            if kind == 3:
                break
            if kind == 2:
                expired = True
            elif kind == 1:
                if expired:
                    if last_regen >= warmup:
                        n_cycles += 1
                        cc = t - last_regen
                        cyc_sum += cc
                        cyc_sq += cc * cc
                        regen_count[phi] += 1.0
                    last_regen = t
                    deadline = t + gen.standard_exponential() * inv_q
                    expired = False
            else:
                if flips_left > 0:
                    flips_left -= 1
                    kappa = 3 - kappa
                    c = c_arr[kappa - 1, phi]
                    iac = inv_abs[kappa - 1, phi]
                else:
                    e = gen.standard_exponential()
                    k = 0
                    while e >= mv_thresh[phi, k]:
                        k += 1
                    j = k
                    if j >= phi:
                        j += 1
                    phase_t[pphi] += pacc
                    pacc = 0.0
                    pphi = j
                    phi = j
                    ir = inv_r[phi]
                    if inv_log1m[phi] != 0.0:
                        flips_left = np.int64(np.log(1.0 - gen.random()) * inv_log1m[phi])
                    else:
                        flips_left = never
                    c = c_arr[kappa - 1, phi]
                    iac = inv_abs[kappa - 1, phi]
    if acc != 0.0:
        full[cur_phi, cur_j] += acc
    phase_t[pphi] += pacc
    return n_cycles, cyc_sum, cyc_sq