"""Compiled inner loops: genome decoding, brain updates, and whole episodes.

Networks travel as five parallel arrays (n_in, n_out, ins, outs, table),
with one row per gate. All functions release the GIL so fitness
evaluation can fan out over threads.
"""

import numpy as np
from numba import njit

CODON_A = 42
CODON_B = 213
GENE_BYTES = 28
MAX_IO = 4
TABLE_BYTES = 16

SIDE = 28
N_SENSORS = 13
MOTOR_V = 13
MOTOR_H = 14
GUESS0 = 15
VETO0 = 25
DONE = 35
N_STATES = 64
SACCADE = 3

# Per-image scores are 1/k for k in 1..10; 2520 = lcm(1..10) keeps sums integral.
SCORE_DENOM = 2520


@njit(cache=True, nogil=True)
def decode(genome):
    n = genome.shape[0]
    count = 0
    for p in range(n - GENE_BYTES + 1):
        if genome[p] == CODON_A and genome[p + 1] == CODON_B:
            count += 1
    n_in = np.empty(count, np.int64)
    n_out = np.empty(count, np.int64)
    ins = np.zeros((count, MAX_IO), np.int64)
    outs = np.zeros((count, MAX_IO), np.int64)
    table = np.zeros((count, TABLE_BYTES), np.int64)
    g = 0
    for p in range(n - GENE_BYTES + 1):
        if genome[p] != CODON_A or genome[p + 1] != CODON_B:
            continue
        ni = 1 + genome[p + 2] % 4
        no = 1 + genome[p + 3] % 4
        n_in[g] = ni
        n_out[g] = no
        for j in range(ni):
            ins[g, j] = genome[p + 4 + j] % 64
        for j in range(no):
            outs[g, j] = genome[p + 8 + j] % 64
        for j in range(1 << ni):
            table[g, j] = genome[p + 12 + j] % (1 << no)
        g += 1
    return n_in, n_out, ins, outs, table


@njit(cache=True, nogil=True)
def step_into(n_in, n_out, ins, outs, table, s, out):
    out[:] = 0
    for g in range(n_in.shape[0]):
        idx = 0
        for j in range(n_in[g]):
            idx |= s[ins[g, j]] << j
        entry = table[g, idx]
        for j in range(n_out[g]):
            if (entry >> j) & 1:
                out[outs[g, j]] = 1


@njit(cache=True, nogil=True)
def sense_into(img, x, y, s):
    for r in range(3):
        for c in range(3):
            yy = y + r - 1
            xx = x + c - 1
            if 0 <= yy < SIDE and 0 <= xx < SIDE:
                s[3 * r + c] = img[yy, xx]
            else:
                s[3 * r + c] = 0
    hit = 0
    for xx in range(x + 2, SIDE):
        if img[y, xx]:
            hit = 1
            break
    s[9] = hit
    hit = 0
    for yy in range(y - 2, -1, -1):
        if img[yy, x]:
            hit = 1
            break
    s[10] = hit
    hit = 0
    for xx in range(x - 2, -1, -1):
        if img[y, xx]:
            hit = 1
            break
    s[11] = hit
    hit = 0
    for yy in range(y + 2, SIDE):
        if img[yy, x]:
            hit = 1
            break
    s[12] = hit


@njit(cache=True, nogil=True)
def episode(n_in, n_out, ins, outs, table, img, x, y, max_steps, trace):
    """Run one episode; returns (steps_used, done_fired, guess_mask).

    ``trace`` must have shape (max_steps, 2) to record the sensing position
    (x, y) of every step, or shape (0, 2) to skip recording.
    """
    s = np.zeros(N_STATES, np.int64)
    nxt = np.zeros(N_STATES, np.int64)
    record = trace.shape[0] > 0
    for t in range(1, max_steps + 1):
        sense_into(img, x, y, s)
        if record:
            trace[t - 1, 0] = x
            trace[t - 1, 1] = y
        step_into(n_in, n_out, ins, outs, table, s, nxt)
        s, nxt = nxt, s
        if s[DONE] == 1 or t == max_steps:
            mask = 0
            for c in range(10):
                if s[GUESS0 + c] == 1 and s[VETO0 + c] == 0:
                    mask |= 1 << c
            return t, s[DONE] == 1, mask
        x += SACCADE if s[MOTOR_H] else -SACCADE
        y += SACCADE if s[MOTOR_V] else -SACCADE
        x = min(max(x, 0), SIDE - 1)
        y = min(max(y, 0), SIDE - 1)
    return 0, False, 0


@njit(cache=True, nogil=True)
def score_images(n_in, n_out, ins, outs, table, images, labels, starts, max_steps, scores, steps):
    """Fill per-image score numerators (over SCORE_DENOM) and step counts."""
    empty = np.zeros((0, 2), np.int64)
    for i in range(images.shape[0]):
        t, done, mask = episode(n_in, n_out, ins, outs, table, images[i],
                                starts[i, 0], starts[i, 1], max_steps, empty)
        steps[i] = t
        k = 0
        for c in range(10):
            k += (mask >> c) & 1
        if (mask >> labels[i]) & 1:
            scores[i] = SCORE_DENOM // k
        else:
            scores[i] = 0


@njit(cache=True, nogil=True)
def run_traced(n_in, n_out, ins, outs, table, images, starts, max_steps, masks, steps, traces):
    for i in range(images.shape[0]):
        t, done, mask = episode(n_in, n_out, ins, outs, table, images[i],
                                starts[i, 0], starts[i, 1], max_steps, traces[i])
        steps[i] = t
        masks[i] = mask
