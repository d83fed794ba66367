"""Numba inner loops for Gibbs sampling and embedding training.

All randomness flows through the explicit-state LCG from `rng`, so a
pure-Python caller holding the same seed can replay every draw a kernel
makes (the oracle tests do exactly that). uint64 arithmetic wraps, which
is the intended modular behavior.
"""

import math

import numpy as np
from numba import njit

from .rng import LCG_A_U64, LCG_C_U64

_SH11 = np.uint64(11)
_SH16 = np.uint64(16)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _next(state):
    return state * LCG_A_U64 + LCG_C_U64


@njit(cache=True, inline="always")
def _unit(state):
    """Uniform double in [0, 1) from a freshly advanced state."""
    return np.float64(state >> _SH11) * _INV53


# ---------------------------------------------------------------------------
# Collapsed Gibbs sampling
# ---------------------------------------------------------------------------

@njit(cache=True)
def gibbs_conditional(doc_counts, word_counts, n_z, alpha, beta, vocab_size):
    """Unnormalized full-conditional topic weights for one token, with the
    token's own counts already removed."""
    k = n_z.shape[0]
    out = np.empty(k, dtype=np.float64)
    vbeta = vocab_size * beta
    for j in range(k):
        out[j] = (doc_counts[j] + alpha) * (word_counts[j] + beta) / (n_z[j] + vbeta)
    return out


@njit(cache=True)
def gibbs_init(tokens, doc_of, k, z, n_wz, n_dz, n_z, state):
    """Assign a uniform random topic to every token and build count tables."""
    usize = np.uint64(k)
    for idx in range(tokens.shape[0]):
        state = _next(state)
        j = np.int32((state >> _SH16) % usize)
        z[idx] = j
        n_wz[tokens[idx], j] += 1
        n_dz[doc_of[idx], j] += 1
        n_z[j] += 1
    return state


@njit(cache=True)
def gibbs_sweeps(tokens, doc_of, z, n_wz, n_dz, n_z, alpha, beta, sweeps, state):
    """Run `sweeps` full passes of collapsed Gibbs resampling in place."""
    V = n_wz.shape[0]
    k = n_wz.shape[1]
    vbeta = V * beta
    cum = np.empty(k, dtype=np.float64)
    for _ in range(sweeps):
        for idx in range(tokens.shape[0]):
            w = tokens[idx]
            d = doc_of[idx]
            old = z[idx]
            n_wz[w, old] -= 1
            n_dz[d, old] -= 1
            n_z[old] -= 1
            total = 0.0
            for j in range(k):
                total += (n_dz[d, j] + alpha) * (n_wz[w, j] + beta) / (n_z[j] + vbeta)
                cum[j] = total
            state = _next(state)
            r = _unit(state) * total
            new = 0
            while new < k - 1 and r >= cum[new]:
                new += 1
            z[idx] = new
            n_wz[w, new] += 1
            n_dz[d, new] += 1
            n_z[new] += 1
    return state


@njit(cache=True)
def gibbs_fold_in(tokens, n_wz, n_z, alpha, beta, iterations, burn_in, state):
    """Infer a topic distribution for an unseen token sequence.

    Global word-topic counts stay fixed; only local document counts move.
    Returns the smoothed theta averaged over post-burn-in sweeps.
    """
    V = n_wz.shape[0]
    k = n_wz.shape[1]
    vbeta = V * beta
    n_tok = tokens.shape[0]
    local = np.zeros(k, dtype=np.int64)
    zloc = np.empty(n_tok, dtype=np.int32)
    usize = np.uint64(k)
    for i in range(n_tok):
        state = _next(state)
        j = np.int32((state >> _SH16) % usize)
        zloc[i] = j
        local[j] += 1
    cum = np.empty(k, dtype=np.float64)
    theta = np.zeros(k, dtype=np.float64)
    n_avg = 0
    denom = n_tok + k * alpha
    for s in range(iterations):
        for i in range(n_tok):
            w = tokens[i]
            old = zloc[i]
            local[old] -= 1
            total = 0.0
            for j in range(k):
                total += (local[j] + alpha) * (n_wz[w, j] + beta) / (n_z[j] + vbeta)
                cum[j] = total
            state = _next(state)
            r = _unit(state) * total
            new = 0
            while new < k - 1 and r >= cum[new]:
                new += 1
            zloc[i] = new
            local[new] += 1
        if s >= burn_in:
            for j in range(k):
                theta[j] += (local[j] + alpha) / denom
            n_avg += 1
    for j in range(k):
        theta[j] /= n_avg
    return theta, state


# ---------------------------------------------------------------------------
# Skip-gram negative-sampling trainer
# ---------------------------------------------------------------------------

def make_sigmoid_table():
    """Logistic values on [-6, 6] at 1e-3 resolution (12001 entries)."""
    x = np.linspace(-6.0, 6.0, 12001)
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True, inline="always")
def _sigmoid_exact(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, inline="always")
def _log_sigmoid_exact(x):
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@njit(cache=True, inline="always")
def _sigmoid_table(x, table):
    if x <= -6.0:
        return table[0]
    if x >= 6.0:
        return table[12000]
    return table[int((x + 6.0) * 1000.0 + 0.5)]


@njit(cache=True, nogil=True)
def sgns_epoch(
    tokens,
    offsets,
    d_start,
    d_end,
    theta,
    sense2d,
    global_vecs,
    mask,
    window,
    n_neg,
    noise_table,
    lr0,
    lr_floor,
    pairs_done,
    total_pairs,
    state,
    use_table,
    sig_table,
    mixture,
    losses_out,
    collect,
):
    """One pass over documents [d_start, d_end) with sparse SGD updates.

    sense2d is the (V*k, n) view of the sense tensor; row w*k+i holds word
    w's sense i. Gradients for a pair are computed entirely from pre-update
    values (phase 1 caches the logistic terms), then applied. Masked-out
    sense rows are never touched. With mixture=False each sense's loss is
    weighted by the document's (renormalized) topic weight; with
    mixture=True the loss is -log of the weight-mixed pair likelihood and
    the per-sense gradient weights become the posterior responsibilities.
    Requires theta rows to put positive mass on every word's mask (true
    for smoothed topic distributions).
    """
    k = mask.shape[1]
    n = global_vecs.shape[1]
    n_targets = n_neg + 1
    tsize = np.uint64(noise_table.shape[0])
    d_sense = np.empty(n, dtype=np.float64)
    d_tgt = np.empty((n_targets, n), dtype=np.float64)
    targets = np.empty(n_targets, dtype=np.int64)
    sig_buf = np.empty((k, n_targets), dtype=np.float64)
    log_p = np.empty(k, dtype=np.float64)
    w_eff = np.empty(k, dtype=np.float64)
    loss_sum = 0.0
    n_pairs = 0
    lr_min = lr0 * lr_floor
    for d in range(d_start, d_end):
        start = offsets[d]
        end = offsets[d + 1]
        for t in range(start, end):
            center = tokens[t]
            wsum = 0.0
            for i in range(k):
                if mask[center, i] != 0:
                    wsum += theta[d, i]
            for off in range(-window, window + 1):
                if off == 0:
                    continue
                pos = t + off
                if pos < start or pos >= end:
                    continue
                context = tokens[pos]

                lr = lr0 * (1.0 - pairs_done / total_pairs)
                if lr < lr_min:
                    lr = lr_min

                # negatives: rejection of the positive word, bounded retries
                targets[0] = context
                for slot in range(n_neg):
                    cand = np.int64(context)
                    for _ in range(100):
                        state = _next(state)
                        cand = np.int64(noise_table[(state >> _SH16) % tsize])
                        if cand != context:
                            break
                    targets[slot + 1] = cand

                # phase 1: logistic terms and per-sense log-likelihoods
                for i in range(k):
                    if mask[center, i] == 0 or theta[d, i] == 0.0:
                        continue
                    srow = center * k + i
                    lp = 0.0
                    for row in range(n_targets):
                        u = targets[row]
                        dot = 0.0
                        for x in range(n):
                            dot += sense2d[srow, x] * global_vecs[u, x]
                        if use_table:
                            s = _sigmoid_table(dot, sig_table)
                            if row == 0:
                                lp += math.log(s)
                            else:
                                lp += math.log(_sigmoid_table(-dot, sig_table))
                        else:
                            s = _sigmoid_exact(dot)
                            if row == 0:
                                lp += _log_sigmoid_exact(dot)
                            else:
                                lp += _log_sigmoid_exact(-dot)
                        sig_buf[i, row] = s
                    log_p[i] = lp

                # per-sense gradient weights and the pair loss
                pair_loss = 0.0
                if mixture:
                    peak = -np.inf
                    for i in range(k):
                        if mask[center, i] == 0 or theta[d, i] == 0.0:
                            continue
                        v = math.log(theta[d, i] / wsum) + log_p[i]
                        w_eff[i] = v
                        if v > peak:
                            peak = v
                    norm = 0.0
                    for i in range(k):
                        if mask[center, i] == 0 or theta[d, i] == 0.0:
                            continue
                        w_eff[i] = math.exp(w_eff[i] - peak)
                        norm += w_eff[i]
                    pair_loss = -(peak + math.log(norm))
                    for i in range(k):
                        if mask[center, i] == 0 or theta[d, i] == 0.0:
                            continue
                        w_eff[i] /= norm
                else:
                    for i in range(k):
                        if mask[center, i] == 0 or theta[d, i] == 0.0:
                            continue
                        w_eff[i] = theta[d, i] / wsum
                        pair_loss -= w_eff[i] * log_p[i]

                # phase 2: apply sparse updates from pre-update values
                for row in range(n_targets):
                    for x in range(n):
                        d_tgt[row, x] = 0.0
                for i in range(k):
                    if mask[center, i] == 0 or theta[d, i] == 0.0:
                        continue
                    wi = w_eff[i]
                    srow = center * k + i
                    for x in range(n):
                        d_sense[x] = 0.0
                    for row in range(n_targets):
                        u = targets[row]
                        if row == 0:
                            g = wi * (1.0 - sig_buf[i, row])
                        else:
                            g = -wi * sig_buf[i, row]
                        for x in range(n):
                            d_sense[x] += g * global_vecs[u, x]
                            d_tgt[row, x] += g * sense2d[srow, x]
                    for x in range(n):
                        sense2d[srow, x] += lr * d_sense[x]
                for row in range(n_targets):
                    u = targets[row]
                    for x in range(n):
                        global_vecs[u, x] += lr * d_tgt[row, x]

                if collect:
                    losses_out[n_pairs] = pair_loss
                loss_sum += pair_loss
                n_pairs += 1
                pairs_done += 1
    return state, pairs_done, loss_sum, n_pairs
