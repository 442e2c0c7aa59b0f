"""Pure-Python Metropolis inner loop.

Used for arbitrary target callables, and for the logistic target when the
compiled extension is unavailable.  Random numbers are consumed in the
same order as ``_ckernel`` and every floating point operation happens in
the same order, so for :class:`~metropolis_epi.target.LogisticPosterior`
both backends produce identical chains from the same generator state.
"""

import math

import numpy as np

_NEG_INF = -math.inf


def log_acceptance(candidate_log_post, current_log_post):
    diff = candidate_log_post - current_log_post
    if diff != diff:
        # NaN candidate density: treat as zero density
        return _NEG_INF
    return diff if diff < 0.0 else 0.0


def accept(u, candidate_log_post, current_log_post):
    log_u = math.log(u) if u > 0.0 else _NEG_INF
    return log_u < log_acceptance(candidate_log_post, current_log_post)


def run_segment(target, cur, cur_lp, signs, chol, scale, guided, n, rng, draws, lps, moves):
    """Advance ``n`` iterations, writing into ``draws``, ``lps`` and ``moves``.

    ``cur`` and ``signs`` are updated in place; returns the final log density.
    Guided iterations sweep the components in order, each with its own
    proposal, uniform draw and direction flip on rejection.
    """
    d = cur.shape[0]
    x = [float(v) for v in cur]
    s = [float(v) for v in signs]
    L = chol.tolist()
    sc = [float(v) for v in scale]
    normal = rng.standard_normal
    uniform = rng.random
    for j in range(n):
        if guided:
            for k in range(d):
                z = normal()
                cand = list(x)
                cand[k] = x[k] + s[k] * abs(sc[k] * z)
                lp_c = target(np.array(cand))
                u = uniform()
                if accept(u, lp_c, cur_lp):
                    x = cand
                    cur_lp = lp_c
                    moves[j, k] = True
                else:
                    s[k] = -s[k]
        else:
            z = [normal() for _ in range(d)]
            cand = []
            for k in range(d):
                acc = 0.0
                row = L[k]
                for m in range(k + 1):
                    acc += row[m] * z[m]
                cand.append(x[k] + acc)
            lp_c = target(np.array(cand))
            u = uniform()
            if accept(u, lp_c, cur_lp):
                x = cand
                cur_lp = lp_c
                moves[j, :] = True
        draws[j] = x
        lps[j] = cur_lp
    cur[:] = x
    signs[:] = s
    return cur_lp


def calibrate_offsets(b0, b1, incidence, p1, lo=-40.0, hi=10.0, max_iter=200):
    """Vectorised bisection for the intercept shift; see ``estimands``.

    Returns ``(offsets, ok)`` where ``ok`` is False for draws whose target
    incidence lies outside the bracket.
    """
    b0 = np.asarray(b0, dtype=np.float64)
    b1 = np.asarray(b1, dtype=np.float64)

    def resid(delta):
        return (1.0 - p1) * _expit(b0 + delta) + p1 * _expit(b0 + delta + b1) - incidence

    lo_arr = np.full(b0.shape, lo)
    hi_arr = np.full(b0.shape, hi)
    ok = (resid(lo_arr) < 0.0) & (resid(hi_arr) > 0.0)
    for _ in range(max_iter):
        mid = 0.5 * (lo_arr + hi_arr)
        done = (mid == lo_arr) | (mid == hi_arr)
        if done.all():
            break
        below = resid(mid) < 0.0
        lo_arr = np.where(below & ~done, mid, lo_arr)
        hi_arr = np.where(~below & ~done, mid, hi_arr)
    mid = 0.5 * (lo_arr + hi_arr)
    return mid, ok


def rd_draws(b0, b1, offsets, incidence, p1):
    """Risk differences and calibration residuals for each draw."""
    low = _expit(np.asarray(b0) + offsets)
    high = _expit(np.asarray(b0) + offsets + b1)
    return high - low, (1.0 - p1) * low + p1 * high - incidence


def _expit(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out
