"""Pure-numpy implementation of the replication kernel."""
import numpy as np

from ._rng import GOLDEN, TO_UNIT, mix64

_BLOCK_ELEMENTS = 1 << 21


def replicate_block(cap, a_out, a_in, load, hours, is_peak, win_lo, win_hi, seed, rep0, rep1,
                    hour_deficit, hour_online, rep_peak, rep_any, rep_hours):
    n_units = cap.shape[0]
    n_hours = hours.shape[0]
    in_window = (hours >= win_lo) & (hours < win_hi)
    avail_prob = np.where(in_window[:, None], a_in[None, :], a_out[None, :])
    counters = (hours.astype(np.uint64)[:, None] * np.uint64(n_units)
                + np.arange(n_units, dtype=np.uint64)[None, :] + np.uint64(1))
    days = hours // 24
    day_starts = np.flatnonzero(np.r_[True, days[1:] != days[:-1]]) if n_hours else np.zeros(0, np.intp)

    block = max(1, _BLOCK_ELEMENTS // max(1, n_hours * n_units))
    for b0 in range(rep0, rep1, block):
        b1 = min(rep1, b0 + block)
        reps = np.arange(b0, b1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            keys = mix64(np.uint64(seed) + GOLDEN * (reps + np.uint64(1)))
            z = mix64(keys[:, None, None] + GOLDEN * counters[None, :, :])
        x = (z >> np.uint64(11)).astype(np.float64) * TO_UNIT
        online = x < avail_prob[None, :, :]

        # sequential unit order keeps float sums identical to the numba path
        avail = np.zeros((b1 - b0, n_hours))
        for u in range(n_units):
            avail += np.where(online[:, :, u], cap[u], 0.0)
        deficit = load[None, :] > avail

        hour_deficit += deficit.sum(axis=0)
        hour_online += online.sum(axis=(0, 2))
        sl = slice(b0 - rep0, b1 - rep0)
        rep_hours[sl] = deficit.sum(axis=1)
        rep_peak[sl] = (deficit & is_peak[None, :]).sum(axis=1)
        if n_hours:
            rep_any[sl] = np.logical_or.reduceat(deficit, day_starts, axis=1).sum(axis=1)
        else:
            rep_any[sl] = 0
