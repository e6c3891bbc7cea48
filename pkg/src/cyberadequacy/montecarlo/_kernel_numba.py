"""numba implementation of the replication kernel.

Mirrors :mod:`._kernel_numpy` draw for draw; both must stay bit-identical.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_TO_UNIT = 1.0 / 9007199254740992.0


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(nogil=True, cache=True)
def replicate_block(cap, a_out, a_in, load, hours, is_peak, win_lo, win_hi, seed, rep0, rep1,
                    hour_deficit, hour_online, rep_peak, rep_any, rep_hours):
    n_units = cap.shape[0]
    n_hours = hours.shape[0]
    nu = np.uint64(n_units)
    for r in range(rep0, rep1):
        key = _mix64(seed + _GOLDEN * (np.uint64(r) + _ONE))
        i = r - rep0
        peak_days = 0
        any_days = 0
        deficit_hours = 0
        cur_day = -1
        day_hit = False
        for j in range(n_hours):
            h = hours[j]
            day = h // 24
            if day != cur_day:
                if day_hit:
                    any_days += 1
                cur_day = day
                day_hit = False
            in_window = win_lo <= h < win_hi
            base = np.uint64(h) * nu
            avail = 0.0
            online = 0
            for u in range(n_units):
                a = a_in[u] if in_window else a_out[u]
                z = _mix64(key + _GOLDEN * (base + np.uint64(u) + _ONE))
                x = np.float64(z >> np.uint64(11)) * _TO_UNIT
                if x < a:
                    avail += cap[u]
                    online += 1
            hour_online[j] += online
            if load[j] > avail:
                hour_deficit[j] += 1
                deficit_hours += 1
                day_hit = True
                if is_peak[j]:
                    peak_days += 1
        if day_hit:
            any_days += 1
        rep_peak[i] = peak_days
        rep_any[i] = any_days
        rep_hours[i] = deficit_hours
