"""Analytic loss-of-load indices computed from a COPT.

A load is lost only on a strict shortfall: ``available < load``.  Equal
available capacity and load counts as served.
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fleet import DAYS_PER_YEAR

_CROSS_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class LoleBreakdown:
    """LOLE with its per-state decomposition ``sum(P_i * D_i)``.

    ``per_state_contrib`` holds ``(outage_mw, P_i, D_i)`` triples, ``D_i`` in
    days/year.
    """

    lole_days_per_year: float
    lole_hours_per_year: float
    method: str
    per_state_contrib: tuple

    def to_dict(self):
        return {
            "lole_days_per_year": self.lole_days_per_year,
            "lole_hours_per_year": self.lole_hours_per_year,
            "method": self.method,
            "per_state_contrib": [
                {"outage_mw": o, "prob": p, "duration_days": d} for o, p, d in self.per_state_contrib
            ],
        }

    def to_json(self, dest=None):
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text


def _sorted_by_available(copt):
    order = np.argsort(copt.available, kind="stable")
    return copt.available[order], copt.prob[order]


def lolp_curve(copt, loads):
    """Vectorised :func:`lolp_at_load` over an array of loads."""
    loads = np.asarray(loads, dtype=np.float64)
    if np.any(loads < 0):
        raise DomainError("load must be >= 0")
    avail, prob = _sorted_by_available(copt)
    cdf = np.concatenate([[0.0], np.cumsum(prob)])
    # number of states with available < load
    idx = np.searchsorted(avail, loads, side="left")
    # every state short: exactly 1, not a rounded partial sum
    return np.where(idx == avail.size, 1.0, np.minimum(cdf[idx], 1.0))


def lolp_at_load(copt, load):
    """``P(available < load)``, ties counting as served.

    Evaluated as a prefix sum in order of available capacity, so the result is
    non-decreasing in ``load`` even at the last bit.
    """
    if not load >= 0:
        raise DomainError(f"load must be >= 0, got {load!r}")
    return float(lolp_curve(copt, [load])[0])


def _breakdown(copt, loads, method, per_day_scale):
    """Shared ``sum(P_i * D_i)`` evaluation.

    ``loads`` are the demand points (daily peaks or hours); ``per_day_scale``
    converts a count of points into days.
    """
    loads = np.asarray(loads, dtype=np.float64)
    sorted_loads = np.sort(loads)
    # points whose load strictly exceeds each state's available capacity
    exceed = loads.size - np.searchsorted(sorted_loads, copt.available, side="right")
    durations = exceed * per_day_scale
    # cannot exceed the number of days; only rounding in sum(P_i) gets past it
    lole_days = min(float(np.dot(copt.prob, durations)), loads.size * per_day_scale)

    by_point = float(np.sum(lolp_curve(copt, loads))) * per_day_scale
    if not math.isclose(lole_days, by_point, rel_tol=_CROSS_CHECK_TOL, abs_tol=_CROSS_CHECK_TOL):
        raise RuntimeError(f"{method} LOLE cross-check failed: {lole_days!r} vs {by_point!r}")
    contrib = tuple(zip(copt.outage.tolist(), copt.prob.tolist(), durations.tolist()))
    return LoleBreakdown(lole_days, lole_days * 24.0, method, contrib)


def lole_daily_peak(copt, profile):
    """Days/year on which the daily peak load exceeds available capacity.

    ``D_i`` counts days whose peak exceeds state ``i``'s available capacity;
    the result is also checked against the per-day sum of LOLP at each peak.
    """
    return _breakdown(copt, profile.daily_peaks, "daily_peak", 1.0)


def lole_hourly(copt, profile):
    """Hourly LOLE; ``lole_days_per_year`` is the hour total divided by 24."""
    return _breakdown(copt, profile.hourly_load, "hourly", 1.0 / 24.0)


def eens(copt, profile):
    """Expected energy not served, MWh/year."""
    avail, prob = _sorted_by_available(copt)
    cdf = np.concatenate([[0.0], np.cumsum(prob)])
    first_moment = np.concatenate([[0.0], np.cumsum(prob * avail)])
    loads = profile.hourly_load
    idx = np.searchsorted(avail, loads, side="left")
    # E[max(0, L - A)] = L * P(A < L) - E[A; A < L]
    per_hour = loads * cdf[idx] - first_moment[idx]
    return float(np.sum(np.maximum(per_hour, 0.0)))


def expected_lole_mixture(lole_base, lole_cyber, p_disruption):
    """Mix two LOLE values by the probability that the attack succeeds."""
    if not (0.0 <= p_disruption <= 1.0):
        raise DomainError(f"p_disruption must lie in [0, 1], got {p_disruption!r}")
    if lole_base < 0 or lole_cyber < 0:
        raise DomainError("LOLE values must be non-negative")
    return p_disruption * lole_cyber + (1.0 - p_disruption) * lole_base


__all__ = [
    "DAYS_PER_YEAR",
    "LoleBreakdown",
    "eens",
    "expected_lole_mixture",
    "lole_daily_peak",
    "lole_hourly",
    "lolp_at_load",
    "lolp_curve",
]
