"""Seeded Monte Carlo year simulation under a timed cyber-attack window.

Each unit is online in hour ``h`` with probability ``degraded_availability``
when it is cyber-exposed and ``h`` falls inside the attack window, and with
its nominal availability otherwise.  Hours are sampled independently.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, ValidationError
from ..fleet import HOURS_PER_YEAR
from . import _backend
from ._rng import SEED_MASK, replication_key, uniforms

LOLE_METHODS = ("daily_peak", "any_hour", "hourly")


@dataclass(frozen=True)
class CyberScenario:
    """Attack timing and degradation.

    ``active=False`` disables the window entirely (no-attack run).
    ``delta`` is carried for the analytic de-rating; the Monte Carlo model
    only uses the availabilities.
    """

    delta: float = 0.05
    window_start: int = 4020
    window_hours: int = 720
    degraded_availability: float = 0.88
    nominal_availability: float = None
    active: bool = True

    def __post_init__(self):
        if not (0.0 <= self.delta <= 1.0):
            raise DomainError(f"delta must lie in [0, 1], got {self.delta!r}")
        if not (0.0 <= self.degraded_availability <= 1.0):
            raise DomainError(f"degraded_availability must lie in [0, 1], got {self.degraded_availability!r}")
        if self.nominal_availability is not None and not (0.0 <= self.nominal_availability <= 1.0):
            raise DomainError(f"nominal_availability must lie in [0, 1], got {self.nominal_availability!r}")
        if int(self.window_start) != self.window_start or int(self.window_hours) != self.window_hours:
            raise ValidationError("window_start and window_hours must be integers")
        if self.window_start < 0 or self.window_hours < 1:
            raise ValidationError("window_start must be >= 0 and window_hours >= 1")
        if self.window_start + self.window_hours > HOURS_PER_YEAR:
            raise ValidationError(
                f"attack window [{self.window_start}, {self.window_start + self.window_hours}) "
                f"extends past hour {HOURS_PER_YEAR}"
            )

    @classmethod
    def no_attack(cls, delta=0.0, nominal_availability=None):
        return cls(delta=delta, nominal_availability=nominal_availability, active=False)

    @property
    def window(self):
        """Half-open hour range ``(start, end)``; empty when inactive."""
        if not self.active:
            return (0, 0)
        return (int(self.window_start), int(self.window_start + self.window_hours))

    def unit_availabilities(self, fleet):
        """Per-unit online probabilities ``(outside_window, inside_window)``."""
        if self.nominal_availability is None:
            a_out = 1.0 - fleet.outage_rates
        else:
            a_out = np.full(len(fleet), float(self.nominal_availability))
        if self.active:
            a_in = np.where(fleet.exposed, self.degraded_availability, a_out)
        else:
            a_in = a_out.copy()
        return np.ascontiguousarray(a_out, dtype=np.float64), np.ascontiguousarray(a_in, dtype=np.float64)


@dataclass(frozen=True)
class McConfig:
    replications: int = 1000
    seed: int = 0
    hours: int = HOURS_PER_YEAR
    workers: int = 1

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValidationError(f"replications must be a positive integer, got {self.replications!r}")
        if self.hours != HOURS_PER_YEAR:
            raise ValidationError(f"hours is fixed at {HOURS_PER_YEAR}")
        if not (0 <= int(self.seed) <= SEED_MASK):
            raise ValidationError("seed must be an unsigned 64-bit value")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass(frozen=True, eq=False)
class LoleEstimate:
    """Monte Carlo LOLE distribution in days/year."""

    mean: float
    std_error: float
    histogram: tuple
    samples: np.ndarray = field(repr=False)
    method: str = "daily_peak"
    seed: int = 0

    @property
    def replications(self):
        return int(self.samples.size)

    @classmethod
    def from_samples(cls, samples, method, seed):
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.size
        mean = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, lole_histogram(samples), samples, method, int(seed))

    def summary(self):
        return {
            "method": self.method,
            "mean": self.mean,
            "std_error": self.std_error,
            "replications": self.replications,
            "seed": self.seed,
        }


def lole_histogram(samples, width=1.0):
    """``(bin_lower, count)`` pairs over unit-width bins covering all samples."""
    samples = np.asarray(samples, dtype=np.float64)
    lo = math.floor(samples.min() / width)
    hi = math.floor(samples.max() / width)
    idx = np.floor(samples / width).astype(np.int64) - lo
    counts = np.bincount(idx, minlength=hi - lo + 1)
    return tuple(((lo + k) * width, int(c)) for k, c in enumerate(counts))


@dataclass(frozen=True, eq=False)
class YearTrace:
    hourly_available: np.ndarray
    hourly_deficit: np.ndarray
    hourly_online_fraction: np.ndarray


@dataclass(frozen=True, eq=False)
class McRun:
    """Raw integer tallies of one Monte Carlo run plus derived views."""

    replications: int
    seed: int
    n_units: int
    hours: np.ndarray
    hour_deficit: np.ndarray
    hour_online: np.ndarray
    rep_peak_days: np.ndarray
    rep_any_days: np.ndarray
    rep_deficit_hours: np.ndarray
    backend: str

    def lole(self, method="daily_peak"):
        if method == "daily_peak":
            samples = self.rep_peak_days
        elif method == "any_hour":
            samples = self.rep_any_days
        elif method == "hourly":
            samples = self.rep_deficit_hours / 24.0
        else:
            raise ValueError(f"unknown LOLE method {method!r}; expected one of {LOLE_METHODS}")
        return LoleEstimate.from_samples(samples, method, self.seed)

    @property
    def lolp_series(self):
        return self.hour_deficit / self.replications

    @property
    def availability_series(self):
        return self.hour_online / (self.replications * self.n_units)


def _check_inputs(fleet, profile):
    if profile is not None and profile.hourly_load.size != HOURS_PER_YEAR:
        raise ValidationError("load profile must have 8760 hours")


def run_replications(fleet, profile, scenario, config, hours=None, backend=None):
    """Run ``config.replications`` simulated years and tally the results.

    :param hours: sorted hour indices to evaluate (default: all 8760).  Draws
        are addressed by hour, so a subset reproduces exactly the decisions a
        full run makes at those hours.
    :param backend: force ``"numba"`` or ``"numpy"``; default per environment
    """
    _check_inputs(fleet, profile)
    if backend is None:
        backend_name, kernel = _backend.BACKEND, _backend.replicate_block
    else:
        backend_name, kernel = _backend.load_kernel(backend)

    if hours is None:
        hours = np.arange(HOURS_PER_YEAR, dtype=np.int64)
    else:
        hours = np.asarray(hours, dtype=np.int64)
        if hours.size and (np.any(np.diff(hours) <= 0) or hours[0] < 0 or hours[-1] >= HOURS_PER_YEAR):
            raise ValidationError("hours must be strictly increasing indices in [0, 8760)")
    if profile is None:
        load = np.zeros(hours.size)
        is_peak = np.zeros(hours.size, dtype=np.bool_)
    else:
        load = np.ascontiguousarray(profile.hourly_load[hours])
        peak_mask = np.zeros(HOURS_PER_YEAR, dtype=np.bool_)
        peak_mask[profile.daily_peak_hours] = True
        is_peak = np.ascontiguousarray(peak_mask[hours])

    cap = np.ascontiguousarray(fleet.capacities, dtype=np.float64)
    a_out, a_in = scenario.unit_availabilities(fleet)
    win_lo, win_hi = scenario.window
    seed = np.uint64(int(config.seed) & SEED_MASK)
    n_rep = int(config.replications)

    workers = min(int(config.workers), n_rep)
    bounds = np.linspace(0, n_rep, workers + 1).astype(np.int64)
    rep_peak = np.zeros(n_rep, dtype=np.int64)
    rep_any = np.zeros(n_rep, dtype=np.int64)
    rep_hours = np.zeros(n_rep, dtype=np.int64)

    def run_chunk(k):
        r0, r1 = int(bounds[k]), int(bounds[k + 1])
        hd = np.zeros(hours.size, dtype=np.int64)
        ho = np.zeros(hours.size, dtype=np.int64)
        # per-replication outputs are disjoint slices, so chunks never overlap
        kernel(cap, a_out, a_in, load, hours, is_peak, win_lo, win_hi, seed, r0, r1,
               hd, ho, rep_peak[r0:r1], rep_any[r0:r1], rep_hours[r0:r1])
        return hd, ho

    if workers == 1:
        parts = [run_chunk(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(workers)))
    # integer tallies: the reduction is exact in any order
    hour_deficit = np.sum([p[0] for p in parts], axis=0)
    hour_online = np.sum([p[1] for p in parts], axis=0)
    return McRun(n_rep, int(config.seed), len(fleet), hours, hour_deficit, hour_online,
                 rep_peak, rep_any, rep_hours, backend_name)


def simulate_year(fleet, profile, scenario, seed, replication=0):
    """One simulated year with full hourly detail.

    Uses the same addressed draws as :func:`run_replications`, so replication
    ``r`` here matches replication ``r`` of any multi-replication run.
    """
    _check_inputs(fleet, profile)
    n_units = len(fleet)
    a_out, a_in = scenario.unit_availabilities(fleet)
    win_lo, win_hi = scenario.window
    hours = np.arange(HOURS_PER_YEAR, dtype=np.int64)
    in_window = (hours >= win_lo) & (hours < win_hi)
    avail_prob = np.where(in_window[:, None], a_in[None, :], a_out[None, :])
    counters = hours.astype(np.uint64)[:, None] * np.uint64(n_units) + np.arange(n_units, dtype=np.uint64)
    key = replication_key(seed, replication)
    online = uniforms(key, counters) < avail_prob
    available = np.zeros(HOURS_PER_YEAR)
    for u in range(n_units):
        available += np.where(online[:, u], fleet.capacities[u], 0.0)
    return YearTrace(
        hourly_available=available,
        hourly_deficit=profile.hourly_load > available,
        hourly_online_fraction=online.sum(axis=1) / n_units,
    )


def estimate_lole(fleet, profile, scenario, config, method="daily_peak"):
    """Monte Carlo LOLE in days/year.

    ``method`` picks the per-replication sample:

    * ``"daily_peak"``: days whose peak-load hour is in deficit.  Its mean
      estimates the analytic daily-peak LOLE.
    * ``"any_hour"``: days with at least one deficit hour.
    * ``"hourly"``: deficit hours divided by 24.

    The daily-peak sample only needs the 365 peak hours, so only those are
    simulated.
    """
    if method not in LOLE_METHODS:
        raise ValueError(f"unknown LOLE method {method!r}; expected one of {LOLE_METHODS}")
    hours = np.sort(profile.daily_peak_hours) if method == "daily_peak" else None
    return run_replications(fleet, profile, scenario, config, hours=hours).lole(method)


def lolp_series(fleet, profile, scenario, config):
    """Per-hour fraction of replications in deficit (8760 values)."""
    return run_replications(fleet, profile, scenario, config).lolp_series


def availability_series(fleet, scenario, config):
    """Per-hour mean online fraction over replications and units."""
    return run_replications(fleet, None, scenario, config).availability_series

