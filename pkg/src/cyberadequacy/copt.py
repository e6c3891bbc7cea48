"""Capacity outage probability tables (COPT).

Tables are built by adding two-state units one at a time::

    new_prob(x) = old_prob(x) * (1 - q) + old_prob(x - c) * q

and can be passed through the cyber de-rating transform, which inflates the
probability of every state with a nonzero outage by ``(1 + delta)``,
renormalises, and scales every state's available capacity by ``(1 - delta)``.
"""
import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FleetTooLarge, ValidationError

BRUTE_FORCE_MAX_UNITS = 20

# outage levels closer than this (relative to installed capacity) are one state
_MERGE_RTOL = 1e-9


class CoptState(NamedTuple):
    outage: float
    available: float
    prob: float
    cum_prob: float


@dataclass(frozen=True, eq=False)
class Copt:
    """Outage states sorted by ascending outage.

    ``cum_prob[k]`` is ``P(outage >= outage[k])``.  ``installed`` is the
    pre-derating installed capacity, so ``outage + available == installed``
    always holds.
    """

    outage: np.ndarray
    available: np.ndarray
    prob: np.ndarray
    installed: float
    delta: float = 0.0
    cum_prob: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("outage", "available", "prob"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if not (self.outage.shape == self.available.shape == self.prob.shape):
            raise ValidationError("outage, available and prob must have equal length")
        cum = _tail_sums(self.prob)
        cum.flags.writeable = False
        object.__setattr__(self, "cum_prob", cum)

    def __len__(self):
        return self.prob.size

    @property
    def states(self):
        return [CoptState(*row) for row in zip(self.outage.tolist(), self.available.tolist(),
                                               self.prob.tolist(), self.cum_prob.tolist())]

    @property
    def total_probability(self):
        return float(np.sum(self.prob))


def _tail_sums(prob):
    return np.cumsum(prob[::-1])[::-1].copy()


def _merge(outage, prob, tol):
    """Sort by outage and merge states whose outages agree within ``tol``."""
    order = np.argsort(outage, kind="stable")
    outage = outage[order]
    prob = prob[order]
    if outage.size == 0:
        return outage, prob
    new_group = np.empty(outage.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(outage) > tol
    starts = np.flatnonzero(new_group)
    return outage[starts], np.add.reduceat(prob, starts)


def _finish(outage, prob, installed, tol, all_out=False):
    # zero-probability states are dropped, except the no-outage state, which
    # anchors every table unless all units are certainly out
    keep = prob > 0.0
    if not all_out:
        keep |= outage == 0.0
    outage, prob = outage[keep], prob[keep]
    # snap near-installed sums so that available never goes slightly negative
    outage = np.where(np.abs(outage - installed) <= tol, installed, outage)
    return Copt(outage=outage, available=installed - outage, prob=prob, installed=installed)


def build_copt(fleet, rounding=None):
    """Build the COPT of ``fleet`` by sequential unit-addition convolution.

    :param fleet: a validated :class:`~cyberadequacy.fleet.Fleet`
    :param rounding: MW increment that outage levels are rounded to after each
        unit is added; ``None`` (default) keeps exact levels
    """
    if rounding is not None and not rounding > 0:
        raise DomainError(f"rounding increment must be > 0, got {rounding!r}")
    installed = fleet.installed_capacity
    tol = _MERGE_RTOL * max(1.0, installed)
    outage = np.zeros(1)
    prob = np.ones(1)
    for unit in fleet.units:
        c, q = unit.capacity, unit.forced_outage_rate
        outage = np.concatenate([outage, outage + c])
        prob = np.concatenate([prob * (1.0 - q), prob * q])
        if rounding is not None:
            outage = np.minimum(np.round(outage / rounding) * rounding, installed)
        outage, prob = _merge(outage, prob, tol)
    return _finish(outage, prob, installed, tol, all_out=bool(np.all(fleet.outage_rates == 1.0)))


def brute_force_copt(fleet):
    """Enumerate all ``2**n`` on/off combinations of the fleet (test oracle)."""
    n = len(fleet)
    if n > BRUTE_FORCE_MAX_UNITS:
        raise FleetTooLarge(f"brute force enumeration is limited to {BRUTE_FORCE_MAX_UNITS} units, got {n}")
    caps = fleet.capacities
    q = fleet.outage_rates
    combos = np.arange(2**n, dtype=np.int64)
    out = ((combos[:, None] >> np.arange(n)) & 1).astype(bool)
    probs = np.prod(np.where(out, q, 1.0 - q), axis=1)
    outage = out.astype(np.float64) @ caps
    installed = fleet.installed_capacity
    tol = _MERGE_RTOL * max(1.0, installed)
    # group by rounded outage, independently of the convolution merge
    keys = np.round(outage / tol).astype(np.int64)
    uniq, inverse = np.unique(keys, return_inverse=True)
    merged = np.zeros(uniq.size)
    np.add.at(merged, inverse, probs)
    first = np.zeros(uniq.size)
    first[inverse[::-1]] = outage[::-1]
    return _finish(first, merged, installed, tol, all_out=bool(np.all(q == 1.0)))


def apply_cyber_derating(copt, delta):
    """Apply the cyber de-rating factor ``delta`` to a table.

    Nonzero-outage states get their probability multiplied by ``1 + delta``,
    then the table is renormalised; every state's available capacity is
    multiplied by ``1 - delta``.  States are never merged afterwards, so with
    ``delta == 1`` all states share ``available == 0``.  ``delta == 0``
    returns an exact copy.
    """
    if not (0.0 <= delta <= 1.0):
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    if delta == 0.0:
        return Copt(outage=copt.outage, available=copt.available, prob=copt.prob,
                    installed=copt.installed, delta=copt.delta)
    hit = copt.outage > 0.0
    p0 = math.fsum(copt.prob[~hit].tolist())
    rest = math.fsum(copt.prob[hit].tolist())
    # (1 + delta) / norm == 1 / (p0 / (1 + delta) + rest), which is >= 1; every
    # step is monotone in delta, so LOLP of the result is too, to the last bit
    gain = max(1.0, 1.0 / (p0 / (1.0 + delta) + rest))
    prob = np.where(hit, copt.prob * gain, copt.prob * gain / (1.0 + delta))
    available = copt.available * (1.0 - delta)
    # combined factor when tables are derated repeatedly
    combined = 1.0 - (1.0 - copt.delta) * (1.0 - delta)
    return Copt(outage=copt.installed - available, available=available, prob=prob,
                installed=copt.installed, delta=combined)


COPT_CSV_HEADER = ("outage_mw", "available_mw", "prob", "cum_prob")


def copt_to_csv(copt, dest=None):
    """Write ``outage_mw,available_mw,prob,cum_prob`` rows; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COPT_CSV_HEADER)
    for s in copt.states:
        w.writerow([repr(s.outage), repr(s.available), repr(s.prob), repr(s.cum_prob)])
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def copt_from_csv(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    else:
        rows = list(csv.reader(io.StringIO(source.read())))
    if not rows or tuple(rows[0]) != COPT_CSV_HEADER:
        raise ValidationError("not a COPT CSV (bad header)")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=np.float64).reshape(-1, 4)
    installed = float(data[0, 0] + data[0, 1]) if len(data) else 0.0
    return Copt(outage=data[:, 0], available=data[:, 1], prob=data[:, 2], installed=installed)
