"""Generator fleets, hourly load profiles and their text formats.

Fleet file: one unit per line, ``id capacity_mw forced_outage_rate cyber_exposed``
with ``cyber_exposed`` either 0 or 1.  ``#`` starts a comment.
Load file: one MW value per line, exactly 8760 lines.
"""
import io
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, NegativeLoad, ParseError, ValidationError, WrongLength

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365


@dataclass(frozen=True)
class GeneratorUnit:
    id: str
    capacity: float
    forced_outage_rate: float
    cyber_exposed: bool = False

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id):
            raise ValidationError(f"unit id must be nonempty without whitespace, got {self.id!r}")
        if not (math.isfinite(self.capacity) and self.capacity > 0):
            raise ValidationError(f"unit {self.id!r}: capacity must be > 0, got {self.capacity!r}")
        if not (0.0 <= self.forced_outage_rate <= 1.0):
            raise ValidationError(
                f"unit {self.id!r}: forced_outage_rate must lie in [0, 1], got {self.forced_outage_rate!r}"
            )
        object.__setattr__(self, "capacity", float(self.capacity))
        object.__setattr__(self, "forced_outage_rate", float(self.forced_outage_rate))
        object.__setattr__(self, "cyber_exposed", bool(self.cyber_exposed))

    @property
    def availability(self):
        return 1.0 - self.forced_outage_rate


@dataclass(frozen=True)
class Fleet:
    units: tuple

    def __post_init__(self):
        units = tuple(self.units)
        if not units:
            raise ValidationError("fleet must contain at least one unit")
        seen = set()
        for u in units:
            if u.id in seen:
                raise ValidationError(f"duplicate unit id {u.id!r}")
            seen.add(u.id)
        object.__setattr__(self, "units", units)

    def __len__(self):
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    @property
    def installed_capacity(self):
        return sum(u.capacity for u in self.units)

    @cached_property
    def capacities(self):
        a = np.array([u.capacity for u in self.units], dtype=np.float64)
        a.flags.writeable = False
        return a

    @cached_property
    def outage_rates(self):
        a = np.array([u.forced_outage_rate for u in self.units], dtype=np.float64)
        a.flags.writeable = False
        return a

    @cached_property
    def exposed(self):
        a = np.array([u.cyber_exposed for u in self.units], dtype=np.bool_)
        a.flags.writeable = False
        return a

    def with_unit(self, unit):
        return Fleet(self.units + (unit,))


@dataclass(frozen=True, eq=False)
class LoadProfile:
    """8760 non-negative hourly loads in MW."""

    hourly_load: np.ndarray

    def __post_init__(self):
        values = np.array(self.hourly_load, dtype=np.float64).ravel()
        if values.size != HOURS_PER_YEAR:
            raise WrongLength(values.size)
        bad = np.flatnonzero(~(values >= 0))
        if bad.size:
            raise NegativeLoad(int(bad[0]), float(values[bad[0]]))
        values.flags.writeable = False
        object.__setattr__(self, "hourly_load", values)

    def __eq__(self, other):
        return isinstance(other, LoadProfile) and np.array_equal(self.hourly_load, other.hourly_load)

    __hash__ = None

    @cached_property
    def daily_peaks(self):
        return self.hourly_load.reshape(DAYS_PER_YEAR, 24).max(axis=1)

    @cached_property
    def daily_peak_hours(self):
        """Absolute hour index of each day's peak (first hour on ties)."""
        return self.hourly_load.reshape(DAYS_PER_YEAR, 24).argmax(axis=1) + 24 * np.arange(DAYS_PER_YEAR)


def _read_text(source):
    """Return decoded text from bytes, a text/binary stream, or a path."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    return data.replace("\r\n", "\n")


def parse_fleet(text):
    units = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, found {len(parts)}", line=lineno)
        uid, cap, q, flag = parts
        try:
            cap = float(cap)
        except ValueError:
            raise ParseError(f"not a number: {cap!r}", line=lineno, field="capacity_mw") from None
        try:
            q = float(q)
        except ValueError:
            raise ParseError(f"not a number: {q!r}", line=lineno, field="forced_outage_rate") from None
        if flag not in ("0", "1"):
            raise ParseError(f"expected 0 or 1, found {flag!r}", line=lineno, field="cyber_exposed")
        try:
            units.append(GeneratorUnit(uid, cap, q, flag == "1"))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return Fleet(tuple(units))


def load_fleet(source):
    """Parse a fleet file.

    :param source: bytes, a readable stream, or a filesystem path
    :raises ParseError: malformed line (line and field named)
    :raises ValidationError: a fleet or unit invariant fails
    """
    return parse_fleet(_read_text(source))


def format_fleet(fleet):
    lines = ["# id capacity_mw forced_outage_rate cyber_exposed"]
    for u in fleet.units:
        lines.append(f"{u.id} {u.capacity!r} {u.forced_outage_rate!r} {int(u.cyber_exposed)}")
    return "\n".join(lines) + "\n"


def write_fleet(fleet, dest=None):
    """Serialise ``fleet``; returns the text and writes it to ``dest`` if given."""
    text = format_fleet(fleet)
    if dest is None:
        return text
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text.encode("utf-8") if isinstance(dest, (io.RawIOBase, io.BufferedIOBase)) else text)
    return text


def load_profile(source):
    """Parse a load file of 8760 MW values, one per line.

    :raises WrongLength: the value count is not 8760
    :raises NegativeLoad: a value is negative (``.hour`` is 0-based)
    """
    text = _read_text(source)
    values = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"not a number: {line!r}", line=lineno) from None
    return LoadProfile(np.asarray(values))


def write_profile(profile, dest):
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        for v in profile.hourly_load.tolist():
            fh.write(f"{v!r}\n")


DIURNAL_PEAK_HOUR = 17


def synth_profile(annual_peak, base_fraction, peak_hour=4380):
    """Deterministic synthetic year of hourly load.

    ``load(h) = peak * (base + (1 - base) * seasonal(h) * diurnal(h))`` where
    both shape factors are raised cosines in [0, 1]: the seasonal one peaks at
    ``peak_hour``, the diurnal one at 17:00.
    """
    if not (math.isfinite(annual_peak) and annual_peak > 0):
        raise DomainError(f"annual_peak must be > 0, got {annual_peak!r}")
    if not (0.0 < base_fraction <= 1.0):
        raise DomainError(f"base_fraction must lie in (0, 1], got {base_fraction!r}")
    if not (0 <= peak_hour < HOURS_PER_YEAR) or int(peak_hour) != peak_hour:
        raise DomainError(f"peak_hour must be an integer hour in [0, 8760), got {peak_hour!r}")
    h = np.arange(HOURS_PER_YEAR, dtype=np.float64)
    seasonal = 0.5 * (1.0 + np.cos(2.0 * np.pi * (h - peak_hour) / HOURS_PER_YEAR))
    diurnal = 0.5 * (1.0 + np.cos(2.0 * np.pi * ((h % 24) - DIURNAL_PEAK_HOUR) / 24.0))
    load = annual_peak * (base_fraction + (1.0 - base_fraction) * seasonal * diurnal)
    # cosine rounding can nudge the aligned peak a hair above annual_peak
    np.minimum(load, annual_peak, out=load)
    return LoadProfile(load)
