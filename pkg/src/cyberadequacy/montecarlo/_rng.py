"""Counter-based uniform draws shared by both kernel backends.

Draw ``k`` of replication ``r`` is ``mix64(key_r + GOLDEN * (k + 1))`` with
``key_r = mix64(seed + GOLDEN * (r + 1))`` and ``k = hour * n_units + unit``.
Because every draw is addressed rather than consumed from a stream, results
do not depend on how replications are split across workers, and scenarios
sharing a fleet see common random numbers.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53

SEED_MASK = (1 << 64) - 1


def mix64(z):
    """splitmix64 finaliser, elementwise on uint64 arrays (wrapping)."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def replication_key(seed, rep):
    seed = np.uint64(int(seed) & SEED_MASK)
    rep = np.asarray(rep, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(seed + GOLDEN * (rep + np.uint64(1)))


def uniforms(key, counters):
    """Uniforms in [0, 1) for draw indices ``counters`` under ``key``."""
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64(np.uint64(key) + GOLDEN * (counters + np.uint64(1)))
    return (z >> _S11).astype(np.float64) * TO_UNIT
