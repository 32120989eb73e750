"""Small argument checkers shared across modules."""

import math

import numpy as np


class ConfigError(ValueError):
    """Bad user input; the CLI maps this to exit code 2."""


def check_finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(name, value):
    value = check_finite(name, value)
    if value <= 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")
    return value


def check_count(name, value, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_exponent(name, p):
    p = check_finite(name, p)
    if not 1.0 < p < math.inf:
        raise ConfigError(f"{name} must lie in (1, inf), got {p}")
    return p


def check_tuple(name, values, length):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (length,):
        raise ConfigError(f"{name} must have length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} has non-finite entries")
    return tuple(float(v) for v in arr)


def as_rng(seed):
    """Accept an int seed, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
