#!/usr/bin/env python3
"""
Domain Models for the Ratio CUSUM Toolkit

This module defines the value types shared by the statistics, the limit
simulator, the data generators, the experiment harness and the command line.

Key Features:
- Frozen dataclasses with validation in __post_init__
- Serialization methods (to_dict / from_dict) for JSON artifacts
- Statistic kinds addressed by short labels (v1, z3, tmax2, t1, ...)
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RNG_NAME
from .exceptions import (
    CorruptTable,
    DataError,
    InvalidKind,
    InvalidSpec,
    InvalidTrimFraction,
    KindMismatch,
    TooShort,
)

logger = logging.getLogger(__name__)

# ============================================
# STATISTIC KINDS
# ============================================

class Family(Enum):
    """Statistic family: forward/backward ratio, its mirror, their max, or the scaled CUSUM"""
    V = 'v'
    Z = 'z'
    TMAX = 'tmax'
    T_CLASSICAL = 't'


class Functional(Enum):
    """CUSUM functional applied to a centered partial-sum path"""
    MAXABS = 1
    RANGE = 2
    VARTYPE = 3


RATIO_FAMILIES = (Family.V, Family.Z, Family.TMAX)


@dataclass(frozen=True)
class StatKind:
    """
    A (family, functional) pair

    Labels join the family code and functional index: v1, z2, tmax3, t1.
    """
    family: Family
    functional: Functional

    @property
    def label(self) -> str:
        return f"{self.family.value}{self.functional.value}"

    @property
    def is_ratio(self) -> bool:
        return self.family in RATIO_FAMILIES

    @classmethod
    def parse(cls, label: str) -> 'StatKind':
        """
        Parse a statistic label

        Raises:
            InvalidKind: If the label names no statistic
        """
        text = label.strip().lower()
        # longest family codes first so 'tmax1' is not read as 't' + 'max1'
        for family in sorted(Family, key=lambda f: -len(f.value)):
            if text.startswith(family.value):
                index = text[len(family.value):]
                if index in ('1', '2', '3'):
                    return cls(family, Functional(int(index)))
        raise InvalidKind(f"Unknown statistic {label!r}")

    @classmethod
    def all_kinds(cls) -> List['StatKind']:
        return [cls(family, functional) for family in Family for functional in Functional]

    def to_dict(self) -> Dict[str, Any]:
        return {'family': self.family.name, 'functional': self.functional.name}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StatKind':
        try:
            return cls(Family[data['family']], Functional[data['functional']])
        except (KeyError, TypeError) as e:
            raise InvalidKind(f"Invalid statistic kind {data!r}: {e}")


def trim_fraction(delta: float) -> float:
    """
    Validate a trim fraction

    Returns:
        delta as float

    Raises:
        InvalidTrimFraction: If delta is not in (0, 1/2)
    """
    try:
        value = float(delta)
    except (TypeError, ValueError):
        raise InvalidTrimFraction(f"Trim fraction must be a number, got {delta!r}")
    if not 0.0 < value < 0.5:
        raise InvalidTrimFraction(f"Trim fraction must lie in (0, 0.5), got {value}")
    return value


# ============================================
# SERIES AND CUSUM RESULTS
# ============================================

@dataclass(frozen=True)
class Series:
    """Ordered observations X_1..X_n"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError(f"Series must be one-dimensional, got shape {values.shape}")
        if values.size < 2:
            raise TooShort(f"Series needs at least 2 observations, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise DataError("Series contains non-finite values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @classmethod
    def of(cls, values: Any) -> 'Series':
        return values if isinstance(values, cls) else cls(np.asarray(values, dtype=float))

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class RatioCurve:
    """
    Per-k numerators, denominators and ratios over the trimmed range

    Undefined (0/0) entries carry NaN ratios; x/0 with x > 0 is +inf.
    """
    k_values: np.ndarray
    numerators: np.ndarray
    denominators: np.ndarray
    ratios: np.ndarray
    argmax_k: int
    sup_value: float
    orientation: Family = Family.V


@dataclass(frozen=True)
class StatisticResult:
    """Value of a ratio statistic with the curve(s) it was taken from"""
    kind: StatKind
    value: float
    curves: Tuple[RatioCurve, ...]

    @property
    def argmax_k(self) -> int:
        # the curve attaining the value; V wins ties
        best = max(self.curves, key=lambda c: c.sup_value)
        return best.argmax_k


@dataclass(frozen=True)
class LongRunVariance:
    sigma2_hat: float
    bandwidth: int

    def __post_init__(self):
        if self.sigma2_hat < 0:
            raise DataError(f"Long-run variance must be >= 0, got {self.sigma2_hat}")
        if self.bandwidth < 0:
            raise InvalidSpec(f"Bandwidth must be >= 0, got {self.bandwidth}")


# ============================================
# LIMIT SIMULATION TYPES
# ============================================

@dataclass(frozen=True)
class WienerPath:
    """Wiener process on the grid t = j/m, j = 0..m"""
    m: int
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if self.m < 2:
            raise InvalidSpec(f"Grid resolution must be >= 2, got {self.m}")
        if w.shape != (self.m + 1,):
            raise InvalidSpec(f"Path must have m+1 = {self.m + 1} points, got {w.shape}")
        if w[0] != 0.0:
            raise InvalidSpec("Path must start at 0")
        object.__setattr__(self, 'w', w)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.w)


@dataclass(frozen=True)
class EtaPair:
    t: float
    eta_num: float
    eta_den: float
    functional: Functional


@dataclass(frozen=True)
class NullSample:
    """Sorted Monte Carlo draws of a limiting sup-ratio (or bridge) functional"""
    kind: StatKind
    delta: float
    m: int
    reps: int
    seed: int
    draws: np.ndarray
    rng: str = RNG_NAME

    def __post_init__(self):
        draws = np.sort(np.asarray(self.draws, dtype=float))
        if draws.size != self.reps:
            raise DataError(f"Expected {self.reps} draws, got {draws.size}")
        if draws.size and (not np.all(np.isfinite(draws)) or draws[0] < 0):
            raise DataError("Null draws must be finite and nonnegative")
        object.__setattr__(self, 'draws', draws)


@dataclass(frozen=True)
class CriticalValueTable:
    """
    Critical values per level with the provenance of the null sample

    Critical values must strictly decrease as the level grows.
    """
    kind: StatKind
    delta: float
    m: int
    reps: int
    seed: int
    quantiles: Dict[float, float]
    rng: str = RNG_NAME

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Check the table invariants

        Raises:
            CorruptTable: If a value is missing, non-finite or out of order
        """
        if not self.quantiles:
            raise CorruptTable("Table has no critical values")
        levels = sorted(self.quantiles)
        for level in levels:
            value = self.quantiles[level]
            if not 0.0 < level < 1.0:
                raise CorruptTable(f"Level {level} outside (0, 1)")
            if not math.isfinite(value):
                raise CorruptTable(f"Critical value at level {level} is not finite")
        for lower, upper in zip(levels, levels[1:]):
            if not self.quantiles[lower] > self.quantiles[upper]:
                raise CorruptTable(
                    f"Critical values must decrease in level: "
                    f"{lower} -> {self.quantiles[lower]}, {upper} -> {self.quantiles[upper]}"
                )
        if self.m < 2 or self.reps < 1:
            raise CorruptTable(f"Invalid provenance m={self.m}, reps={self.reps}")

    @property
    def levels(self) -> List[float]:
        return sorted(self.quantiles, reverse=True)

    def value_at(self, level: float) -> float:
        try:
            return self.quantiles[level]
        except KeyError:
            raise KindMismatch(f"Table has no critical value for level {level}")

    def check_matches(self, kind: StatKind, delta: float) -> None:
        """
        Raise KindMismatch unless the table was built for (kind, delta)

        The trim fraction is irrelevant for classical statistics.
        """
        if kind != self.kind:
            raise KindMismatch(f"Table built for {self.kind.label}, requested {kind.label}")
        if kind.is_ratio and not math.isclose(delta, self.delta, rel_tol=0, abs_tol=1e-12):
            raise KindMismatch(f"Table built for delta={self.delta}, requested {delta}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': '1',
            'kind': self.kind.to_dict(),
            'delta': self.delta,
            'm': self.m,
            'reps': self.reps,
            'seed': self.seed,
            'rng': self.rng,
            'quantiles': {repr(level): value for level, value in sorted(self.quantiles.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CriticalValueTable':
        try:
            quantiles = {float(level): float(value) for level, value in data['quantiles'].items()}
            return cls(
                kind=StatKind.from_dict(data['kind']),
                delta=float(data['delta']),
                m=int(data['m']),
                reps=int(data['reps']),
                seed=int(data['seed']),
                quantiles=quantiles,
                rng=str(data['rng']),
            )
        except CorruptTable:
            raise
        except (KeyError, TypeError, ValueError, AttributeError, InvalidKind) as e:
            raise CorruptTable(f"Malformed table: {e}")


# ============================================
# GENERATOR AND CHANGE SPECIFICATIONS
# ============================================

class Innovation(Enum):
    STANDARD_NORMAL = 'normal'


class ModelVariant(Enum):
    IID = 'iid'
    LINEAR = 'linear'
    AR1 = 'ar1'
    GARCH11 = 'garch11'


class Regime(Enum):
    NONE = 'none'
    MEAN_SHIFT = 'shift'
    STAT_TO_RW = 'stat2rw'
    RW_TO_STAT = 'rw2stat'


@dataclass(frozen=True)
class InnovationSpec:
    distribution: Innovation = Innovation.STANDARD_NORMAL
    seed: int = 0

    def __post_init__(self):
        if self.seed < 0:
            raise InvalidSpec(f"Seed must be nonnegative, got {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        return {'distribution': self.distribution.value, 'seed': self.seed}


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Error model: iid, truncated linear process, AR(1) or GARCH(1,1)

    Only the parameters of the selected variant are used.
    """
    variant: ModelVariant = ModelVariant.IID
    innovations: InnovationSpec = field(default_factory=InnovationSpec)
    coeffs: Tuple[float, ...] = ()
    rho: float = 0.0
    omega: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(float(c) for c in self.coeffs))
        self.validate()

    def validate(self) -> None:
        """
        Check stationarity and summability constraints

        Raises:
            InvalidSpec: If the variant's invariants are violated
        """
        if self.variant is ModelVariant.AR1:
            if not (math.isfinite(self.rho) and abs(self.rho) < 1):
                raise InvalidSpec(f"AR(1) needs |rho| < 1, got rho={self.rho}")
        elif self.variant is ModelVariant.LINEAR:
            coeffs = np.asarray(self.coeffs, dtype=float)
            if coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
                raise InvalidSpec("Linear process needs a finite, nonempty coefficient sequence")
            if coeffs.sum() == 0:
                raise InvalidSpec("Linear process coefficients must not sum to zero")
        elif self.variant is ModelVariant.GARCH11:
            if not self.omega > 0:
                raise InvalidSpec(f"GARCH(1,1) needs omega > 0, got {self.omega}")
            if self.alpha < 0 or self.beta < 0:
                raise InvalidSpec(f"GARCH(1,1) needs alpha, beta >= 0, got {self.alpha}, {self.beta}")
            # E delta_0^2 = 1 for standard normal innovations
            if not self.alpha + self.beta < 1:
                raise InvalidSpec(
                    f"GARCH(1,1) needs alpha + beta < 1 for stationarity, got {self.alpha + self.beta}"
                )

    @classmethod
    def iid(cls, seed: int = 0) -> 'GeneratorSpec':
        return cls(ModelVariant.IID, InnovationSpec(seed=seed))

    @classmethod
    def ar1(cls, rho: float, seed: int = 0) -> 'GeneratorSpec':
        return cls(ModelVariant.AR1, InnovationSpec(seed=seed), rho=rho)

    @classmethod
    def linear(cls, coeffs: Sequence[float], seed: int = 0) -> 'GeneratorSpec':
        return cls(ModelVariant.LINEAR, InnovationSpec(seed=seed), coeffs=tuple(coeffs))

    @classmethod
    def garch11(cls, omega: float, alpha: float, beta: float, seed: int = 0) -> 'GeneratorSpec':
        return cls(ModelVariant.GARCH11, InnovationSpec(seed=seed), omega=omega, alpha=alpha, beta=beta)

    @property
    def long_run_variance(self) -> float:
        """Long-run variance of the errors for unit-variance innovations"""
        if self.variant is ModelVariant.AR1:
            return 1.0 / (1.0 - self.rho) ** 2
        if self.variant is ModelVariant.LINEAR:
            return float(sum(self.coeffs)) ** 2
        if self.variant is ModelVariant.GARCH11:
            return self.omega / (1.0 - self.alpha - self.beta)
        return 1.0

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'variant': self.variant.value, 'innovations': self.innovations.to_dict()}
        if self.variant is ModelVariant.AR1:
            data['rho'] = self.rho
        elif self.variant is ModelVariant.LINEAR:
            data['coeffs'] = list(self.coeffs)
        elif self.variant is ModelVariant.GARCH11:
            data.update(omega=self.omega, alpha=self.alpha, beta=self.beta)
        return data


@dataclass(frozen=True)
class ChangeSpec:
    """
    Alternative regime imposed on an error sequence

    theta places the change at k* = floor(n * theta); delta_mag is the
    mean-shift size (the level rises by delta_mag after k*).
    """
    regime: Regime = Regime.NONE
    theta: float = 0.5
    delta_mag: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.regime is not Regime.NONE and not 0.0 < self.theta < 1.0:
            raise InvalidSpec(f"Change fraction theta must lie in (0, 1), got {self.theta}")
        if not (math.isfinite(self.mu) and math.isfinite(self.delta_mag)):
            raise InvalidSpec("Change mean and magnitude must be finite")

    def kstar(self, n: int) -> int:
        """
        Change point for a series of length n

        Raises:
            InvalidSpec: If k* falls outside 1..n-1
        """
        kstar = int(math.floor(n * self.theta + 1e-9))
        if not 1 <= kstar < n:
            raise InvalidSpec(f"Change point k*={kstar} outside 1..{n - 1} for n={n}, theta={self.theta}")
        return kstar

    @property
    def size(self) -> float:
        """Delta_n = mu_{k*} - mu_{k*+1} (sign recorded, not relied on)"""
        return -self.delta_mag if self.regime is Regime.MEAN_SHIFT else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {'regime': self.regime.value, 'theta': self.theta, 'delta_mag': self.delta_mag, 'mu': self.mu}


# ============================================
# EXPERIMENT AND REPORT TYPES
# ============================================

@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    reps: int
    levels: Tuple[float, ...]
    generator: GeneratorSpec
    change: ChangeSpec
    kind: StatKind
    delta: float
    critical_values: CriticalValueTable
    master_seed: int
    cell_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'levels', tuple(sorted({float(l) for l in self.levels}, reverse=True)))
        trim_fraction(self.delta)
        if self.reps < 1:
            raise InvalidSpec(f"Replications must be >= 1, got {self.reps}")
        if self.n < 2:
            raise InvalidSpec(f"Series length must be >= 2, got {self.n}")
        if self.master_seed < 0:
            raise InvalidSpec(f"Seed must be a nonnegative integer, got {self.master_seed}")
        self.critical_values.check_matches(self.kind, self.delta)
        missing = [level for level in self.levels if level not in self.critical_values.quantiles]
        if missing:
            available = ', '.join(repr(level) for level in self.critical_values.levels)
            raise InvalidSpec(f"No critical value for level(s) {missing}; the table has {available}")
        if self.change.regime is not Regime.NONE:
            self.change.kstar(self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'reps': self.reps,
            'levels': list(self.levels),
            'generator': self.generator.to_dict(),
            'change': self.change.to_dict(),
            'kind': self.kind.label,
            'delta': self.delta,
            'critical_values': self.critical_values.to_dict(),
            'master_seed': self.master_seed,
            'cell_index': self.cell_index,
        }

    def digest(self) -> str:
        return config_digest(self.to_dict())


@dataclass(frozen=True)
class RejectionReport:
    """Rejection rate and Monte Carlo standard error per level"""
    rates: Dict[float, float]
    std_errors: Dict[float, float]
    reps: int
    digest: str
    n_infinite: int = 0

    @classmethod
    def from_counts(cls, counts: Dict[float, int], reps: int, digest: str,
                    n_infinite: int = 0) -> 'RejectionReport':
        rates = {level: count / reps for level, count in counts.items()}
        std_errors = {level: math.sqrt(p * (1 - p) / reps) for level, p in rates.items()}
        return cls(rates, std_errors, reps, digest, n_infinite)


@dataclass(frozen=True)
class DetectionReport:
    kind: StatKind
    value: float
    argmax_k: Optional[int]
    n: int
    delta: float
    critical_values: Dict[float, float]
    p_value: float
    decisions: Dict[float, bool]
    table: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'statistic': self.kind.label,
            'value': 'inf' if math.isinf(self.value) else self.value,
            'argmax_k': self.argmax_k,
            'n': self.n,
            'delta': self.delta,
            'critical_values': {repr(level): cv for level, cv in self.critical_values.items()},
            'p_value': self.p_value,
            'decisions': {repr(level): d for level, d in self.decisions.items()},
            'table': self.table,
        }
        data['digest'] = config_digest(data)
        return data


def config_digest(payload: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON encoding of payload"""
    text = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
