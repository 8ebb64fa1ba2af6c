#!/usr/bin/env python3
"""
Error Sequences and Change Alternatives

Generates iid, truncated linear-process, AR(1) and GARCH(1,1) errors from
standard normal innovations, and imposes a mean shift, a switch from a
stationary sequence into a random walk, or the reverse switch.

Innovation order: the n innovations driving the output are drawn first;
pre-sample values (AR start, linear-process window, GARCH burn-in) come
after them. With the same seed a degenerate model (rho = 0, a single unit
coefficient, alpha = beta = 0) therefore reproduces the iid stream.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .config import GARCH_BURN_IN
from .exceptions import InvalidSpec
from .models import ChangeSpec, GeneratorSpec, Innovation, ModelVariant, Regime, Series
from .streams import stream

logger = logging.getLogger(__name__)

# ============================================
# INNOVATIONS
# ============================================

def _innovations(rng: np.random.Generator, size: int, distribution: Innovation) -> np.ndarray:
    if distribution is Innovation.STANDARD_NORMAL:
        return rng.standard_normal(size)
    raise InvalidSpec(f"Unsupported innovation distribution {distribution}")


# ============================================
# ERROR MODELS
# ============================================

def gen_errors(n: int, spec: GeneratorSpec, rng: Optional[np.random.Generator] = None) -> Series:
    """
    Error sequence eps_1..eps_n

    Args:
        n: Length (>= 2)
        spec: Error model
        rng: Generator to draw from (default: stream(spec.innovations.seed))

    Returns:
        Series of errors

    Raises:
        InvalidSpec: If the model parameters violate their invariants
    """
    if n < 2:
        raise InvalidSpec(f"Series length must be >= 2, got {n}")
    spec.validate()
    rng = rng if rng is not None else stream(spec.innovations.seed)
    distribution = spec.innovations.distribution
    shocks = _innovations(rng, n, distribution)

    if spec.variant is ModelVariant.IID:
        errors = shocks

    elif spec.variant is ModelVariant.AR1:
        # stationary start eps_0 ~ N(0, 1/(1 - rho^2)), then eps_k = rho eps_{k-1} + delta_k
        start = _innovations(rng, 1, distribution)[0] / math.sqrt(1.0 - spec.rho ** 2)
        errors, _ = lfilter([1.0], [1.0, -spec.rho], shocks, zi=[spec.rho * start])

    elif spec.variant is ModelVariant.LINEAR:
        coeffs = np.asarray(spec.coeffs, dtype=float)
        presample = _innovations(rng, coeffs.size - 1, distribution)
        window = np.concatenate((presample, shocks))
        errors = np.convolve(window, coeffs, mode='valid')

    else:
        errors = _garch11(shocks, spec, _innovations(rng, GARCH_BURN_IN, distribution))

    return Series(errors)


def _garch11(shocks: np.ndarray, spec: GeneratorSpec, burn_in: np.ndarray) -> np.ndarray:
    """
    eps_k = delta_k tau_k, tau_k^2 = omega + alpha eps_{k-1}^2 + beta tau_{k-1}^2

    Starts at the unconditional variance and discards the burn-in steps.
    """
    omega, alpha, beta = spec.omega, spec.alpha, spec.beta
    tau2 = omega / (1.0 - alpha - beta)
    previous = math.sqrt(tau2) * burn_in[0] if burn_in.size else 0.0

    for delta in burn_in[1:]:
        tau2 = omega + alpha * previous ** 2 + beta * tau2
        previous = delta * math.sqrt(tau2)

    errors = np.empty(shocks.size)
    for k, delta in enumerate(shocks):
        tau2 = omega + alpha * previous ** 2 + beta * tau2
        previous = delta * math.sqrt(tau2)
        errors[k] = previous
    return errors


# ============================================
# CHANGE ALTERNATIVES
# ============================================

def apply_change(errors, change: ChangeSpec) -> Series:
    """
    Observations X_1..X_n under the requested regime

    - NONE: X_k = mu + eps_k
    - MEAN_SHIFT: X_k = mu + eps_k + delta_mag * 1{k > k*}
    - STAT_TO_RW: X_k = mu + eps_k for k <= k*, mu + sum_{j=k*+1..k} eps_j after
    - RW_TO_STAT: X_k = mu + sum_{j=k..k*} eps_j for k <= k*, mu + eps_k after

    Raises:
        InvalidSpec: If k* = floor(n*theta) falls outside 1..n-1
    """
    eps = Series.of(errors).values
    n = eps.size
    mu = change.mu

    if change.regime is Regime.NONE:
        return Series(mu + eps)

    kstar = change.kstar(n)
    observations = mu + eps.copy()

    if change.regime is Regime.MEAN_SHIFT:
        observations[kstar:] += change.delta_mag
    elif change.regime is Regime.STAT_TO_RW:
        # walk starts at eps_{k*+1}, not eps_{k*}: ones with k* = 2 give 1, 1, 1, 2, 3
        observations[kstar:] = mu + np.cumsum(eps[kstar:])
    else:
        # sums collapsing toward k*: a time-reversed random walk ending at eps_{k*}
        observations[:kstar] = mu + np.cumsum(eps[:kstar][::-1])[::-1]

    return Series(observations)


def generate(n: int, spec: GeneratorSpec, change: ChangeSpec,
             rng: Optional[np.random.Generator] = None) -> Series:
    """Errors from spec with change applied"""
    return apply_change(gen_errors(n, spec, rng), change)
