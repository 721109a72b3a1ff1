"""Classification of growth parameters against the sharp Schauder threshold q/p < 1 + alpha/n."""
from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from app.services.errors import ParameterError

__all__: list[str] = [
    "Regime",
    "Integrability",
    "GrowthParams",
    "RegularityVerdict",
    "MoserSequence",
    "critical_exponent",
    "classify",
    "classify_log_multiphase",
    "double_phase_bound",
    "moser_sequence",
    "predicted_integrability",
]


class Regime(str, Enum):
    UNIFORM_SCHAUDER = "UniformSchauder"
    SHARP_SCHAUDER_HOLDS = "SharpSchauderHolds"
    DOUBLE_PHASE_BOUNDED = "DoublePhaseBounded"
    COUNTEREXAMPLE_REGION = "CounterexampleRegion"
    BORDERLINE = "Borderline"


class Integrability(str, Enum):
    ALL_FINITE_EXPONENTS = "AllFiniteExponents"
    NOT_GUARANTEED = "NotGuaranteed"


def _check_pq_alpha(p: float, q: float, alpha: float) -> None:
    if not 1 < p <= q:
        raise ParameterError(f"growth exponents must satisfy 1 < p <= q, got p={p}, q={q}")
    if not 0 < alpha <= 1:
        raise ParameterError(f"Hölder exponent must lie in (0, 1], got alpha={alpha}")


class GrowthParams(BaseModel):
    p: float
    q: float
    alpha: float
    n: int = Field(default=2, ge=2)
    family: Literal["power", "double_phase"] = "power"
    beta: float | None = None
    s_exp: float | None = None

    model_config = {"extra": "forbid", "frozen": True, "allow_inf_nan": False}

    @model_validator(mode="after")
    def check_ranges(self) -> "GrowthParams":
        _check_pq_alpha(self.p, self.q, self.alpha)
        return self


class RegularityVerdict(BaseModel):
    regime: Regime
    margin: float


def critical_exponent(p: float, alpha: float, n: int) -> float:
    """q* = p (1 + alpha/n), the largest q with gradient regularity (exclusive)."""
    return float(Fraction(p) * (1 + Fraction(alpha) / n))


def _exact_margin(p: float, q: float, alpha: float, n: int) -> Fraction:
    return 1 + Fraction(alpha) / n - Fraction(q) / Fraction(p)


def double_phase_bound(p: float, q: float, alpha: float) -> bool:
    """True iff q <= p + alpha: bounded minimizers of the double-phase energy are Hölder."""
    _check_pq_alpha(p, q, alpha)
    return Fraction(q) <= Fraction(p) + Fraction(alpha)


def classify(params: GrowthParams) -> RegularityVerdict:
    """Place (p, q, alpha, n) in the regime table.

    The regime is decided in exact rational arithmetic of the given floats, so
    Borderline appears only at exact equality q/p = 1 + alpha/n. Double-phase
    parameters past the threshold with p < n and q <= p + alpha keep Hölder
    continuity of bounded minimizers and are reported as DoublePhaseBounded.
    """
    margin = _exact_margin(params.p, params.q, params.alpha, params.n)
    if params.q == params.p:
        regime = Regime.UNIFORM_SCHAUDER
    elif margin == 0:
        regime = Regime.BORDERLINE
    elif margin > 0:
        regime = Regime.SHARP_SCHAUDER_HOLDS
    elif (params.family == "double_phase" and params.p < params.n
          and double_phase_bound(params.p, params.q, params.alpha)):
        regime = Regime.DOUBLE_PHASE_BOUNDED
    else:
        regime = Regime.COUNTEREXAMPLE_REGION
    return RegularityVerdict(regime=regime, margin=float(margin))


def classify_log_multiphase(q: float, s_exp: float, alpha: float, beta: float, n: int) -> RegularityVerdict:
    """Nearly linear growth with two power phases: regular when q < 1 + alpha/n and s < 1 + beta/n."""
    if not (q > 1 and s_exp > 1):
        raise ParameterError(f"phase exponents must exceed 1, got q={q}, s={s_exp}")
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not 0 < value <= 1:
            raise ParameterError(f"{name} must lie in (0, 1], got {value}")
    if n < 2:
        raise ParameterError(f"dimension must be >= 2, got n={n}")
    margin = min(1 + Fraction(alpha) / n - Fraction(q), 1 + Fraction(beta) / n - Fraction(s_exp))
    if margin == 0:
        regime = Regime.BORDERLINE
    elif margin > 0:
        regime = Regime.SHARP_SCHAUDER_HOLDS
    else:
        regime = Regime.COUNTEREXAMPLE_REGION
    return RegularityVerdict(regime=regime, margin=float(margin))


def predicted_integrability(params: GrowthParams) -> Integrability:
    regime = classify(params).regime
    if regime in (Regime.SHARP_SCHAUDER_HOLDS, Regime.UNIFORM_SCHAUDER):
        return Integrability.ALL_FINITE_EXPONENTS
    return Integrability.NOT_GUARANTEED


class MoserSequence(BaseModel):
    t: list[float]
    sigma: float
    gamma: float
    increment: float
    diverges: bool
    steps_to_target: int | None = None


def moser_sequence(t0: float, sigma: float, p: float, gamma: float, q: float,
                   max_iters: int, target: float | None = None) -> MoserSequence:
    """Iterate t_{i+1} = t_i + sigma (p + gamma - q) for max_iters steps.

    When the sequence diverges and a target is given, ``steps_to_target`` is
    the number of increments from t0 to the target, counted in closed form
    and independent of max_iters.
    """
    if not t0 >= 1:
        raise ParameterError(f"t0 must be >= 1, got {t0}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")
    for name, value in (("p", p), ("gamma", gamma), ("q", q), ("target", target)):
        if value is not None and not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value}")

    gap = p + gamma - q
    increment = sigma * gap
    diverges = gap > 0
    t = [float(t0)]
    for _ in range(max_iters):
        t.append(t[-1] + increment)

    steps = None
    if diverges and target is not None:
        steps = _steps_to_reach(float(t0), increment, target)
    return MoserSequence(t=t, sigma=sigma, gamma=gamma, increment=increment,
                         diverges=diverges, steps_to_target=steps)


def _steps_to_reach(t0: float, increment: float, target: float) -> int:
    """Smallest n >= 0 with t0 + n * increment >= target, for increment > 0."""
    quotient = (target - t0) / increment
    if not math.isfinite(quotient):
        raise ParameterError(f"increment {increment:.3e} is too small to reach target {target}")
    steps = max(0, math.ceil(quotient))
    # the rounded quotient can be off by one in either direction
    while steps > 0 and t0 + (steps - 1) * increment >= target:
        steps -= 1
    while t0 + steps * increment < target:
        steps += 1
    return steps
