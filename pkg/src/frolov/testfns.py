"""Integrand families with known integrals and declared smoothness.

All evaluators are vectorized over ``(N, d)`` arrays, return exact zeros
outside ``[0, 1]^d``, and are pure (safe to call concurrently).  Reference
integrals come from closed forms where available; only the boundary-flat
bump needs 1-D adaptive quadrature, tensorized.  Declared smoothness
memberships for the spline family are classical facts used solely to drive
rate predictions; the package never computes the corresponding norms.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import CertificationError, InvalidSpecError, UnsupportedClassError


class Scale(enum.Enum):
    B = "B"
    F = "F"


class Regime(enum.Enum):
    STANDARD = "standard"
    SMALL_SMOOTHNESS = "small-smoothness"
    SMALL_SMOOTHNESS_LIMITING = "small-smoothness-limiting"
    QUASI_BANACH = "quasi-banach"
    LIMITING = "limiting"


@dataclass(frozen=True)
class SmoothnessClass:
    """Mixed-smoothness parameters ``(s, p, theta)`` on the B or F scale."""

    s: float
    p: float
    theta: float
    scale: Scale = Scale.B

    def __post_init__(self) -> None:
        if not (self.p > 0.0) or not (self.theta > 0.0):
            raise InvalidSpecError("p and theta must lie in (0, inf]")
        if self.scale is Scale.F and math.isinf(self.p):
            raise InvalidSpecError("the F scale requires p < inf")

    @property
    def sigma_p(self) -> float:
        return max(0.0, 1.0 / self.p - 1.0)


@dataclass(frozen=True)
class RatePrediction:
    """Worst-case error shape ``n**-main * (log n)**log_exp * (loglog n)**loglog_exp``."""

    main_rate: float
    log_exponent: float
    regime: Regime
    loglog_exponent: float = 0.0


class Structure(enum.Enum):
    TENSOR_PRODUCT = "tensor-product"
    ATOM_SUM = "atom-sum"


@dataclass(frozen=True)
class TestFunction:
    """An integrand with a trusted reference integral.

    ``evaluate`` maps an ``(N, d)`` array to ``(N,)`` values and vanishes
    identically outside the closed unit cube.
    """

    name: str
    arity: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    reference_integral: float
    reference_error_bound: float
    declared_class: SmoothnessClass | None
    structure: Structure
    profile_1d: Callable[[np.ndarray], np.ndarray] | None = None


# ---------------------------------------------------------------------------
# rate prediction


def predict_rate(cls: SmoothnessClass, d: int) -> RatePrediction:
    """Predicted worst-case convergence shape for dimension ``d``.

    Raises :class:`UnsupportedClassError` outside the covered regimes, with
    a hint at the nearest one.
    """
    if d < 1:
        raise InvalidSpecError(f"dimension must be >= 1, got {d}")
    s, p, theta = cls.s, cls.p, cls.theta
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_theta = 0.0 if math.isinf(theta) else 1.0 / theta

    if s == inv_p:
        # limiting smoothness: continuity needs theta <= 1 (B) or p < 1 (F)
        if cls.scale is Scale.B and theta <= 1.0:
            return RatePrediction(1.0 / max(p, 1.0), 0.0, Regime.LIMITING)
        if cls.scale is Scale.F and p < 1.0:
            return RatePrediction(1.0, 0.0, Regime.LIMITING)
        raise UnsupportedClassError(
            f"s = 1/p = {s:g} is covered only for theta <= 1 (B scale) or p < 1 "
            f"(F scale); nearest covered regime needs s > 1/p"
        )
    if s < inv_p:
        raise UnsupportedClassError(
            f"s = {s:g} < 1/p = {inv_p:g}: functions need not be continuous; "
            f"nearest covered regime is s > 1/p"
        )

    if p < 1.0:
        # integrability below 1 costs 1/p - 1 in the main rate
        main = s - inv_p + 1.0
        if cls.scale is Scale.B:
            return RatePrediction(main, (d - 1) * max(0.0, 1.0 - inv_theta), Regime.QUASI_BANACH)
        return RatePrediction(main, 0.0, Regime.QUASI_BANACH)

    if theta < 1.0:
        if cls.scale is Scale.B:
            return RatePrediction(s, 0.0, Regime.STANDARD)
        if s >= 1.0:
            return RatePrediction(s, 0.0, Regime.STANDARD)
        return RatePrediction(s, (d - 1) * (1.0 - s), Regime.SMALL_SMOOTHNESS)

    if cls.scale is Scale.B:
        return RatePrediction(s, (d - 1) * (1.0 - inv_theta), Regime.STANDARD)
    if s > inv_theta:
        return RatePrediction(s, (d - 1) * (1.0 - inv_theta), Regime.STANDARD)
    if s == inv_theta:
        return RatePrediction(
            s, (d - 1) * (1.0 - s), Regime.SMALL_SMOOTHNESS_LIMITING, loglog_exponent=1.0 - s
        )
    return RatePrediction(s, (d - 1) * (1.0 - s), Regime.SMALL_SMOOTHNESS)


# ---------------------------------------------------------------------------
# 1-D profiles


def bump_profile(t: np.ndarray) -> np.ndarray:
    """``exp(4 - 1/(t(1-t)))`` on (0, 1), zero elsewhere; peak value 1 at 1/2."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    out[inside] = np.exp(4.0 - 1.0 / (ti * (1.0 - ti)))
    return out


@lru_cache(maxsize=1)
def bump_integral_1d() -> tuple[float, float]:
    """``integral of bump_profile over [0, 1]`` by adaptive quadrature, with its error bound."""
    value, err = quad(
        lambda t: math.exp(4.0 - 1.0 / (t * (1.0 - t))) if 0.0 < t < 1.0 else 0.0,
        0.0,
        1.0,
        epsabs=1e-15,
        epsrel=1e-13,
        limit=200,
    )
    if err > 1e-14:
        raise CertificationError(f"bump quadrature error estimate {err:.2e} exceeds 1e-14")
    return value, err


def hat_profile(t: np.ndarray) -> np.ndarray:
    """``min(t, 1-t)`` on [0, 1], zero elsewhere (kink at 1/2)."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    return np.minimum(t, 1.0 - t)


def bspline(t: np.ndarray, k: int) -> np.ndarray:
    """Cardinal B-spline of order ``k`` (support ``[0, k]``), Cox-de Boor."""
    t = np.asarray(t, dtype=np.float64)
    if k == 1:
        return ((t >= 0.0) & (t < 1.0)).astype(np.float64)
    prev = bspline(t, k - 1)
    prev_shift = bspline(t - 1.0, k - 1)
    return (t * prev + (k - t) * prev_shift) / (k - 1)


# ---------------------------------------------------------------------------
# families


def _tensor_evaluate(profile: Callable[[np.ndarray], np.ndarray]):
    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        inside = np.all((x >= 0.0) & (x <= 1.0), axis=1)
        values = profile(np.clip(x, 0.0, 1.0)).prod(axis=1)
        return np.where(inside, values, 0.0)

    return evaluate


def make_bump(d: int) -> TestFunction:
    """Tensor product of boundary-flat bumps: infinitely smooth, every class."""
    if d < 1:
        raise InvalidSpecError(f"dimension must be >= 1, got {d}")
    integral_1d, err_1d = bump_integral_1d()
    return TestFunction(
        name="bump",
        arity=d,
        evaluate=_tensor_evaluate(bump_profile),
        reference_integral=integral_1d**d,
        reference_error_bound=d * integral_1d ** (d - 1) * max(err_1d, 1e-15),
        declared_class=None,
        structure=Structure.TENSOR_PRODUCT,
        profile_1d=bump_profile,
    )


def make_hat(d: int) -> TestFunction:
    """Tensor product of ``min(t, 1-t)``: the compactly supported kink."""
    if d < 1:
        raise InvalidSpecError(f"dimension must be >= 1, got {d}")
    return TestFunction(
        name="hat",
        arity=d,
        evaluate=_tensor_evaluate(hat_profile),
        reference_integral=0.25**d,
        reference_error_bound=0.0,
        declared_class=SmoothnessClass(s=2.0, p=1.0, theta=math.inf, scale=Scale.B),
        structure=Structure.TENSOR_PRODUCT,
        profile_1d=hat_profile,
    )


def make_spline_kink(d: int, k: int) -> TestFunction:
    """Tensor product of order-``k`` B-splines rescaled to support ``[0, 1]``.

    Unit mass makes the reference integral exactly ``k**-d``; declared
    smoothness ``s = k`` (B scale, ``p = 1``) gives a tunable-rate family.
    """
    if d < 1:
        raise InvalidSpecError(f"dimension must be >= 1, got {d}")
    if k < 2:
        raise InvalidSpecError(f"spline order must be >= 2, got {k}")

    def profile(t: np.ndarray) -> np.ndarray:
        return bspline(k * np.asarray(t, dtype=np.float64), k)

    return TestFunction(
        name=f"spline:k={k}",
        arity=d,
        evaluate=_tensor_evaluate(profile),
        reference_integral=float(k) ** (-d),
        reference_error_bound=0.0,
        declared_class=SmoothnessClass(s=float(k), p=1.0, theta=math.inf, scale=Scale.B),
        structure=Structure.TENSOR_PRODUCT,
        profile_1d=profile,
    )


# ---------------------------------------------------------------------------
# registry / CLI addressing


def list_functions() -> list[tuple[str, str]]:
    """``(address, description)`` pairs for every available family."""
    return [
        ("hat", "tensor kink min(t, 1-t); integral 4**-d; class s=2, p=1, theta=inf (B)"),
        ("bump", "boundary-flat C-infinity bump; integral from certified 1-D quadrature"),
        ("spline:k=K", "order-K cardinal B-spline, K >= 2; integral K**-d; class s=K, p=1 (B)"),
    ]


def parse_function(address: str, d: int) -> TestFunction:
    """Resolve ``name`` or ``name:param`` addresses, e.g. ``spline:k=3``."""
    name, _, params = address.partition(":")
    if name == "hat":
        return make_hat(d)
    if name == "bump":
        return make_bump(d)
    if name == "spline":
        for part in params.split(","):
            key, _, value = part.partition("=")
            if key.strip() == "k":
                return make_spline_kink(d, int(value))
        raise InvalidSpecError(f"spline needs k=<order>, got {address!r}")
    raise InvalidSpecError(f"unknown test function {address!r}; try `fns --list`")
