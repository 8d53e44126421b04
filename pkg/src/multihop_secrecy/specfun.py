"""Scalar special functions used by the closed forms.

Only the principal real branch of Lambert W is provided. The gamma function
is a thin domain-checked wrapper over :func:`math.gamma`.
"""

import math

_INV_E = math.exp(-1.0)
_MAX_ITER = 64


def lambert_w0(x: float) -> float:
    """Principal branch W0 of the Lambert W function, ``w * exp(w) = x``.

    Halley iteration from a piecewise initial guess. Raises ``ValueError``
    for ``x < -1/e`` or non-finite ``x``.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"lambert_w0: argument must be finite, got {x!r}")
    if x < -_INV_E:
        # tolerate the rounding of -1/e itself
        if x < -_INV_E * (1.0 + 1e-15):
            raise ValueError(f"lambert_w0: argument {x!r} below -1/e")
        return -1.0
    if x == 0.0:
        return 0.0

    w = _initial_guess(x)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def _initial_guess(x: float) -> float:
    if x < -0.25:
        # branch-point expansion in q = sqrt(2(e x + 1))
        q = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + q - q * q / 3.0 + 11.0 / 72.0 * q ** 3
    if abs(x) < 0.1:
        return x - x * x + 1.5 * x ** 3
    if x < 3.0:
        # Winitzki's approximation
        lx = math.log1p(x)
        return lx * (1.0 - math.log1p(lx) / (2.0 + lx))
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def gamma(x: float) -> float:
    """Gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"gamma: argument must be finite and > 0, got {x!r}")
    return math.gamma(x)


def lambert_w0_exp(y: float) -> float:
    """W0(exp(y)), usable when exp(y) itself would overflow.

    Solves ``w + log(w) = y`` by Newton iteration for large ``y``.
    """
    y = float(y)
    if not math.isfinite(y):
        raise ValueError(f"lambert_w0_exp: argument must be finite, got {y!r}")
    if y < 700.0:
        return lambert_w0(math.exp(y))
    w = y - math.log(y)
    for _ in range(_MAX_ITER):
        step = (w + math.log(w) - y) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 4e-16 * w:
            break
    return w
