"""Scalar root finding and line search used by the solvers.

Two workhorses: a safeguarded Newton iteration that falls back to bisection
whenever the Newton step leaves the bracket or stalls, and a golden-section
line minimizer. Both are deterministic and allocation free.
"""
from __future__ import annotations

import math
from typing import Callable

from .errors import OutOfBracket

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def newton_bisect(
    f: Callable[[float], float],
    df: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float | None = None,
    rtol: float = 1e-14,
    ftol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Find a root of f in [lo, hi] with Newton steps safeguarded by bisection.

    Parameters
    ----------
    f, df : callables returning the residual and its derivative.
    lo, hi : bracket endpoints. f(lo) and f(hi) must have opposite signs
        (either may be zero).
    x0 : optional initial guess inside the bracket.
    rtol : relative interval tolerance on x.
    ftol : absolute residual tolerance; 0 keeps iterating until the interval
        collapses or the residual underflows.

    Returns
    -------
    float root with f(root) ~ 0.

    Raises
    ------
    OutOfBracket if f(lo) and f(hi) have the same nonzero sign.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise OutOfBracket(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r},{fhi!r}")

    # orient so that f(a) < 0 < f(b)
    if flo < 0.0:
        a, b = lo, hi
    else:
        a, b = hi, lo

    x = x0 if x0 is not None and min(lo, hi) < x0 < max(lo, hi) else 0.5 * (lo + hi)
    fx = f(x)
    step = abs(hi - lo)
    for _ in range(max_iter):
        if fx == 0.0:
            return x
        if fx < 0.0:
            a = x
        else:
            b = x
        if abs(fx) <= ftol:
            return x
        width = abs(b - a)
        if width <= rtol * max(1.0, abs(x)):
            return x
        dfx = df(x)
        use_bisect = True
        if dfx != 0.0 and math.isfinite(dfx):
            xn = x - fx / dfx
            lo_ab, hi_ab = (a, b) if a < b else (b, a)
            if lo_ab < xn < hi_ab and abs(xn - x) < 0.5 * step:
                x_new = xn
                use_bisect = False
        if use_bisect:
            x_new = 0.5 * (a + b)
        step = abs(x_new - x)
        x = x_new
        fx = f(x)
    return x


def expand_bracket_down(
    f: Callable[[float], float],
    start: float,
    floor: float,
    max_doublings: int = 600,
) -> float:
    """Walk x down from start toward floor (geometrically) until f(x) <= 0.

    Used to establish the lower end of a multiplier bracket. Returns the first
    x with f(x) <= 0; raises OutOfBracket if the floor is reached first.
    """
    x = start
    step = max(1.0, abs(start)) * 0.5
    for _ in range(max_doublings):
        if f(x) <= 0.0:
            return x
        x -= step
        step *= 2.0
        if x <= floor:
            if f(floor) <= 0.0:
                return floor
            raise OutOfBracket("no admissible lower bracket above the floor")
    raise OutOfBracket("bracket expansion did not terminate")


def golden_minimize(
    f: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = 1e-10,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Golden-section minimization of a unimodal f on [a, b].

    Returns (x, f(x)). Tolerance is relative to max(1, |x|); endpoints are
    also evaluated so a boundary minimum is never missed.
    """
    fa, fb = f(a), f(b)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(1.0, abs(x1) + abs(x2)):
            break
        if f1 <= f2:
            b, fb = x2, f2
            x2, f2 = x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, fa = x1, f1
            x1, f1 = x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    candidates = [(fa, a), (f1, x1), (f2, x2), (fb, b)]
    fbest, xbest = min(candidates, key=lambda t: t[0])
    return xbest, fbest
