"""Adaptive Simpson quadrature."""

from __future__ import annotations

from collections.abc import Callable, Sequence


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 48,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Interior ``breakpoints`` (e.g. crossing times where the integrand has a
    kink) split the interval and share the tolerance.  Raises
    QuadratureError if ``max_depth`` is exhausted before the local error
    estimate drops below its share of the tolerance.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth, breakpoints)
    cuts = [a] + sorted(t for t in breakpoints if a < t < b) + [b]
    share = tol / (len(cuts) - 1)
    return sum(_simpson_interval(f, lo, hi, share, max_depth) for lo, hi in zip(cuts, cuts[1:]))


def _simpson_interval(f, a, b, tol, max_depth):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = (left + right - s) / 15.0
        # depth floor of 3 keeps a lucky coarse estimate from hiding a narrow feature
        if depth >= 3 and abs(err) <= eps:
            total += left + right + err
            continue
        if depth >= max_depth:
            raise QuadratureError(f"max depth reached on [{lo}, {hi}] (error estimate {abs(err):.3e})")
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total
