"""Adaptive Simpson quadrature for smooth one-dimensional integrands."""

from typing import Callable, Tuple


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> Tuple[float, float]:
    """
    Integrate f over [a, b] to absolute tolerance `tol`.
    Returns (integral, error estimate). Intervals are halved until the
    Richardson error estimate of each piece falls below its share of `tol`
    or `max_depth` halvings have been made.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, error = adaptive_simpson(f, b, a, tol, max_depth)
        return -value, error

    def simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 3.0 * (fa + 4.0 * fm + fb)

    fa, fb = f(a), f(b)
    m = (a + b) / 2.0
    fm = f(m)
    whole = simpson(fa, fm, fb, (b - a) / 2.0)
    total = 0.0
    error = 0.0
    # explicit stack of (a, b, fa, fm, fb, whole, depth, tol)
    stack = [(a, b, fa, fm, fb, whole, 0, tol)]
    while stack:
        a, b, fa, fm, fb, whole, depth, tol = stack.pop()
        m = (a + b) / 2.0
        h = (b - a) / 4.0
        flm = f((a + m) / 2.0)
        frm = f((m + b) / 2.0)
        left = simpson(fa, flm, fm, h)
        right = simpson(fm, frm, fb, h)
        estimate = (left + right - whole) / 15.0
        if depth >= max_depth or abs(estimate) < tol:
            total += left + right + estimate
            error += abs(estimate)
            continue
        stack.append((m, b, fm, frm, fb, right, depth + 1, tol / 2.0))
        stack.append((a, m, fa, flm, fm, left, depth + 1, tol / 2.0))
    return total, error
