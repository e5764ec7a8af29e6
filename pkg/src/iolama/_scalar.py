"""Derivative-free scalar search: golden-section extremization, bisection."""

from __future__ import annotations

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, a: float, b: float, rel_tol: float = 1e-10,
                       max_iter: int = 200):
    """Minimize unimodal ``f`` on [a, b].

    Shrinks the bracket until its width is below ``rel_tol`` relative to
    its location. Returns ``(x, f(x))`` at the bracket midpoint.
    """
    if not a < b:
        raise ValueError(f"degenerate bracket [{a}, {b}]")
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(abs(a), abs(b), 1e-300):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def golden_section_max(f, a: float, b: float, rel_tol: float = 1e-10,
                       max_iter: int = 200):
    x, fneg = golden_section_min(lambda s: -f(s), a, b, rel_tol, max_iter)
    return x, -fneg


def bisect_root(f, a: float, b: float, fa: float | None = None,
                fb: float | None = None, rel_tol: float = 1e-12,
                max_iter: int = 200) -> float:
    """Root of ``f`` inside a sign-change bracket [a, b].

    Bisects until the bracket width is below ``rel_tol`` relative to the
    root location; returns the bracket midpoint.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise ValueError(f"no sign change on [{a}, {b}]: f={fa}, {fb}")
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(abs(a), abs(b), 1e-300):
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)
