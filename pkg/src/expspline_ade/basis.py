"""Exponential (tension) B-spline basis on a uniform mesh.

Every basis function is a translate of one centred profile supported on
four elements.  The profile is built from ``{1, x, exp(px), exp(-px)}`` on
each element and reduces to the cubic B-spline (scaled to a unit centre
value) as ``p*h -> 0``.

The textbook coefficient formulas cancel catastrophically for small
``p*h`` (``p*h*cosh(p*h) - sinh(p*h)`` is ``O((p*h)**3)``), so all
evaluations go through the cancellation-free kernels :func:`sinh_minus_x`,
:func:`xcosh_minus_sinh` and :func:`cosh_minus_one`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

import numpy as np

#: Below this argument the kernels use truncated Taylor series.
SERIES_SWITCH = 0.5

#: Below this ``p*h`` the inner pieces use the series-stable form.
STABLE_FORM_SWITCH = 2.0

#: Overflow guard on ``p*h``.
MAX_PH = 50.0

# 12 odd terms: the first neglected term at |w| = 0.5 is below 1e-40 relative.
_NTERMS = 12
_SINH_COEFFS = np.array([1.0 / factorial(2 * k + 1) for k in range(1, _NTERMS + 1)])
_XCOSH_COEFFS = np.array([2.0 * k / factorial(2 * k + 1) for k in range(1, _NTERMS + 1)])


def _odd_series(w, coeffs):
    # sum_k coeffs[k-1] * w**(2k+1), Horner in w**2
    w2 = w * w
    acc = np.zeros_like(w2)
    for c in coeffs[::-1]:
        acc = acc * w2 + c
    return acc * w2 * w


def sinh_minus_x(w):
    """``sinh(w) - w`` without cancellation near zero."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < SERIES_SWITCH
    out = np.where(small, 0.0, np.sinh(np.where(small, 1.0, w)) - w)
    if np.any(small):
        out = np.where(small, _odd_series(w, _SINH_COEFFS), out)
    return out[()] if out.ndim == 0 else out


def xcosh_minus_sinh(w):
    """``w*cosh(w) - sinh(w)`` without cancellation near zero."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < SERIES_SWITCH
    wl = np.where(small, 1.0, w)
    out = np.where(small, 0.0, wl * np.cosh(wl) - np.sinh(wl))
    if np.any(small):
        out = np.where(small, _odd_series(w, _XCOSH_COEFFS), out)
    return out[()] if out.ndim == 0 else out


def cosh_minus_one(w):
    """``cosh(w) - 1`` computed as ``2 sinh(w/2)**2``."""
    return 2.0 * np.sinh(0.5 * np.asarray(w, dtype=float)) ** 2


@dataclass(frozen=True)
class Mesh:
    """Uniform partition of ``[a, b]`` into ``n`` elements."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"need finite a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"element count must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def knot(self, i):
        """Knot ``x_i``; indices outside ``0..n`` extend the uniform spacing."""
        return self.a + np.asarray(i) * self.h

    @cached_property
    def knots(self) -> np.ndarray:
        x = self.a + np.arange(self.n + 1) * self.h
        x[-1] = self.b
        return x


@dataclass(frozen=True)
class BasisConstants:
    """Tension-derived scalars shared by every basis function."""

    p: float
    h: float
    s: float
    c: float
    # p*h*cosh(p*h) - sinh(p*h), the common denominator
    q: float
    b2: float
    a1: float
    b1: float
    c1: float
    d1: float
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def ph(self) -> float:
        return self.p * self.h


def derive_constants(p: float, h: float) -> BasisConstants:
    """Compute all coefficients of the exponential B-spline for tension ``p``
    and knot spacing ``h``.

    Raises ``ValueError`` for non-positive arguments and ``OverflowError``
    when ``p*h`` exceeds :data:`MAX_PH`.
    """
    if not (p > 0 and h > 0):
        raise ValueError(f"tension and spacing must be positive, got p={p}, h={h}")
    z = p * h
    if z > MAX_PH:
        raise OverflowError(f"p*h = {z:g} exceeds the limit {MAX_PH:g}")
    s = float(np.sinh(z))
    c = float(np.cosh(z))
    q = float(xcosh_minus_sinh(z))
    cm1 = float(cosh_minus_one(z))
    return BasisConstants(
        p=float(p),
        h=float(h),
        s=s,
        c=c,
        q=q,
        b2=p / (2.0 * q),
        a1=z * c / q,
        b1=-p * (c + 0.5) / q,
        c1=(np.exp(-z) + 0.5) / (2.0 * q),
        d1=-(np.exp(z) + 0.5) / (2.0 * q),
        alpha1=float(sinh_minus_x(z)) / (2.0 * q),
        alpha2=-p * cm1 / (2.0 * q),
        alpha3=p * p * s / (2.0 * q),
    )


def _inner(k: BasisConstants, r, deriv):
    # centre piece, r = |x - x_i| in [0, h]; derivatives taken w.r.t. r
    p = k.p
    w = p * r
    if k.ph < STABLE_FORM_SWITCH:
        g = k.c + 0.5
        if deriv == 0:
            return 1.0 + (g * sinh_minus_x(w) - k.s * cosh_minus_one(w)) / k.q
        if deriv == 1:
            return p * (g * cosh_minus_one(w) - k.s * np.sinh(w)) / k.q
        return p * p * (g * np.sinh(w) - k.s * np.cosh(w)) / k.q
    ep, em = np.exp(w), np.exp(-w)
    if deriv == 0:
        return k.a1 + k.b1 * r + k.c1 * ep + k.d1 * em
    if deriv == 1:
        return k.b1 + p * (k.c1 * ep - k.d1 * em)
    return p * p * (k.c1 * ep + k.d1 * em)


def _outer(k: BasisConstants, r, deriv):
    # outer piece, r = |x - x_i| in [h, 2h]; y is the distance to the support end
    p = k.p
    w = p * (2.0 * k.h - r)
    if deriv == 0:
        return sinh_minus_x(w) / (2.0 * k.q)
    if deriv == 1:
        return -p * cosh_minus_one(w) / (2.0 * k.q)
    return p * p * np.sinh(w) / (2.0 * k.q)


def centered_profile(constants: BasisConstants, d, deriv: int = 0):
    """Evaluate the ``deriv``-th derivative of the basis function centred at 0
    at signed offsets ``d`` (``d = x - x_i``)."""
    if deriv not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {deriv}")
    d = np.asarray(d, dtype=float)
    h = constants.h
    r = np.abs(d)
    # knots built as a + i*h may sit a rounding unit inside the support end
    edge = 2.0 * h * (1.0 - 8.0 * np.finfo(float).eps)
    inner = r < h
    outer = (r >= h) & (r < edge)
    out = np.zeros_like(r)
    if np.any(inner):
        out[inner] = _inner(constants, r[inner], deriv)
    if np.any(outer):
        out[outer] = _outer(constants, r[outer], deriv)
    if deriv == 1:
        out = np.where(d < 0, -out, out)
    return out[()] if out.ndim == 0 else out


def eval_basis(mesh: Mesh, constants: BasisConstants, i: int, x, deriv: int = 0):
    """Value (or first/second derivative) of basis function ``phi_i`` at ``x``.

    ``i`` runs over ``-1..n+1``; the result is exactly zero outside the open
    support ``(x_{i-2}, x_{i+2})``.
    """
    return centered_profile(constants, np.asarray(x, dtype=float) - mesh.knot(i), deriv)
