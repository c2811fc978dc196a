"""Primitive integrals, normalized moments, and centroids at a scale a.

For a spec f and a scale a > 0 the primitives are

    F(a) = int_0^a f,   H(a) = int_0^a x f,   G(a) = int_0^a f**2,

and the scale-free versions divide out powers of a and f(a):

    A = F / (a f(a)),   B = H / (a^2 f(a)),   C = G / (a f(a)^2),
    theta = B / A.

The centroid of the region under f on [0, a] sits at (H/F, G/(2F)); theta
is its abscissa in units of a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainExceeded, NonPositiveInput, ThetaOutOfRange
from .quadrature import MomentKind, integrate_moment

__all__ = ["Primitives", "MomentBundle", "ShapeProfile",
           "primitives", "moment_bundle", "shape_profile"]


@dataclass(frozen=True)
class Primitives:
    """F, H, G at one scale, with the quadrature error bounds that made them."""

    a: float
    F: float
    H: float
    G: float
    errors: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class MomentBundle:
    """Everything the identity and detection layers need at one scale.

    f(a) is evaluated exactly once and shared by all normalizations, so the
    bundle is internally consistent by construction.
    """

    a: float
    fa: float
    F: float
    H: float
    G: float
    A: float
    B: float
    C: float
    theta: float
    xbar: float
    ybar: float
    errors: tuple[float, float, float] = (0.0, 0.0, 0.0)


def primitives(spec, a, tol=1e-10):
    """The three primitive integrals of ``spec`` at scale a."""
    rf = integrate_moment(spec, a, MomentKind.F, tol)
    rh = integrate_moment(spec, a, MomentKind.H, tol)
    rg = integrate_moment(spec, a, MomentKind.G, tol)
    return Primitives(
        a=float(a),
        F=rf.value,
        H=rh.value,
        G=rg.value,
        errors=(rf.error_estimate, rh.error_estimate, rg.error_estimate),
    )


def moment_bundle(spec, a, tol=1e-10):
    """Primitives plus normalized moments and the centroid at scale a.

    Raises ThetaOutOfRange if the scale-free centroid abscissa B/A falls
    outside (0, 1) -- which cannot happen for an admissible spec and so
    flags either an inadmissible input or a failed integration.
    """
    prim = primitives(spec, a, tol)
    a = prim.a
    fa = spec.eval(a)
    A = prim.F / (a * fa)
    B = prim.H / (a * a * fa)
    C = prim.G / (a * fa * fa)
    theta = B / A
    if not 0.0 < theta < 1.0:
        raise ThetaOutOfRange(f"theta={theta:g} outside (0, 1) at a={a:g}")
    return MomentBundle(
        a=a,
        fa=fa,
        F=prim.F,
        H=prim.H,
        G=prim.G,
        A=A,
        B=B,
        C=C,
        theta=theta,
        xbar=prim.H / prim.F,
        ybar=prim.G / (2.0 * prim.F),
        errors=prim.errors,
    )


class ShapeProfile:
    """The scale-free profile g(s) = f(a s) / f(a) on (0, 1].

    g(1) = 1 by construction; for a power law with exponent p the profile
    is s**p at every scale, which is what makes it the right object for
    scale-collapse arguments.
    """

    def __init__(self, spec, a):
        a = float(a)
        if not math.isfinite(a) or a <= 0.0:
            raise NonPositiveInput("scale a must be positive and finite")
        lo, hi = spec.support
        if a > hi * (1.0 + 1e-12):
            raise DomainExceeded(f"a={a:g} beyond the function's support")
        self.spec = spec
        self.a = a
        self.fa = spec.eval(a)
        #: smallest s the profile can be evaluated at (0 for analytic specs)
        self.s_floor = lo / a if lo > 0.0 else 0.0

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        scalar = arr.ndim == 0
        vec = np.atleast_1d(arr)
        if vec.size and (not np.all(np.isfinite(vec)) or np.any(vec <= 0.0)):
            raise NonPositiveInput("profile argument s must be positive")
        if vec.size and np.any(vec > 1.0 + 1e-12):
            raise DomainExceeded("profile argument s must not exceed 1")
        out = np.asarray(self.spec.eval(vec * self.a)) / self.fa
        return float(out[0]) if scalar else out


def shape_profile(spec, a):
    """Construct the scale-free profile of ``spec`` at scale a."""
    return ShapeProfile(spec, a)
