"""Sampling from the normalized measure with density f / F(a) on (0, a].

The measure puts mass f(x) dx / F(a) on (0, a]; its mean reproduces the
centroid abscissa H/F, and the mean of f under it reproduces twice the
centroid ordinate, G/F.  Draws come from inverse-CDF transform of uniform
variates, so a stream of uniforms maps deterministically to a stream of
draws.

Randomness is counter-based (Philox) and keyed by (seed, stream): states
with equal keys produce identical draws on any machine, and child states
produced by ``split`` get fresh streams that never overlap the parent's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainExceeded, NonPositiveInput, ToleranceNotReached
from .functions import PowerLaw
from .quadrature import MomentKind, integrate, integrate_moment
# The raw 15-point rule is reused for local CDF refinements inside a table
# interval; its nodes are strictly interior, so x = 0 is never touched.
from .quadrature import _WGK, _XGK

__all__ = ["SamplerState", "MCEstimate", "inverse_cdf", "sample", "mc_estimates"]

_TABLE_INTERVALS = 256
_BISECT_STEPS = 24
_POLISH_STEPS = 2
_MIN_ESTIMATE_N = 100


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class _CdfTable:
    """Cumulative integrals of the profile g(s) = f(a s)/f(a) on a knot grid.

    Working in profile units keeps every entry O(1) regardless of the
    spec's amplitude or the scale, so the per-interval quadrature floors
    stay meaningful.
    """

    def __init__(self, spec, a, tol):
        self.spec = spec
        self.a = a
        self.fa = spec.eval(a)
        lo = spec.support[0]
        self.s_lo = lo / a if lo > 0.0 else 0.0
        self.knots = np.linspace(self.s_lo, 1.0, _TABLE_INTERVALS + 1)
        panel_tol = min(1e-12, 0.01 * tol)
        masses = np.empty(_TABLE_INTERVALS)
        for k in range(_TABLE_INTERVALS):
            masses[k] = integrate(
                self._g, self.knots[k], self.knots[k + 1], panel_tol
            ).value
        self.cum = np.concatenate(([0.0], np.cumsum(masses)))
        self.total = float(self.cum[-1])

    def _g(self, s):
        return np.asarray(self.spec.eval(self.a * s)) / self.fa

    def _local_cdf(self, base_idx, s):
        """cum at left knot plus a single K15 panel from that knot to s."""
        left = self.knots[base_idx]
        center = 0.5 * (left + s)
        half = 0.5 * (s - left)
        nodes = center[:, None] + half[:, None] * _XGK[None, :]
        # Guard the degenerate s == left case; nodes collapse to the knot.
        np.maximum(nodes, np.nextafter(self.s_lo, 1.0) if self.s_lo else
                   np.nextafter(0.0, 1.0), out=nodes)
        gv = self._g(nodes.ravel()).reshape(nodes.shape)
        return self.cum[base_idx] + half * (gv @ _WGK)

    def quantiles(self, u, tol):
        """Solve int_{s_lo}^{s} g = u * total for each u, vectorized."""
        u = np.asarray(u, dtype=float)
        t = u * self.total
        idx = np.searchsorted(self.cum, t, side="right") - 1
        idx = np.clip(idx, 0, _TABLE_INTERVALS - 1)
        lo_s = self.knots[idx].astype(float)
        hi_s = self.knots[idx + 1].astype(float)

        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo_s + hi_s)
            above = self._local_cdf(idx, mid) > t
            hi_s = np.where(above, mid, hi_s)
            lo_s = np.where(above, lo_s, mid)

        f_lo = self._local_cdf(idx, lo_s) - t
        f_hi = self._local_cdf(idx, hi_s) - t
        s = 0.5 * (lo_s + hi_s)
        for _ in range(_POLISH_STEPS):
            denom = f_hi - f_lo
            step_ok = denom > 0.0
            cand = np.where(
                step_ok, lo_s - f_lo * (hi_s - lo_s) / np.where(step_ok, denom, 1.0), s
            )
            s = np.clip(cand, lo_s, hi_s)
            f_mid = self._local_cdf(idx, s) - t
            gt = f_mid > 0.0
            f_hi = np.where(gt, f_mid, f_hi)
            hi_s = np.where(gt, s, hi_s)
            f_lo = np.where(gt, f_lo, f_mid)
            lo_s = np.where(gt, lo_s, s)

        resid = np.max(np.abs(self._local_cdf(idx, s) - t))
        if resid > max(tol, 1e-9) * self.total:
            raise ToleranceNotReached(
                f"quantile residual {resid:.3e} above tolerance"
            )
        return s

    def solve_x(self, u, tol):
        return self.a * self.quantiles(u, tol)


def _checked_u(u):
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    vec = np.atleast_1d(arr).copy()
    if vec.size and (np.any(~np.isfinite(vec)) or np.any(vec < 0.0) or np.any(vec > 1.0)):
        raise DomainExceeded("u must lie in [0, 1]")
    return vec, scalar


def inverse_cdf(spec, a, u, tol=1e-10):
    """x such that the measure of (0, x] is u, for u in [0, 1].

    u = 0 maps to the infimum of the support (0.0 for analytic specs, the
    hull floor for tabulated ones) and u = 1 maps to a.  Power laws use the
    closed-form quantile a * u**(1/(p+1)); everything else goes through a
    cached-table bisection with a regula-falsi polish.
    """
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise NonPositiveInput("scale a must be positive and finite")
    vec, scalar = _checked_u(u)
    if isinstance(spec, PowerLaw):
        out = a * vec ** (1.0 / (spec.p + 1.0))
        return float(out[0]) if scalar else out
    table = _CdfTable(spec, a, tol)
    out = np.empty_like(vec)
    at_zero = vec == 0.0
    at_one = vec == 1.0
    interior = ~(at_zero | at_one)
    out[at_zero] = table.s_lo * a
    out[at_one] = a
    if np.any(interior):
        out[interior] = table.solve_x(vec[interior], tol)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo means of x and f(x) with their standard errors.

    Estimates from disjoint draw sets combine associatively via ``merge``,
    which recovers the sum-of-squares from the standard errors, so a
    sharded computation reproduces the single-pass numbers.
    """

    mean_x: float
    mean_fx: float
    stderr_x: float
    stderr_fx: float
    n: int

    def merge(self, other):
        n1, n2 = self.n, other.n
        n = n1 + n2

        def combine(m1, s1, m2, s2):
            m2sum1 = s1 * s1 * n1 * (n1 - 1)
            m2sum2 = s2 * s2 * n2 * (n2 - 1)
            delta = m2 - m1
            mean = m1 + delta * n2 / n
            m2sum = m2sum1 + m2sum2 + delta * delta * n1 * n2 / n
            return mean, math.sqrt(m2sum / (n - 1) / n)

        mx, sx = combine(self.mean_x, self.stderr_x, other.mean_x, other.stderr_x)
        mf, sf = combine(self.mean_fx, self.stderr_fx, other.mean_fx, other.stderr_fx)
        return MCEstimate(mean_x=mx, mean_fx=mf, stderr_x=sx, stderr_fx=sf, n=n)


class SamplerState:
    """Deterministic sampling state for one (spec, a) pair.

    The key (seed, stream) fully determines the draw sequence;  ``counter``
    records how many draws have been consumed.  ``split(k)`` derives k
    child states whose streams are mixed from the parent's, so parallel
    shards stay reproducible without coordination.
    """

    def __init__(self, spec, a, seed, stream=0, tol=1e-10):
        a = float(a)
        if not math.isfinite(a) or a <= 0.0:
            raise NonPositiveInput("scale a must be positive and finite")
        hi = spec.support[1]
        if a > hi * (1.0 + 1e-12):
            raise DomainExceeded(f"a={a:g} beyond the function's support")
        self.spec = spec
        self.a = a
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        self.tol = tol
        self.counter = 0
        self._splits = 0
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self.Fa = integrate_moment(spec, a, MomentKind.F, tol).value
        self._table = None

    def _quantiles(self, u):
        if isinstance(self.spec, PowerLaw):
            return self.a * u ** (1.0 / (self.spec.p + 1.0))
        if self._table is None:
            self._table = _CdfTable(self.spec, self.a, self.tol)
        return self._table.solve_x(u, self.tol)

    def draw(self, n):
        n = int(n)
        if n <= 0:
            raise NonPositiveInput("draw count must be positive")
        u = self._gen.random(n)
        # random() can emit exactly 0, whose quantile sits outside the open
        # support; nudge to the smallest positive double instead.
        u[u == 0.0] = np.nextafter(0.0, 1.0)
        self.counter += n
        return self._quantiles(u)

    def split(self, k):
        k = int(k)
        if k <= 0:
            raise NonPositiveInput("split count must be positive")
        children = []
        for i in range(k):
            mixed = _splitmix64(
                self.stream ^ _splitmix64((self._splits << 20) + i + 1)
            )
            children.append(
                SamplerState(self.spec, self.a, self.seed, stream=mixed,
                             tol=self.tol)
            )
        self._splits += 1
        return children


def sample(state, n):
    """n draws from the measure, advancing the state's counter."""
    return state.draw(n)


def mc_estimates(state, n):
    """Means of x and f(x) over n fresh draws, with standard errors.

    Requires n >= 100 so the standard errors mean something.
    """
    n = int(n)
    if n < _MIN_ESTIMATE_N:
        raise NonPositiveInput(
            f"need at least {_MIN_ESTIMATE_N} draws for an estimate, got {n}"
        )
    xs = state.draw(n)
    fxs = np.asarray(state.spec.eval(xs), dtype=float)
    return MCEstimate(
        mean_x=float(np.mean(xs)),
        mean_fx=float(np.mean(fxs)),
        stderr_x=float(np.std(xs, ddof=1) / math.sqrt(n)),
        stderr_fx=float(np.std(fxs, ddof=1) / math.sqrt(n)),
        n=n,
    )
