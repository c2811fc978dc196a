"""Function families on (0, inf) and their admissibility checks.

A spec represents a positive function f on (0, inf) with f -> 0 at 0+.  All
families expose the same three operations -- value, derivative, and the
logarithmic derivative x f'(x) / f(x) (the "elasticity") -- accepting either
a scalar or a numpy array of positive abscissae.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    CsvFormatError,
    DomainExceeded,
    NonPositiveInput,
    NonPositiveValue,
)

__all__ = [
    "FunctionSpec",
    "PowerLaw",
    "PerturbedPowerLaw",
    "Custom",
    "Tabulated",
    "ElasticityValue",
    "ValidationReport",
    "evaluate",
    "eval_derivative",
    "elasticity",
    "validate",
    "load_tabulated_csv",
]

_HULL_SLACK = 1e-12  # relative slack when checking tabulated bounds


class FunctionSpec:
    """Common behaviour for every function family.

    Subclasses implement ``_value``, ``_deriv`` and ``_elast`` on 1-d float
    arrays; this base class handles input checking, scalar/array round-trip,
    and the positivity guarantee on evaluation.  Instances are immutable
    after construction and safe to share across threads.
    """

    family = "abstract"
    #: (lo, hi) abscissa range the function can be evaluated on.  Analytic
    #: families use (0, inf); tabulated data is confined to its sample hull.
    support = (0.0, math.inf)

    def _check_x(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        vec = np.atleast_1d(arr)
        if vec.size == 0:
            return vec, scalar
        if not np.all(np.isfinite(vec)) or np.any(vec <= 0.0):
            raise NonPositiveInput(
                f"{self.family}: abscissae must be positive and finite"
            )
        lo, hi = self.support
        if lo > 0.0 or math.isfinite(hi):
            if np.any(vec < lo * (1.0 - _HULL_SLACK)) or np.any(
                vec > hi * (1.0 + _HULL_SLACK)
            ):
                raise DomainExceeded(
                    f"{self.family}: abscissa outside [{lo:g}, {hi:g}]"
                )
        return vec, scalar

    @staticmethod
    def _ret(values, scalar):
        return float(values[0]) if scalar else values

    def eval(self, x):
        """f(x).  Raises NonPositiveValue if the result is not positive."""
        vec, scalar = self._check_x(x)
        out = self._value(vec)
        if out.size and (not np.all(np.isfinite(out)) or np.any(out <= 0.0)):
            raise NonPositiveValue(
                f"{self.family}: evaluation produced a non-positive value"
            )
        return self._ret(out, scalar)

    def derivative(self, x):
        """f'(x)."""
        vec, scalar = self._check_x(x)
        return self._ret(self._deriv(vec), scalar)

    def elasticity(self, x):
        """x f'(x) / f(x) -- the local power-law exponent."""
        vec, scalar = self._check_x(x)
        return self._ret(self._elast(vec), scalar)

    def _value(self, x):
        raise NotImplementedError

    def _deriv(self, x):
        raise NotImplementedError

    def _elast(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(FunctionSpec):
    """f(x) = amp * x**p."""

    p: float
    amp: float = 1.0
    family = "power"

    def _value(self, x):
        return self.amp * x**self.p

    def _deriv(self, x):
        return self.amp * self.p * x ** (self.p - 1.0)

    def _elast(self, x):
        return np.full_like(x, self.p)


@dataclass(frozen=True)
class PerturbedPowerLaw(FunctionSpec):
    """f(x) = amp * x**p * (1 + eps * sin(log x)).

    A log-periodic wobble around a pure power law; for |eps| < 1 the function
    stays positive.  Its elasticity oscillates around p:

        E(x) = p + eps * cos(log x) / (1 + eps * sin(log x))
    """

    p: float
    eps: float
    amp: float = 1.0
    family = "perturbed"

    def _wobble(self, x):
        return 1.0 + self.eps * np.sin(np.log(x))

    def _value(self, x):
        return self.amp * x**self.p * self._wobble(x)

    def _deriv(self, x):
        logx = np.log(x)
        return self.amp * x ** (self.p - 1.0) * (
            self.p * (1.0 + self.eps * np.sin(logx)) + self.eps * np.cos(logx)
        )

    def _elast(self, x):
        logx = np.log(x)
        return self.p + self.eps * np.cos(logx) / (1.0 + self.eps * np.sin(logx))


class Custom(FunctionSpec):
    """User-supplied value and derivative callables.

    ``fn`` and ``dfn`` take a single positive float (or, with
    ``vectorized=True``, a numpy array) and return the value of f and f'.
    Elasticity is formed as the quotient x f'(x) / f(x).
    """

    family = "custom"

    def __init__(self, fn, dfn, vectorized=False, name="custom"):
        self._fn = fn
        self._dfn = dfn
        self._vectorized = bool(vectorized)
        self.name = str(name)

    def _call(self, func, x):
        if self._vectorized:
            return np.asarray(func(x), dtype=float)
        return np.array([float(func(t)) for t in x], dtype=float)

    def _value(self, x):
        return self._call(self._fn, x)

    def _deriv(self, x):
        return self._call(self._dfn, x)

    def _elast(self, x):
        f = self._value(x)
        if f.size and np.any(np.abs(f) < 1e-300):
            raise NonPositiveValue(
                "custom: |f| too small to form the elasticity quotient"
            )
        return x * self._deriv(x) / f


class Tabulated(FunctionSpec):
    """Positive samples (x_i, f_i) interpolated monotonically in log-log.

    Interpolation is a shape-preserving piecewise cubic through
    (log x, log f), so any exact power-law table (a straight line in those
    coordinates) is reproduced without model bias.  Evaluation is confined
    to the sample hull [x[0], x[-1]].
    """

    family = "tabulated"

    def __init__(self, x, f):
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=float)
        if x.ndim != 1 or x.shape != f.shape:
            raise NonPositiveInput("tabulated: x and f must be equal-length 1-d")
        if x.size < 2:
            raise NonPositiveInput("tabulated: need at least 2 samples")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(f)):
            raise NonPositiveInput("tabulated: samples must be finite")
        if np.any(x <= 0.0) or np.any(f <= 0.0):
            raise NonPositiveValue("tabulated: samples must be positive")
        if np.any(np.diff(x) <= 0.0):
            raise NonPositiveInput("tabulated: x must be strictly increasing")
        self.x = x
        self.f = f
        self.support = (float(x[0]), float(x[-1]))
        self._loglog = PchipInterpolator(np.log(x), np.log(f), extrapolate=True)
        self._slope = self._loglog.derivative()

    def _value(self, x):
        return np.exp(self._loglog(np.log(x)))

    def _deriv(self, x):
        # d/dx exp(L(log x)) = f(x) * L'(log x) / x
        return self._value(x) * self._slope(np.log(x)) / x

    def _elast(self, x):
        return self._slope(np.log(x))


@dataclass(frozen=True)
class ElasticityValue:
    """Elasticity at a single point, kept with its abscissa."""

    x: float
    value: float


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the admissibility screen.

    ``failed`` is None when ok, otherwise the name of the first violated
    hypothesis ("positivity" or "f(0+)=0").
    """

    ok: bool
    failed: str | None = None
    detail: str = ""


def evaluate(spec, x):
    """Value of the function at x (scalar or array)."""
    return spec.eval(x)


def eval_derivative(spec, x):
    """Derivative of the function at x (scalar or array)."""
    return spec.derivative(x)


def elasticity(spec, x):
    """Pointwise elasticity at a single abscissa, as an ElasticityValue."""
    return ElasticityValue(x=float(x), value=spec.elasticity(float(x)))


_PROBE_COUNT = 80
_DECAY_PROBES = 27  # dyadic probes reach 2**-26 ~ 1.5e-8
_DECAY_TAIL = 8
_DECAY_DROP = 1e-3  # required cumulative loss across the tail probes


def _probe_grid(spec):
    lo, hi = spec.support
    lo = max(lo, 1e-6)
    hi = min(hi, 1e6)
    return np.geomspace(lo, hi, _PROBE_COUNT)


def validate(spec):
    """Screen a spec against the admissibility hypotheses.

    Checks, in order: parameter sanity for the parametric families, strict
    positivity on a log-spaced probe grid, and monotone decay toward zero on
    the smallest dyadic probes.  Returns a ValidationReport naming the first
    violated hypothesis; probing is the best a finite procedure can do, so a
    passing report is evidence, not proof.
    """
    if isinstance(spec, (PowerLaw, PerturbedPowerLaw)):
        if spec.amp <= 0.0:
            return ValidationReport(False, "positivity", "amp must be positive")
        if isinstance(spec, PerturbedPowerLaw) and abs(spec.eps) >= 1.0:
            return ValidationReport(
                False, "positivity", "|eps| >= 1 lets 1 + eps*sin(log x) vanish"
            )
        if spec.p <= 0.0:
            return ValidationReport(
                False, "f(0+)=0", f"exponent p={spec.p:g} does not decay at 0"
            )

    try:
        spec.eval(_probe_grid(spec))
    except NonPositiveValue as exc:
        return ValidationReport(False, "positivity", str(exc))

    if isinstance(spec, Tabulated):
        # Decay below the hull is unobservable; require the recorded head of
        # the table itself to be nondecreasing in x.
        k = min(_DECAY_TAIL, spec.f.size)
        head = spec.f[:k]
        if np.any(np.diff(head) < -_HULL_SLACK * head[:-1]):
            return ValidationReport(
                False, "f(0+)=0", "table head does not decay toward x=0"
            )
        return ValidationReport(True)

    probes = 2.0 ** -np.arange(_DECAY_PROBES, dtype=float)
    try:
        vals = spec.eval(probes)
    except NonPositiveValue as exc:
        return ValidationReport(False, "positivity", str(exc))
    tail = vals[-_DECAY_TAIL:]  # f at the smallest probes, largest x first
    if np.any(tail[1:] > tail[:-1] * (1.0 + _HULL_SLACK)):
        return ValidationReport(
            False, "f(0+)=0", "no monotone decay on the smallest dyadic probes"
        )
    # Monotone alone cannot separate decay to zero from decay to a positive
    # floor, so the tail of probes must also keep losing ground overall.
    if tail[-1] > tail[0] * (1.0 - _DECAY_DROP):
        return ValidationReport(
            False, "f(0+)=0", "values level off instead of heading to zero"
        )
    return ValidationReport(True)


def load_tabulated_csv(path):
    """Read a two-column CSV (header row, then x, f pairs) into a Tabulated.

    Structural problems are reported with the 1-based line number of the
    offending row.
    """
    xs: list[float] = []
    fs: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1:
                try:
                    float(row[0])
                except ValueError:
                    continue  # the expected header row
                raise CsvFormatError(1, "expected a header row, found data")
            if len(row) != 2:
                raise CsvFormatError(lineno, f"expected 2 columns, got {len(row)}")
            try:
                xv = float(row[0])
                fv = float(row[1])
            except ValueError:
                raise CsvFormatError(lineno, f"non-numeric row {row!r}") from None
            if not (math.isfinite(xv) and math.isfinite(fv)):
                raise CsvFormatError(lineno, "non-finite sample")
            if xv <= 0.0 or fv <= 0.0:
                raise CsvFormatError(lineno, "samples must be positive")
            if xs and xv <= xs[-1]:
                raise CsvFormatError(lineno, "x must be strictly increasing")
            xs.append(xv)
            fs.append(fv)
    if len(xs) < 2:
        raise CsvFormatError(1, "need at least 2 data rows")
    return Tabulated(np.array(xs), np.array(fs))
