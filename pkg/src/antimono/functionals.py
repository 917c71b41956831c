"""Preference functionals on acts.

Four kinds are supported, each an immutable spec object:

* :class:`Expectation` -- ``sum_i P_i X_i``
* :class:`ExpectedUtility` -- ``sum_i P_i U(X_i)``
* :class:`Choquet` -- Choquet integral of ``U(X)`` against a capacity ``W``
* :class:`Distortion` -- Choquet integral against ``W(E) = g(P(E))``

``U`` is a piecewise-linear :class:`UtilityFunction`; ``U=None`` means the
identity on the whole real line.  :func:`evaluate` accepts one act or a
batch of acts of shape ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import ClassVar, Optional

import numpy as np

from .capacities import Capacity, DistortionFunction, MAX_DENSE_STATES, capacity_from_distortion
from .core import ProbabilityMeasure, as_measure, seq_dot

INDIFFERENCE_TOL = 1e-9
CE_TOL = 1e-12
_DOMAIN_SLACK = 1e-12


class DomainError(ValueError):
    """An act takes values outside the utility function's domain."""


class UtilityFunction:
    """Continuous piecewise-linear utility on a closed interval.

    ``strictly_increasing=True`` asserts (and validates) monotonicity; the
    flag is otherwise computed from the breakpoints.
    """

    __slots__ = ("x", "u", "exact")

    def __init__(self, breakpoints, strictly_increasing=None):
        pts = list(breakpoints)
        if len(pts) < 2:
            raise ValueError("a utility function needs at least two breakpoints")
        x = np.array([float(a) for a, _ in pts])
        u = np.array([float(b) for _, b in pts])
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("utility breakpoints must have strictly increasing x")
        if strictly_increasing and np.any(np.diff(u) <= 0):
            raise ValueError("utility declared strictly increasing but is not")
        if strictly_increasing is False and np.all(np.diff(u) > 0):
            raise ValueError("utility declared not strictly increasing but is")
        x.setflags(write=False)
        u.setflags(write=False)
        self.x = x
        self.u = u
        self.exact = tuple((Fraction(a), Fraction(b)) for a, b in pts)

    @classmethod
    def identity(cls, lo, hi):
        return cls([(lo, lo), (hi, hi)])

    @classmethod
    def sampled(cls, fn, xs):
        """Chord interpolation of ``fn`` on the mesh ``xs``."""
        return cls([(float(a), float(fn(a))) for a in xs])

    @property
    def domain(self):
        return float(self.x[0]), float(self.x[-1])

    @property
    def breakpoints(self):
        return list(zip(self.x.tolist(), self.u.tolist()))

    @property
    def is_strictly_increasing(self):
        return bool(np.all(np.diff(self.u) > 0))

    def is_nondecreasing(self):
        return bool(np.all(np.diff(self.u) >= 0))

    def slopes(self):
        return np.diff(self.u) / np.diff(self.x)

    def exact_slopes(self):
        return [
            (b1 - b0) / (a1 - a0)
            for (a0, b0), (a1, b1) in zip(self.exact, self.exact[1:])
        ]

    def in_domain(self, X):
        lo, hi = self.domain
        slack = _DOMAIN_SLACK * (1.0 + max(abs(lo), abs(hi)))
        X = np.asarray(X, dtype=float)
        return (X >= lo - slack) & (X <= hi + slack)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if not np.all(self.in_domain(X)):
            lo, hi = self.domain
            raise DomainError(f"act values outside utility domain [{lo}, {hi}]")
        out = np.interp(X, self.x, self.u)
        return float(out) if out.ndim == 0 else out

    def inverse(self, v):
        """Outcome(s) with utility ``v``; exact on the piecewise-linear mesh."""
        v = np.asarray(v, dtype=float)
        if not self.is_nondecreasing():
            raise ValueError("utility is not monotone; certainty equivalents are not unique")
        slack = _DOMAIN_SLACK * (1.0 + max(abs(self.u[0]), abs(self.u[-1])))
        if np.any(v < self.u[0] - slack) or np.any(v > self.u[-1] + slack):
            raise DomainError("value outside the range of the utility function")
        flat = np.diff(self.u) == 0
        if np.any(flat):
            flat_vals = self.u[:-1][flat]
            hits = np.abs(v[..., None] - flat_vals) <= slack
            if np.any(hits):
                raise ValueError("utility is flat at the target value; no unique inverse")
        out = np.interp(v, self.u, self.x)
        return float(out) if out.ndim == 0 else out

    def value_exact(self, x):
        """Exact rational evaluation at a rational point."""
        x = Fraction(x)
        pts = self.exact
        if x < pts[0][0] or x > pts[-1][0]:
            raise DomainError(f"{x} outside utility domain")
        for (a0, b0), (a1, b1) in zip(pts, pts[1:]):
            if x <= a1:
                return b0 + (b1 - b0) * (x - a0) / (a1 - a0)
        raise AssertionError("unreachable")

    def inverse_exact(self, v):
        v = Fraction(v)
        pts = self.exact
        if not all(b1 > b0 for (_, b0), (_, b1) in zip(pts, pts[1:])):
            raise ValueError("exact inversion needs a strictly increasing utility")
        if v < pts[0][1] or v > pts[-1][1]:
            raise DomainError(f"{v} outside the range of the utility function")
        for (a0, b0), (a1, b1) in zip(pts, pts[1:]):
            if v <= b1:
                return a0 + (a1 - a0) * (v - b0) / (b1 - b0)
        raise AssertionError("unreachable")

    def __eq__(self, other):
        return (
            isinstance(other, UtilityFunction)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.u, other.u)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.u.tobytes()))

    def __repr__(self):
        return f"UtilityFunction({self.breakpoints!r})"


def _apply_utility(U, X):
    return X if U is None else U(X)


def choquet_integral(W, V):
    """Choquet integral of value batch ``V`` against capacity ``W``.

    Values are sorted in decreasing order (ties by ascending state index) and
    the integral telescopes over the nested top-k events:
    ``sum_k (v_(k) - v_(k+1)) W(top_k) + v_(n) W(Omega)``.  For nonnegative
    values this is ``int_0^inf W(V >= t) dt``; negative values use the
    asymmetric extension ``int_{-inf}^0 (W(V >= t) - 1) dt``.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[-1]
    if n != W.n:
        raise ValueError(f"act has {n} states, capacity has {W.n}")
    order = np.argsort(-V, axis=-1, kind="stable")
    v = np.take_along_axis(V, order, axis=-1)
    masks = np.cumsum(np.left_shift(1, order), axis=-1)
    w = W.table[masks]
    acc = v[..., n - 1] * w[..., n - 1]
    for k in range(n - 1):
        acc = acc + (v[..., k] - v[..., k + 1]) * w[..., k]
    return acc


def _distorted_integral(g, weights, V):
    """Choquet integral against ``g o P`` without a dense capacity table."""
    order = np.argsort(-V, axis=-1, kind="stable")
    v = np.take_along_axis(V, order, axis=-1)
    cum = np.cumsum(weights[order], axis=-1)
    cum[..., -1] = 1.0
    w = np.interp(np.clip(cum, 0.0, 1.0), g.p, g.g)
    n = V.shape[-1]
    acc = v[..., n - 1] * w[..., n - 1]
    for k in range(n - 1):
        acc = acc + (v[..., k] - v[..., k + 1]) * w[..., k]
    return acc


@dataclass(frozen=True, eq=False)
class Expectation:
    P: ProbabilityMeasure
    kind: ClassVar[str] = "expectation"

    def __post_init__(self):
        object.__setattr__(self, "P", as_measure(self.P))

    @property
    def n(self):
        return self.P.n

    @property
    def U(self):
        return None

    def _evaluate(self, X):
        return seq_dot(X, self.P.weights)


@dataclass(frozen=True, eq=False)
class ExpectedUtility:
    P: ProbabilityMeasure
    U: UtilityFunction
    kind: ClassVar[str] = "expected_utility"

    def __post_init__(self):
        object.__setattr__(self, "P", as_measure(self.P))
        if not isinstance(self.U, UtilityFunction):
            raise TypeError("expected utility needs a UtilityFunction")

    @property
    def n(self):
        return self.P.n

    def _evaluate(self, X):
        return seq_dot(self.U(X), self.P.weights)


@dataclass(frozen=True, eq=False)
class Choquet:
    W: Capacity
    U: Optional[UtilityFunction] = None
    kind: ClassVar[str] = "choquet"

    @property
    def n(self):
        return self.W.n

    def _evaluate(self, X):
        return choquet_integral(self.W, _apply_utility(self.U, X))


@dataclass(frozen=True, eq=False)
class Distortion:
    """Law-based Choquet functional with capacity ``g(P(E))``.

    Up to ``MAX_DENSE_STATES`` states this evaluates through the dense
    capacity table, so it agrees bit-for-bit with
    ``Choquet(capacity_from_distortion(g, P), U)``.
    """

    g: DistortionFunction
    P: ProbabilityMeasure
    U: Optional[UtilityFunction] = None
    kind: ClassVar[str] = "distortion"

    def __post_init__(self):
        object.__setattr__(self, "P", as_measure(self.P))

    @property
    def n(self):
        return self.P.n

    @cached_property
    def capacity(self):
        return capacity_from_distortion(self.g, self.P)

    def _evaluate(self, X):
        V = _apply_utility(self.U, X)
        if self.n <= MAX_DENSE_STATES:
            return choquet_integral(self.capacity, V)
        return _distorted_integral(self.g, self.P.weights, np.asarray(V, dtype=float))


FunctionalSpec = (Expectation, ExpectedUtility, Choquet, Distortion)


def evaluate(spec, X):
    """Value of the functional at act X (or at each act of a batch)."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != spec.n:
        raise ValueError(f"act has {X.shape[-1]} states, functional expects {spec.n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("act values must be finite")
    out = spec._evaluate(X)
    if not np.all(np.isfinite(out)):
        raise ValueError("functional value is not finite")
    return float(out) if np.ndim(out) == 0 else out


def constant_value(spec, c):
    """Functional value of the constant act(s) ``c``."""
    c = np.asarray(c, dtype=float)
    return evaluate(spec, np.broadcast_to(c[..., None], c.shape + (spec.n,)))


def _bisect_ce(spec, target):
    U = spec.U
    lo_x, hi_x = U.domain
    f_lo = constant_value(spec, lo_x)
    f_hi = constant_value(spec, hi_x)
    target = np.asarray(target, dtype=float)
    slack = CE_TOL * (1.0 + np.abs(target))
    if np.any(target < f_lo - slack) or np.any(target > f_hi + slack):
        raise DomainError("no certainty equivalent inside the utility domain")
    a = np.full(target.shape, lo_x)
    b = np.full(target.shape, hi_x)
    for _ in range(200):
        if np.all(b - a <= CE_TOL * (1.0 + np.abs(a))):
            break
        mid = 0.5 * (a + b)
        below = constant_value(spec, mid) < target
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def certainty_equivalent(spec, X):
    """The outcome c with ``I(c) = I(X)``.

    Identity-utility kinds return ``I(X)`` directly; expected utility inverts
    ``U`` exactly on its mesh; Choquet-type kinds with a nontrivial utility
    use monotone bisection on constant acts to ``CE_TOL``.
    """
    value = np.asarray(evaluate(spec, X), dtype=float)
    U = spec.U
    if U is None:
        out = value
    elif isinstance(spec, ExpectedUtility):
        out = np.asarray(U.inverse(value))
    else:
        if not U.is_nondecreasing():
            raise ValueError("utility is not monotone; certainty equivalents are not unique")
        U.inverse(np.clip(value, U.u[0], U.u[-1]))  # raises on flat segments
        out = _bisect_ce(spec, value)
    return float(out) if out.ndim == 0 else out


def diversification_benefit(spec, X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return evaluate(spec, X) + evaluate(spec, Y) - evaluate(spec, X + Y)


@dataclass(frozen=True)
class PreferenceOracle:
    """Weak preference induced by a functional, with an indifference band."""

    spec: object
    tol: float = INDIFFERENCE_TOL

    def value(self, X):
        return evaluate(self.spec, X)

    def weakly_prefers(self, X, Y):
        return evaluate(self.spec, X) >= evaluate(self.spec, Y) - self.tol

    def strictly_prefers(self, X, Y):
        return evaluate(self.spec, X) > evaluate(self.spec, Y) + self.tol

    def indifferent(self, X, Y):
        return abs(evaluate(self.spec, X) - evaluate(self.spec, Y)) <= self.tol


__all__ = [
    "UtilityFunction",
    "DomainError",
    "Expectation",
    "ExpectedUtility",
    "Choquet",
    "Distortion",
    "FunctionalSpec",
    "PreferenceOracle",
    "choquet_integral",
    "evaluate",
    "constant_value",
    "certainty_equivalent",
    "diversification_benefit",
]
