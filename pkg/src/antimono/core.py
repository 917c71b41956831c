"""Finite state spaces, acts, events and the co-/antimonotone relations.

Acts are plain 1-D ``numpy`` float arrays indexed by state.  Most helpers
also accept batches of acts of shape ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

PROB_TOL = 1e-12


@dataclass(frozen=True)
class StateSpace:
    n: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"state count must be a positive integer, got {self.n!r}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.n:
                raise ValueError("labels must have one entry per state")


@dataclass(frozen=True)
class Event:
    """A subset of ``{0, ..., n-1}`` stored as a bitmask."""

    mask: int
    n: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} has members outside {self.n} states")

    @classmethod
    def from_members(cls, members, n):
        mask = 0
        for i in members:
            if not 0 <= i < n:
                raise ValueError(f"state {i} outside 0..{n - 1}")
            mask |= 1 << i
        return cls(mask, n)

    @property
    def members(self):
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    def complement(self):
        return Event(((1 << self.n) - 1) & ~self.mask, self.n)

    def indicator(self):
        return indicator(self.mask, self.n)

    def __len__(self):
        return bin(self.mask).count("1")


def indicator(mask, n):
    """The 0/1 act of the event encoded by ``mask``."""
    return ((int(mask) >> np.arange(n)) & 1).astype(float)


def popcount(masks):
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        out += m & 1
        m >>= 1
    return out


class ProbabilityMeasure:
    """Nonnegative state weights summing to one.

    Weights may be given as floats or as exact rationals; the rational form
    is kept in :attr:`exact` when every entry is an ``int`` or ``Fraction``.
    """

    __slots__ = ("weights", "exact")

    def __init__(self, weights):
        raw = list(weights)
        if not raw:
            raise ValueError("probability measure needs at least one state")
        if all(isinstance(w, (int, Fraction)) for w in raw):
            self.exact = tuple(Fraction(w) for w in raw)
        else:
            self.exact = None
        w = np.asarray([float(v) for v in raw], dtype=float)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("probability weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probability weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        self.weights = w

    @classmethod
    def uniform(cls, n):
        return cls([Fraction(1, n)] * n)

    @property
    def n(self):
        return len(self.weights)

    def prob(self, event):
        mask = event.mask if isinstance(event, Event) else int(event)
        return float(sum(self.weights[i] for i in range(self.n) if mask >> i & 1))

    def is_equally_likely(self):
        return bool(np.all(np.abs(self.weights - self.weights[0]) <= PROB_TOL))

    def is_degenerate(self):
        """True when no event has probability strictly between 0 and 1."""
        return int(np.count_nonzero(self.weights > PROB_TOL)) < 2

    def __eq__(self, other):
        return isinstance(other, ProbabilityMeasure) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"ProbabilityMeasure({self.weights.tolist()!r})"


def as_measure(P):
    return P if isinstance(P, ProbabilityMeasure) else ProbabilityMeasure(P)


def as_act(values, n=None):
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("an act is a nonempty 1-D array of state values")
    if n is not None and x.size != n:
        raise ValueError(f"act has {x.size} states, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("act values must be finite")
    return x


def constant(c, n):
    return np.full(n, float(c))


def _pair(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: {X.shape[-1]} vs {Y.shape[-1]} states")
    return X, Y


def is_comonotonic(X, Y):
    """No pair of states on which X and Y move strictly in opposite directions.

    Works on single acts or on broadcastable batches (returns a bool array).
    Sorting states by (X, Y) leaves Y nondecreasing exactly when no pair
    disagrees, so only comparisons are used and ties are handled exactly.
    """
    X, Y = _pair(X, Y)
    X, Y = np.broadcast_arrays(X, Y)
    order = np.lexsort((Y, X), axis=-1)
    Ys = np.take_along_axis(Y, order, axis=-1)
    ok = np.all(Ys[..., 1:] >= Ys[..., :-1], axis=-1)
    return bool(ok) if np.ndim(ok) == 0 else ok


def is_antimonotonic(X, Y):
    X, Y = _pair(X, Y)
    return is_comonotonic(X, -Y)


def monotone_decompose(X):
    """Split X into a nondecreasing and a nonincreasing part (float arithmetic).

    ``up[0] = X[0]``, ``down[0] = 0``; each positive increment
    ``X[i] - X[i-1]`` is accumulated into ``up`` and each negative one into
    ``down``.  Component monotonicity is exact; ``up + down`` reproduces X up
    to rounding of the running sums.  Use :func:`monotone_decompose_exact`
    when the sum must be exact.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[-1] == 0:
        raise ValueError("cannot decompose an empty act")
    dx = np.diff(X, axis=-1)
    first = X[..., :1]
    up = np.concatenate([first, first + np.cumsum(np.maximum(dx, 0.0), axis=-1)], axis=-1)
    down = np.concatenate(
        [np.zeros_like(first), np.cumsum(np.minimum(dx, 0.0), axis=-1)], axis=-1
    )
    return up, down


def _dyadic(X):
    """Integer mantissas and exponents with ``X == m * 2**e`` exactly."""
    mant, exp = np.frexp(X)
    return (mant * 2.0 ** 53).astype(np.int64), exp.astype(np.int64) - 53


@dataclass(frozen=True)
class DyadicDecomposition:
    """Exact monotone decomposition with integer numerators over ``2**k``.

    Every float is a dyadic rational, so scaling an act by the largest
    denominator among its entries turns it into integers and the running
    sums become exact.  ``up`` and ``down`` are object arrays of Python ints
    with the act's shape; ``exponent`` holds ``k`` per act.
    """

    up: np.ndarray
    down: np.ndarray
    exponent: np.ndarray

    @property
    def denominator(self):
        return _pow2(self.exponent)

    def up_fractions(self):
        return _fractions(self.up, self.denominator)

    def down_fractions(self):
        return _fractions(self.down, self.denominator)

    def up_floats(self):
        # int / int true division rounds correctly even past the float range
        return (self.up / np.asarray(self.denominator)[..., None]).astype(float)

    def down_floats(self):
        return (self.down / np.asarray(self.denominator)[..., None]).astype(float)

    def reproduces(self, X):
        """Exact check that ``up + down == X``, per act."""
        X = np.asarray(X, dtype=float)
        if X.shape != self.up.shape:
            return False
        m, e = _dyadic(X)
        # compare (up + down) * 2**-k with m * 2**e by shifting one side left
        t = e + self.exponent[..., None]
        lhs = self.up + self.down
        if np.any(t < 0):
            lhs = lhs << np.maximum(-t, 0).astype(object)
        rhs = m.astype(object) << np.maximum(t, 0).astype(object)
        out = np.all(lhs == rhs, axis=-1)
        return bool(out) if out.ndim == 0 else out

    def is_monotone(self):
        ok = np.all(np.diff(self.up, axis=-1) >= 0, axis=-1) & np.all(np.diff(self.down, axis=-1) <= 0, axis=-1)
        return bool(ok) if ok.ndim == 0 else ok


_pow2 = np.frompyfunc(lambda k: 1 << int(k), 1, 1)


def _fractions(nums, den):
    if nums.ndim == 1:
        return [Fraction(int(v), int(den)) for v in nums]
    return [_fractions(r, d) for r, d in zip(nums, den)]


def monotone_decompose_exact(X):
    """Cumulative-increment decomposition carried out in exact arithmetic.

    Accepts a single act or a batch of shape ``(..., n)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0 or X.shape[-1] == 0:
        raise ValueError("cannot decompose an empty act")
    if not np.all(np.isfinite(X)):
        raise ValueError("act values must be finite")
    m, e = _dyadic(X)
    nz = m != 0
    k = -np.minimum(np.where(nz, e, 0).min(axis=-1), 0)
    nums = m.astype(object) << np.where(nz, e + k[..., None], 0).astype(object)
    steps = np.diff(nums, axis=-1)
    zero = np.zeros_like(nums[..., :1])
    up = np.concatenate([nums[..., :1], np.where(steps > 0, steps, 0)], axis=-1).cumsum(axis=-1)
    down = np.concatenate([zero, np.where(steps < 0, steps, 0)], axis=-1).cumsum(axis=-1)
    return DyadicDecomposition(up, down, k)


def law(X, P, tol=PROB_TOL):
    """Map each distinct outcome of X to its total probability."""
    X = as_act(X)
    w = as_measure(P).weights
    if X.size != w.size:
        raise ValueError(f"dimension mismatch: {X.size} vs {w.size} states")
    out = {}
    for v, p in zip(X.tolist(), w.tolist()):
        out[v] = out.get(v, 0.0) + p
    return {v: p for v, p in out.items() if p > tol}


def law_equal(X, Y, P, tol=PROB_TOL):
    X, Y = _pair(X, Y)
    lx, ly = law(X, P, tol), law(Y, P, tol)
    if lx.keys() != ly.keys():
        return False
    return all(abs(lx[v] - ly[v]) <= tol for v in lx)


# --- random act generation -------------------------------------------------
#
# Draws mix three families so that searches see both generic continuous acts
# and the few-valued acts on which capacity defects show up most sharply:
# continuous uniform, two-level {lo, hi}, and a coarse equally spaced grid.

_FAMILY_WEIGHTS = (0.5, 0.25, 0.25)


def _family_levels(rng, size):
    """Per-sample family code and level count."""
    fam = rng.choice(3, size=size, p=_FAMILY_WEIGHTS)
    k = np.where(fam == 1, 2, rng.integers(3, 7, size=size))
    return fam, k


def sample_acts(rng, size, n, lo, hi):
    """``size`` random acts on ``n`` states with values in ``[lo, hi]``."""
    fam, k = _family_levels(rng, size)
    cont = rng.uniform(lo, hi, size=(size, n))
    # two-level acts use a per-sample success rate so event sizes spread evenly
    rate = rng.uniform(0.0, 1.0, size=(size, 1))
    binary = np.where(rng.uniform(size=(size, n)) < rate, hi, lo)
    steps = rng.integers(0, k[:, None], size=(size, n))
    grid = lo + (hi - lo) * steps / (k[:, None] - 1)
    out = np.where((fam == 0)[:, None], cont, np.where((fam == 1)[:, None], binary, grid))
    return out, fam, k


def _sorted_levels(rng, fam, k, lo, hi, count):
    """``count + 1`` nondecreasing output levels per sample, family-compatible."""
    size = fam.size
    cont = rng.uniform(lo, hi, size=(size, count + 1))
    steps = rng.integers(0, k[:, None], size=(size, count + 1))
    disc = lo + (hi - lo) * steps / (k[:, None] - 1)
    levels = np.where((fam == 0)[:, None], cont, disc)
    return np.sort(levels, axis=1)


def random_step_transform(rng, t, fam, k, lo, hi, t_lo, t_hi, max_steps=None):
    """Apply a random nondecreasing step function ``f`` row-wise to ``t``.

    ``t`` has shape ``(size, n)`` with entries in ``[t_lo, t_hi]``.  The
    number of jumps is drawn per sample (zero gives a constant transform).
    """
    size, n = t.shape
    r_max = n if max_steps is None else max_steps
    cuts = rng.uniform(t_lo, t_hi, size=(size, r_max))
    active = np.arange(r_max)[None, :] < rng.integers(0, r_max + 1, size=(size, 1))
    cuts = np.where(active, cuts, np.inf)
    idx = np.sum(t[:, :, None] >= cuts[:, None, :], axis=-1)
    levels = _sorted_levels(rng, fam, k, lo, hi, r_max)
    return np.take_along_axis(levels, idx, axis=1)


def sample_antimonotonic_batch(rng, size, n, lo, hi):
    """Pairs ``(X, Y)`` with ``Y = f(-X)`` for random nondecreasing ``f``."""
    X, fam, k = sample_acts(rng, size, n, lo, hi)
    Y = random_step_transform(rng, -X, fam, k, lo, hi, -hi, -lo)
    return X, Y


def sample_comonotonic_batch(rng, size, n, lo, hi):
    """Pairs ``(f1(Z), f2(Z))`` for a common act Z and nondecreasing f1, f2.

    Either transform is replaced by the identity with probability 1/2 so that
    continuous-valued acts stay in the mix.
    """
    Z, fam, k = sample_acts(rng, size, n, lo, hi)
    X = random_step_transform(rng, Z, fam, k, lo, hi, lo, hi)
    Y = random_step_transform(rng, Z, fam, k, lo, hi, lo, hi)
    keep_x = (rng.uniform(size=size) < 0.5)[:, None]
    keep_y = (rng.uniform(size=size) < 0.5)[:, None]
    return np.where(keep_x, Z, X), np.where(keep_y, Z, Y)


def sample_general_batch(rng, size, n, lo, hi):
    X, _, _ = sample_acts(rng, size, n, lo, hi)
    Y, _, _ = sample_acts(rng, size, n, lo, hi)
    return X, Y


def sample_antimonotonic_pair(space, value_range=(0.0, 1.0), seed=0):
    """One antimonotonic pair of acts on ``space``, reproducible from ``seed``."""
    n = space.n if isinstance(space, StateSpace) else int(space)
    lo, hi = map(float, value_range)
    if not hi > lo:
        raise ValueError("value range must be nondegenerate")
    rng = np.random.default_rng(seed)
    X, Y = sample_antimonotonic_batch(rng, 1, n, lo, hi)
    return X[0], Y[0]


def permutation_blocks(P, tol=PROB_TOL):
    """Groups of state indices sharing the same probability."""
    w = as_measure(P).weights
    blocks = []
    for i in np.argsort(w, kind="stable"):
        if blocks and abs(w[blocks[-1][0]] - w[i]) <= tol:
            blocks[-1].append(int(i))
        else:
            blocks.append([int(i)])
    return blocks


def seq_dot(X, w):
    """``sum_i X[..., i] * w[i]`` accumulated in state order.

    A fixed accumulation order keeps single-act and batched evaluation
    bitwise identical, which witness replay relies on.
    """
    X = np.asarray(X, dtype=float)
    acc = X[..., 0] * w[0]
    for i in range(1, X.shape[-1]):
        acc = acc + X[..., i] * w[i]
    return acc


__all__ = [
    "StateSpace",
    "Event",
    "ProbabilityMeasure",
    "DyadicDecomposition",
    "as_act",
    "as_measure",
    "constant",
    "indicator",
    "is_comonotonic",
    "is_antimonotonic",
    "monotone_decompose",
    "monotone_decompose_exact",
    "law",
    "law_equal",
    "sample_antimonotonic_pair",
    "permutation_blocks",
]
