"""Capacities (weighting functions) on finite state spaces and distortion functions.

A capacity on ``n`` states is stored as a dense table of length ``2**n``
indexed by event bitmask.  Distortion functions are piecewise linear on a
breakpoint mesh.
"""

from __future__ import annotations

from fractions import Fraction
import numpy as np

from .core import as_measure
from .report import PASS, VIOLATED, PropertyReport

MAX_DENSE_STATES = 20
MAX_PAIR_STATES = 12
PREDICATE_TOL = 1e-9
_EXACT_SUM_STATES = 16
_ROW_CHUNK = 1 << 16


class CapacityError(ValueError):
    pass


def _members(mask, n):
    return [i for i in range(n) if mask >> i & 1]


class Capacity:
    """A set function ``W`` on ``2**n`` events.

    By default the table is validated: ``W(empty) = 0``, ``W(Omega) = 1`` and
    ``W`` is monotone under inclusion (all within ``PREDICATE_TOL``).  Pass
    ``validate=False`` to build deliberately defective tables for testing.
    """

    __slots__ = ("n", "table")

    def __init__(self, table, validate=True):
        t = np.array(table, dtype=float)
        size = t.size
        n = size.bit_length() - 1
        if t.ndim != 1 or size < 2 or 1 << n != size:
            raise CapacityError("capacity table length must be 2**n with n >= 1")
        if n > MAX_DENSE_STATES:
            raise CapacityError(f"dense capacities are limited to {MAX_DENSE_STATES} states")
        if validate:
            _validate_capacity(t, n)
        t.setflags(write=False)
        self.n = n
        self.table = t

    @classmethod
    def from_function(cls, fn, n, validate=True):
        """Build from ``fn(members_tuple) -> value``."""
        return cls([fn(tuple(_members(m, n))) for m in range(1 << n)], validate=validate)

    @classmethod
    def additive(cls, P):
        return capacity_from_distortion(identity_distortion(), P)

    @classmethod
    def unanimity(cls, n):
        t = np.zeros(1 << n)
        t[-1] = 1.0
        return cls(t)

    def __call__(self, event):
        return float(self.table[int(getattr(event, "mask", event))])

    @property
    def full(self):
        return (1 << self.n) - 1

    def is_monotone(self, tol=PREDICATE_TOL):
        return _monotone_defect(self.table, self.n, tol) is None

    def __eq__(self, other):
        return isinstance(other, Capacity) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    def __repr__(self):
        return f"Capacity(n={self.n})"


def _monotone_defect(t, n, tol):
    masks = np.arange(t.size)
    for i in range(n):
        bit = 1 << i
        lo = masks[(masks & bit) == 0]
        bad = t[lo | bit] < t[lo] - tol
        if np.any(bad):
            m = int(lo[np.argmax(bad)])
            return m, m | bit
    return None


def _validate_capacity(t, n):
    if not np.all(np.isfinite(t)):
        raise CapacityError("capacity values must be finite")
    if abs(t[0]) > PREDICATE_TOL or abs(t[-1] - 1.0) > PREDICATE_TOL:
        raise CapacityError("capacity must satisfy W(empty) = 0 and W(Omega) = 1")
    defect = _monotone_defect(t, n, PREDICATE_TOL)
    if defect is not None:
        small, big = defect
        raise CapacityError(
            f"capacity not monotone: W({_members(big, n)}) < W({_members(small, n)})"
        )


class DistortionFunction:
    """Piecewise-linear ``g: [0, 1] -> [0, 1]`` through the given breakpoints."""

    __slots__ = ("p", "g")

    def __init__(self, breakpoints, validate=True):
        pts = [(float(a), float(b)) for a, b in breakpoints]
        if len(pts) < 2:
            raise ValueError("a distortion needs at least the points (0,0) and (1,1)")
        p = np.array([a for a, _ in pts])
        g = np.array([b for _, b in pts])
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(g)):
            raise ValueError("breakpoints must be finite")
        if p[0] != 0.0 or p[-1] != 1.0:
            raise ValueError("breakpoints must start at p=0 and end at p=1")
        if np.any(np.diff(p) <= 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        if validate:
            if g[0] != 0.0 or g[-1] != 1.0:
                raise ValueError("a distortion must satisfy g(0) = 0 and g(1) = 1")
            if np.any(np.diff(g) < 0):
                raise ValueError("a distortion must be nondecreasing")
        p.setflags(write=False)
        g.setflags(write=False)
        self.p = p
        self.g = g

    @property
    def breakpoints(self):
        return list(zip(self.p.tolist(), self.g.tolist()))

    def __call__(self, x):
        return eval_distortion(self, x)

    def is_nondecreasing(self):
        return bool(np.all(np.diff(self.g) >= 0))

    def __eq__(self, other):
        return (
            isinstance(other, DistortionFunction)
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.g, other.g)
        )

    def __hash__(self):
        return hash((self.p.tobytes(), self.g.tobytes()))

    def __repr__(self):
        return f"DistortionFunction({self.breakpoints!r})"


def identity_distortion():
    return DistortionFunction([(0.0, 0.0), (1.0, 1.0)])


def example1_distortion():
    """The five-piece distortion of the pseudo-convex but non-convex example."""
    return DistortionFunction([(0.0, 0.0), (0.7, 0.1), (0.8, 0.25), (0.9, 0.3), (1.0, 1.0)])


def sampled_distortion(fn, mesh):
    """Piecewise-linear interpolation of ``fn`` on ``mesh + 1`` equispaced points."""
    xs = np.linspace(0.0, 1.0, mesh + 1)
    return DistortionFunction(list(zip(xs, [fn(x) for x in xs])), validate=False)


def eval_distortion(g, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise ValueError("distortion argument must lie in [0, 1]")
    out = np.interp(np.clip(x, 0.0, 1.0), g.p, g.g)
    return float(out) if out.ndim == 0 else out


def event_probabilities(P):
    """Dense table of ``P(E)`` for every event bitmask.

    Sums are exact (rational) for small state counts when the measure was
    given with rational weights.
    """
    P = as_measure(P)
    n = P.n
    if n > MAX_DENSE_STATES:
        raise CapacityError(f"dense event tables are limited to {MAX_DENSE_STATES} states")
    if P.exact is not None and n <= _EXACT_SUM_STATES:
        sums = [Fraction(0)]
        for w in P.exact:
            sums = sums + [s + w for s in sums]
        sums = np.array([float(s) for s in sums])
    else:
        sums = np.zeros(1 << n)
        for i, w in enumerate(P.weights):
            sums[1 << i : 2 << i] = sums[: 1 << i] + w
    # P(Omega) = 1 by definition; don't let rounding of the running sum leak in
    sums[-1] = 1.0
    return sums


def capacity_from_distortion(g, P, validate=True):
    """``W(E) = g(P(E))`` for every event."""
    probs = event_probabilities(P)
    return Capacity(eval_distortion(g, probs), validate=validate)


# --- structural predicates ---------------------------------------------------


def _check_pair_size(n):
    if n > MAX_PAIR_STATES:
        raise CapacityError(f"pairwise capacity checks are limited to {MAX_PAIR_STATES} states")


def _first_true(mat):
    flat = np.flatnonzero(mat)
    return None if flat.size == 0 else np.unravel_index(flat[0], mat.shape)


def is_convex_capacity(W, tol=PREDICATE_TOL):
    """Exhaustive supermodularity check ``W(A|B) + W(A&B) >= W(A) + W(B)``.

    The witness is the lexicographically smallest violating ``(A, B)``.
    """
    n = W.n
    _check_pair_size(n)
    t = W.table
    all_b = np.arange(1 << n)
    checked = 0
    for start in range(0, 1 << n, max(1, _ROW_CHUNK >> n)):
        a = np.arange(start, min(1 << n, start + max(1, _ROW_CHUNK >> n)))[:, None]
        lhs = t[a | all_b] + t[a & all_b]
        rhs = t[a] + t[all_b]
        hit = _first_true(lhs < rhs - tol)
        checked += lhs.size
        if hit is not None:
            A, B = int(a[hit[0], 0]), int(all_b[hit[1]])
            witness = {
                "A": _members(A, n),
                "B": _members(B, n),
                "W(A)": t[A],
                "W(B)": t[B],
                "W(A|B)": t[A | B],
                "W(A&B)": t[A & B],
                "lhs": t[A | B] + t[A & B],
                "rhs": t[A] + t[B],
                "deficit": (t[A] + t[B]) - (t[A | B] + t[A & B]),
            }
            return PropertyReport(
                "convex_capacity", VIOLATED, tol, witness=witness, samples_checked=checked
            )
    return PropertyReport("convex_capacity", PASS, tol, samples_checked=checked)


def is_pseudo_convex(W, tol=PREDICATE_TOL):
    """Exhaustive check of ``W(A) <= W(A|B) - W(B) <= 1 - W(A^c)`` over disjoint pairs."""
    n = W.n
    _check_pair_size(n)
    t = W.table
    full = (1 << n) - 1
    all_b = np.arange(1 << n)
    rows = max(1, _ROW_CHUNK >> n)
    checked = 0
    for start in range(0, 1 << n, rows):
        a = np.arange(start, min(1 << n, start + rows))[:, None]
        disjoint = (a & all_b) == 0
        gain = t[a | all_b] - t[all_b]
        low = disjoint & (t[a] > gain + tol)
        high = disjoint & (gain > 1.0 - t[full ^ a] + tol)
        checked += int(disjoint.sum())
        bad = low | high
        hit = _first_true(bad)
        if hit is not None:
            A, B = int(a[hit[0], 0]), int(all_b[hit[1]])
            g = t[A | B] - t[B]
            if low[hit]:
                which, lhs, rhs = "lower", t[A], g
            else:
                which, lhs, rhs = "upper", g, 1.0 - t[full ^ A]
            witness = {
                "A": _members(A, n),
                "B": _members(B, n),
                "inequality": which,
                "W(A)": t[A],
                "W(B)": t[B],
                "W(A|B)": t[A | B],
                "W(A^c)": t[full ^ A],
                "lhs": lhs,
                "rhs": rhs,
                "deficit": lhs - rhs,
            }
            return PropertyReport(
                "pseudo_convex", VIOLATED, tol, witness=witness, samples_checked=checked
            )
    return PropertyReport("pseudo_convex", PASS, tol, samples_checked=checked)


def _vertex_coordinates(g):
    """Coordinates of all vertices of the linearity-cell arrangement.

    The superadditivity deficit ``g(x) + g(y) - g(x + y)`` is linear on every
    cell cut out by the lines ``x = b``, ``y = b``, ``x + y = b`` (and
    ``x + y = 1 + b`` for the second inequality), ``b`` ranging over
    breakpoints; a linear function on a polygon attains its extrema at
    vertices, so checking these points is exact for piecewise-linear ``g``.
    """
    b = g.p
    diffs = (b[:, None] - b[None, :]).ravel()
    pts = np.concatenate([b, diffs, 1.0 + diffs])
    pts = pts[(pts >= 0.0) & (pts <= 1.0)]
    return np.unique(pts)


def distortion_pseudoconvexity(g, mesh=1000, tol=PREDICATE_TOL):
    """Check superadditivity and ``g(x) + g(y) <= 1 + g(x + y - 1)`` on a mesh.

    Pairs come from the ``(i/mesh, j/mesh)`` grid followed by the breakpoint
    vertex set; the latter alone makes the check exact for piecewise-linear g.
    """
    if mesh < 2:
        raise ValueError("mesh must be at least 2")
    checked = 0
    for source, pts in (("mesh", np.arange(mesh + 1) / mesh), ("breakpoints", _vertex_coordinates(g))):
        x = pts[:, None]
        y = pts[None, :]
        s = x + y
        gx, gy = np.interp(x, g.p, g.g), np.interp(y, g.p, g.g)
        sub = s <= 1.0 + 1e-15
        sup = s >= 1.0 - 1e-15
        g_sum = np.interp(np.clip(s, 0.0, 1.0), g.p, g.g)
        g_over = np.interp(np.clip(s - 1.0, 0.0, 1.0), g.p, g.g)
        bad_sub = sub & (g_sum < gx + gy - tol)
        bad_sup = sup & (gx + gy > 1.0 + g_over + tol)
        checked += int(sub.sum() + sup.sum())
        hit = _first_true(bad_sub | bad_sup)
        if hit is not None:
            xv, yv = float(pts[hit[0]]), float(pts[hit[1]])
            if bad_sub[hit]:
                which, lhs, rhs = "superadditivity", float(gx[hit[0], 0] + gy[0, hit[1]]), float(g_sum[hit])
            else:
                which, lhs, rhs = "upper", float(gx[hit[0], 0] + gy[0, hit[1]]), float(1.0 + g_over[hit])
            witness = {
                "x": xv,
                "y": yv,
                "inequality": which,
                "source": source,
                "lhs": lhs,
                "rhs": rhs,
                "deficit": lhs - rhs,
            }
            return PropertyReport(
                "distortion_pseudoconvexity", VIOLATED, tol, witness=witness, samples_checked=checked
            )
    return PropertyReport(
        "distortion_pseudoconvexity", PASS, tol, samples_checked=checked, details={"mesh": mesh}
    )


def random_belief_capacity(rng, n, support=None):
    """A belief function from random nonnegative masses; belief functions are convex."""
    size = 1 << n
    mass = np.zeros(size)
    k = size - 1 if support is None else support
    picks = rng.choice(np.arange(1, size), size=min(k, size - 1), replace=False)
    mass[picks] = rng.exponential(size=picks.size)
    mass /= mass.sum()
    table = mass.copy()
    for i in range(n):
        bit = 1 << i
        idx = np.arange(size)
        hi = idx[(idx & bit) != 0]
        table[hi] += table[hi ^ bit]
    table[-1] = 1.0
    return Capacity(np.clip(table, 0.0, 1.0))


def random_capacity(rng, n):
    """A random monotone normalized capacity (generally neither convex nor additive)."""
    size = 1 << n
    raw = rng.uniform(size=size)
    raw[0] = 0.0
    # monotone envelope: W(E) = max over subsets, computed by one pass per bit
    table = raw.copy()
    for i in range(n):
        bit = 1 << i
        idx = np.arange(size)
        hi = idx[(idx & bit) != 0]
        table[hi] = np.maximum(table[hi], table[hi ^ bit])
    table = table / table[-1]
    table[-1] = 1.0
    return Capacity(table)


__all__ = [
    "Capacity",
    "CapacityError",
    "DistortionFunction",
    "capacity_from_distortion",
    "eval_distortion",
    "example1_distortion",
    "identity_distortion",
    "sampled_distortion",
    "event_probabilities",
    "is_convex_capacity",
    "is_pseudo_convex",
    "distortion_pseudoconvexity",
    "random_belief_capacity",
    "random_capacity",
]
