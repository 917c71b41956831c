"""Falsification checks for the additivity, affinity and convexity axioms.

Every sampled check draws inputs in fixed-size chunks; chunk ``c`` uses the
generator ``default_rng([seed, c])`` so a sample's inputs depend only on the
seed and its index.  A check stops at the first chunk containing a
violation and reports the violating sample with the smallest index.

Tolerances are relative: two quantities ``lhs`` and ``rhs`` are compared at
``tol * scale`` with ``scale = 1 + |terms|``, and a discrepancy is only
reported once it exceeds ten times that threshold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .core import (
    Event,
    as_measure,
    indicator,
    is_antimonotonic,
    permutation_blocks,
    sample_acts,
    sample_antimonotonic_batch,
    sample_comonotonic_batch,
    sample_general_batch,
    seq_dot,
)
from .functionals import (
    DomainError,
    ExpectedUtility,
    Expectation,
    UtilityFunction,
    certainty_equivalent,
    constant_value,
    evaluate,
)
from .report import PASS, VIOLATED, PropertyReport

DEFAULT_SEED = 0xA17140
DEFAULT_TOL = 1e-9
HYSTERESIS = 10.0
SHIFT_TOL = 1e-10
CHUNK = 8192
ATTEMPT_FACTOR = 20
MAX_GRID_ITEMS = 50_000_000
_EXTRACT_EXHAUSTIVE_STATES = 12

MODES_PAIR = ("general", "comonotonic", "antimonotonic")


@dataclass(frozen=True)
class SearchBudget:
    """How hard a check searches for a counterexample.

    ``samples`` counts checked (in-domain, successfully constructed) samples;
    up to ``ATTEMPT_FACTOR`` times as many draws are made.  ``value_range``
    defaults to the utility's domain, or ``[0, 1]`` when there is none.
    With ``grid`` set, pair checks enumerate every act on a ``grid``-level
    lattice exhaustively instead of sampling.  ``full_scan`` keeps going past
    the first violation and records the largest one in ``report.worst``.
    """

    samples: int = 10_000
    seed: int = DEFAULT_SEED
    value_range: Optional[tuple] = None
    grid: Optional[int] = None
    tol: float = DEFAULT_TOL
    full_scan: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("budget needs at least one sample")
        if self.value_range is not None:
            lo, hi = self.value_range
            if not float(hi) > float(lo):
                raise ValueError("value range must be nondegenerate")
            object.__setattr__(self, "value_range", (float(lo), float(hi)))
        if self.grid is not None and self.grid < 2:
            raise ValueError("grid needs at least two levels")
        if self.threads < 1:
            raise ValueError("threads must be positive")


def effective_range(spec, budget):
    U = getattr(spec, "U", None)
    if budget.value_range is None:
        return U.domain if U is not None else (0.0, 1.0)
    lo, hi = budget.value_range
    if U is not None:
        dlo, dhi = U.domain
        lo, hi = max(lo, dlo), min(hi, dhi)
        if not hi > lo:
            raise DomainError("search range does not meet the utility domain")
    return lo, hi


# --- scan engine -------------------------------------------------------------


def _seed_words(seed):
    seed = int(seed)
    return [seed & 0xFFFFFFFFFFFFFFFF, (seed >> 64) & 0xFFFFFFFFFFFFFFFF]


def _chunk_rng(seed, c):
    return np.random.default_rng(_seed_words(seed) + [c])


def _row(inputs, j):
    out = {}
    for k, v in inputs.items():
        v = v[j]
        out[k] = v.tolist() if isinstance(v, np.ndarray) else float(v) if np.ndim(v) == 0 else v
    return out


def _witness(inputs, terms, j, index, tol):
    w = _row(inputs, j)
    for key in ("lhs", "rhs", "magnitude"):
        w[key] = float(terms[key][j])
    w["threshold"] = float(tol * terms["scale"][j])
    w["sample_index"] = int(index)
    for key, v in terms.get("extra", {}).items():
        w[key] = v[j].tolist() if isinstance(v[j], np.ndarray) else float(v[j])
    return w


def _scan(name, spec, budget, draw, terms_fn, mode=None, total=None):
    """Run ``terms_fn(spec, draw(rng, start, stop))`` over chunks of samples.

    ``total`` switches to exhaustive mode over indices ``[0, total)``.
    """
    tol = budget.tol
    exhaustive = total is not None
    limit = total if exhaustive else budget.samples * ATTEMPT_FACTOR
    n_chunks = -(-limit // CHUNK)

    def job(c):
        start, stop = c * CHUNK, min(limit, (c + 1) * CHUNK)
        inputs = draw(_chunk_rng(budget.seed, c), start, stop)
        return start, inputs, terms_fn(spec, inputs)

    checked = skipped = 0
    first = worst = None
    pool = ThreadPoolExecutor(budget.threads) if budget.threads > 1 else None
    try:
        wave = budget.threads
        done = False
        for w0 in range(0, n_chunks, wave):
            chunks = range(w0, min(n_chunks, w0 + wave))
            results = pool.map(job, chunks) if pool else map(job, chunks)
            for start, inputs, t in results:
                valid = np.asarray(t["valid"], dtype=bool)
                if not exhaustive:
                    room = budget.samples - checked
                    csum = np.cumsum(valid)
                    valid = valid & (csum <= room)
                    last = int(np.searchsorted(csum, room)) if csum.size and csum[-1] >= room else valid.size - 1
                    considered = last + 1
                else:
                    considered = valid.size
                checked += int(valid.sum())
                skipped += int(considered - valid[:considered].sum())
                bad = valid & (t["magnitude"] > HYSTERESIS * tol * t["scale"])
                if np.any(bad):
                    j = int(np.argmax(bad))
                    if first is None:
                        first = _witness(inputs, t, j, start + j, tol)
                    if budget.full_scan:
                        mags = np.where(bad, t["magnitude"], -np.inf)
                        k = int(np.argmax(mags))
                        if worst is None or mags[k] > worst["magnitude"]:
                            worst = _witness(inputs, t, k, start + k, tol)
                    else:
                        done = True
                        break
                if not exhaustive and checked >= budget.samples:
                    done = True
                    break
            if done:
                break
    finally:
        if pool:
            pool.shutdown()
    verdict = VIOLATED if first is not None else PASS
    return PropertyReport(
        name,
        verdict,
        tol,
        witness=first,
        samples_checked=checked,
        samples_skipped=skipped,
        seed=budget.seed,
        mode=mode,
        worst=worst,
    )


# --- input sources -------------------------------------------------------------


def _grid_acts(idx, n, G, lo, hi):
    idx = np.asarray(idx, dtype=np.int64)
    digits = (idx[:, None] // (G ** np.arange(n, dtype=np.int64))[None, :]) % G
    return lo + (hi - lo) * digits / (G - 1)


def _grid_size(n, G, pairs, extra=1):
    total = G ** n
    if pairs:
        total = total * total
    total *= extra
    if total > MAX_GRID_ITEMS:
        raise ValueError(f"grid enumeration of {total} items exceeds {MAX_GRID_ITEMS}")
    return int(total)


def _pair_sampler(mode):
    try:
        return {
            "general": sample_general_batch,
            "comonotonic": sample_comonotonic_batch,
            "antimonotonic": sample_antimonotonic_batch,
        }[mode]
    except KeyError:
        raise ValueError(f"unknown relation mode {mode!r}") from None


def _relation_mask(mode, X, Y):
    if mode == "general":
        return np.ones(X.shape[0], dtype=bool)
    if mode == "antimonotonic":
        return np.asarray(is_antimonotonic(X, Y))
    from .core import is_comonotonic

    return np.asarray(is_comonotonic(X, Y))


def _draw_alpha(rng, size):
    """Mixing weights: half uniform on (0, 1), half from {1/4, 1/2, 3/4}."""
    u = rng.uniform(0.0, 1.0, size=size)
    fixed = rng.choice(np.array([0.25, 0.5, 0.75]), size=size)
    a = np.where(rng.uniform(size=size) < 0.5, u, fixed)
    return np.clip(a, 1e-6, 1 - 1e-6)


def _pair_source(spec, budget, mode, with_alpha=False):
    """Returns ``(draw, total)``; ``total`` is None for random sampling."""
    lo, hi = effective_range(spec, budget)
    n = spec.n
    if budget.grid is None:
        sampler = _pair_sampler(mode)

        def draw(rng, start, stop):
            X, Y = sampler(rng, stop - start, n, lo, hi)
            out = {"X": X, "Y": Y}
            if with_alpha:
                out["alpha"] = _draw_alpha(rng, stop - start)
            return out

        return draw, None

    G = budget.grid
    alphas = np.array([0.25, 0.5, 0.75])
    extra = alphas.size if with_alpha else 1
    total = _grid_size(n, G, pairs=True, extra=extra)
    n_acts = G ** n

    def draw(rng, start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        pair, a_idx = np.divmod(idx, extra)
        X = _grid_acts(pair // n_acts, n, G, lo, hi)
        Y = _grid_acts(pair % n_acts, n, G, lo, hi)
        out = {"X": X, "Y": Y, "_relation": _relation_mask(mode, X, Y)}
        if with_alpha:
            out["alpha"] = alphas[a_idx]
        return out

    return draw, total


def _single_source(spec, budget):
    lo, hi = effective_range(spec, budget)
    n = spec.n
    if budget.grid is None:

        def draw(rng, start, stop):
            X, _, _ = sample_acts(rng, stop - start, n, lo, hi)
            return {"X": X}

        return draw, None
    G = budget.grid
    total = _grid_size(n, G, pairs=False)

    def draw(rng, start, stop):
        return {"X": _grid_acts(np.arange(start, stop), n, G, lo, hi)}

    return draw, total


def _with_params(draw, extra):
    def wrapped(rng, start, stop):
        out = draw(rng, start, stop)
        out.update(extra(rng, out))
        return out

    return wrapped


# --- helpers for evaluating batches safely ----------------------------------------


def _domain_ok(spec, *arrays):
    U = getattr(spec, "U", None)
    ok = np.ones(np.shape(arrays[0])[0], dtype=bool)
    if U is not None:
        for a in arrays:
            ok &= np.all(U.in_domain(a), axis=-1)
    return ok


def _safe_eval(spec, A, ok):
    """Evaluate rows flagged ``ok``; other rows get NaN without raising."""
    out = np.full(A.shape[0], np.nan)
    if np.any(ok):
        out[ok] = evaluate(spec, A[ok]) if A[ok].shape[0] > 1 else np.atleast_1d(evaluate(spec, A[ok]))
    return out


def _with_relation(inputs, ok):
    rel = inputs.get("_relation")
    return ok if rel is None else ok & rel


def _equality_terms(lhs, rhs, scale, valid, **extra):
    mag = np.abs(lhs - rhs)
    mag = np.where(valid, mag, 0.0)
    return {"lhs": lhs, "rhs": rhs, "magnitude": mag, "scale": scale, "valid": valid, "extra": extra}


def _geq_terms(lhs, rhs, scale, valid, **extra):
    """Terms for an inequality ``lhs >= rhs``."""
    mag = np.maximum(rhs - lhs, 0.0)
    mag = np.where(valid, mag, 0.0)
    return {"lhs": lhs, "rhs": rhs, "magnitude": mag, "scale": scale, "valid": valid, "extra": extra}


# --- term functions (also used for witness replay) ----------------------------------


def _additivity_terms(spec, inp):
    X, Y = inp["X"], inp["Y"]
    S = X + Y
    ok = _with_relation(inp, _domain_ok(spec, X, Y, S))
    ix, iy, isum = _safe_eval(spec, X, ok), _safe_eval(spec, Y, ok), _safe_eval(spec, S, ok)
    return _equality_terms(isum, ix + iy, 1 + np.abs(ix) + np.abs(iy), ok)


def _homogeneity_terms(spec, inp):
    X, a = inp["X"], inp["alpha"]
    aX = a[:, None] * X
    ok = _domain_ok(spec, X, aX)
    ix, iax = _safe_eval(spec, X, ok), _safe_eval(spec, aX, ok)
    return _equality_terms(iax, a * ix, 1 + np.abs(iax) + np.abs(a * ix), ok)


def _monotonicity_terms(spec, inp):
    X, Y = inp["X"], inp["Y"]
    ok = _domain_ok(spec, X, Y) & np.all(Y <= X, axis=-1)
    ix, iy = _safe_eval(spec, X, ok), _safe_eval(spec, Y, ok)
    return _geq_terms(ix, iy, 1 + np.abs(ix) + np.abs(iy), ok)


def _law_terms(spec, inp):
    X, Y = inp["X"], inp["Y"]
    ok = _domain_ok(spec, X, Y)
    ix, iy = _safe_eval(spec, X, ok), _safe_eval(spec, Y, ok)
    return _equality_terms(ix, iy, 1 + np.abs(ix) + np.abs(iy), ok)


def _affinity_terms(spec, inp):
    X, Y, a = inp["X"], inp["Y"], inp["alpha"]
    Z = a[:, None] * X + (1 - a[:, None]) * Y
    ok = _with_relation(inp, _domain_ok(spec, X, Y, Z))
    ix, iy, iz = _safe_eval(spec, X, ok), _safe_eval(spec, Y, ok), _safe_eval(spec, Z, ok)
    rhs = a * ix + (1 - a) * iy
    return _equality_terms(iz, rhs, 1 + np.abs(ix) + np.abs(iy), ok)


def _ce_rows(spec, X, ok):
    ce = np.full(X.shape[0], np.nan)
    if np.any(ok):
        ce[ok] = np.atleast_1d(certainty_equivalent(spec, X[ok]))
    return ce


def _ce_additivity_terms(spec, inp):
    X, Z = inp["X"], inp["Y"]
    ok = _with_relation(inp, _domain_ok(spec, X, Z, X + Z))
    ce = _ce_rows(spec, X, ok)
    shifted = np.where(ok[:, None], ce[:, None] + Z, Z)
    ok &= _domain_ok(spec, shifted)
    lhs = _safe_eval(spec, X + Z, ok)
    rhs = _safe_eval(spec, shifted, ok)
    return _equality_terms(lhs, rhs, 1 + np.abs(lhs) + np.abs(rhs), ok, certainty_equivalent=ce)


def _convexity_terms(spec, inp):
    X, Y, a = inp["X"], inp["Y"], inp["alpha"]
    ok = np.asarray(inp.get("_shift_ok", np.ones(X.shape[0], dtype=bool)), dtype=bool)
    Z = a[:, None] * X + (1 - a[:, None]) * Y
    ok = _with_relation(inp, ok & _domain_ok(spec, X, Y, Z))
    ix, iy, iz = _safe_eval(spec, X, ok), _safe_eval(spec, Y, ok), _safe_eval(spec, Z, ok)
    return _geq_terms(iz, ix, 1 + np.abs(ix) + np.abs(iy), ok)


def _uncertainty_reduction_terms(spec, inp):
    X, lam = inp["X"], inp["alpha"]
    ok = _domain_ok(spec, X)
    ce = _ce_rows(spec, X, ok)
    Z = lam[:, None] * X + (1 - lam[:, None]) * np.where(ok, ce, 0.0)[:, None]
    ok &= _domain_ok(spec, Z)
    ix, iz = _safe_eval(spec, X, ok), _safe_eval(spec, Z, ok)
    return _geq_terms(iz, ix, 1 + np.abs(ix), ok, certainty_equivalent=ce)


def _representation_terms(spec, inp):
    X, Q = inp["X"], inp["Q"]
    ok = _domain_ok(spec, X)
    ix = _safe_eval(spec, X, ok)
    eq = seq_dot(X, Q[0])
    return _equality_terms(ix, eq, 1 + np.abs(ix) + np.abs(eq), ok)


_TERMS = {
    "additivity": _additivity_terms,
    "homogeneity": _homogeneity_terms,
    "monotonicity": _monotonicity_terms,
    "law_based": _law_terms,
    "affinity": _affinity_terms,
    "ce_am_additivity": _ce_additivity_terms,
    "preference_convexity": _convexity_terms,
    "uncertainty_reduction": _uncertainty_reduction_terms,
    "expectation_representation": _representation_terms,
}

_NON_INPUT_KEYS = {"lhs", "rhs", "magnitude", "threshold", "sample_index", "certainty_equivalent", "stage"}


def replay_witness(spec, report):
    """Recompute a sampled witness's violation magnitude from its stored inputs."""
    if report.witness is None:
        raise ValueError("report has no witness")
    check = report.details.get("stage_check", report.check)
    terms_fn = _TERMS[check]
    inputs = {}
    for k, v in report.witness.items():
        if k in _NON_INPUT_KEYS:
            continue
        inputs[k] = np.array([v], dtype=float)
    t = terms_fn(spec, inputs)
    return float(t["magnitude"][0])


# --- checks -------------------------------------------------------------------------


def check_additivity(spec, budget=SearchBudget(), mode="general"):
    """Sampled test of ``I(X + Y) = I(X) + I(Y)`` over pairs of the given relation."""
    draw, total = _pair_source(spec, budget, mode)
    return _scan("additivity", spec, budget, draw, _additivity_terms, mode=mode, total=total)


def check_homogeneity(spec, budget=SearchBudget(), positive_only=True):
    """Sampled test of ``I(a X) = a I(X)``; ``a > 0`` only, or all real ``a``."""
    draw, total = _single_source(spec, budget)
    grid_alphas = np.array([0.5, 2.0, 3.0]) if positive_only else np.array([-2.0, -1.0, -0.5, 0.5, 2.0])

    if total is None:

        def params(rng, out):
            size = out["X"].shape[0]
            if positive_only:
                a = np.where(rng.uniform(size=size) < 0.5, rng.uniform(0.0, 3.0, size), rng.choice(grid_alphas, size))
                a = np.maximum(a, 1e-6)
            else:
                a = np.where(rng.uniform(size=size) < 0.5, rng.uniform(-3.0, 3.0, size), rng.choice(grid_alphas, size))
            return {"alpha": a}

        draw = _with_params(draw, params)
    else:
        base = draw
        k = grid_alphas.size
        total *= k

        def draw(rng, start, stop):
            idx = np.arange(start, stop)
            out = base(rng, 0, 0)
            acts = _grid_acts(idx // k, spec.n, budget.grid, *effective_range(spec, budget))
            return {"X": acts, "alpha": grid_alphas[idx % k]}

    mode = "positive" if positive_only else "full"
    return _scan("homogeneity", spec, budget, draw, _homogeneity_terms, mode=mode, total=total)


def check_monotonicity(spec, budget=SearchBudget()):
    """Sampled test that ``Y <= X`` statewise implies ``I(Y) <= I(X)``."""
    lo, hi = effective_range(spec, budget)
    draw, total = _single_source(spec, budget)

    def params(rng, out):
        X = out["X"]
        size, n = X.shape
        rate = rng.uniform(size=(size, 1))
        support = rng.uniform(size=(size, n)) < rate
        # cube of a uniform: many small perturbations, some large
        delta = (hi - lo) * rng.uniform(size=(size, n)) ** 3 * support
        return {"Y": np.maximum(X - delta, lo)}

    return _scan("monotonicity", spec, budget, _with_params(draw, params), _monotonicity_terms, total=total)


def check_normalization(spec, tol=DEFAULT_TOL):
    """Exact check of ``I(0) = 0`` and ``I(1) = 1``."""
    rows = []
    for c in (0.0, 1.0):
        value = float(constant_value(spec, c))
        rows.append((c, value, abs(value - c), tol * (1 + abs(c))))
    for c, value, mag, thr in rows:
        if mag > HYSTERESIS * thr:
            witness = {"constant": c, "lhs": value, "rhs": c, "magnitude": mag, "threshold": thr}
            return PropertyReport("normalization", VIOLATED, tol, witness=witness, samples_checked=2)
    return PropertyReport("normalization", PASS, tol, samples_checked=2)


def check_law_based(spec, P, budget=SearchBudget()):
    """Invariance under state permutations that preserve the law of every act.

    States with equal probability form blocks; each sample permutes states
    within blocks, which for equally likely ``P`` means arbitrary permutations.
    """
    P = as_measure(P)
    if P.n != spec.n:
        raise ValueError("measure and functional have different state counts")
    blocks = permutation_blocks(P)
    pos = np.array([i for b in blocks for i in b])
    rank = np.concatenate([np.full(len(b), r, dtype=float) for r, b in enumerate(blocks)])
    draw, total = _single_source(spec, budget)

    def params(rng, out):
        X = out["X"]
        keys = rank[None, :] * 2.0 + rng.uniform(size=X.shape)
        shuffled = pos[np.argsort(keys, axis=1)]
        Y = np.empty_like(X)
        Y[:, pos] = np.take_along_axis(X, shuffled, axis=1)
        return {"Y": Y}

    report = _scan("law_based", spec, budget, _with_params(draw, params), _law_terms, total=total)
    report.details["blocks"] = blocks
    return report


def check_affinity(spec, budget=SearchBudget(), mode="general"):
    """Sampled test of ``I(a X + (1-a) Y) = a I(X) + (1-a) I(Y)``."""
    if mode not in ("general", "antimonotonic"):
        raise ValueError("affinity modes are 'general' and 'antimonotonic'")
    draw, total = _pair_source(spec, budget, mode, with_alpha=True)
    return _scan("affinity", spec, budget, draw, _affinity_terms, mode=mode, total=total)


def check_ce_am_additivity(spec, budget=SearchBudget()):
    """``X ~ x`` implies ``X + Z ~ x + Z`` for antimonotonic ``X, Z``."""
    draw, total = _pair_source(spec, budget, "antimonotonic")
    return _scan("ce_am_additivity", spec, budget, draw, _ce_additivity_terms, mode="antimonotonic", total=total)


def _indifferent_shift(spec, X, Y0, lo, hi):
    """Constants ``c`` with ``|I(Y0 + c) - I(X)| <= SHIFT_TOL``, plus a success mask.

    Starts from the translation-covariant guess ``I(X) - I(Y0)`` and falls
    back to bisection on a bracket that doubles up to ``2**20`` times the
    value range (clipped to the utility domain when there is one).
    """
    size = X.shape[0]
    target = np.atleast_1d(evaluate(spec, X))
    base = np.atleast_1d(evaluate(spec, Y0))
    U = spec.U
    ymin, ymax = Y0.min(axis=1), Y0.max(axis=1)
    if U is None:
        c_lo = np.full(size, -np.inf)
        c_hi = np.full(size, np.inf)
    else:
        dlo, dhi = U.domain
        c_lo, c_hi = dlo - ymin, dhi - ymax

    def value(c):
        return np.atleast_1d(evaluate(spec, Y0 + c[:, None]))

    c = np.clip(target - base, c_lo, c_hi)
    resid = value(c) - target
    ok = np.abs(resid) <= SHIFT_TOL
    todo = ~ok
    if not np.any(todo):
        return c, ok
    span = hi - lo
    a = np.full(size, np.nan)
    b = np.full(size, np.nan)
    idx = np.flatnonzero(todo)
    width = span
    found = np.zeros(size, dtype=bool)
    while idx.size and width <= span * 2.0**20:
        lo_c = np.maximum(c[idx] - width, c_lo[idx])
        hi_c = np.minimum(c[idx] + width, c_hi[idx])
        f_lo = np.atleast_1d(evaluate(spec, Y0[idx] + lo_c[:, None])) - target[idx]
        f_hi = np.atleast_1d(evaluate(spec, Y0[idx] + hi_c[:, None])) - target[idx]
        hit = (f_lo <= 0) & (f_hi >= 0)
        a[idx[hit]], b[idx[hit]] = lo_c[hit], hi_c[hit]
        found[idx[hit]] = True
        capped = (lo_c <= c_lo[idx]) & (hi_c >= c_hi[idx])
        idx = idx[~hit & ~capped]
        width *= 2.0
    idx = np.flatnonzero(found)
    for _ in range(200):
        if not idx.size:
            break
        mid = 0.5 * (a[idx] + b[idx])
        f = np.atleast_1d(evaluate(spec, Y0[idx] + mid[:, None])) - target[idx]
        close = np.abs(f) <= SHIFT_TOL
        c[idx[close]] = mid[close]
        ok[idx[close]] = True
        below = f < 0
        a[idx] = np.where(below, mid, a[idx])
        b[idx] = np.where(below, b[idx], mid)
        idx = idx[~close & (b[idx] - a[idx] > 0)]
    return c, ok


def check_preference_convexity(spec, budget=SearchBudget(), mode="general"):
    """``X ~ Y`` implies ``a X + (1-a) Y >= X``.

    Each sample draws a pair ``(X, Y0)`` of the requested relation and shifts
    ``Y = Y0 + c`` to indifference with X; constant shifts keep the pair
    antimonotonic.  Pairs whose shift cannot be bracketed are skipped.
    """
    if mode not in ("general", "antimonotonic"):
        raise ValueError("convexity modes are 'general' and 'antimonotonic'")
    lo, hi = effective_range(spec, budget)
    base, total = _pair_source(spec, budget, mode, with_alpha=True)

    def draw(rng, start, stop):
        out = base(rng, start, stop)
        X, Y0 = out["X"], out["Y"]
        ok = np.asarray(out.get("_relation", np.ones(X.shape[0], dtype=bool)))
        c = np.zeros(X.shape[0])
        if np.any(ok):
            c_ok, s_ok = _indifferent_shift(spec, X[ok], Y0[ok], lo, hi)
            c[ok] = c_ok
            ok = ok.copy()
            ok[ok] = s_ok
        out["Y"] = Y0 + c[:, None]
        out["_shift_ok"] = ok
        return out

    return _scan("preference_convexity", spec, budget, draw, _convexity_terms, mode=mode, total=total)


def check_uncertainty_reduction(spec, budget=SearchBudget()):
    """``X ~ x`` implies ``l X + (1-l) x >= X`` for ``0 < l < 1``."""
    draw, total = _single_source(spec, budget)
    if total is None:
        draw = _with_params(draw, lambda rng, out: {"alpha": _draw_alpha(rng, out["X"].shape[0])})
    else:
        base = draw
        lams = np.array([0.25, 0.5, 0.75])
        total *= lams.size

        def draw(rng, start, stop):
            idx = np.arange(start, stop)
            acts = _grid_acts(idx // lams.size, spec.n, budget.grid, *effective_range(spec, budget))
            return {"X": acts, "alpha": lams[idx % lams.size]}

    return _scan("uncertainty_reduction", spec, budget, draw, _uncertainty_reduction_terms, total=total)


def check_utility_concavity(U):
    """Exact test that the slopes of a piecewise-linear utility never increase."""
    slopes = U.exact_slopes()
    for k in range(1, len(slopes)):
        if slopes[k] > slopes[k - 1]:
            witness = {
                "kink": float(U.exact[k][0]),
                "slope_left": float(slopes[k - 1]),
                "slope_right": float(slopes[k]),
                "magnitude": float(slopes[k] - slopes[k - 1]),
            }
            return PropertyReport("utility_concavity", VIOLATED, 0.0, witness=witness, samples_checked=k)
    return PropertyReport("utility_concavity", PASS, 0.0, samples_checked=max(0, len(slopes) - 1))


# --- measure extraction and the expectation representation ---------------------------


def extract_measure(spec, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """``Q_i = I(1_{w_i})`` together with a report on whether Q is a probability
    measure that reproduces ``I`` on every indicator act.

    Events are checked exhaustively up to 12 states and by a seeded sample of
    4096 events beyond that.
    """
    n = spec.n
    eye = np.eye(n)
    Q = np.atleast_1d(evaluate(spec, eye)).astype(float)
    details = {"Q": Q.tolist()}

    def fail(witness):
        return Q, PropertyReport("extract_measure", VIOLATED, tol, witness=witness, samples_checked=checked, details=details)

    checked = n
    neg = np.flatnonzero(Q < -tol)
    if neg.size:
        i = int(neg[0])
        return fail({"condition": "nonnegative", "state": i, "lhs": float(Q[i]), "rhs": 0.0, "magnitude": float(-Q[i])})
    total = math.fsum(Q.tolist())
    if abs(total - 1.0) > tol:
        return fail({"condition": "normalized", "lhs": total, "rhs": 1.0, "magnitude": abs(total - 1.0)})
    if n <= _EXTRACT_EXHAUSTIVE_STATES:
        masks = np.arange(1 << n)
    else:
        masks = np.random.default_rng(_seed_words(seed)).integers(0, 1 << n, size=4096)
    for start in range(0, masks.size, CHUNK):
        m = masks[start : start + CHUNK]
        ind = ((m[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        lhs = np.atleast_1d(evaluate(spec, ind))
        rhs = seq_dot(ind, Q)
        bad = np.abs(lhs - rhs) > tol
        checked += m.size
        if np.any(bad):
            j = int(np.argmax(bad))
            return fail({
                "condition": "additive_on_events",
                "event": [i for i in range(n) if int(m[j]) >> i & 1],
                "lhs": float(lhs[j]),
                "rhs": float(rhs[j]),
                "magnitude": float(abs(lhs[j] - rhs[j])),
            })
    return Q, PropertyReport("extract_measure", PASS, tol, samples_checked=checked, details=details)


def verify_expectation_representation(spec, budget=SearchBudget()):
    """Certify ``I = E_Q`` for the extracted measure Q.

    Stages run in order (normalization, monotonicity, antimonotonic
    additivity, extraction, agreement with ``E_Q`` on random acts) and the
    first failing stage determines the witness.
    """
    stages = []

    def record(stage, report):
        stages.append({"stage": stage, "verdict": report.verdict})
        if not report.passed:
            witness = dict(report.witness)
            witness["stage"] = stage
            return PropertyReport(
                "expectation_representation",
                VIOLATED,
                budget.tol,
                witness=witness,
                samples_checked=report.samples_checked,
                samples_skipped=report.samples_skipped,
                seed=budget.seed,
                details={"stages": stages, "failed_stage": stage, "stage_check": report.check},
            )
        return None

    for stage, run in (
        ("normalization", lambda: check_normalization(spec, budget.tol)),
        ("monotonicity", lambda: check_monotonicity(spec, budget)),
        ("am_additivity", lambda: check_additivity(spec, budget, "antimonotonic")),
    ):
        failed = record(stage, run())
        if failed is not None:
            return failed
    Q, rep = extract_measure(spec, budget.tol, budget.seed)
    failed = record("extraction", rep)
    if failed is not None:
        return failed
    draw, total = _single_source(spec, budget)
    Qrow = Q[None, :]
    draw = _with_params(draw, lambda rng, out: {"Q": np.broadcast_to(Qrow, out["X"].shape)})
    rep = _scan("expectation_representation", spec, budget, draw, _representation_terms, total=total)
    if not rep.passed:
        rep.witness.pop("Q", None)
    failed = record("representation", rep)
    if failed is not None:
        failed.details["Q"] = Q.tolist()
        return failed
    return PropertyReport(
        "expectation_representation",
        PASS,
        budget.tol,
        samples_checked=rep.samples_checked,
        samples_skipped=rep.samples_skipped,
        seed=budget.seed,
        details={"stages": stages, "Q": Q.tolist()},
    )


# --- standard sequences and the convexity/concavity harness -----------------


def _is_rational(v):
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def standard_sequence(P, U, A, m, M, max_terms=100_000):
    """Outcomes ``m = x_0 < x_1 < ...`` with ``(x_{j+1} on A, m off A) ~ (x_j on A, M off A)``.

    Under expected utility each step raises ``U`` by ``(1-p)(U(M)-U(m))/p``
    with ``p = P(A)``; terms are produced by exact piecewise-linear inversion
    until the next one would exceed ``M``.  With rational ``P``, ``m`` and
    ``M`` the whole computation is exact and the terms are ``Fraction``s.
    """
    P = as_measure(P)
    event = A if isinstance(A, Event) else Event.from_members(A, P.n)
    if event.n != P.n:
        raise ValueError("event and measure have different state counts")
    exact = P.exact is not None and _is_rational(m) and _is_rational(M)
    p = sum((P.exact[i] for i in event.members), Fraction(0)) if exact else P.prob(event)
    if not 0 < p < 1:
        raise ValueError("standard sequences need an event with 0 < P(A) < 1")
    lo, hi = U.domain
    if not (lo <= m < M <= hi):
        raise ValueError("need lo <= m < M <= hi inside the utility domain")
    xs = U.exact if exact else list(zip(U.x.tolist(), U.u.tolist()))
    inside = [b for (a0, _), (a1, _), b in zip(xs, xs[1:], U.exact_slopes()) if a1 > m and a0 < M]
    if not all(s > 0 for s in inside):
        raise ValueError("utility must be strictly increasing on [m, M]")
    if exact:
        um, uM = U.value_exact(m), U.value_exact(M)
        step = (1 - p) * (uM - um) / p
        seq, u = [Fraction(m)], um
        while u + step <= uM and len(seq) < max_terms:
            u = u + step
            seq.append(U.inverse_exact(u))
        return seq
    um, uM = float(U(m)), float(U(M))
    step = (1 - p) * (uM - um) / p
    slack = 1e-12 * (1 + abs(uM))
    seq, u = [float(m)], um
    while u + step <= uM + slack and len(seq) < max_terms:
        u = u + step
        seq.append(float(U.inverse(min(u, uM))))
    return seq


def _candidate_events(P):
    n = P.n
    events = []
    full = (1 << n) - 1
    for i in range(n):
        for mask in (1 << i, full ^ (1 << i)):
            p = P.prob(mask)
            if 0 < p < 1 and mask not in [e for e, _ in events]:
                events.append((mask, p))
    events.sort(key=lambda e: abs(e[1] - 0.5))
    return events


def standard_sequence_witness(P, U, tol=DEFAULT_TOL, mode="antimonotonic"):
    """Construct an antimonotonic convexity violation for a non-concave utility.

    Around a kink ``k`` where the slope increases, take ``m < k < M`` on the
    two adjacent pieces, so that ``U`` lies strictly below its chord on
    ``[m, M]``.  On an event ``A`` with ``0 < P(A) = p < 1`` take one step of
    a standard sequence inside a single linear piece, ``x_0 -> x_1`` with
    ``U(x_1) - U(x_0) = (1-p)(U(M)-U(m))/p``, placed so that ``x_0 <= M``
    and ``x_1 >= m``.  Then ``X = (x_1 on A, m off A)``
    and ``Y = (x_0 on A, M off A)`` are antimonotonic and indifferent, and
    the mixture with weight ``(M-k)/(M-m)`` on X loses
    ``(1-p) * (chord - U(k)) > 0``.  Returns a violated report or ``None`` if
    the utility has no increasing slope with a usable piece.
    """
    P = as_measure(P)
    spec = ExpectedUtility(P, U)
    slopes = U.exact_slopes()
    xs = U.x
    kinks = [k for k in range(1, len(slopes)) if slopes[k] > slopes[k - 1]]
    pieces = sorted(
        (j for j, s in enumerate(slopes) if s > 0),
        key=lambda j: -(xs[j + 1] - xs[j]),
    )
    for k in kinks:
        left, right = xs[k] - xs[k - 1], xs[k + 1] - xs[k]
        for mask, p in _candidate_events(P):
            onA = indicator(mask, P.n).astype(bool)
            for shrink in [2.0**-e for e in range(0, 40)]:
                d = shrink * min(left, right)
                m, M = xs[k] - d, xs[k] + d
                du = (1 - p) * (float(U(M)) - float(U(m))) / p
                if not du > 0:
                    break
                for j in pieces:
                    # antimonotonic across A and A^c needs x0 <= M and x1 >= m
                    x0 = max(float(xs[j]), m - du / float(slopes[j]))
                    if x0 > M or float(U(x0)) + du > U.u[-1]:
                        continue
                    x1 = float(U.inverse(float(U(x0)) + du))
                    if not (x1 <= xs[j + 1] and x1 >= m):
                        continue
                    X = np.where(onA, x1, m)
                    Y = np.where(onA, x0, M)
                    if not is_antimonotonic(X, Y):
                        continue
                    alpha = (M - xs[k]) / (M - m)
                    inputs = {"X": X[None, :], "Y": Y[None, :], "alpha": np.array([alpha])}
                    t = _convexity_terms(spec, inputs)
                    if t["valid"][0] and t["magnitude"][0] > HYSTERESIS * tol * t["scale"][0]:
                        vx, vy = evaluate(spec, X), evaluate(spec, Y)
                        witness = _witness(inputs, t, 0, -1, tol)
                        witness.update({"event": [i for i in range(P.n) if mask >> i & 1], "kink": float(xs[k]), "m": m, "M": M})
                        return PropertyReport(
                            "preference_convexity",
                            VIOLATED,
                            tol,
                            witness=witness,
                            samples_checked=1,
                            mode=mode,
                            details={
                                "method": "standard_sequence",
                                "indifference_gap": abs(vx - vy),
                                "antimonotonic": bool(is_antimonotonic(X, Y)),
                            },
                        )
    return None


@dataclass
class SavageReport:
    """Three verdicts that the equivalence theorem says must agree."""

    convexity: PropertyReport
    am_convexity: PropertyReport
    concavity: PropertyReport
    escalated: bool = False

    @property
    def verdicts(self):
        return (self.convexity.verdict, self.am_convexity.verdict, self.concavity.verdict)

    @property
    def consistent(self):
        return len(set(self.verdicts)) == 1

    def to_dict(self):
        return {
            "verdicts": list(self.verdicts),
            "consistent": self.consistent,
            "escalated": self.escalated,
            "convexity": self.convexity.to_dict(),
            "am_convexity": self.am_convexity.to_dict(),
            "concavity": self.concavity.to_dict(),
        }


def savage_equivalence_harness(P, U, budget=SearchBudget()):
    """Run general convexity, antimonotonic convexity and concavity of U side by side.

    Under non-degenerate expected utility the three must agree.  When U is
    not concave but random search finds no convexity violation, the harness
    escalates to :func:`standard_sequence_witness`.
    """
    P = as_measure(P)
    if P.is_degenerate():
        raise ValueError("need a non-degenerate measure: some event with 0 < P(A) < 1")
    spec = ExpectedUtility(P, U)
    general = check_preference_convexity(spec, budget, "general")
    am = check_preference_convexity(spec, budget, "antimonotonic")
    concave = check_utility_concavity(U)
    escalated = False
    if not concave.passed and (general.passed or am.passed):
        escalated = True
        if am.passed:
            guided = standard_sequence_witness(P, U, budget.tol, "antimonotonic")
            if guided is not None:
                am = guided
        if general.passed:
            if am.verdict == VIOLATED:
                general = replace(am, mode="general", details=dict(am.details, source="antimonotonic witness"))
    return SavageReport(general, am, concave, escalated)


__all__ = [
    "SearchBudget",
    "DEFAULT_SEED",
    "effective_range",
    "check_additivity",
    "check_homogeneity",
    "check_monotonicity",
    "check_normalization",
    "check_law_based",
    "check_affinity",
    "check_ce_am_additivity",
    "check_preference_convexity",
    "check_uncertainty_reduction",
    "check_utility_concavity",
    "extract_measure",
    "verify_expectation_representation",
    "standard_sequence",
    "standard_sequence_witness",
    "savage_equivalence_harness",
    "SavageReport",
    "replay_witness",
]
