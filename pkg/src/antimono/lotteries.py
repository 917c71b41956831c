"""Lottery acts in the Anscombe-Aumann setting.

A lottery is a probability vector over ``k`` prizes and a lottery act is an
``(n, k)`` array holding one lottery per state.  Batches of acts have shape
``(..., n, k)``.  Preference oracles expose ``u`` (prize utilities),
``utility`` (lottery -> real) and ``evaluate`` (act -> real).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import axioms
from .axioms import SearchBudget, _draw_alpha, _equality_terms, _scan
from .capacities import Capacity
from .core import ProbabilityMeasure, as_measure, sample_antimonotonic_batch, seq_dot
from .functionals import choquet_integral
from .report import PASS, VIOLATED, PropertyReport

LOTTERY_TOL = 1e-12
STRICT_TOL = 1e-12
MP_BISECT_TOL = 1e-10
RECOVERY_TOL = 1e-8


def _check_lotteries(a, k=None):
    a = np.asarray(a, dtype=float)
    if a.ndim < 1 or (k is not None and a.shape[-1] != k):
        raise ValueError("lottery arrays must end in the prize axis")
    if np.any(a < -LOTTERY_TOL) or np.any(np.abs(a.sum(axis=-1) - 1.0) > LOTTERY_TOL):
        raise ValueError("lotteries must be probability vectors")
    return a


@dataclass(frozen=True, eq=False)
class Lottery:
    probs: np.ndarray

    def __post_init__(self):
        p = _check_lotteries(self.probs)
        if p.ndim != 1:
            raise ValueError("a lottery is a single probability vector")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def degenerate(cls, j, k):
        p = np.zeros(k)
        p[j] = 1.0
        return cls(p)

    @property
    def k(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class LotteryAct:
    table: np.ndarray

    def __post_init__(self):
        t = _check_lotteries(self.table)
        if t.ndim != 2:
            raise ValueError("a lottery act is an (n, k) array")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def constant(cls, lottery, n):
        probs = lottery.probs if isinstance(lottery, Lottery) else np.asarray(lottery, dtype=float)
        return cls(np.tile(probs, (n, 1)))

    @property
    def n(self):
        return self.table.shape[0]

    @property
    def k(self):
        return self.table.shape[1]


def _raw(x):
    if isinstance(x, Lottery):
        return x.probs
    if isinstance(x, LotteryAct):
        return x.table
    return np.asarray(x, dtype=float)


def mix(x, y, alpha):
    """Statewise mixture ``alpha x + (1 - alpha) y`` of lotteries or lottery acts."""
    a, b = _raw(x), _raw(y)
    if a.shape != b.shape:
        raise ValueError(f"cannot mix shapes {a.shape} and {b.shape}")
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise ValueError("mixing weight must lie in [0, 1]")
    if alpha.ndim:
        alpha = alpha.reshape(alpha.shape + (1,) * (a.ndim - alpha.ndim))
    out = alpha * a + (1 - alpha) * b
    if isinstance(x, Lottery):
        return Lottery(out)
    if isinstance(x, LotteryAct):
        return LotteryAct(out)
    return out


class _LotteryOracle:
    u: np.ndarray

    @property
    def k(self):
        return self.u.size

    @property
    def best(self):
        return int(np.argmax(self.u))

    @property
    def worst(self):
        return int(np.argmin(self.u))

    def utility(self, x):
        """Affine lottery utility; works on lotteries and on lottery acts statewise."""
        return _raw(x) @ self.u

    def prefers(self, X, Y):
        return self.evaluate(X) >= self.evaluate(Y)


@dataclass(frozen=True, eq=False)
class AAModel(_LotteryOracle):
    """Subjective expected utility over lottery acts."""

    P: ProbabilityMeasure
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", as_measure(self.P))
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise ValueError("prize utilities must be a nonempty vector")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n(self):
        return self.P.n

    def evaluate(self, X):
        return seq_dot(self.utility(X), self.P.weights)


@dataclass(frozen=True, eq=False)
class ChoquetAAModel(_LotteryOracle):
    """Choquet expected utility over lottery acts: a non-EU control oracle."""

    W: Capacity
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n(self):
        return self.W.n

    def evaluate(self, X):
        return choquet_integral(self.W, self.utility(X))


def lottery_antimonotonic(model, X, Y):
    """No two states where both acts strictly increase in utility.

    Strictness uses a gap of ``1e-12``; batches are supported.
    """
    ux, uy = model.utility(X), model.utility(Y)
    dx = ux[..., :, None] - ux[..., None, :]
    dy = uy[..., :, None] - uy[..., None, :]
    both = (dx > STRICT_TOL) & (dy > STRICT_TOL)
    out = ~np.any(both, axis=(-2, -1))
    return bool(out) if out.ndim == 0 else out


def _band(model, m, M):
    um, uM = float(model.utility(m)), float(model.utility(M))
    if not uM > um:
        raise ValueError("need M strictly preferred to m")
    return um, uM


def _constant_act(lottery, n):
    return np.tile(_raw(lottery), (n, 1))


def _bisect_mp(model, X, m, M, iters=60):
    """Matching probability from preference comparisons only."""
    n = model.n
    vx = model.evaluate(X)
    lo, hi = 0.0, 1.0
    cm, cM = _constant_act(m, n), _constant_act(M, n)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if model.evaluate(mix(cM, cm, mid)) < vx:
            lo = mid
        else:
            hi = mid
        if hi - lo < MP_BISECT_TOL * 1e-2:
            break
    return 0.5 * (lo + hi)


def matching_probability(model, X, m, M):
    """``p`` with ``p M + (1 - p) m`` indifferent to ``X``.

    The closed form is cross-checked against a bisection that only uses the
    oracle's preference comparisons.
    """
    um, uM = _band(model, m, M)
    ux = model.utility(X)
    slack = STRICT_TOL * (1 + abs(um) + abs(uM))
    if np.any(ux < um - slack) or np.any(ux > uM + slack):
        raise ValueError("act leaves the [m, M] band")
    p = (float(model.evaluate(X)) - um) / (uM - um)
    p = min(1.0, max(0.0, p))
    q = _bisect_mp(model, _raw(X), m, M)
    if abs(p - q) > MP_BISECT_TOL:
        raise ArithmeticError(f"matching probability mismatch: formula {p}, bisection {q}")
    return p


# --- am-independence ---------------------------------------------------------------


def _realize(rng, model, target):
    """Lottery acts whose statewise utilities equal ``target``.

    Each state's lottery mixes a random lottery with the best prize (target
    above it) or the worst prize (target below it).
    """
    size, n = target.shape
    k = model.k
    base = rng.dirichlet(np.ones(k), size=(size, n))
    ub = base @ model.u
    hi_u, lo_u = model.u[model.best], model.u[model.worst]
    up = target >= ub
    denom = np.where(up, hi_u - ub, lo_u - ub)
    beta = np.where(np.abs(denom) > 0, (target - ub) / np.where(denom == 0, 1.0, denom), 0.0)
    beta = np.clip(beta, 0.0, 1.0)
    ext = np.where(up[..., None], np.eye(k)[model.best], np.eye(k)[model.worst])
    return beta[..., None] * ext + (1 - beta[..., None]) * base


def _constant_match(model, X):
    """Constant lottery acts ``x`` with ``V(x) = V(X)``, mixing best and worst prizes."""
    n, k = model.n, model.k
    hi_u, lo_u = model.u[model.best], model.u[model.worst]
    v = np.atleast_1d(model.evaluate(X))
    beta = np.clip((v - lo_u) / (hi_u - lo_u), 0.0, 1.0)
    lot = beta[:, None] * np.eye(k)[model.best] + (1 - beta[:, None]) * np.eye(k)[model.worst]
    return np.repeat(lot[:, None, :], n, axis=1)


def _am_independence_terms(model, inp):
    X, Z, a = inp["X"], inp["Z"], inp["alpha"]
    x = _constant_match(model, X)
    ok = np.asarray(lottery_antimonotonic(model, X, Z))
    av = a[:, None, None]
    lhs = np.atleast_1d(model.evaluate(av * X + (1 - av) * Z))
    rhs = np.atleast_1d(model.evaluate(av * x + (1 - av) * Z))
    return _equality_terms(lhs, rhs, 1 + np.abs(lhs) + np.abs(rhs), ok)


axioms._TERMS["am_independence"] = _am_independence_terms


def check_am_independence(model, budget=SearchBudget()):
    """``X ~ x`` implies ``a X + (1-a) Z ~ a x + (1-a) Z`` for antimonotonic ``X, Z``.

    Pairs are built in utility space with the antimonotonic act sampler and
    realized as lottery acts; ``x`` is the constant best/worst mixture that
    matches X.
    """
    lo_u, hi_u = float(model.u.min()), float(model.u.max())
    if not hi_u > lo_u:
        return PropertyReport(
            "am_independence", PASS, budget.tol, seed=budget.seed, details={"degenerate": True}
        )
    n = model.n

    def draw(rng, start, stop):
        size = stop - start
        TX, TZ = sample_antimonotonic_batch(rng, size, n, lo_u, hi_u)
        return {"X": _realize(rng, model, TX), "Z": _realize(rng, model, TZ), "alpha": _draw_alpha(rng, size)}

    report = _scan("am_independence", model, budget, draw, _am_independence_terms, mode="antimonotonic")
    report.details["degenerate"] = False
    return report


# --- representation recovery ----------------------------------------------------------


@dataclass
class RecoveredRepresentation:
    """Recovered probability and prize utilities normalized to ``u(m)=0, u(M)=1``."""

    P: ProbabilityMeasure
    u: np.ndarray
    report: PropertyReport

    def __iter__(self):
        return iter((self.P, self.u, self.report))

    @cached_property
    def model(self):
        return AAModel(self.P, self.u)


def _mp_value(oracle, X, m, M):
    """Matching probability extended affinely beyond the band."""
    vm = oracle.evaluate(_constant_act(m, oracle.n))
    vM = oracle.evaluate(_constant_act(M, oracle.n))
    return (oracle.evaluate(X) - vm) / (vM - vm)


def _prize_utility(oracle, j, m, M):
    """Normalized utility of prize j, re-anchoring through a wider band if needed."""
    n, k = oracle.n, oracle.k
    dj = Lottery.degenerate(j, k)
    cj = _constant_act(dj, n)
    cm, cM = _constant_act(m, n), _constant_act(M, n)
    if oracle.prefers(cj, cM) and not oracle.prefers(cM, cj):
        q = matching_probability(oracle, cM, m, dj)
        return 1.0 / q
    if oracle.prefers(cm, cj) and not oracle.prefers(cj, cm):
        q = matching_probability(oracle, cm, dj, M)
        return -q / (1.0 - q)
    return matching_probability(oracle, cj, m, M)


def recover_representation(oracle, m, M, budget=SearchBudget(samples=10_000)):
    """Recover ``P`` and normalized prize utilities from an EU preference oracle.

    ``P(w_i)`` is the matching probability of ``(M on w_i, m elsewhere)``.
    Prize utilities come from matching probabilities of degenerate lotteries;
    prizes outside the ``[m, M]`` band are placed by matching ``M`` (or
    ``m``) within a band that reaches the prize.  The report checks
    ``sum P = 1``, agreement of in-band prizes with the values obtained
    through the widest band, and reproduction of the oracle's normalized
    value on ``budget.samples`` random lottery acts.
    """
    m, M = Lottery(_raw(m)), Lottery(_raw(M))
    _band(oracle, m, M)
    n, k = oracle.n, oracle.k
    p_hat = np.empty(n)
    for i in range(n):
        act = _constant_act(m, n)
        act[i] = M.probs
        p_hat[i] = matching_probability(oracle, act, m, M)
    u_hat = np.array([_prize_utility(oracle, j, m, M) for j in range(k)])
    total = float(np.sum(p_hat))
    details = {"P_raw": p_hat.tolist(), "u": u_hat.tolist()}

    best = Lottery.degenerate(int(np.argmax(u_hat)), k)
    worst = Lottery.degenerate(int(np.argmin(u_hat)), k)
    overlap = 0.0
    if u_hat.max() > u_hat.min():
        lo_w, hi_w = u_hat.min(), u_hat.max()
        for j in range(k):
            if 0.0 <= u_hat[j] <= 1.0:
                wide = matching_probability(oracle, _constant_act(Lottery.degenerate(j, k), n), worst, best)
                overlap = max(overlap, abs(lo_w + wide * (hi_w - lo_w) - u_hat[j]))
    details["overlap_max_error"] = overlap

    def fail(witness):
        return RecoveredRepresentation(P_hat, u_hat, PropertyReport(
            "recover_representation", VIOLATED, RECOVERY_TOL, witness=witness,
            samples_checked=checked, seed=budget.seed, details=details))

    checked = 0
    P_hat = ProbabilityMeasure(p_hat / total) if total > 0 else None
    if abs(total - 1.0) > RECOVERY_TOL:
        return fail({"condition": "normalized", "lhs": total, "rhs": 1.0, "magnitude": abs(total - 1.0)})
    if overlap > RECOVERY_TOL:
        return fail({"condition": "band_overlap", "magnitude": overlap})
    rng = np.random.default_rng(axioms._seed_words(budget.seed))
    worst_res, worst_act = 0.0, None
    for start in range(0, budget.samples, axioms.CHUNK):
        size = min(axioms.CHUNK, budget.samples - start)
        acts = rng.dirichlet(np.ones(k), size=(size, n))
        truth = _mp_value(oracle, acts, m, M)
        recon = seq_dot(acts @ u_hat, P_hat.weights)
        res = np.abs(truth - recon)
        checked += size
        j = int(np.argmax(res))
        if res[j] > worst_res:
            worst_res, worst_act = float(res[j]), acts[j]
    details["max_residual"] = worst_res
    if worst_res > RECOVERY_TOL:
        return fail({"condition": "reconstruction", "act": worst_act.tolist(), "magnitude": worst_res})
    return RecoveredRepresentation(P_hat, u_hat, PropertyReport(
        "recover_representation", PASS, RECOVERY_TOL, samples_checked=checked,
        seed=budget.seed, details=details))


def random_aa_model(rng, n, k):
    """Random hidden model: Dirichlet probabilities and distinct prize utilities."""
    P = rng.dirichlet(np.ones(n))
    P = P / P.sum()
    u = rng.uniform(-1.0, 2.0, size=k)
    return AAModel(ProbabilityMeasure(P), u)


__all__ = [
    "Lottery",
    "LotteryAct",
    "AAModel",
    "ChoquetAAModel",
    "RecoveredRepresentation",
    "mix",
    "lottery_antimonotonic",
    "matching_probability",
    "check_am_independence",
    "recover_representation",
    "random_aa_model",
]
