"""Cosine sequences ``C(n) = T_n(X)`` and power semigroups ``T^n``, with their zero-two / zero-one law checks."""

from __future__ import annotations

import math
import threading
from functools import cached_property

import numpy as np

from coslaw import config
from coslaw.errors import ConfigError, DomainError, Overflowed
from coslaw.laws import (
    LawVerdict,
    ScanConfig,
    TailEstimate,
    _trend,
    verdict_from_estimate,
    windowed_sup_scan,
)
from coslaw.linalg_core import as_matrix, identity, operator_norm, operator_norms

MAX_INDEX = 10**6
EXP_DOMAIN = 100.0
# entries past this are far beyond any law threshold; stopping here keeps M* M finite
_POWER_CAP = 1e60


class DiscreteCosineSequence:
    """``C(0) = I``, ``C(1) = X``, ``C(n+1) = 2 X C(n) - C(n-1)``, ``C(-n) = C(n)``.

    Values are cached; the cache only grows and is extended under a lock.
    """

    def __init__(self, X):
        self.X = as_matrix(X, "X").copy()
        self.X.setflags(write=False)
        eye = identity(self.X.shape[0])
        self._cache = [eye, self.X]
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def _extend(self, m: int):
        with self._lock:
            cache = self._cache
            X2 = 2.0 * self.X
            while len(cache) <= m:
                nxt = X2 @ cache[-1] - cache[-2]
                if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > config.VALUE_CAP:
                    raise Overflowed(f"C({len(cache)}) exceeds {config.VALUE_CAP:g}")
                cache.append(nxt)

    def __getitem__(self, n: int) -> np.ndarray:
        return discrete_eval(self, n)

    def distances(self, N: int, cap: float = _POWER_CAP) -> tuple[np.ndarray, bool]:
        """``||C(n) - I||`` for ``n = 0..N``; stops early (flag True) once entries pass ``cap``."""
        try:
            self._extend(N)
        except Overflowed:
            pass
        vals = self._cache[: N + 1]
        stop = len(vals)
        for i, C in enumerate(vals):
            if np.max(np.abs(C)) > cap:
                stop = i
                break
        eye = identity(self.dim)
        d = operator_norms(np.asarray(vals[:stop]) - eye) if stop else np.empty(0)
        return d, stop < N + 1


def discrete_eval(seq: DiscreteCosineSequence, n: int) -> np.ndarray:
    m = abs(int(n))
    if m > MAX_INDEX:
        raise DomainError(f"|n| = {m} exceeds {MAX_INDEX}")
    seq._extend(m)
    return seq._cache[m]


def _index_estimate(d: np.ndarray, start: int, N: int, overflowed: bool, n_blocks: int = 10) -> TailEstimate:
    """Tail estimate for distances ``d[k]`` at ``n = start + k``; the limsup is the max over ``n >= N/2``."""
    if overflowed:
        norms = np.append(d, np.inf)
        ns = start + np.arange(norms.size)
        return TailEstimate([], math.inf, _trend([], 1, 0.0), True, None, ns.astype(float), norms)
    ns = start + np.arange(d.size)
    edges = np.linspace(start, N + 1, n_blocks + 1).astype(int)
    starts, sups = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        block = d[lo - start:hi - start]
        if block.size:
            starts.append(float(lo))
            sups.append(float(np.max(block)))
    tail = float(np.max(d[ns >= N // 2]))
    return TailEstimate(list(zip(starts, sups)), tail, _trend(sups, 3, 1e-12), False, None,
                        ns.astype(float), d)


def discrete_law_check(seq: DiscreteCosineSequence, r: float = 1.5, N: int = 10_000,
                       tol_zero: float = 1e-9) -> LawVerdict:
    """Check ``limsup_n ||C(n) - I|| < r  =>  C(n) = I`` with the limsup read off ``n in [N/2, N]``."""
    if not 0.0 < r <= 1.5:
        raise ConfigError("threshold r must lie in (0, 3/2]")
    if N < 100:
        raise ConfigError("N must be at least 100")
    d, overflowed = seq.distances(N)
    est = _index_estimate(d, 0, N, overflowed)
    gap = operator_norm(seq.X - identity(seq.dim))
    return verdict_from_estimate(r, est, gap, tol_zero)


class PowerSemigroup:
    """``T_n = T^n``."""

    def __init__(self, T):
        self.T = as_matrix(T, "T").copy()
        self.T.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    def powers(self, N: int, cap: float = _POWER_CAP) -> tuple[np.ndarray, bool]:
        """Stack ``T^1..T^N`` by repeated multiplication; stops early (flag True) past ``cap``."""
        out = np.empty((N, self.dim, self.dim), dtype=np.complex128)
        P = self.T
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(N):
                if not np.all(np.isfinite(P)) or np.max(np.abs(P)) > cap:
                    return out[:j], True
                out[j] = P
                P = P @ self.T
        return out, False

    def distances(self, N: int) -> tuple[np.ndarray, bool]:
        """``||T^n - I||`` for ``n = 1..N``."""
        P, overflowed = self.powers(N)
        if P.shape[0] == 0:
            return np.empty(0), overflowed
        return operator_norms(P - identity(self.dim)), overflowed


def semigroup_eval(sg: PowerSemigroup, n: int) -> np.ndarray:
    """``T^n`` by binary exponentiation."""
    n = int(n)
    if n < 0:
        raise DomainError("semigroup index must be non-negative")
    result = identity(sg.dim)
    base = sg.T
    with np.errstate(over="ignore", invalid="ignore"):
        while n:
            if n & 1:
                result = result @ base
            n >>= 1
            if n:
                base = base @ base
            if not np.all(np.isfinite(result)) or np.max(np.abs(result)) > config.VALUE_CAP:
                raise Overflowed(f"T^n exceeds {config.VALUE_CAP:g}")
    return result


def cesaro_wallen(sg: PowerSemigroup, N: int = 10_000) -> tuple[float, np.ndarray]:
    """Cesaro means ``A_n = (1/n) sum_{j<=n} ||T^j - I||`` for ``n = 1..N``.

    Returns ``(min_{N/2 <= n <= N} A_n, [A_1, ..., A_N])``. If the powers blow
    up, the estimate is ``inf`` and only the computed means are returned.
    """
    if N < 10:
        raise ConfigError("N must be at least 10")
    d, overflowed = sg.distances(N)
    averages = np.cumsum(d) / np.arange(1, d.size + 1)
    if overflowed:
        return math.inf, averages
    return float(np.min(averages[N // 2 - 1:])), averages


def semigroup_law_check(sg: PowerSemigroup, r: float = 1.0, N: int = 10_000,
                        tol_zero: float = 1e-9) -> LawVerdict:
    """Check ``limsup_n ||T^n - I|| < r  =>  T = I`` with the limsup read off ``n in [N/2, N]``."""
    if not 0.0 < r <= 1.0:
        raise ConfigError("threshold r must lie in (0, 1]")
    if N < 100:
        raise ConfigError("N must be at least 100")
    d, overflowed = sg.distances(N)
    est = _index_estimate(d, 1, N, overflowed)
    gap = operator_norm(sg.T - identity(sg.dim))
    return verdict_from_estimate(r, est, gap, tol_zero)


def expm_taylor(A, norm: float | None = None) -> np.ndarray:
    """``exp(A)`` by Taylor series at ``A / 2^k`` (``||A|| / 2^k <= 0.5``) and ``k`` squarings."""
    A = as_matrix(A, "A")
    nrm = operator_norm(A) if norm is None else norm
    k = 0
    while nrm / 2.0**k > 0.5:
        k += 1
    As = A / 2.0**k
    eye = identity(A.shape[0])
    E = eye.copy()
    term = eye
    n = 1
    while True:
        term = term @ As / n
        E += term
        if np.linalg.norm(term) < 1e-18:
            break
        n += 1
    for _ in range(k):
        E = E @ E
    return E


class ExpSemigroup:
    """``T(t) = exp(t G)`` on ``t >= 0``, shaped like a cosine family for the windowed scanner."""

    def __init__(self, G):
        self.G = as_matrix(G, "G").copy()
        self.G.setflags(write=False)

    @cached_property
    def generator_norm(self) -> float:
        return operator_norm(self.G)

    @property
    def spectral_scale(self) -> float:
        return self.generator_norm

    real_spectrum = False

    def evaluate(self, t: float) -> np.ndarray:
        t = float(t)
        if self.generator_norm * abs(t) > EXP_DOMAIN:
            raise DomainError(f"||G|| |t| exceeds {EXP_DOMAIN:g}")
        return expm_taylor(t * self.G, self.generator_norm * abs(t))

    def distance_to_identity(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        stack = np.asarray([self.evaluate(t) for t in ts])
        return operator_norms(stack - identity(self.G.shape[0]))


def default_exp_config(sg: ExpSemigroup) -> ScanConfig:
    g = sg.generator_norm
    t_end = EXP_DOMAIN / g if g > 0 else EXP_DOMAIN
    return ScanConfig(0.0, t_end, t_end / 10_000, t_end / 10)


def matrix_exp_semigroup_check(G, r: float = 1.0, cfg: ScanConfig | None = None) -> LawVerdict:
    """Check ``limsup_t ||exp(tG) - I|| < r  =>  G = 0`` on the windowed scan of ``exp(tG)``."""
    if not 0.0 < r <= 1.0:
        raise ConfigError("threshold r must lie in (0, 1]")
    sg = ExpSemigroup(G)
    cfg = cfg or default_exp_config(sg)
    if sg.generator_norm * cfg.t_end > EXP_DOMAIN * (1.0 + 1e-12):
        raise DomainError(f"||G|| t_end exceeds {EXP_DOMAIN:g}")
    est = windowed_sup_scan(sg, cfg)
    return verdict_from_estimate(r, est, sg.generator_norm, cfg.tol_zero)
