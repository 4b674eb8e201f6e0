"""Finite-horizon estimators for limsup/sup quantities of cosine families and the law checks built on them.

A ``limsup`` at infinity is estimated by cutting ``[t_start, t_end]`` into
windows, taking the sup of ``||C(t) - I||`` over a uniform grid inside each,
and reporting the max over the last few windows together with a trend flag.
It is an estimator: generated families have almost-periodic norms, so window
sups settle quickly, but nothing here is a proof.
"""

from __future__ import annotations

import cmath
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from coslaw import config
from coslaw.cosine_families import MatrixCosineFamily, ScalarCosineFamily, Strategy, SERIES_DOMAIN
from coslaw.errors import ConfigError, Overflowed
from coslaw.linalg_core import identity, spectral_radius

CLASS_TOL = 0.05
MAX_SAMPLES = 50_000_000
# growth rates below this fraction of the spectral scale are roundoff
GROWTH_RTOL = 1e-10
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScanConfig:
    t_start: float = 0.0
    t_end: float = 1000.0
    step: float = 1e-2
    window_len: float = 50.0
    overflow_cap: float = 1e6
    tol_zero: float = 1e-9
    tail_windows: int = 3

    def __post_init__(self):
        vals = (self.t_start, self.t_end, self.step, self.window_len, self.overflow_cap, self.tol_zero)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ConfigError("scan config values must be finite")
        if not 0.0 <= self.t_start < self.t_end:
            raise ConfigError("need 0 <= t_start < t_end")
        if not 0.0 < self.step <= self.window_len <= self.t_end - self.t_start:
            raise ConfigError("need 0 < step <= window_len <= t_end - t_start")
        if self.overflow_cap <= 0 or self.tol_zero < 0 or int(self.tail_windows) < 1:
            raise ConfigError("overflow_cap > 0, tol_zero >= 0 and tail_windows >= 1 required")

    @property
    def n_samples(self) -> int:
        return int(math.floor((self.t_end - self.t_start) / self.step + 1e-9)) + 1

    def grid(self) -> np.ndarray:
        if self.n_samples > MAX_SAMPLES:
            raise ConfigError(f"scan grid has {self.n_samples} samples (limit {MAX_SAMPLES})")
        return self.t_start + self.step * np.arange(self.n_samples)


def default_scan_config(f, overflow_cap: float = 1e6, points_per_period: int = 200) -> ScanConfig:
    """Horizon and grid adapted to the frequencies and growth of ``f``.

    The horizon is ``1e3 / min(scale, 1)`` (``scale`` = largest spectral
    modulus), lengthened so that exponential growth at rate ``|Im|`` would cross
    ``overflow_cap``, and clipped to the accuracy domain for series evaluation.
    The step resolves the fastest oscillation with ``points_per_period`` samples.
    """
    scale = f.spectral_scale
    growth = f.growth_rate
    if growth <= GROWTH_RTOL * scale:
        growth = 0.0
    t_end = 1e3 / min(scale, 1.0) if scale > 0 else 1e3
    if growth > 0:
        t_end = max(t_end, 1.5 * (math.log(2.0 * overflow_cap) + 1.0) / growth)
    series = isinstance(f, MatrixCosineFamily) and f.strategy is Strategy.SERIES
    if series and f.generator_norm > 0:
        t_end = min(t_end, SERIES_DOMAIN / f.generator_norm)
    step = 2.0 * math.pi / (points_per_period * scale) if scale > 0 else t_end / 1000.0
    step = min(step, t_end / 1000.0)
    window = t_end / 20.0
    if scale > 0:
        window = min(max(window, 4.0 * math.pi / scale), t_end)
    return ScanConfig(0.0, t_end, step, window, overflow_cap=overflow_cap)


class Trend(str, enum.Enum):
    DECREASING = "decreasing"
    STABLE = "stable"
    INCREASING = "increasing"


@dataclass
class TailEstimate:
    window_sups: list
    limsup_estimate: float
    trend: Trend
    overflowed: bool = False
    grid_error: float | None = None
    times: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    norms: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    @property
    def worst_sample(self) -> tuple[float, float]:
        if self.norms.size == 0:
            return (math.nan, math.nan)
        i = int(np.argmax(np.where(np.isnan(self.norms), np.inf, self.norms)))
        return float(self.times[i]), float(self.norms[i])

    def to_json(self) -> dict:
        return {
            "limsup": None if self.overflowed else self.limsup_estimate,
            "overflowed": self.overflowed,
            "trend": self.trend.value,
            "grid_error": self.grid_error,
            "windows": [[float(s), float(v)] for s, v in self.window_sups],
        }


def _trend(sups: list, m: int, tol: float) -> Trend:
    if len(sups) <= m:
        return Trend.STABLE
    last = max(sups[-m:])
    prev = max(sups[-2 * m:-m])
    if last - prev > tol:
        return Trend.INCREASING
    if prev - last > tol:
        return Trend.DECREASING
    return Trend.STABLE


def _summarize(starts, sups, times, norms, m, overflowed, grid_error) -> TailEstimate:
    if not sups and not overflowed:
        raise ConfigError("scan produced no samples")
    if overflowed:
        limsup = math.inf
        trend = Trend.INCREASING
    else:
        limsup = float(max(sups[-m:]))
        trend = _trend(sups, m, 1e-6 + (grid_error or 0.0))
    return TailEstimate(
        window_sups=list(zip(starts, sups)),
        limsup_estimate=limsup,
        trend=trend,
        overflowed=overflowed,
        grid_error=grid_error,
        times=np.concatenate(times) if times else np.empty(0),
        norms=np.concatenate(norms) if norms else np.empty(0),
    )


def windowed_sup_scan(f, cfg: ScanConfig) -> TailEstimate:
    """Window sups of ``||C(t) - I||`` over ``[t_start, t_end]``.

    Any sample above ``overflow_cap`` (or non-finite) stops the scan and marks
    the estimate overflowed. Windows are independent and may be evaluated on
    up to ``COSLAW_THREADS`` threads; results do not depend on the thread count.
    """
    ts = cfg.grid()
    L = cfg.window_len
    n_windows = max(1, int(math.ceil((cfg.t_end - cfg.t_start) / L - 1e-12)))
    idx = np.minimum(((ts - cfg.t_start) / L).astype(int), n_windows - 1)
    bounds = np.searchsorted(idx, np.arange(n_windows + 1))
    chunks = [ts[bounds[w]:bounds[w + 1]] for w in range(n_windows)]
    chunks = [(w, c) for w, c in enumerate(chunks) if c.size]

    def run(chunk):
        return f.distance_to_identity(chunk)

    threads = config.scan_threads()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = iter(pool.map(run, [c for _, c in chunks]))
    else:
        results = (run(c) for _, c in chunks)

    starts, sups, times, norms = [], [], [], []
    overflowed = False
    for (w, chunk), d in zip(chunks, results):
        bad = ~np.isfinite(d) | (d > cfg.overflow_cap)
        if np.any(bad):
            stop = int(np.argmax(bad)) + 1
            times.append(chunk[:stop])
            norms.append(np.where(np.isfinite(d[:stop]), d[:stop], np.inf))
            overflowed = True
            break
        starts.append(cfg.t_start + w * L)
        sups.append(float(np.max(d)))
        times.append(chunk)
        norms.append(d)

    grid_error = cfg.step * f.spectral_scale if f.real_spectrum else None
    return _summarize(starts, sups, times, norms, int(cfg.tail_windows), overflowed, grid_error)


def shrinking_scan(f, t_outer: float = 1.0, levels: int = 40, points: int = 64,
                   overflow_cap: float = 1e6, tail_windows: int = 3) -> TailEstimate:
    """Window sups on the dyadic shells ``[2^-(j+1) T, 2^-j T]``, ``j = 0..levels-1``.

    The "last" windows are the ones nearest to 0, so the estimate targets
    ``limsup_{t -> 0}``.
    """
    if t_outer <= 0 or levels < 1 or points < 2:
        raise ConfigError("shrinking scan needs t_outer > 0, levels >= 1, points >= 2")
    starts, sups, times, norms = [], [], [], []
    overflowed = False
    for j in range(levels):
        hi = t_outer * 2.0**-j
        chunk = np.linspace(0.5 * hi, hi, points)
        d = f.distance_to_identity(chunk)
        if np.any(~np.isfinite(d) | (d > overflow_cap)):
            overflowed = True
            times.append(chunk)
            norms.append(np.where(np.isfinite(d), d, np.inf))
            break
        starts.append(0.5 * hi)
        sups.append(float(np.max(d)))
        times.append(chunk)
        norms.append(d)
    return _summarize(starts, sups, times, norms, tail_windows, overflowed, None)


class Approach(str, enum.Enum):
    ZERO = "zero"
    INFINITY = "infinity"


class Dichotomy(str, enum.Enum):
    ZERO = "zero"
    TWO = "two"
    INFINITE = "infinite"
    INDETERMINATE = "indeterminate"


@dataclass
class DichotomyClass:
    category: Dichotomy
    approach: Approach
    limsup_estimate: float
    recovered_a: complex | None = None
    diagnostics: str = ""

    def to_json(self) -> dict:
        a = self.recovered_a
        return {
            "class": self.category.value,
            "t0": self.approach.value,
            "limsup": None if math.isinf(self.limsup_estimate) else self.limsup_estimate,
            "recovered_a": None if a is None else [a.real, a.imag],
            "diagnostics": self.diagnostics,
        }


def _canonical(a: complex) -> complex:
    if a.real < 0 or (a.real == 0 and a.imag < 0):
        return -a
    return a


def _fit_frequency(f: ScalarCosineFamily, t_ref: float, rtol: float = 1e-6) -> complex | None:
    """Recover ``a`` from ``c(t) = cos(a t)`` by ``arccos`` at two dyadic points that agree."""
    ts = [t_ref * 2.0**j for j in range(-50, 60)]
    cand = []
    for t in ts:
        try:
            c = f.evaluate(t)
        except Overflowed:
            break
        dist = abs(c - 1.0)
        cand.append((t, c, dist))
    if all(d == 0.0 for _, _, d in cand):
        return 0j
    for (t1, c1, d1), (t2, c2, d2) in zip(cand, cand[1:]):
        if 1e-6 <= d1 <= 0.5 and 1e-6 <= d2 <= 0.5:
            a1 = _canonical(cmath.acos(c1) / t1)
            a2 = _canonical(cmath.acos(c2) / t2)
            if abs(a1 - a2) <= rtol * (1.0 + abs(a2)):
                return a2
    return None


def classify_scalar_dichotomy(a, t0=Approach.INFINITY, cfg: ScanConfig | None = None,
                              tol: float = CLASS_TOL) -> DichotomyClass:
    """Place ``limsup_{t -> t0} |cos(a t) - 1|`` in one of the classes 0, 2, infinity.

    For ``t0 = 0`` the scan runs on dyadic shells shrinking to 0 below
    ``cfg.t_end`` (default 1), and a ``Zero`` verdict comes with the fitted
    frequency ``a`` (sign-normalized, since ``cos`` is even).
    """
    t0 = Approach(t0)
    f = ScalarCosineFamily(a)
    if t0 is Approach.INFINITY:
        cfg = cfg or default_scan_config(f)
        est = windowed_sup_scan(f, cfg)
        tol_zero = cfg.tol_zero
    else:
        t_outer = cfg.t_end if cfg else 1.0
        cap = cfg.overflow_cap if cfg else 1e6
        tol_zero = cfg.tol_zero if cfg else 1e-9
        est = shrinking_scan(f, t_outer, overflow_cap=cap)

    lim = est.limsup_estimate
    if est.overflowed:
        return DichotomyClass(Dichotomy.INFINITE, t0, lim, diagnostics="exceeded overflow cap")
    if lim <= tol_zero:
        rec = None
        diag = ""
        if t0 is Approach.ZERO:
            rec = _fit_frequency(f, t_outer)
            if rec is None:
                diag = "frequency fit did not converge"
        return DichotomyClass(Dichotomy.ZERO, t0, lim, rec, diag)
    if abs(lim - 2.0) <= tol:
        return DichotomyClass(Dichotomy.TWO, t0, lim)
    return DichotomyClass(
        Dichotomy.INDETERMINATE, t0, lim,
        diagnostics=f"tail estimate {lim:.6g} (trend {est.trend.value}) is not within "
                    f"{tol_zero:g} of 0 nor {tol:g} of 2",
    )


@dataclass
class LawVerdict:
    threshold_r: float
    premise_holds: bool
    conclusion_holds: bool
    worst_sample: tuple
    evidence: TailEstimate

    @property
    def counterexample(self) -> bool:
        return self.premise_holds and not self.conclusion_holds

    def to_json(self) -> dict:
        ev = self.evidence
        return {
            "r": self.threshold_r,
            "premise": self.premise_holds,
            "conclusion": self.conclusion_holds,
            "limsup": None if ev.overflowed else ev.limsup_estimate,
            "overflowed": ev.overflowed,
            "worst": [self.worst_sample[0], self.worst_sample[1]],
        }


def verdict_from_estimate(r, est: TailEstimate, generator_norm: float, tol_zero: float) -> LawVerdict:
    premise = (not est.overflowed) and est.limsup_estimate < r
    conclusion = (
        not est.overflowed
        and bool(np.all(est.norms <= tol_zero))
        and generator_norm <= tol_zero
    )
    return LawVerdict(float(r), premise, conclusion, est.worst_sample, est)


def law_check_limsup_infinity(f, r: float = 2.0, cfg: ScanConfig | None = None) -> LawVerdict:
    """Check ``limsup_{t -> inf} ||C(t) - I|| < r  =>  C = I`` on a finite horizon.

    A verdict with the premise holding and the conclusion failing would be a
    counterexample; for ``r <= 2`` none is expected.
    """
    if not 0.0 < r <= 2.0:
        raise ConfigError("threshold r must lie in (0, 2]")
    cfg = cfg or default_scan_config(f)
    est = windowed_sup_scan(f, cfg)
    return verdict_from_estimate(r, est, f.generator_norm, cfg.tol_zero)


def gelfand_check(diag_b, t: float) -> tuple[float, float]:
    """``(rho(C(t) - I), max_i |cos(t b_i) - 1|)`` for ``C(t) = cos(t diag(b))``.

    The left side goes through matrix evaluation and the Gelfand formula; the
    right side evaluates each coordinate character directly.
    """
    b = np.atleast_1d(np.asarray(diag_b, dtype=np.complex128))
    strategy = Strategy.SERIES if np.max(np.abs(b)) * abs(t) <= SERIES_DOMAIN else Strategy.SPECTRAL
    fam = MatrixCosineFamily(np.diag(b), strategy)
    lhs = spectral_radius(fam.evaluate(t) - identity(b.size))
    rhs = max(abs(cmath.cos(t * complex(bi)) - 1.0) for bi in b)
    return lhs, rhs


def _shrink(S: float) -> float:
    # 1 - sqrt(1 - S/2) without cancellation
    return 0.5 * S / (1.0 + math.sqrt(1.0 - 0.5 * S))


def contraction_S_iteration(S0: float, tol: float = 1e-14, max_iter: int = 10_000) -> tuple[float, int]:
    """Iterate ``S <- 1 - sqrt(1 - S/2)`` from ``S0`` in [0, 1] until the step is below ``tol``."""
    if not 0.0 <= S0 <= 1.0:
        raise ValueError("S0 must lie in [0, 1]")
    S = float(S0)
    for it in range(1, max_iter + 1):
        nxt = _shrink(S)
        done = abs(nxt - S) < tol
        S = nxt
        if done:
            return S, it
    return S, max_iter


def golden_max(g, lo: float, hi: float, xtol: float = 1e-12) -> tuple[float, float]:
    """Golden-section search for the max of a unimodal ``g`` on ``[lo, hi]``; returns ``(x, g(x))``."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    gc, gd = g(c), g(d)
    while hi - lo > xtol * max(1.0, abs(lo)):
        if gc > gd:
            hi, d, gd = d, c, gc
            c = hi - INV_PHI * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + INV_PHI * (hi - lo)
            gd = g(d)
    x = 0.5 * (lo + hi)
    return x, g(x)


def default_witness_config(a: float, b: float) -> ScanConfig:
    fast = max(abs(a), abs(b))
    slow = min(x for x in (abs(a), abs(b), abs(a - b)) if x > 0)
    t_end = 4.0 * math.pi / slow
    step = min(2.0 * math.pi / (400.0 * fast), t_end / 1000.0)
    return ScanConfig(0.0, t_end, step, t_end)


def scaled_gap_witness(a: float, b: float, cfg: ScanConfig | None = None) -> float:
    """``sup_t |cos(b t) - cos(a t)|``: grid search, then golden-section refinement at the best point."""
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    cfg = cfg or default_witness_config(a, b)

    def g(t):
        return abs(math.cos(b * t) - math.cos(a * t))

    ts = cfg.grid()
    vals = np.abs(np.cos(b * ts) - np.cos(a * ts))
    i = int(np.argmax(vals))
    lo = max(cfg.t_start, ts[i] - cfg.step)
    hi = min(cfg.t_end, ts[i] + cfg.step)
    _, refined = golden_max(g, lo, hi)
    return max(float(vals[i]), refined)
