"""Scalar and matrix cosine families ``t -> cos(t a)`` / ``t -> cos(t B)``.

Matrix families can be evaluated two ways: through the eigendecomposition of
a normal generator (``"spectral"``), or by a scaled Taylor series followed by
the double-angle step ``C(2u) = 2 C(u)^2 - I`` (``"series"``). The two paths
share no code beyond matrix products and serve as oracles for each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from coslaw import config
from coslaw.errors import ConfigError, DomainError, Overflowed
from coslaw.linalg_core import (
    as_matrix,
    eig_normal,
    identity,
    is_normal,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
)

SERIES_TERM_TOL = 1e-18
SERIES_SCALED_TARGET = 0.5
SERIES_DOMAIN = 100.0

_CHUNK = 1 << 15


class Strategy(str, enum.Enum):
    SPECTRAL = "spectral"
    SERIES = "series"


@dataclass(frozen=True)
class ScalarCosineFamily:
    """``c(t) = cos(a t)`` for a complex parameter ``a``."""

    a: complex = 0.0

    def __post_init__(self):
        a = complex(self.a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ConfigError("scalar family parameter must be finite")
        object.__setattr__(self, "a", a)

    def evaluate(self, t: float) -> complex:
        return eval_scalar(self, t)

    @property
    def generator_norm(self) -> float:
        return abs(self.a)

    @property
    def spectral_scale(self) -> float:
        return abs(self.a)

    @property
    def growth_rate(self) -> float:
        """Exponential growth rate of ``|c(t)|``, i.e. ``|Im a|``."""
        return abs(self.a.imag)

    @property
    def real_spectrum(self) -> bool:
        return self.a.imag == 0.0

    def distance_to_identity(self, ts) -> np.ndarray:
        """``|c(t) - 1|`` on an array of times, using ``cos z - 1 = -2 sin^2(z/2)``."""
        ts = np.asarray(ts, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            half = np.sin(0.5 * self.a * ts)
            return 2.0 * np.abs(half) ** 2

    def identity(self):
        return 1.0


@dataclass(eq=False)
class MatrixCosineFamily:
    """``C(t) = cos(t B)`` for a square complex generator ``B``."""

    B: np.ndarray
    strategy: Strategy = Strategy.SPECTRAL

    def __post_init__(self):
        self.B = as_matrix(self.B, "B").copy()
        self.B.setflags(write=False)
        try:
            self.strategy = Strategy(self.strategy)
        except ValueError:
            raise ConfigError(f"unknown evaluation strategy {self.strategy!r}") from None

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    @cached_property
    def generator_norm(self) -> float:
        return operator_norm(self.B)

    @cached_property
    def normal(self) -> bool:
        return is_normal(self.B)

    @cached_property
    def eig(self):
        return eig_normal(self.B)

    @property
    def spectral_scale(self) -> float:
        if self.strategy is Strategy.SPECTRAL:
            return float(np.max(np.abs(self.eig.values)))
        return self.generator_norm

    @property
    def growth_rate(self) -> float:
        if self.strategy is Strategy.SPECTRAL:
            return float(np.max(np.abs(self.eig.values.imag)))
        return self.generator_norm

    @property
    def real_spectrum(self) -> bool:
        return self.strategy is Strategy.SPECTRAL and not np.any(self.eig.values.imag)

    def evaluate(self, t: float) -> np.ndarray:
        if self.strategy is Strategy.SPECTRAL:
            return eval_matrix_spectral(self, t)
        return eval_matrix_series_doubling(self, t)

    def distance_to_identity(self, ts) -> np.ndarray:
        """``||C(t) - I||`` on an array of times.

        The spectral strategy uses the eigenvalues directly: ``C(t) - I`` is
        normal, so its norm is the largest ``|cos(t lam) - 1|``.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.strategy is Strategy.SPECTRAL:
            lam = self.eig.values
            out = np.empty(ts.shape)
            with np.errstate(over="ignore", invalid="ignore"):
                for lo in range(0, ts.size, _CHUNK):
                    half = np.sin(0.5 * np.outer(ts[lo:lo + _CHUNK], lam))
                    out[lo:lo + _CHUNK] = np.max(2.0 * np.abs(half) ** 2, axis=1)
            return out
        eye = identity(self.dim)
        out = np.empty(ts.shape)
        for i, t in enumerate(ts):
            try:
                out[i] = operator_norm(self.evaluate(t) - eye)
            except Overflowed:
                out[i] = np.inf
        return out

    def identity(self):
        return identity(self.dim)


def eval_scalar(f: ScalarCosineFamily, t: float) -> complex:
    """``cos(a t) = (e^{i a t} + e^{-i a t}) / 2``; raises :class:`Overflowed` above the value cap."""
    z = f.a * float(t)
    with np.errstate(over="ignore", invalid="ignore"):
        val = complex(0.5 * (np.exp(1j * z) + np.exp(-1j * z)))
    if not (math.isfinite(val.real) and math.isfinite(val.imag)) or abs(val) > config.VALUE_CAP:
        raise Overflowed(f"|cos(a t)| exceeds {config.VALUE_CAP:g} at t={t!r}")
    return val


def _check_cap(M: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(M)) or np.max(np.abs(M)) > config.VALUE_CAP:
        raise Overflowed(f"{what}: entry magnitude exceeds {config.VALUE_CAP:g}")
    return M


def eval_matrix_spectral(f: MatrixCosineFamily, t: float) -> np.ndarray:
    """``V diag(cos(t lam)) V*`` from the unitary eigendecomposition of ``B``."""
    dec = f.eig
    with np.errstate(over="ignore", invalid="ignore"):
        c = np.cos(float(t) * dec.values)
    V = dec.vectors
    return _check_cap((V * c) @ V.conj().T, "cos(tB)")


def eval_matrix_series_doubling(f: MatrixCosineFamily, t: float) -> np.ndarray:
    """``cos(tB)`` by Taylor series at ``u = t / 2^k`` and ``k`` double-angle steps.

    ``k`` is the smallest integer with ``||B|| |t| / 2^k <= 0.5``; the series is
    summed until a term drops below ``1e-18`` in Frobenius norm.
    """
    t = float(t)
    x = f.generator_norm * abs(t)
    if x > SERIES_DOMAIN:
        raise DomainError(f"||B|| |t| = {x:.6g} exceeds the series domain {SERIES_DOMAIN:g}")
    k = 0
    while x / 2.0**k > SERIES_SCALED_TARGET:
        k += 1
    u = t / 2.0**k
    uB = u * f.B
    A = uB @ uB
    eye = identity(f.dim)
    C = eye.copy()
    term = eye
    n = 1
    while True:
        term = term @ A * (-1.0 / ((2 * n - 1) * (2 * n)))
        C += term
        if np.linalg.norm(term) < SERIES_TERM_TOL:
            break
        n += 1
    for _ in range(k):
        C = 2.0 * (C @ C) - eye
    return _check_cap(C, "cos(tB)")


@dataclass(frozen=True)
class ResidualReport:
    t: float
    s: float
    residual: float
    scale: float  # 1 + ||C(t)|| ||C(s)||, the natural size of the identity's terms


def _norm(X) -> float:
    if np.ndim(X) == 0:
        return abs(complex(X))
    return operator_norm(X)


def dalembert_residual(f, t: float, s: float) -> ResidualReport:
    """``||C(t+s) + C(t-s) - 2 C(t) C(s)||`` for a scalar or matrix family."""
    ct, cs = f.evaluate(t), f.evaluate(s)
    lhs = f.evaluate(t + s) + f.evaluate(t - s)
    rhs = 2.0 * (ct @ cs if np.ndim(ct) else ct * cs)
    return ResidualReport(float(t), float(s), _norm(lhs - rhs), 1.0 + _norm(ct) * _norm(cs))


def family_from_json(obj) -> ScalarCosineFamily | MatrixCosineFamily:
    """Build a family from ``{"kind": "scalar", "a": [re, im]}`` or
    ``{"kind": "matrix", "B": <matrix>, "strategy": "spectral"|"series"}``."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("family descriptor needs a 'kind' field")
    kind = obj["kind"]
    if kind == "scalar":
        return ScalarCosineFamily(parse_complex(obj.get("a", 0.0), "a"))
    if kind == "matrix":
        if "B" not in obj:
            raise ConfigError("matrix family descriptor needs a 'B' field")
        return MatrixCosineFamily(matrix_from_json(obj["B"]), obj.get("strategy", "spectral"))
    raise ConfigError(f"unknown family kind {kind!r}")


def family_to_json(f) -> dict:
    if isinstance(f, ScalarCosineFamily):
        return {"kind": "scalar", "a": [f.a.real, f.a.imag]}
    return {"kind": "matrix", "B": matrix_to_json(f.B), "strategy": f.strategy.value}


def parse_complex(value, name: str = "value") -> complex:
    """Accept ``x``, ``[re, im]`` or ``{"re": .., "im": ..}``."""
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, dict):
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        return complex(float(value))
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number or [re, im]") from None
