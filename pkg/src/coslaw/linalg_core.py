"""Dense complex matrix kernels: validation, 2-norm, spectral radius, normal eigendecomposition.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and shape ``(n, n)``
with ``1 <= n <= 256``. Nothing here mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from coslaw import config
from coslaw.errors import InvalidMatrix, NoConvergence, NotNormal

MAX_DIM = 256

# Irrational weights for the combination H + w*K used to split a normal matrix.
_SPLIT_WEIGHTS = (0.7548776662466927, 0.5698402909980532, 1.324717957244746)


def as_matrix(M, name: str = "M") -> np.ndarray:
    """Validate and convert ``M`` to a square complex128 array.

    Scalars become 1x1 matrices.
    """
    try:
        A = np.asarray(M, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"{name}: not a numeric array ({exc})") from None
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidMatrix(f"{name}: expected a non-empty square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIM:
        raise InvalidMatrix(f"{name}: dimension {A.shape[0]} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise InvalidMatrix(f"{name}: non-finite entries")
    return A


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def is_diagonal(A: np.ndarray) -> bool:
    return not np.any(A - np.diag(np.diag(A)))


def matrix_to_json(M) -> dict:
    A = as_matrix(M)
    flat = A.ravel()
    return {"dim": int(A.shape[0]), "re": flat.real.tolist(), "im": flat.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim": n, "re": [...], "im": [...]}`` (row-major); ``im`` may be omitted."""
    if not isinstance(obj, dict) or "dim" not in obj or "re" not in obj:
        raise InvalidMatrix("matrix literal needs 'dim' and 're' fields")
    n = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(n * n)), dtype=float)
    if n < 1 or re.size != n * n or im.size != n * n:
        raise InvalidMatrix(f"matrix literal: expected {n}*{n} entries")
    return as_matrix((re + 1j * im).reshape(n, n))


def operator_norm(M, seed: int | None = None) -> float:
    """Induced 2-norm (largest singular value) of ``M``.

    Power iteration on ``M* M``, accelerated by repeated squaring of the
    normalized Gram matrix so that near-degenerate top singular values do not
    stall convergence. The estimate is the largest Rayleigh quotient over a
    few seeded starting vectors.
    """
    A = as_matrix(M)
    if is_diagonal(A):
        return float(np.max(np.abs(np.diag(A))))
    return float(operator_norms(A[None], seed)[0])


def operator_norms(stack, seed: int | None = None) -> np.ndarray:
    """:func:`operator_norm` over a stack of shape ``(m, n, n)``, vectorized across the stack."""
    S = np.asarray(stack, dtype=np.complex128)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise InvalidMatrix(f"expected a stack of square matrices, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidMatrix("non-finite entries")
    m, n, _ = S.shape
    out = np.zeros(m)
    diag = np.einsum("kii->ki", S)
    offdiag = S.copy()
    offdiag[:, np.arange(n), np.arange(n)] = 0.0
    is_diag = ~np.any(offdiag, axis=(1, 2))
    if np.any(is_diag):
        out[is_diag] = np.max(np.abs(diag[is_diag]), axis=1)
    rest = np.flatnonzero(~is_diag)
    if rest.size == 0:
        return out

    H = np.conj(np.swapaxes(S[rest], 1, 2)) @ S[rest]
    scale = np.linalg.norm(H, axis=(1, 2))
    rng = np.random.default_rng(config.get_seed() if seed is None else seed)
    r = min(n, 3)
    X0 = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    P = H / scale[:, None, None]
    best = np.zeros(rest.size)
    prev = np.full(rest.size, -1.0)
    active = np.arange(rest.size)
    for it in range(64):
        Y = P[active] @ X0
        HY = H[active] @ Y
        num = np.einsum("kij,kij->kj", Y.conj(), HY).real
        den = np.einsum("kij,kij->kj", Y.conj(), Y).real
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(den > 0, num / den, 0.0)
        best[active] = np.maximum(best[active], np.max(q, axis=1))
        done = (np.abs(best[active] - prev[active]) <= 1e-15 * best[active]) if it >= 2 else np.zeros(active.size, bool)
        prev[active] = best[active]
        active = active[~done]
        if active.size == 0:
            break
        Q = P[active] @ P[active]
        fro = np.linalg.norm(Q, axis=(1, 2))
        keep = (fro > 0) & np.isfinite(fro)
        P[active[keep]] = Q[keep] / fro[keep, None, None]
        active = active[keep]
        if active.size == 0:
            break
    out[rest] = np.sqrt(best)
    return out


def _gelfand(A: np.ndarray, tol: float = 1e-8, max_log2_power: int = 16):
    """Return ``(rho, power, converged)`` from the norm ratios of ``A^(2^j)``.

    Powers are renormalized after every squaring and their log-norms tracked
    separately, so nothing overflows.
    """
    fro = np.linalg.norm(A)
    if fro == 0.0:
        return 0.0, 1, True
    P = A / fro
    log_scale = math.log(fro)
    nrm = operator_norm(P)
    log_norm = log_scale + math.log(nrm)
    est_prev = None
    k = 1
    for _ in range(max_log2_power):
        Q = P @ P
        fro = np.linalg.norm(Q)
        if fro == 0.0:
            return 0.0, 2 * k, True
        log_scale = 2.0 * log_scale + math.log(fro)
        P = Q / fro
        nrm = operator_norm(P)
        if nrm == 0.0:
            return 0.0, 2 * k, True
        log_norm_next = log_scale + math.log(nrm)
        # ||A^{2k}|| / ||A^k|| behaves like rho^k for large k
        est = math.exp((log_norm_next - log_norm) / k)
        if est_prev is not None and abs(est - est_prev) <= tol * est:
            return est, 2 * k, True
        est_prev = est
        log_norm = log_norm_next
        k *= 2
    return est_prev, k, False


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus via the Gelfand formula on powers of two."""
    rho, _, _ = _gelfand(as_matrix(M))
    return rho


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.vectors
        return (V * self.values) @ V.conj().T


def _round_robin(n: int):
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi_hermitian(A: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """Unitary V with V* A V diagonal, by parallel-ordered cyclic Jacobi rotations."""
    A = A.astype(np.complex128, copy=True)
    n = A.shape[0]
    V = identity(n)
    if n == 1:
        return V
    rounds = _round_robin(n)
    norm_a = np.linalg.norm(A)
    if norm_a == 0.0:
        return V
    threshold = 4.0 * n * np.finfo(float).eps * norm_a
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= threshold:
            return V
        for p, q in rounds:
            apq = A[p, q]
            absc = np.abs(apq)
            active = absc > 0.0
            if not np.any(active):
                continue
            phase = np.where(active, apq / np.where(active, absc, 1.0), 1.0)
            app = A[p, p].real
            aqq = A[q, q].real
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = (aqq - app) / (2.0 * np.where(active, absc, 1.0))
                t = np.where(
                    np.abs(theta) > 1e150,
                    0.5 / theta,
                    np.sign(theta + (theta == 0)) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
                )
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ph = phase.conj()
            gpp, gpq, gqp, gqq = c, s, -s * ph, c * ph

            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * gpp + Aq * gqp
            A[:, q] = Ap * gpq + Aq * gqq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = np.conj(gpp)[:, None] * Ap + np.conj(gqp)[:, None] * Aq
            A[q, :] = np.conj(gpq)[:, None] * Ap + np.conj(gqq)[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * gpp + Vq * gqp
            V[:, q] = Vp * gpq + Vq * gqq
    raise NoConvergence(f"Jacobi sweeps did not converge within {max_sweeps} sweeps")


def is_normal(A: np.ndarray, rtol: float = 1e-10) -> bool:
    comm = A @ A.conj().T - A.conj().T @ A
    return np.linalg.norm(comm) <= rtol * operator_norm(A) ** 2


def eig_normal(M, max_sweeps: int = 60) -> EigenDecomposition:
    """Unitary eigendecomposition of a normal matrix.

    The commuting Hermitian parts ``H = (M + M*)/2`` and ``K = (M - M*)/2i``
    are diagonalized simultaneously by Jacobi rotations on ``H + w K`` for an
    irrational weight ``w``; eigenvalues are read off ``V* M V``.
    """
    A = as_matrix(M)
    n = A.shape[0]
    if not is_normal(A):
        raise NotNormal("eig_normal requires a normal matrix")
    if is_diagonal(A):
        return EigenDecomposition(np.diag(A).copy(), identity(n))
    H = 0.5 * (A + A.conj().T)
    K = -0.5j * (A - A.conj().T)
    hermitian = not np.any(K)
    tol = 1e-10 * max(1.0, operator_norm(A))
    for w in _SPLIT_WEIGHTS:
        V = _jacobi_hermitian(H + w * K, max_sweeps=max_sweeps)
        D = V.conj().T @ A @ V
        values = np.diag(D).copy()
        if hermitian:
            values = values.real.astype(np.complex128)
        dec = EigenDecomposition(values, V)
        if np.linalg.norm(dec.reconstruct() - A) <= tol:
            return dec
    raise NoConvergence("normal eigendecomposition failed the reconstruction check")
