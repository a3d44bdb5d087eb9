"""Dense linear-algebra kernels used throughout the package.

``sym_eig`` is a parallel-ordered cyclic Jacobi solver written here; ``thin_svd``
and the triangular/Cholesky pieces of ``ridge_solve`` delegate to LAPACK via
numpy/scipy. Every routine works in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs of a symmetric matrix, eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray
    rank: int


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


def _off_norm(A: np.ndarray) -> float:
    # direct sum over off-diagonal entries; ||A||^2 - ||diag||^2 cancels
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint (p, q) pairings covering every pair once per sweep (m even)."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eig(S, tol: float = 1e-12, max_sweeps: int = 100) -> EigenResult:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the n/2 rotations of a round touch disjoint rows and can be applied
    together. Iteration stops once the off-diagonal Frobenius norm drops
    below ``tol * ||S||_F``.

    Eigenvalues in ``[-1e-10 * lambda_1, 0)`` are clamped to zero.
    """
    S = np.array(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    _check_finite(S, "S")
    n = S.shape[0]
    scale = np.max(np.abs(S)) if S.size else 0.0
    if n and np.max(np.abs(S - S.T)) > 1e-12 * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    S = 0.5 * (S + S.T)

    m = n + (n % 2)
    A = np.zeros((m, m))
    A[:n, :n] = S
    V = np.eye(m)
    fro = np.linalg.norm(S)
    rounds = _round_robin(m) if m >= 2 else []

    sweeps = 0
    while sweeps < max_sweeps:
        off = _off_norm(A)
        if off <= tol * fro or fro == 0.0:
            break
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            zeta = (A[q, q] - A[p, p]) / (2.0 * apq)
            big = np.abs(zeta) > 1e150
            zs = np.where(big, 1.0, zeta)
            t = np.sign(zs) / (np.abs(zs) + np.sqrt(1.0 + zs * zs))
            with np.errstate(divide="ignore"):
                t = np.where(big, 0.5 / zeta, t)
            t[zeta == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            A[p, q] = 0.0
            A[q, p] = 0.0

            vp, vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = vp * c - vq * s
            V[:, q] = vp * s + vq * c
        sweeps += 1
    else:
        off = _off_norm(A)
        if off > tol * fro:
            raise np.linalg.LinAlgError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps"
            )

    lam = np.diag(A)[:n].copy()
    vecs = V[:n, :n]
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]
    if n:
        clamp = (lam < 0.0) & (lam >= -1e-10 * max(lam[0], 0.0))
        lam[clamp] = 0.0
    return EigenResult(lam, np.ascontiguousarray(vecs), sweeps)


def thin_svd(A, rtol: float | None = None) -> SvdResult:
    """Economy SVD ``A = U diag(s) V^T`` with descending singular values.

    ``rank`` counts singular values above ``rtol * s[0]`` (default
    ``max(A.shape) * eps``).
    """
    A = np.asarray(A, dtype=np.float64)
    _check_finite(A, "A")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if rtol is None:
        rtol = max(A.shape) * np.finfo(np.float64).eps
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return SvdResult(U, s, Vt.T, rank)


def ridge_solve(X, Y, lam: float, full_output: bool = False):
    """Solve ``min_B ||X B - Y||^2 + lam ||B||^2``.

    For ``lam > 0`` the normal equations are solved by Cholesky, falling back
    to an SVD solve if the factorization fails. ``lam == 0`` always goes
    through the SVD and yields the minimal-norm least-squares solution.

    With ``full_output=True`` returns ``(B, info)`` where ``info`` holds the
    method used, the numerical rank of ``X`` (SVD path only) and a
    ``minimal_norm`` flag set when ``X`` was rank deficient at ``lam == 0``.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    vector_rhs = Y.ndim == 1
    if vector_rhs:
        Y = Y[:, None]
    if X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, Y {Y.shape}")
    if X.shape[0] < 1:
        raise ValueError("need at least one row")
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"ridge coefficient must be finite and >= 0, got {lam}")
    _check_finite(X, "X")
    _check_finite(Y, "Y")

    p = X.shape[1]
    info = {"method": "cholesky", "rank": None, "minimal_norm": False}
    B = None
    if lam > 0:
        G = X.T @ X
        G[np.diag_indices(p)] += lam
        try:
            cf = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
            B = scipy.linalg.cho_solve(cf, X.T @ Y, check_finite=False)
        except np.linalg.LinAlgError:
            B = None
    if B is None:
        svd = thin_svd(X)
        s = svd.s
        if lam > 0:
            filt = s / (s * s + lam)
            info["method"] = "svd"
        else:
            keep = np.zeros_like(s, dtype=bool)
            keep[: svd.rank] = True
            filt = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
            info["method"] = "svd-pinv"
            info["minimal_norm"] = svd.rank < p
        info["rank"] = svd.rank
        B = svd.V @ (filt[:, None] * (svd.U.T @ Y))
    if vector_rhs:
        B = B[:, 0]
    return (B, info) if full_output else B


def ridge_from_gram(G, XtY, lam: float) -> np.ndarray:
    """Ridge coefficients from accumulated ``G = X^T X`` and ``X^T Y``.

    Cholesky on ``G + lam I``; if that fails (indefinite through rounding)
    an eigenvalue-filtered solve is used instead.
    """
    G = np.array(G, dtype=np.float64)
    G = 0.5 * (G + G.T)
    G[np.diag_indices_from(G)] += lam
    XtY = np.asarray(XtY, dtype=np.float64)
    try:
        cf = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
        return scipy.linalg.cho_solve(cf, XtY, check_finite=False)
    except np.linalg.LinAlgError:
        d, V = np.linalg.eigh(G)
        keep = d > max(d[-1], 0.0) * G.shape[0] * np.finfo(np.float64).eps
        inv = np.where(keep, 1.0 / np.where(keep, d, 1.0), 0.0)
        return V @ (inv[:, None] * (V.T @ XtY))
