"""Reservoir motifs: the eigenbasis of the reservoir kernel metric.

Motifs are the right singular vectors of the operator ``A`` (equivalently the
eigenvectors of ``Q = A^T A``) with non-negligible singular value. Each is a
length-``tau`` time-series shape; a lookback block is represented by its
coordinates along them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .io import write_matrix_csv
from .numerics import sym_eig, thin_svd
from .reservoir import ReservoirSpec, metric_tensor, operator_A

DEFAULT_RANK_TOL = 1e-12


def _fix_signs(M: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Flip columns so their first entry with magnitude above ``eps`` is positive."""
    M = M.copy()
    for i in range(M.shape[1]):
        nz = np.flatnonzero(np.abs(M[:, i]) > eps)
        if nz.size and M[nz[0], i] < 0:
            M[:, i] = -M[:, i]
    return M


@dataclass(frozen=True, eq=False)
class MotifBasis:
    """Orthonormal motifs (columns of ``motifs``) and their kernel eigenvalues."""

    motifs: np.ndarray
    eigenvalues: np.ndarray
    tau: int
    spec: ReservoirSpec
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def n_motifs(self) -> int:
        return self.motifs.shape[1]

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if u.shape[-1] != self.tau:
            raise ValueError(f"block length {u.shape[-1]} does not match tau={self.tau}")
        return u

    def project(self, u) -> np.ndarray:
        """Motif coordinates ``M^T u``; ``u`` may be a block or a stack of blocks."""
        return self._check(u) @ self.motifs

    def reservoir_features(self, u) -> np.ndarray:
        """Eigenvalue-scaled coordinates ``Lambda^(1/2) M^T u``."""
        return self.project(u) * np.sqrt(self.eigenvalues)

    def scaled_projection(self, u, C) -> np.ndarray:
        """Coordinates scaled per motif, ``(c_i <m_i, u>)_i``."""
        C = np.asarray(C, dtype=np.float64)
        if C.shape != (self.n_motifs,):
            raise ValueError(f"need {self.n_motifs} coefficients, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise ValueError("motif coefficients must be finite")
        return self.project(u) * C

    def to_csv(self, path) -> Path:
        """Write motifs (one per column) and an eigenvalue sidecar next to it."""
        path = Path(path)
        header = [f"motif_{i + 1}" for i in range(self.n_motifs)]
        write_matrix_csv(path, self.motifs, header=header)
        side = path.with_name(path.stem + "_eigenvalues.csv")
        with open(side, "w") as f:
            f.write("index,eigenvalue\n")
            for i, lam in enumerate(self.eigenvalues, start=1):
                f.write(f"{i},{lam:.17e}\n")
        meta = path.with_name(path.stem + "_meta.json")
        meta.write_text(
            json.dumps(
                {"reservoir": self.spec.to_dict(), "tau": self.tau,
                 "rank_tol": self.rank_tol, "n_motifs": self.n_motifs},
                indent=2, sort_keys=True,
            )
        )
        return side


def extract_motifs(spec: ReservoirSpec, tau: int, rank_tol: float = DEFAULT_RANK_TOL) -> MotifBasis:
    """Motifs from the thin SVD of ``A``: keep ``sigma_i^2 > rank_tol * sigma_1^2``."""
    svd = thin_svd(operator_A(spec, tau))
    lam = svd.s**2
    keep = lam > rank_tol * lam[0]
    M = _fix_signs(svd.V[:, keep])
    return MotifBasis(np.ascontiguousarray(M), lam[keep], tau, spec, rank_tol)


def extract_motifs_eig(spec: ReservoirSpec, tau: int, rank_tol: float = DEFAULT_RANK_TOL) -> MotifBasis:
    """Same basis via Jacobi eigendecomposition of ``Q``; slow, used for cross-checks."""
    res = sym_eig(metric_tensor(operator_A(spec, tau)))
    lam = res.eigenvalues
    keep = lam > rank_tol * lam[0]
    M = _fix_signs(res.eigenvectors[:, keep])
    return MotifBasis(np.ascontiguousarray(M), lam[keep], tau, spec, rank_tol)


def zero_crossings(x) -> int:
    """Number of sign changes along a sequence, ignoring exact zeros."""
    x = np.asarray(x, dtype=np.float64)
    s = np.sign(x[x != 0.0])
    return int(np.count_nonzero(s[1:] != s[:-1]))
