"""Simple Cycle Reservoir and its kernel objects.

The coupling matrix ``W`` is never formed: it acts as a forward cyclic shift
followed by scaling with the cycle weight, ``(W x)[i] = rho * x[i - 1]``
(indices mod N). Consequently ``W^k w = rho**k * roll(w, k)``, which lets the
operator ``A`` be filled in O(N * tau).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np


@lru_cache(maxsize=1)
def pi_digits() -> str:
    """Decimal digits of pi after the point, from the bundled table."""
    text = resources.files("rmm").joinpath("data/pi_digits.txt").read_text()
    lines = text.split()
    assert lines[0] == "3."
    return "".join(lines[1:])


def sign_pattern(n: int) -> np.ndarray:
    """Aperiodic +/-1 pattern: +1 where the i-th decimal of pi is 0-4, else -1."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"invalid reservoir size {n!r}: must be a positive integer")
    digits = pi_digits()
    if n > len(digits):
        raise ValueError(
            f"insufficient digits: size {n} exceeds the {len(digits)} bundled digits of pi"
        )
    d = np.frombuffer(digits[:n].encode("ascii"), dtype=np.uint8) - ord("0")
    return np.where(d <= 4, 1.0, -1.0)


@dataclass(frozen=True)
class ReservoirSpec:
    """Simple Cycle Reservoir: size, cycle weight and input weight."""

    N: int
    rho: float
    r_in: float
    signs: tuple = field(repr=False, compare=False, default=())

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"reservoir size must be a positive integer, got {self.N!r}")
        if not (0.0 < self.rho < 1.0):
            raise ValueError(f"cycle weight rho must lie in (0, 1), got {self.rho}")
        if not (self.r_in > 0.0 and np.isfinite(self.r_in)):
            raise ValueError(f"input weight r_in must be > 0, got {self.r_in}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "r_in", float(self.r_in))
        object.__setattr__(self, "signs", tuple(int(s) for s in sign_pattern(self.N)))

    @property
    def w(self) -> np.ndarray:
        """Input coupling vector ``r_in * sign_pattern(N)``."""
        return self.r_in * np.asarray(self.signs, dtype=np.float64)

    def apply_W(self, x: np.ndarray) -> np.ndarray:
        """``W @ x`` along the first axis."""
        return self.rho * np.roll(x, 1, axis=0)

    def to_dict(self) -> dict:
        return {"N": self.N, "rho": self.rho, "r_in": self.r_in}

    @classmethod
    def from_dict(cls, d: dict) -> "ReservoirSpec":
        return cls(int(d["N"]), float(d["rho"]), float(d["r_in"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_reservoir(N: int, rho: float, r_in: float) -> ReservoirSpec:
    return ReservoirSpec(N, rho, r_in)


def reservoir_states(spec: ReservoirSpec, inputs, x0=None) -> np.ndarray:
    """Run ``x(t) = W x(t-1) + u(t) w`` and return the ``(T, N)`` trajectory."""
    u = np.asarray(inputs, dtype=np.float64).ravel()
    if not np.all(np.isfinite(u)):
        raise ValueError("inputs must be finite")
    x = np.zeros(spec.N) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    if x.shape != (spec.N,):
        raise ValueError(f"x0 must have length {spec.N}, got shape {x.shape}")
    w = spec.w
    states = np.empty((u.size, spec.N))
    for t, ut in enumerate(u):
        x = spec.apply_W(x) + ut * w
        states[t] = x
    return states


def operator_A(spec: ReservoirSpec, tau: int) -> np.ndarray:
    """``N x tau`` matrix whose column j (1-based) is ``W^(tau-j) w``."""
    if tau < 1:
        raise ValueError(f"lookback tau must be >= 1, got {tau}")
    N = spec.N
    k = np.arange(tau - 1, -1, -1)
    rows = (np.arange(N)[:, None] - k[None, :]) % N
    with np.errstate(under="ignore"):
        powers = spec.rho ** k.astype(np.float64)
    return spec.w[rows] * powers[None, :]


def metric_tensor(A: np.ndarray) -> np.ndarray:
    """Reservoir kernel metric ``Q = A^T A`` (exactly symmetric)."""
    A = np.asarray(A, dtype=np.float64)
    Q = A.T @ A
    return 0.5 * (Q + Q.T)


def kernel(spec: ReservoirSpec, u, v) -> float:
    """Reservoir kernel by simulation: dot product of the final states."""
    xu = reservoir_states(spec, u)[-1]
    xv = reservoir_states(spec, v)[-1]
    return float(xu @ xv)
