"""States of the truncated cluster hierarchy.

A state is a finite nonnegative vector ``f = (f_1, ..., f_n)`` of cluster
number densities, the size-``n`` stand-in for an infinite summable sequence.
This module holds the state / weight-sequence / initial-condition data types
and the moment functionals built on them (plain moments, tail masses, and
moments against a dominating bound sequence).

Scalar reductions here use exact compensated summation (``math.fsum``) so
that identity residuals measured downstream are not polluted by naive
accumulation error at large ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ClusterState",
    "WeightSequence",
    "InitialCondition",
    "Monodisperse",
    "Geometric",
    "PowerLaw",
    "CustomIC",
    "weighted_moment",
    "moment",
    "tail_mass",
    "bound_moment",
]


def _as_density_vector(values: Sequence[float] | np.ndarray) -> np.ndarray:
    f = np.array(values, dtype=np.float64, copy=True)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("state vector must be a nonempty 1-d array")
    if not np.all(np.isfinite(f)):
        raise ValueError("state vector contains nonfinite entries")
    if np.any(f < 0.0):
        i = int(np.argmin(f))
        raise ValueError(f"state entry f_{i + 1} = {f[i]} is negative")
    return f


@dataclass(frozen=True)
class ClusterState:
    """Nonnegative density vector ``(f_1, ..., f_n)``, indexed from 1."""

    f: np.ndarray

    def __post_init__(self):
        arr = _as_density_vector(self.f)
        arr.flags.writeable = False
        object.__setattr__(self, "f", arr)

    @property
    def n(self) -> int:
        return self.f.shape[0]

    def entry(self, i: int) -> float:
        """Density of clusters with ``i`` active sites (1-based)."""
        if not 1 <= i <= self.n:
            raise IndexError(f"index {i} outside [1, {self.n}]")
        return float(self.f[i - 1])


class WeightSequence:
    """Real weight sequence ``theta_1, theta_2, ...`` given as a vector or closure.

    Monotonicity / nonnegativity flags are declarations; `check_flags`
    verifies them on the evaluated range on demand.
    """

    def __init__(
        self,
        source: Callable[[np.ndarray], np.ndarray] | Sequence[float] | np.ndarray,
        *,
        nonnegative: bool = False,
        nondecreasing: bool = False,
        name: str = "theta",
    ):
        self._fn: Callable[[np.ndarray], np.ndarray] | None
        self._vec: np.ndarray | None
        if callable(source):
            self._fn = source
            self._vec = None
        else:
            self._fn = None
            vec = np.asarray(source, dtype=np.float64)
            if vec.ndim != 1:
                raise ValueError("weight vector must be 1-d")
            self._vec = vec
        self.nonnegative = nonnegative
        self.nondecreasing = nondecreasing
        self.name = name
        self._cache: dict[int, np.ndarray] = {}

    def values(self, n: int) -> np.ndarray:
        """Weights ``theta_1 .. theta_n`` as a read-only float64 array."""
        if n < 1:
            raise ValueError("n must be >= 1")
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        if self._vec is not None:
            if self._vec.size < n:
                raise ValueError(
                    f"weight vector of length {self._vec.size} cannot cover n={n}"
                )
            out = self._vec[:n].copy()
        else:
            idx = np.arange(1, n + 1, dtype=np.float64)
            out = np.asarray(self._fn(idx), dtype=np.float64)
            if out.shape != idx.shape:
                raise ValueError("weight closure must map indices elementwise")
        out.flags.writeable = False
        self._cache[n] = out
        return out

    def check_flags(self, n: int) -> None:
        """Raise if a declared flag is violated on ``[1, n]``."""
        w = self.values(n)
        if self.nonnegative and np.any(w < 0.0):
            raise ValueError(f"weights '{self.name}' declared nonnegative but are not")
        if self.nondecreasing and np.any(np.diff(w) < 0.0):
            raise ValueError(f"weights '{self.name}' declared nondecreasing but are not")

    @classmethod
    def indices(cls, name: str = "mass") -> "WeightSequence":
        """theta_i = i, the first-moment weight."""
        return cls(lambda i: i, nonnegative=True, nondecreasing=True, name=name)

    @classmethod
    def ones(cls, name: str = "count") -> "WeightSequence":
        return cls(lambda i: np.ones_like(i), nonnegative=True, nondecreasing=True, name=name)

    @classmethod
    def tail_indices(cls, m: int) -> "WeightSequence":
        """theta_i = 0 for i < m and theta_i = i for i >= m."""
        if m < 1:
            raise ValueError("m must be >= 1")
        return cls(
            lambda i, m=m: np.where(i >= m, i, 0.0),
            nonnegative=True,
            nondecreasing=True,
            name=f"tail_mass_m{m}",
        )

    def __repr__(self) -> str:
        kind = "vector" if self._vec is not None else "closure"
        return f"WeightSequence({self.name!r}, {kind})"


def weighted_moment(state: ClusterState, theta: WeightSequence) -> float:
    """Sum of ``theta_j * f_j`` over ``1 <= j <= n``, exactly accumulated."""
    w = theta.values(state.n)
    return math.fsum(w * state.f)


def moment(state: ClusterState, m: float) -> float:
    """m-th moment ``sum_i i^m f_i``; ``m=0`` counts clusters, ``m=1`` is the mass."""
    if m == 0.0:
        return math.fsum(state.f)
    idx = np.arange(1, state.n + 1, dtype=np.float64)
    if m == 1.0:
        return math.fsum(idx * state.f)
    return math.fsum(idx**m * state.f)


def tail_mass(state: ClusterState, m: int) -> float:
    """Tail first moment ``sum_{j=m}^n j f_j``; empty tail (m > n) gives 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > state.n:
        return 0.0
    idx = np.arange(m, state.n + 1, dtype=np.float64)
    return math.fsum(idx * state.f[m - 1 :])


def bound_moment(state: ClusterState, bound: "np.ndarray | Sequence[float]", power: int = 1) -> float:
    """Moment of ``f`` against a bound sequence: ``sum_i A_i^power f_i``."""
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    a = np.asarray(bound, dtype=np.float64)
    if a.size < state.n:
        raise ValueError(f"bound sequence of length {a.size} cannot cover n={state.n}")
    a = a[: state.n]
    if power == 2:
        a = a * a
    return math.fsum(a * state.f)


class InitialCondition:
    """Family of initial data realizable at any truncation size ``n``.

    Realization truncates without renormalizing; `discarded_tail_mass`
    reports the first-moment mass ``sum_{i>n} i f_i`` dropped by the cut, so
    studies can quantify the truncation bias of a finite run.
    """

    family = "custom"

    def density(self, i: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def realize(self, n: int) -> ClusterState:
        if n < 1:
            raise ValueError("n must be >= 1")
        idx = np.arange(1, n + 1, dtype=np.float64)
        return ClusterState(self.density(idx))

    def discarded_tail_mass(self, n: int) -> float:
        """Mass ``sum_{i>n} i f_i`` beyond the truncation (default: numeric)."""
        # Generic fallback: accumulate until terms are negligible.
        total = 0.0
        block = 4096
        start = n + 1
        for _ in range(10_000):
            idx = np.arange(start, start + block, dtype=np.float64)
            terms = idx * self.density(idx)
            total += float(np.sum(terms))
            if terms[-1] <= 1e-18 * max(total, 1.0) or np.all(terms == 0.0):
                return total
            start += block
        raise RuntimeError("tail mass did not converge numerically")

    def describe(self) -> dict:
        return {"family": self.family}


@dataclass(frozen=True)
class Monodisperse(InitialCondition):
    """All clusters start with one active site: ``f_1 = c``, rest zero."""

    c: float
    family = "monodisperse"

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("ic.c must be >= 0")

    def density(self, i: np.ndarray) -> np.ndarray:
        return np.where(i == 1, self.c, 0.0)

    def discarded_tail_mass(self, n: int) -> float:
        return 0.0 if n >= 1 else self.c

    def describe(self) -> dict:
        return {"family": self.family, "c": self.c}


@dataclass(frozen=True)
class Geometric(InitialCondition):
    """Geometric profile ``f_i = c * q^i`` with ``0 < q < 1``."""

    c: float
    q: float
    family = "geometric"

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("ic.c must be >= 0")
        if not 0.0 < self.q < 1.0:
            raise ValueError("ic.q must satisfy 0 < q < 1")

    def density(self, i: np.ndarray) -> np.ndarray:
        return self.c * self.q**i

    def discarded_tail_mass(self, n: int) -> float:
        # sum_{i>n} i q^i = q^(n+1) ((n+1) - n q) / (1-q)^2, exact.
        q = self.q
        return self.c * q ** (n + 1) * ((n + 1) - n * q) / (1.0 - q) ** 2

    def describe(self) -> dict:
        return {"family": self.family, "c": self.c, "q": self.q}


@dataclass(frozen=True)
class PowerLaw(InitialCondition):
    """Algebraic profile ``f_i = c * i^(-p)`` cut off above ``cutoff``."""

    c: float
    p: float
    cutoff: int
    family = "powerlaw"

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("ic.c must be >= 0")
        if self.cutoff < 1:
            raise ValueError("ic.cutoff must be >= 1")

    def density(self, i: np.ndarray) -> np.ndarray:
        return np.where(i <= self.cutoff, self.c * i ** (-self.p), 0.0)

    def discarded_tail_mass(self, n: int) -> float:
        if n >= self.cutoff:
            return 0.0
        idx = np.arange(n + 1, self.cutoff + 1, dtype=np.float64)
        return math.fsum(self.c * idx ** (1.0 - self.p))

    def describe(self) -> dict:
        return {"family": self.family, "c": self.c, "p": self.p, "cutoff": self.cutoff}


class CustomIC(InitialCondition):
    """Explicit vector of densities; zero beyond its length."""

    family = "custom"

    def __init__(self, values: Sequence[float] | np.ndarray):
        self._vec = _as_density_vector(values)

    def density(self, i: np.ndarray) -> np.ndarray:
        ii = np.asarray(i, dtype=np.int64)
        out = np.zeros(ii.shape, dtype=np.float64)
        mask = ii <= self._vec.size
        out[mask] = self._vec[ii[mask] - 1]
        return out

    def discarded_tail_mass(self, n: int) -> float:
        if n >= self._vec.size:
            return 0.0
        idx = np.arange(n + 1, self._vec.size + 1, dtype=np.float64)
        return math.fsum(idx * self._vec[n:])

    def describe(self) -> dict:
        return {"family": self.family, "length": int(self._vec.size)}
