"""Brownian and fractional Brownian path sampling on uniform time grids.

Fractional paths are generated by circulant embedding of the stationary
increment covariance (Davies-Harte): exact in law at the grid points and
O(n log n), so fine micro-stepping grids (n up to 2**20) stay cheap.  A
dense Cholesky factorization of the path covariance is retained as a
slow cross-validation method for grids up to ``CHOLESKY_MAX_STEPS``.

Seeding: every component of a multi-dimensional path draws from its own
child stream of ``numpy.random.SeedSequence(seed)``, so output is
reproducible regardless of how many components exist or how replicates
are scheduled across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

__all__ = [
    "CHOLESKY_MAX_STEPS",
    "BmPath",
    "EmbeddingError",
    "FbmPath",
    "TimeGrid",
    "covariance_rh",
    "sample_bm",
    "sample_fbm",
]

CHOLESKY_MAX_STEPS = 4096

# Embedding eigenvalues are nonnegative in exact arithmetic for fGn with
# H >= 1/2; anything below -_EIG_CLIP_REL * max(eig) is not roundoff.
_EIG_CLIP_REL = 1e-12


class EmbeddingError(RuntimeError):
    """Circulant embedding produced a materially negative eigenvalue."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, horizon] into n_steps cells."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        if int(self.n_steps) < 1 or int(self.n_steps) != self.n_steps:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self) -> float:
        return self.horizon / self.n_steps

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.linspace(0.0, self.horizon, self.n_steps + 1)
        pts.flags.writeable = False
        return pts


def _check_hurst(hurst: float, *, sampling: bool = True) -> float:
    h = float(hurst)
    if sampling:
        if not (0.5 <= h < 1.0):
            raise ValueError(
                f"Hurst parameter must lie in [0.5, 1); got {h}. "
                "H = 0.5 is the degenerate Brownian mode, H < 0.5 is unsupported."
            )
    elif not (0.0 < h < 1.0):
        raise ValueError(f"Hurst parameter must lie in (0, 1); got {h}")
    return h


def covariance_rh(s, t, hurst: float):
    """Covariance of fBm, R_H(s, t) = (s^2H + t^2H - |t-s|^2H) / 2.

    Accepts scalars or arrays (broadcasting); times must be nonnegative.
    """
    h = _check_hurst(hurst, sampling=False)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("covariance_rh requires nonnegative times")
    two_h = 2.0 * h
    out = 0.5 * (s ** two_h + t ** two_h - np.abs(t - s) ** two_h)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BmPath:
    """Sampled standard Brownian motion, one column per component."""

    grid: TimeGrid
    dim: int
    values: np.ndarray  # (n_steps + 1, dim), values[0] == 0
    seed: int
    label: str = ""

    def __post_init__(self):
        _check_path_values(self.values, self.grid, self.dim)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    @property
    def fingerprint(self) -> str:
        return (
            f"bm:seed={self.seed}:n={self.grid.n_steps}:T={self.grid.horizon!r}"
            f":dim={self.dim}{':' + self.label if self.label else ''}"
        )

    def coarsen(self, factor: int) -> "BmPath":
        """Restriction to every factor-th grid point (exact for Bm)."""
        values, grid = _coarsen_values(self.values, self.grid, factor)
        return replace(
            self, grid=grid, values=values, label=_coarse_label(self.label, factor)
        )


@dataclass(frozen=True, eq=False)
class FbmPath:
    """Sampled fractional Brownian motion with independent components."""

    grid: TimeGrid
    hurst: float
    dim: int
    values: np.ndarray
    seed: int
    method: str = "circulant-embedding"
    label: str = ""

    def __post_init__(self):
        _check_path_values(self.values, self.grid, self.dim)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    @property
    def fingerprint(self) -> str:
        return (
            f"fbm:seed={self.seed}:n={self.grid.n_steps}:T={self.grid.horizon!r}"
            f":dim={self.dim}:H={self.hurst!r}:m={self.method}"
            f"{':' + self.label if self.label else ''}"
        )

    def coarsen(self, factor: int) -> "FbmPath":
        """Restriction to every factor-th grid point (exact for fBm)."""
        values, grid = _coarsen_values(self.values, self.grid, factor)
        return replace(
            self, grid=grid, values=values, label=_coarse_label(self.label, factor)
        )


def _check_path_values(values: np.ndarray, grid: TimeGrid, dim: int) -> None:
    if values.shape != (grid.n_steps + 1, dim):
        raise ValueError(
            f"path values have shape {values.shape}, expected {(grid.n_steps + 1, dim)}"
        )
    if np.any(values[0] != 0.0):
        raise ValueError("paths must start at zero")


def _coarsen_values(values, grid, factor):
    factor = int(factor)
    if factor < 1 or grid.n_steps % factor != 0:
        raise ValueError(f"coarsening factor {factor} does not divide {grid.n_steps}")
    return values[::factor].copy(), TimeGrid(grid.horizon, grid.n_steps // factor)


def _coarse_label(label: str, factor: int) -> str:
    return f"{label}|coarse{factor}" if label else f"coarse{factor}"


def sample_bm(grid: TimeGrid, dim: int, seed: int) -> BmPath:
    """Sample standard Brownian motion; increments ~ N(0, h) per component."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    children = np.random.SeedSequence(seed).spawn(dim)
    values = np.zeros((grid.n_steps + 1, dim))
    scale = np.sqrt(grid.h)
    for c, child in enumerate(children):
        rng = np.random.default_rng(child)
        values[1:, c] = np.cumsum(scale * rng.standard_normal(grid.n_steps))
    return BmPath(grid=grid, dim=dim, values=values, seed=int(seed))


def _fgn_autocovariance(n: int, hurst: float) -> np.ndarray:
    """Autocovariance gamma(k), k = 0..n, of unit-spacing fGn."""
    k = np.arange(n + 1, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * ((k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)


def _embedding_eigenvalues(n: int, hurst: float) -> np.ndarray:
    gamma = _fgn_autocovariance(n, hurst)
    row = np.concatenate([gamma[:n], [gamma[n]], gamma[n - 1:0:-1]])  # length 2n
    lam = np.fft.fft(row).real
    floor = lam.min()
    if floor < -_EIG_CLIP_REL * max(lam.max(), 1.0):
        raise EmbeddingError(
            f"circulant embedding not nonnegative-definite: min eigenvalue {floor:.3e}"
        )
    return np.clip(lam, 0.0, None)


def _fgn_from_eigenvalues(lam: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """One exact unit-spacing fGn draw of length n given embedding eigenvalues."""
    m = 2 * n
    z_re = rng.standard_normal(n + 1)
    z_im = rng.standard_normal(max(n - 1, 0))
    v = np.empty(m, dtype=complex)
    v[0] = np.sqrt(lam[0] / m) * z_re[0]
    v[n] = np.sqrt(lam[n] / m) * z_re[n]
    if n > 1:
        half = np.sqrt(lam[1:n] / (2.0 * m))
        v[1:n] = half * (z_re[1:n] + 1j * z_im)
        v[n + 1:] = np.conj(v[1:n][::-1])
    return np.fft.fft(v).real[:n]


def _fbm_column_cholesky(grid: TimeGrid, hurst: float, rng: np.random.Generator) -> np.ndarray:
    n = grid.n_steps
    if n > CHOLESKY_MAX_STEPS:
        raise ValueError(
            f"cholesky method limited to {CHOLESKY_MAX_STEPS} steps, got {n}"
        )
    t = grid.points[1:]
    cov = covariance_rh(t[:, None], t[None, :], hurst)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - PD in theory
        raise np.linalg.LinAlgError(
            f"fBm covariance not positive definite at n={n}, H={hurst}: {exc}"
        ) from exc
    return chol @ rng.standard_normal(n)


def sample_fbm(
    grid: TimeGrid,
    hurst: float,
    dim: int,
    seed: int,
    method: str = "circulant-embedding",
) -> FbmPath:
    """Sample fBm with the exact finite-dimensional law R_H at grid points.

    ``method`` is "circulant-embedding" (default) or "cholesky".  If the
    embedding ever fails its nonnegativity check the sampler reports it
    and falls back to cholesky.
    """
    h = _check_hurst(hurst)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if method not in ("circulant-embedding", "cholesky"):
        raise ValueError(f"unknown method {method!r}")

    n = grid.n_steps
    effective = method
    lam = None
    if method == "circulant-embedding":
        try:
            lam = _embedding_eigenvalues(n, h)
        except EmbeddingError as exc:
            warnings.warn(f"{exc}; falling back to cholesky", RuntimeWarning)
            effective = "cholesky"

    children = np.random.SeedSequence(seed).spawn(dim)
    values = np.zeros((n + 1, dim))
    increment_scale = grid.h ** h
    for c, child in enumerate(children):
        rng = np.random.default_rng(child)
        if effective == "circulant-embedding":
            fgn = increment_scale * _fgn_from_eigenvalues(lam, n, rng)
            values[1:, c] = np.cumsum(fgn)
        else:
            values[1:, c] = _fbm_column_cholesky(grid, h, rng)
    return FbmPath(
        grid=grid, hurst=h, dim=dim, values=values, seed=int(seed), method=effective
    )
