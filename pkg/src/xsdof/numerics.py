"""Shared numerical kernels.

Seeded complex Gaussian sampling, numeric rank via SVD, Hermitian log-det
capacity terms, and the tolerance configuration used across the package.

All randomness goes through numpy's PCG64 ``Generator``.  Seeds are plain
integers (or tuples of integers for derived streams), so every sampled
object is reproducible bit-for-bit across platforms.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NonFiniteInputError",
    "ToleranceConfig",
    "DEFAULT_TOLERANCES",
    "rng_from_seed",
    "spawn_seeds",
    "complex_gaussian",
    "numeric_rank",
    "rank_cutoff",
    "logdet_capacity",
    "least_squares",
]

ENV_RANK_REL_TOL = "XSDOF_RANK_REL_TOL"
ENV_SLOPE_TOL = "XSDOF_SLOPE_TOL"
ENV_LEAKAGE_SLOPE_TOL = "XSDOF_LEAKAGE_SLOPE_TOL"


class NonFiniteInputError(ValueError):
    """A kernel received NaN or infinite entries."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances shared by rank certification and slope checks.

    rank_rel_tol
        Singular values below ``rank_rel_tol * sigma_max * max(rows, cols)``
        count as zero.
    slope_tol
        Allowed deviation of the MSE-vs-SNR log-log slope from -1.
    leakage_slope_tol
        Allowed residual leakage growth per log2-SNR unit once the leakage
        has saturated.
    """

    rank_rel_tol: float = 1e-9
    slope_tol: float = 0.1
    leakage_slope_tol: float = 0.05

    def __post_init__(self):
        for name in ("rank_rel_tol", "slope_tol", "leakage_slope_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_env(cls, env=None) -> "ToleranceConfig":
        """Build a config from environment overrides, falling back to defaults.

        Recognized variables: ``XSDOF_RANK_REL_TOL``, ``XSDOF_SLOPE_TOL``,
        ``XSDOF_LEAKAGE_SLOPE_TOL``.
        """
        env = os.environ if env is None else env
        kwargs = {}
        for key, name in (
            (ENV_RANK_REL_TOL, "rank_rel_tol"),
            (ENV_SLOPE_TOL, "slope_tol"),
            (ENV_LEAKAGE_SLOPE_TOL, "leakage_slope_tol"),
        ):
            raw = env.get(key)
            if raw is not None:
                kwargs[name] = float(raw)
        return cls(**kwargs)


DEFAULT_TOLERANCES = ToleranceConfig()


def rng_from_seed(seed) -> np.random.Generator:
    """PCG64 generator from an integer seed or a tuple of integers."""
    return np.random.default_rng(seed)


def spawn_seeds(entropy, count: int) -> list[int]:
    """Derive ``count`` independent child seeds from a master seed.

    The rule is fixed and documented: child seed ``i`` is the ``i``-th
    64-bit word of the ``numpy.random.SeedSequence(entropy)`` output
    stream.  ``entropy`` may be an int or a sequence of ints (used to bind
    seeds to a context such as a sweep row or an SNR point).
    """
    ss = np.random.SeedSequence(entropy)
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian array."""
    if np.isscalar(shape):
        shape = (int(shape),)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def _require_finite(a: np.ndarray):
    if a.size and not np.all(np.isfinite(a)):
        raise NonFiniteInputError("matrix contains NaN or infinite entries")


def rank_cutoff(singular_values: np.ndarray, shape, tol_cfg: ToleranceConfig | None = None) -> float:
    """Threshold below which singular values count as zero."""
    tol = tol_cfg or DEFAULT_TOLERANCES
    if len(singular_values) == 0:
        return 0.0
    return tol.rank_rel_tol * float(singular_values[0]) * max(shape)


def numeric_rank(matrix, tol_cfg: ToleranceConfig | None = None) -> int:
    """Numeric rank: singular values above the relative cutoff.

    Empty matrices have rank 0.  Uses a full SVD; all matrices in this
    package are desk scale (at most a few hundred rows).
    """
    a = np.asarray(matrix)
    if a.size == 0:
        return 0
    _require_finite(a)
    s = np.linalg.svd(a, compute_uv=False)
    cutoff = rank_cutoff(s, a.shape, tol_cfg)
    return int(np.count_nonzero(s > cutoff))


def logdet_capacity(matrix, snr: float, tol_cfg: ToleranceConfig | None = None) -> float:
    """log2 det(I + snr * G G*) in bits.

    Evaluated through the eigenvalues of the Gram matrix on the smaller
    side (the two choices agree by Sylvester's determinant identity).
    Eigenvalues below the squared rank cutoff are treated as exact zeros,
    so the high-SNR growth rate equals ``numeric_rank(matrix)`` instead of
    being polluted by rounding noise.  Stable for snr up to ~1e10 at desk
    dimensions.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    g = np.asarray(matrix, dtype=complex)
    if g.size == 0:
        return 0.0
    _require_finite(g)
    rows, cols = g.shape
    gram = g @ g.conj().T if rows <= cols else g.conj().T @ g
    lam = np.linalg.eigvalsh(gram)
    lam = np.maximum(lam, 0.0)
    lam_max = float(lam[-1])
    if lam_max == 0.0:
        return 0.0
    tol = tol_cfg or DEFAULT_TOLERANCES
    cutoff = (tol.rank_rel_tol * max(g.shape)) ** 2 * lam_max
    kept = lam[lam > cutoff]
    return float(np.sum(np.log2(1.0 + snr * kept)))


def least_squares(matrix, rhs):
    """Minimum-norm least-squares solve.

    Returns ``(solution, singular_values)`` with singular values in
    descending order, for callers that need the retained spectrum.
    """
    a = np.asarray(matrix)
    _require_finite(a)
    solution, _, _, s = np.linalg.lstsq(a, np.asarray(rhs), rcond=None)
    return solution, s
