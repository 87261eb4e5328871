"""Pre-assigned masking and recurrence matrices.

The scheme fixes four publicly known matrices ahead of time:

* ``phi`` slices mask the AN observations into the joint data phases
  (III/V), stacked as Phi with shape (tau2*M, tau1*N);
* ``omega`` slices do the same for the single-transmitter phases (IV/VI),
  stacked as Omega with shape (tau3*M, tau1*N);
* ``gamma`` slices re-encode the previous phase's receive-side mixture,
  stacked as Gamma with shape (tau3*M, tau2*N);
* ``theta`` slices spread the recurrence combination over phase VII,
  stacked as Theta with shape (tau4*N, tau3*N).

Only genericity matters (full rank of every slice and of every stack), so
the matrices are drawn i.i.d. complex Gaussian and certified numerically.
Zero-duration phases yield matrices with a zero dimension; downstream
products then collapse to empty or zero vectors without special-casing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .numerics import ToleranceConfig, complex_gaussian, numeric_rank, rng_from_seed
from .params import AntennaConfig, PhasePlan, phase_plan

__all__ = ["PrecoderSet", "generate_precoders", "save_precoders", "load_precoders"]

RANK_RETRY_LIMIT = 8


@dataclass(frozen=True)
class PrecoderSet:
    """The four stacked precoding matrices plus slicing helpers."""

    phi: np.ndarray  # (tau2*M, tau1*N)
    omega: np.ndarray  # (tau3*M, tau1*N)
    gamma: np.ndarray  # (tau3*M, tau2*N)
    theta: np.ndarray  # (tau4*N, tau3*N)
    m: int
    n: int

    def phi_slice(self, k: int) -> np.ndarray:
        """Per-slot block phi[k] (M rows), 0-based."""
        return self.phi[k * self.m : (k + 1) * self.m]

    def omega_slice(self, k: int) -> np.ndarray:
        return self.omega[k * self.m : (k + 1) * self.m]

    def gamma_slice(self, k: int) -> np.ndarray:
        return self.gamma[k * self.m : (k + 1) * self.m]

    def theta_slice(self, k: int) -> np.ndarray:
        """Per-slot block theta[k] (N rows), 0-based."""
        return self.theta[k * self.n : (k + 1) * self.n]


def _full_rank(a: np.ndarray, tol_cfg) -> bool:
    return numeric_rank(a, tol_cfg) == min(a.shape)

def _certify(ps: PrecoderSet, plan: PhasePlan, tol_cfg) -> bool:
    t1, t2, t3, t4 = plan.as_ints()
    stacked_ok = all(
        _full_rank(a, tol_cfg) for a in (ps.phi, ps.omega, ps.gamma, ps.theta)
    )
    slices_ok = (
        all(_full_rank(ps.phi_slice(k), tol_cfg) for k in range(t2))
        and all(_full_rank(ps.omega_slice(k), tol_cfg) for k in range(t3))
        and all(_full_rank(ps.gamma_slice(k), tol_cfg) for k in range(t3))
        and all(_full_rank(ps.theta_slice(k), tol_cfg) for k in range(t4))
    )
    return stacked_ok and slices_ok


def generate_precoders(
    plan: PhasePlan,
    cfg: AntennaConfig,
    seed: int,
    tol_cfg: ToleranceConfig | None = None,
) -> PrecoderSet:
    """Draw a certified PrecoderSet, deterministic given the seed.

    The matrices are known to all four nodes; they carry no secret.  Rank
    certification failing `RANK_RETRY_LIMIT` times is a fault, not an
    error code.
    """
    t1, t2, t3, t4 = plan.as_ints()
    m, n = cfg.m, cfg.n
    for attempt in range(RANK_RETRY_LIMIT + 1):
        rng = rng_from_seed((seed, 1, attempt) if attempt else (seed, 1))
        ps = PrecoderSet(
            phi=complex_gaussian(rng, (t2 * m, t1 * n)),
            omega=complex_gaussian(rng, (t3 * m, t1 * n)),
            gamma=complex_gaussian(rng, (t3 * m, t2 * n)),
            theta=complex_gaussian(rng, (t4 * n, t3 * n)),
            m=m,
            n=n,
        )
        if _certify(ps, plan, tol_cfg):
            return ps
    raise RuntimeError(f"precoder rank certification failed for seed {seed}")


def save_precoders(ps: PrecoderSet, path):
    """JSON dump matching the channel trace format (exact float round-trip)."""
    payload = {"m": ps.m, "n": ps.n}
    for name in ("phi", "omega", "gamma", "theta"):
        a = getattr(ps, name)
        payload[name] = {
            "shape": list(a.shape),
            "real": a.real.tolist(),
            "imag": a.imag.tolist(),
        }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_precoders(path) -> PrecoderSet:
    with open(path) as fh:
        payload = json.load(fh)
    mats = {}
    for name in ("phi", "omega", "gamma", "theta"):
        entry = payload[name]
        a = np.asarray(entry["real"], dtype=float) + 1j * np.asarray(entry["imag"], dtype=float)
        mats[name] = a.reshape(entry["shape"])
    return PrecoderSet(m=payload["m"], n=payload["n"], **mats)
