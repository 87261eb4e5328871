"""Decoding and security matrix assembly, rank oracles, leakage evaluation.

Receiver 1's combined observation obeys one linear equation::

    [ y1_III                                              ]
    [ y1_IV                                               ]  =  H1 @ [a1a; a1b; a2]
    [ y1_VII - H21_VII Theta (H11_VI Gamma y1_V - y1_VI)  ]
                         + an_mixing @ [y1_I; y1_II] + noise

with the 3x3-block data matrix H1 and the 3x2-block AN-mixing matrix
assembled here from phase channel blocks and precoders.

On the security side, the information leaked to receiver 1 about the
other receiver's data is bounded (for Gaussian inputs, at high SNR) by
``log2 det(I + snr A A*) - log2 det(I + snr B B*)``: A maps the
AN-plus-cross-data mixture receiver 1 observes, B the part explained by
the AN symbols alone.  Leakage stays bounded exactly when the two ranks
agree, which happens exactly when the phase-duration constraints in
`params.security_constraints_ok` hold.

Closed-form rank oracles (valid for N < M, generic draws):

* rank(H1) = min{ N(tau2 + tau3 + min(tau3, tau4)), M(2 tau2 + tau3) }
* rank(A)  = N(2 tau1 + tau2 + tau3)   (A always has full column rank)
* rank(B)  = min{ N(2 tau1 + min(tau1, tau2) + min(tau1, tau3)), 2 M tau1 }
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelTrace, Phase
from .numerics import ToleranceConfig, logdet_capacity
from .params import AntennaConfig, PhasePlan, RegimeError
from .precoding import PrecoderSet

__all__ = [
    "DecodingSystem",
    "SecuritySystem",
    "assemble_H1",
    "assemble_security",
    "assemble_reduced_B",
    "split_H1_rows",
    "rank_H1_formula",
    "rank_A_formula",
    "rank_B_formula",
    "leakage_logdet",
    "leakage_prelog",
]


@dataclass(frozen=True)
class DecodingSystem:
    """Receiver-1 decoding equation pieces.

    h1 : (N(tau2+tau3+tau4), M(2 tau2+tau3)) data matrix.
    an_mixing : (N(tau2+tau3+tau4), 2 N tau1) matrix applied to [y1_I; y1_II].
    """

    h1: np.ndarray
    an_mixing: np.ndarray


@dataclass(frozen=True)
class SecuritySystem:
    """Leakage-bound matrices for receiver 1.

    a : (N(2 tau1+2 tau2+2 tau3+tau4), N(2 tau1+tau2+tau3))
    b : (same rows, 2 M tau1)
    """

    a: np.ndarray
    b: np.ndarray


def _blocks(trace: ChannelTrace, plan: PhasePlan):
    """All phase channel blocks for receiver-side assembly, keyed (i, j, phase)."""
    return {
        (i, j, p): trace.phase_block(i, j, p, plan)
        for i in (1, 2)
        for j in (1, 2)
        for p in Phase
    }


def _place(target: np.ndarray, row_offsets, col_offsets, r: int, c: int, block: np.ndarray):
    target[row_offsets[r] : row_offsets[r + 1], col_offsets[c] : col_offsets[c + 1]] = block


def _offsets(sizes) -> list[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


def assemble_H1(trace: ChannelTrace, precoders: PrecoderSet, plan: PhasePlan) -> DecodingSystem:
    """Build H1 and the AN-mixing matrix from phase blocks and precoders."""
    t1, t2, t3, t4 = plan.as_ints()
    m, n = trace.m, trace.n
    H = _blocks(trace, plan)
    Phi, Om, Ga, Th = precoders.phi, precoders.omega, precoders.gamma, precoders.theta

    rows = _offsets([n * t2, n * t3, n * t4])
    cols = _offsets([m * t2, m * t3, m * t2])
    h1 = np.zeros((rows[-1], cols[-1]), dtype=complex)
    _place(h1, rows, cols, 0, 0, H[(1, 1, Phase.III)])
    _place(h1, rows, cols, 0, 2, H[(2, 1, Phase.III)])
    _place(h1, rows, cols, 1, 1, H[(1, 1, Phase.IV)])
    _place(h1, rows, cols, 1, 2, H[(2, 1, Phase.IV)] @ Ga @ H[(2, 2, Phase.III)])
    recur = H[(1, 1, Phase.VII)] @ Th
    _place(h1, rows, cols, 2, 0, recur @ H[(2, 2, Phase.IV)] @ Ga @ H[(1, 2, Phase.III)])
    _place(h1, rows, cols, 2, 1, -recur @ H[(1, 2, Phase.IV)])

    an_cols = _offsets([n * t1, n * t1])
    an = np.zeros((rows[-1], an_cols[-1]), dtype=complex)
    _place(an, rows, an_cols, 0, 0, H[(1, 1, Phase.III)] @ Phi)
    _place(an, rows, an_cols, 0, 1, H[(2, 1, Phase.III)] @ Phi)
    _place(an, rows, an_cols, 1, 0, H[(1, 1, Phase.IV)] @ Om)
    _place(an, rows, an_cols, 1, 1, H[(2, 1, Phase.IV)] @ Ga @ H[(2, 2, Phase.III)] @ Phi)
    _place(an, rows, an_cols, 2, 0, recur @ (H[(2, 2, Phase.IV)] @ Ga @ H[(1, 2, Phase.III)] @ Phi - H[(1, 2, Phase.IV)] @ Om))
    return DecodingSystem(h1=h1, an_mixing=an)


def split_H1_rows(system: DecodingSystem, plan: PhasePlan, cfg: AntennaConfig):
    """Split H1 into its direct-phase rows (III/IV) and the recurrence row (VII).

    The rank of the upper part is N(tau2+tau3), the rank of the lower part
    is N*min(tau3, tau4), and when their sum does not exceed the column
    count they add up to rank(H1).
    """
    _, t2, t3, _ = plan.as_ints()
    cut = cfg.n * (t2 + t3)
    return system.h1[:cut], system.h1[cut:]


def assemble_security(trace: ChannelTrace, precoders: PrecoderSet, plan: PhasePlan) -> SecuritySystem:
    """Build A and B block-for-block.

    Block rows follow receiver 1's observations phase by phase (I..VII,
    with receiver-1 data already conditioned out).  A's block columns are
    the components of the reduced mixture receiver 1 sees:
    [H11_I u1, H21_II u2, phase-V mixture, phase-VI mixture]; B's block
    columns are the raw AN vectors [u1, u2].
    """
    t1, t2, t3, t4 = plan.as_ints()
    m, n = trace.m, trace.n
    H = _blocks(trace, plan)
    Phi, Om, Ga, Th = precoders.phi, precoders.omega, precoders.gamma, precoders.theta

    rows = _offsets([n * t1, n * t1, n * t2, n * t3, n * t2, n * t3, n * t4])
    recur_v = H[(2, 1, Phase.VII)] @ Th  # phase-VII image of receiver-2-side recurrence
    row7_u1 = H[(1, 1, Phase.VII)] @ Th @ (
        H[(2, 2, Phase.IV)] @ Ga @ H[(1, 2, Phase.III)] @ Phi - H[(1, 2, Phase.IV)] @ Om
    )

    a_cols = _offsets([n * t1, n * t1, n * t2, n * t3])
    a = np.zeros((rows[-1], a_cols[-1]), dtype=complex)
    _place(a, rows, a_cols, 0, 0, np.eye(n * t1))
    _place(a, rows, a_cols, 1, 1, np.eye(n * t1))
    _place(a, rows, a_cols, 2, 0, H[(1, 1, Phase.III)] @ Phi)
    _place(a, rows, a_cols, 2, 1, H[(2, 1, Phase.III)] @ Phi)
    _place(a, rows, a_cols, 3, 0, H[(1, 1, Phase.IV)] @ Om)
    _place(a, rows, a_cols, 3, 1, H[(2, 1, Phase.IV)] @ Ga @ H[(2, 2, Phase.III)] @ Phi)
    _place(a, rows, a_cols, 4, 2, np.eye(n * t2))
    _place(a, rows, a_cols, 5, 3, np.eye(n * t3))
    _place(a, rows, a_cols, 6, 0, row7_u1)
    _place(a, rows, a_cols, 6, 2, recur_v @ H[(1, 1, Phase.VI)] @ Ga)
    _place(a, rows, a_cols, 6, 3, -recur_v)

    b_cols = _offsets([m * t1, m * t1])
    b = np.zeros((rows[-1], b_cols[-1]), dtype=complex)
    _place(b, rows, b_cols, 0, 0, H[(1, 1, Phase.I)])
    _place(b, rows, b_cols, 1, 1, H[(2, 1, Phase.II)])
    _place(b, rows, b_cols, 2, 0, H[(1, 1, Phase.III)] @ Phi @ H[(1, 1, Phase.I)])
    _place(b, rows, b_cols, 2, 1, H[(2, 1, Phase.III)] @ Phi @ H[(2, 1, Phase.II)])
    _place(b, rows, b_cols, 3, 0, H[(1, 1, Phase.IV)] @ Om @ H[(1, 1, Phase.I)])
    _place(b, rows, b_cols, 3, 1, H[(2, 1, Phase.IV)] @ Ga @ H[(2, 2, Phase.III)] @ Phi @ H[(2, 1, Phase.II)])
    _place(b, rows, b_cols, 4, 0, H[(1, 1, Phase.V)] @ Phi @ H[(1, 2, Phase.I)])
    _place(b, rows, b_cols, 4, 1, H[(2, 1, Phase.V)] @ Phi @ H[(2, 2, Phase.II)])
    _place(b, rows, b_cols, 5, 0, H[(1, 1, Phase.VI)] @ Ga @ H[(1, 1, Phase.V)] @ Phi @ H[(1, 2, Phase.I)])
    _place(b, rows, b_cols, 5, 1, H[(2, 1, Phase.VI)] @ Om @ H[(2, 2, Phase.II)])
    _place(b, rows, b_cols, 6, 0, row7_u1 @ H[(1, 1, Phase.I)])
    _place(b, rows, b_cols, 6, 1, recur_v @ (
        H[(1, 1, Phase.VI)] @ Ga @ H[(2, 1, Phase.V)] @ Phi - H[(2, 1, Phase.VI)] @ Om
    ) @ H[(2, 2, Phase.II)])
    return SecuritySystem(a=a, b=b)


def assemble_reduced_B(trace: ChannelTrace, precoders: PrecoderSet, plan: PhasePlan) -> np.ndarray:
    """The 4-block-row matrix that carries all of B's rank.

    Rows 3, 4 and 7 of B are left-multiplications of rows 1, 2, 5 and 6,
    so rank(B) equals the rank of::

        [ H11_I            0                ]
        [ 0                H21_II           ]
        [ H11_V Phi H12_I  H21_V Phi H22_II ]
        [ 0                H21_VI Om H22_II ]
    """
    t1, t2, t3, _ = plan.as_ints()
    m, n = trace.m, trace.n
    H = _blocks(trace, plan)
    Phi, Om = precoders.phi, precoders.omega
    rows = _offsets([n * t1, n * t1, n * t2, n * t3])
    cols = _offsets([m * t1, m * t1])
    out = np.zeros((rows[-1], cols[-1]), dtype=complex)
    _place(out, rows, cols, 0, 0, H[(1, 1, Phase.I)])
    _place(out, rows, cols, 1, 1, H[(2, 1, Phase.II)])
    _place(out, rows, cols, 2, 0, H[(1, 1, Phase.V)] @ Phi @ H[(1, 2, Phase.I)])
    _place(out, rows, cols, 2, 1, H[(2, 1, Phase.V)] @ Phi @ H[(2, 2, Phase.II)])
    _place(out, rows, cols, 3, 1, H[(2, 1, Phase.VI)] @ Om @ H[(2, 2, Phase.II)])
    return out


def _require_scheme_regime(plan: PhasePlan, cfg: AntennaConfig):
    if cfg.n >= cfg.m:
        raise RegimeError(f"rank oracles require N < M, got M={cfg.m}, N={cfg.n}")
    if not plan.is_integral:
        raise ValueError("rank formulas expect an integerized plan")


def rank_H1_formula(plan: PhasePlan, cfg: AntennaConfig) -> int:
    """Generic rank of H1: min{N(tau2+tau3+min(tau3,tau4)), M(2 tau2+tau3)}."""
    _require_scheme_regime(plan, cfg)
    _, t2, t3, t4 = plan.as_ints()
    return min(cfg.n * (t2 + t3 + min(t3, t4)), cfg.m * (2 * t2 + t3))


def rank_A_formula(plan: PhasePlan, cfg: AntennaConfig) -> int:
    """Generic rank of A: N(2 tau1 + tau2 + tau3) (its full column count)."""
    _require_scheme_regime(plan, cfg)
    t1, t2, t3, _ = plan.as_ints()
    return cfg.n * (2 * t1 + t2 + t3)


def rank_B_formula(plan: PhasePlan, cfg: AntennaConfig) -> int:
    """Generic rank of B: min{N(2 tau1+min(tau1,tau2)+min(tau1,tau3)), 2M tau1}."""
    _require_scheme_regime(plan, cfg)
    t1, t2, t3, _ = plan.as_ints()
    return min(cfg.n * (2 * t1 + min(t1, t2) + min(t1, t3)), 2 * cfg.m * t1)


def leakage_logdet(security: SecuritySystem, snr: float, tol_cfg: ToleranceConfig | None = None) -> float:
    """Gaussian leakage proxy in bits:
    log2 det(I + snr A A*) - log2 det(I + snr B B*).
    """
    return logdet_capacity(security.a, snr, tol_cfg) - logdet_capacity(security.b, snr, tol_cfg)


def leakage_prelog(
    security: SecuritySystem,
    snr_lo: float = 1e6,
    snr_hi: float = 1e8,
    tol_cfg: ToleranceConfig | None = None,
) -> float:
    """Leakage growth per log2-SNR unit between two high SNR points.

    Converges to rank(A) - rank(B) as both points grow; with the default
    points it already sits within a few percent of the integer gap.
    """
    lo = leakage_logdet(security, snr_lo, tol_cfg)
    hi = leakage_logdet(security, snr_hi, tol_cfg)
    return (hi - lo) / (math.log2(snr_hi) - math.log2(snr_lo))
