"""Receiver-1 data recovery.

Builds the left-hand side of the decoding equation from the receiver's own
(noisy) observations, cancels the AN contribution with the observed phase
I/II signals, and solves the remaining linear system for the data symbols.

The AN cancellation deliberately uses the noisy observations (the signal a
receiver physically has), which enhances noise but costs no degrees of
freedom; the MSE-vs-SNR slope stays at -1.  Receiver 2 is decoded by
applying `scheme.swap_roles` first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import assemble_H1
from .channel import Phase
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    least_squares,
    rank_cutoff,
)
from .scheme import TransmissionRecord

__all__ = ["RankDeficiencyError", "DecodeResult", "build_lhs", "decode"]


class RankDeficiencyError(RuntimeError):
    """H1 lost column rank: a non-generic draw or a plan that cannot carry
    the requested data load."""

    def __init__(self, rank: int, columns: int):
        super().__init__(f"decoding matrix has rank {rank} < {columns} columns")
        self.rank = rank
        self.columns = columns


@dataclass(frozen=True)
class DecodeResult:
    """Estimates and quality figures for one decoded record.

    mse averages |estimate - truth|^2 over all M(2 tau2 + tau3) receiver-1
    symbols; h1_condition is the smallest retained singular value of H1.
    """

    a1a: np.ndarray
    a1b: np.ndarray
    a2: np.ndarray
    residual_norm: float
    mse: float
    h1_condition: float


def build_lhs(record: TransmissionRecord) -> np.ndarray:
    """Receiver 1's combined observation vector.

    Stacks [y1_III; y1_IV; y1_VII - H21_VII Theta (H11_VI Gamma y1_V - y1_VI)]
    from the recorded (noisy) signals; the receiver knows all CSI and the
    precoders, so the phase-VII term removes transmitter 2's recurrence.
    """
    tr, pc, plan = record.trace, record.precoders, record.plan
    y = record.y
    h21_vii = tr.phase_block(2, 1, Phase.VII, plan)
    h11_vi = tr.phase_block(1, 1, Phase.VI, plan)
    cleaned = y[(1, Phase.VII)] - h21_vii @ (
        pc.theta @ (h11_vi @ (pc.gamma @ y[(1, Phase.V)]) - y[(1, Phase.VI)])
    )
    return np.concatenate([y[(1, Phase.III)], y[(1, Phase.IV)], cleaned])


def decode(record: TransmissionRecord, tol_cfg: ToleranceConfig | None = None) -> DecodeResult:
    """Recover (a1a, a1b, a2) by least squares against H1.

    Raises `RankDeficiencyError` when H1 has deficient column rank at the
    working tolerance.  In noiseless mode the recovery is exact up to
    floating-point roundoff.
    """
    tol = tol_cfg or DEFAULT_TOLERANCES
    t1, t2, t3, _ = record.plan.as_ints()
    m = record.cfg.m
    system = assemble_H1(record.trace, record.precoders, record.plan)
    an_obs = np.concatenate([record.y[(1, Phase.I)], record.y[(1, Phase.II)]])
    rhs = build_lhs(record) - system.an_mixing @ an_obs

    solution, s = least_squares(system.h1, rhs)
    cutoff = rank_cutoff(s, system.h1.shape, tol)
    rank = int(np.count_nonzero(s > cutoff))
    columns = system.h1.shape[1]
    if rank < columns:
        raise RankDeficiencyError(rank, columns)
    retained = float(s[columns - 1]) if columns else 0.0

    truth = record.symbols.receiver1_data()
    err = solution - truth
    mse = float(np.mean(np.abs(err) ** 2)) if err.size else 0.0
    residual = float(np.linalg.norm(system.h1 @ solution - rhs))
    return DecodeResult(
        a1a=solution[: t2 * m],
        a1b=solution[t2 * m : t2 * m + t3 * m],
        a2=solution[t2 * m + t3 * m :],
        residual_norm=residual,
        mse=mse,
        h1_condition=retained,
    )
