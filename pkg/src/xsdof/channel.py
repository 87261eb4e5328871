"""Time-varying MIMO channel traces.

Generates i.i.d. complex Gaussian channel matrices per time slot, certifies
that every draw is in generic position, serves per-phase block-diagonal
matrices, and audits that transmitter-side CSI access is strictly delayed.

Receivers are assumed to hold perfect, current CSI, so receiver-side access
(`ChannelTrace.matrix` / `ChannelTrace.phase_block`) is unaudited.  The
transmitters must go through `ChannelTrace.delayed_view`, which records
every access and rejects any request for the current or a future slot.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .numerics import DEFAULT_TOLERANCES, complex_gaussian, rng_from_seed
from .params import AntennaConfig, PhasePlan

__all__ = [
    "Phase",
    "CausalityError",
    "GenericityError",
    "CsiAccess",
    "CsiAudit",
    "ChannelTrace",
    "DelayedCsiView",
    "generate_trace",
    "phase_slots",
    "phase_duration",
    "tx_antennas",
    "save_trace",
    "load_trace",
]

GENERICITY_RETRY_LIMIT = 8

# |det| of a square column submatrix must exceed this fraction of its
# Hadamard bound (product of column norms) to count as invertible.
GENERICITY_DET_FLOOR = 1e-12


class Phase(Enum):
    """The seven phases of one transmission round, in schedule order."""

    I = 1  # AN symbols for receiver 1, transmitter 1 active
    II = 2  # AN symbols for receiver 2, transmitter 2 active
    III = 3  # data for receiver 1 from both transmitters
    IV = 4  # data for receiver 1 from transmitter 1 only
    V = 5  # data for receiver 2 from both transmitters
    VI = 6  # data for receiver 2 from transmitter 2 only
    VII = 7  # interference recurrence from both transmitters


def _durations(plan: PhasePlan) -> tuple[int, int, int, int]:
    return plan.as_ints()


def phase_duration(phase: Phase, plan: PhasePlan) -> int:
    """Number of slots the phase occupies under an integerized plan."""
    t1, t2, t3, t4 = _durations(plan)
    return {
        Phase.I: t1,
        Phase.II: t1,
        Phase.III: t2,
        Phase.IV: t3,
        Phase.V: t2,
        Phase.VI: t3,
        Phase.VII: t4,
    }[phase]


def phase_slots(phase: Phase, plan: PhasePlan) -> range:
    """1-based slot range of the phase within the schedule."""
    t1, t2, t3, _ = _durations(plan)
    starts = {
        Phase.I: 0,
        Phase.II: t1,
        Phase.III: 2 * t1,
        Phase.IV: 2 * t1 + t2,
        Phase.V: 2 * t1 + t2 + t3,
        Phase.VI: 2 * t1 + 2 * t2 + t3,
        Phase.VII: 2 * t1 + 2 * t2 + 2 * t3,
    }
    start = starts[phase]
    return range(start + 1, start + 1 + phase_duration(phase, plan))


def tx_antennas(phase: Phase, cfg: AntennaConfig) -> int:
    """Active transmit antennas: N in the recurrence phase, M elsewhere."""
    return cfg.n if phase is Phase.VII else cfg.m


class CausalityError(RuntimeError):
    """A transmitter asked for CSI of the current or a future slot."""


class GenericityError(RuntimeError):
    """Channel generation kept producing degenerate draws (should not happen)."""


@dataclass(frozen=True)
class CsiAccess:
    t_requested: int
    t_now: int
    accessor: int

    @property
    def is_violation(self) -> bool:
        return self.t_requested >= self.t_now


@dataclass
class CsiAudit:
    """Log of transmitter-side CSI accesses for one trace."""

    accesses: list = field(default_factory=list)

    def record(self, t_requested: int, t_now: int, accessor: int) -> CsiAccess:
        access = CsiAccess(t_requested, t_now, accessor)
        self.accesses.append(access)
        return access

    def violations(self) -> list:
        return [a for a in self.accesses if a.is_violation]


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


class ChannelTrace:
    """All channel matrices H_{i,j}[t] of one run, plus the CSI audit.

    Parameters
    ----------
    cfg : AntennaConfig
    total_slots : int
        Schedule length T.
    seed : int
        Seed the trace was generated from (metadata; generation happens in
        `generate_trace`).
    h : ndarray, shape (2, 2, T, N, M)
        ``h[i-1, j-1, t-1]`` is the slot-t matrix from transmitter i to
        receiver j.  Stored read-only.
    """

    def __init__(self, cfg: AntennaConfig, total_slots: int, seed: int, h: np.ndarray):
        if h.shape != (2, 2, total_slots, cfg.n, cfg.m):
            raise ValueError(f"channel array has shape {h.shape}, expected "
                             f"(2, 2, {total_slots}, {cfg.n}, {cfg.m})")
        self.cfg = cfg
        self.m = cfg.m
        self.n = cfg.n
        self.total_slots = total_slots
        self.seed = seed
        h = np.ascontiguousarray(h, dtype=complex)
        h.setflags(write=False)
        self.h = h
        self.audit = CsiAudit()

    def _check_slot(self, t: int):
        if not 1 <= t <= self.total_slots:
            raise IndexError(f"slot {t} outside 1..{self.total_slots}")

    def matrix(self, i: int, j: int, t: int) -> np.ndarray:
        """H_{i,j}[t] (receiver-side access: perfect current CSI, unaudited)."""
        self._check_slot(t)
        return self.h[i - 1, j - 1, t - 1]

    def phase_block(self, i: int, j: int, phase: Phase, plan: PhasePlan) -> np.ndarray:
        """Block-diagonal stack of the phase's per-slot matrices.

        Phases I-VI use all M transmit antennas; the recurrence phase VII
        uses the first N only, so its blocks are the leading N columns.
        """
        slots = phase_slots(phase, plan)
        if slots and slots[-1] > self.total_slots:
            raise IndexError(
                f"phase {phase.name} needs slots up to {slots[-1]} but trace has {self.total_slots}"
            )
        ncols = tx_antennas(phase, self.cfg)
        blocks = [self.h[i - 1, j - 1, t - 1][:, :ncols] for t in slots]
        return _block_diag(blocks)

    def delayed_view(self, accessor: int, t_now: int) -> "DelayedCsiView":
        """Transmitter-side CSI handle: only slots strictly before t_now."""
        if not 1 <= t_now <= self.total_slots + 1:
            raise ValueError(f"t_now {t_now} outside 1..{self.total_slots + 1}")
        return DelayedCsiView(self, accessor, t_now)


class DelayedCsiView:
    """Read handle a transmitter holds at slot ``t_now``.

    Every access is recorded into the trace's audit.  Requests for slot
    >= t_now raise `CausalityError` (and are recorded as violations): with
    feedback delay, only strictly past channel matrices are available.
    """

    def __init__(self, trace: ChannelTrace, accessor: int, t_now: int):
        self.trace = trace
        self.accessor = accessor
        self.t_now = t_now

    def matrix(self, i: int, j: int, t: int) -> np.ndarray:
        self.trace._check_slot(t)
        access = self.trace.audit.record(t, self.t_now, self.accessor)
        if access.is_violation:
            raise CausalityError(
                f"transmitter {self.accessor} requested CSI of slot {t} at slot {self.t_now}"
            )
        return self.trace.h[i - 1, j - 1, t - 1]

    def phase_block(self, i: int, j: int, phase: Phase, plan: PhasePlan) -> np.ndarray:
        ncols = tx_antennas(phase, self.trace.cfg)
        blocks = [self.matrix(i, j, t)[:, :ncols] for t in phase_slots(phase, plan)]
        return _block_diag(blocks)


def _certify_generic(h: np.ndarray, m: int, n: int) -> bool:
    """Every N x N column submatrix of every slot matrix must be invertible.

    Certificate: |det| above a fixed fraction of the Hadamard bound
    (product of column norms).  Determinants batch cheaply even when
    C(M, N) is large, unlike per-submatrix SVDs.
    """
    mats = h.reshape(-1, n, m)
    for cols in itertools.combinations(range(m), n):
        sub = mats[:, :, cols]
        dets = np.abs(np.linalg.det(sub))
        hadamard = np.prod(np.linalg.norm(sub, axis=1), axis=1)
        if np.any(dets <= GENERICITY_DET_FLOOR * hadamard):
            return False
    return True


def generate_trace(cfg: AntennaConfig, total_slots: int, seed: int) -> ChannelTrace:
    """Draw a trace of i.i.d. unit-variance complex Gaussian matrices.

    Deterministic given the seed.  If a draw fails the genericity
    certificate (probability ~0), the draw is retried with a derived seed;
    exhausting `GENERICITY_RETRY_LIMIT` retries is treated as a fault.
    """
    if total_slots < 1:
        raise ValueError("total_slots must be >= 1")
    for attempt in range(GENERICITY_RETRY_LIMIT + 1):
        rng = rng_from_seed((seed, attempt) if attempt else seed)
        h = complex_gaussian(rng, (2, 2, total_slots, cfg.n, cfg.m))
        if _certify_generic(h, cfg.m, cfg.n):
            trace = ChannelTrace(cfg, total_slots, seed, h)
            trace.generation_attempts = attempt + 1
            return trace
    raise GenericityError(
        f"no generic draw within {GENERICITY_RETRY_LIMIT} retries for seed {seed}"
    )


def save_trace(trace: ChannelTrace, path):
    """Dump a trace as JSON keyed by (M, N, T, seed).

    Layout: ``{"m", "n", "total_slots", "seed", "h_real", "h_imag"}`` with
    the two float arrays nested as (2, 2, T, N, M) lists.  Floats round-trip
    exactly (repr serialization).
    """
    payload = {
        "m": trace.m,
        "n": trace.n,
        "total_slots": trace.total_slots,
        "seed": trace.seed,
        "h_real": trace.h.real.tolist(),
        "h_imag": trace.h.imag.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_trace(path) -> ChannelTrace:
    """Load a trace written by `save_trace`; the audit starts fresh."""
    with open(path) as fh:
        payload = json.load(fh)
    h = np.asarray(payload["h_real"], dtype=float) + 1j * np.asarray(payload["h_imag"], dtype=float)
    cfg = AntennaConfig(payload["m"], payload["n"])
    return ChannelTrace(cfg, payload["total_slots"], payload["seed"], h)
