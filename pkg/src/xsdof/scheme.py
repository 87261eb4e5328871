"""End-to-end execution of the seven-phase transmission.

Phases and their transmit rules (holistic form, per transmitter):

=====  =======================================================  ==========================================================
Phase  Transmitter 1                                            Transmitter 2
=====  =======================================================  ==========================================================
I      u1 (AN symbols)                                          silent
II     silent                                                   u2 (AN symbols)
III    a1a + Phi @ y1_I                                         a2  + Phi @ y1_II
IV     a1b + Omega @ y1_I                                       Gamma @ H22_III @ x2_III
V      b1  + Phi @ y2_I                                         b2a + Phi @ y2_II
VI     Gamma @ H11_V @ x1_V                                     b2b + Omega @ y2_II
VII    Theta @ (H22_IV Gamma H12_III x1_III - H12_IV x1_IV)     Theta @ (H11_VI Gamma H21_V x2_V - H21_VI x2_VI)
=====  =======================================================  ==========================================================

Each transmitter rebuilds the receive-side quantities it masks with
(``y1_I = H11_I u1`` etc.) from its own symbols and *delayed* CSI only,
ignoring receiver noise.  The receiver-side cancellation in the decoder
uses the physically observed, noisy signals instead; at zero noise the two
coincide and the run is exactly replayable.

In phase VII both transmitters use only their first N antennas.

SNR convention: all symbols are unit-variance, so SNR = 1 / noise_power.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelTrace, Phase, phase_duration, phase_slots, tx_antennas
from .numerics import complex_gaussian, rng_from_seed
from .params import AntennaConfig, PhasePlan
from .precoding import PrecoderSet

__all__ = [
    "SymbolSet",
    "TransmissionRecord",
    "generate_symbols",
    "run_scheme",
    "with_noise",
    "replay_residual",
    "swap_roles",
]


@dataclass(frozen=True)
class SymbolSet:
    """AN and data symbol vectors, all i.i.d. unit-variance complex Gaussian.

    u1, u2: AN vectors, length tau1*M each.
    a1a (tau2*M), a1b (tau3*M), a2 (tau2*M): data for receiver 1, sent by
    transmitter 1 (a1a, a1b) and transmitter 2 (a2).
    b1 (tau2*M), b2a (tau2*M), b2b (tau3*M): data for receiver 2, sent by
    transmitter 1 (b1) and transmitter 2 (b2a, b2b).
    """

    u1: np.ndarray
    u2: np.ndarray
    a1a: np.ndarray
    a1b: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2a: np.ndarray
    b2b: np.ndarray

    def receiver1_data(self) -> np.ndarray:
        return np.concatenate([self.a1a, self.a1b, self.a2])

    def receiver2_data(self) -> np.ndarray:
        return np.concatenate([self.b2a, self.b2b, self.b1])


def generate_symbols(plan: PhasePlan, cfg: AntennaConfig, seed: int) -> SymbolSet:
    """Draw a SymbolSet sized for the (integerized) plan, deterministic in seed."""
    t1, t2, t3, _ = plan.as_ints()
    m = cfg.m
    rng = rng_from_seed((seed, 2))
    return SymbolSet(
        u1=complex_gaussian(rng, t1 * m),
        u2=complex_gaussian(rng, t1 * m),
        a1a=complex_gaussian(rng, t2 * m),
        a1b=complex_gaussian(rng, t3 * m),
        a2=complex_gaussian(rng, t2 * m),
        b1=complex_gaussian(rng, t2 * m),
        b2a=complex_gaussian(rng, t2 * m),
        b2b=complex_gaussian(rng, t3 * m),
    )


@dataclass(frozen=True)
class TransmissionRecord:
    """Everything one run produced.

    x maps (transmitter, phase) to the holistic transmit vector (length
    duration*M, or duration*N in phase VII); y and z map (receiver, phase)
    to the received signal and its noise realization.  Zero-duration phases
    hold empty vectors, not missing keys.
    """

    cfg: AntennaConfig
    plan: PhasePlan
    trace: ChannelTrace
    precoders: PrecoderSet
    symbols: SymbolSet
    noise_power: float
    x: dict
    y: dict
    z: dict

    def clean_y(self, j: int, phase: Phase) -> np.ndarray:
        """Received signal with the recorded noise subtracted."""
        return self.y[(j, phase)] - self.z[(j, phase)]


def _phase_channel(trace: ChannelTrace, i: int, j: int, phase: Phase, plan: PhasePlan, t: int):
    """Slot-t physical channel for the phase (truncated to active antennas)."""
    ncols = tx_antennas(phase, trace.cfg)
    return trace.matrix(i, j, t)[:, :ncols]


def _propagate(trace, plan, phase, x1, x2, z1, z2):
    """Per-slot propagation through the physical channel.

    Deliberately slot-by-slot (not block-diagonal), so replaying a record
    against the holistic phase blocks cross-checks the slot indexing.
    """
    n = trace.n
    dur = phase_duration(phase, plan)
    per_tx = tx_antennas(phase, trace.cfg)
    ys = {1: np.zeros(dur * n, dtype=complex), 2: np.zeros(dur * n, dtype=complex)}
    for k, t in enumerate(phase_slots(phase, plan)):
        x1_k = x1[k * per_tx : (k + 1) * per_tx]
        x2_k = x2[k * per_tx : (k + 1) * per_tx]
        for j in (1, 2):
            h1 = _phase_channel(trace, 1, j, phase, plan, t)
            h2 = _phase_channel(trace, 2, j, phase, plan, t)
            ys[j][k * n : (k + 1) * n] = h1 @ x1_k + h2 @ x2_k
    return ys[1] + z1, ys[2] + z2


def run_scheme(
    trace: ChannelTrace,
    precoders: PrecoderSet,
    symbols: SymbolSet,
    plan: PhasePlan,
    noise_power: float = 0.0,
    noise_seed: int = 0,
) -> TransmissionRecord:
    """Execute all seven phases and record every signal.

    noise_power = 0 is the noiseless analysis mode.  Transmit construction
    only ever touches CSI through delayed views bound to the first slot of
    the phase being built, so the trace audit certifies causal access.
    """
    if noise_power < 0:
        raise ValueError("noise_power must be nonnegative")
    t1, t2, t3, t4 = plan.as_ints()
    cfg = trace.cfg
    m, n = cfg.m, cfg.n
    sy = symbols
    Phi, Om, Ga, Th = precoders.phi, precoders.omega, precoders.gamma, precoders.theta

    def start(phase):
        slots = phase_slots(phase, plan)
        # empty phases still have a well-defined start for the delayed view
        return slots.start

    x = {}
    # Phase I/II: AN transmission, other transmitter silent.
    x[(1, Phase.I)] = sy.u1.copy()
    x[(2, Phase.I)] = np.zeros(t1 * m, dtype=complex)
    x[(1, Phase.II)] = np.zeros(t1 * m, dtype=complex)
    x[(2, Phase.II)] = sy.u2.copy()

    # Phase III: both transmitters send receiver-1 data masked with their
    # own reconstruction of receiver 1's AN observations.
    view1 = trace.delayed_view(1, start(Phase.III))
    view2 = trace.delayed_view(2, start(Phase.III))
    y1_i_at_tx1 = view1.phase_block(1, 1, Phase.I, plan) @ sy.u1
    y1_ii_at_tx2 = view2.phase_block(2, 1, Phase.II, plan) @ sy.u2
    x[(1, Phase.III)] = sy.a1a + Phi @ y1_i_at_tx1
    x[(2, Phase.III)] = sy.a2 + Phi @ y1_ii_at_tx2

    # Phase IV: transmitter 1 keeps sending receiver-1 data; transmitter 2
    # re-encodes what receiver 2 just heard from it (known via delayed CSI).
    view1 = trace.delayed_view(1, start(Phase.IV))
    view2 = trace.delayed_view(2, start(Phase.IV))
    y1_i_at_tx1 = view1.phase_block(1, 1, Phase.I, plan) @ sy.u1
    x[(1, Phase.IV)] = sy.a1b + Om @ y1_i_at_tx1
    x[(2, Phase.IV)] = Ga @ (view2.phase_block(2, 2, Phase.III, plan) @ x[(2, Phase.III)])

    # Phase V: mirror of phase III toward receiver 2.
    view1 = trace.delayed_view(1, start(Phase.V))
    view2 = trace.delayed_view(2, start(Phase.V))
    y2_i_at_tx1 = view1.phase_block(1, 2, Phase.I, plan) @ sy.u1
    y2_ii_at_tx2 = view2.phase_block(2, 2, Phase.II, plan) @ sy.u2
    x[(1, Phase.V)] = sy.b1 + Phi @ y2_i_at_tx1
    x[(2, Phase.V)] = sy.b2a + Phi @ y2_ii_at_tx2

    # Phase VI: mirror of phase IV (roles swapped).
    view1 = trace.delayed_view(1, start(Phase.VI))
    view2 = trace.delayed_view(2, start(Phase.VI))
    x[(1, Phase.VI)] = Ga @ (view1.phase_block(1, 1, Phase.V, plan) @ x[(1, Phase.V)])
    y2_ii_at_tx2 = view2.phase_block(2, 2, Phase.II, plan) @ sy.u2
    x[(2, Phase.VI)] = sy.b2b + Om @ y2_ii_at_tx2

    # Phase VII: each transmitter resends the interference combination the
    # *other* receiver accumulated from it, spread by Theta over N antennas.
    view1 = trace.delayed_view(1, start(Phase.VII))
    view2 = trace.delayed_view(2, start(Phase.VII))
    rec1 = view1.phase_block(2, 2, Phase.IV, plan) @ (
        Ga @ (view1.phase_block(1, 2, Phase.III, plan) @ x[(1, Phase.III)])
    ) - view1.phase_block(1, 2, Phase.IV, plan) @ x[(1, Phase.IV)]
    rec2 = view2.phase_block(1, 1, Phase.VI, plan) @ (
        Ga @ (view2.phase_block(2, 1, Phase.V, plan) @ x[(2, Phase.V)])
    ) - view2.phase_block(2, 1, Phase.VI, plan) @ x[(2, Phase.VI)]
    x[(1, Phase.VII)] = Th @ rec1
    x[(2, Phase.VII)] = Th @ rec2

    # Propagation with AWGN, drawn in a fixed phase/receiver order.
    rng = rng_from_seed((noise_seed, 3))
    y, z = {}, {}
    sigma = np.sqrt(noise_power)
    for phase in Phase:
        dur = phase_duration(phase, plan)
        for j in (1, 2):
            z[(j, phase)] = (
                sigma * complex_gaussian(rng, dur * n) if noise_power > 0 else np.zeros(dur * n, dtype=complex)
            )
        y1, y2 = _propagate(trace, plan, phase, x[(1, phase)], x[(2, phase)], z[(1, phase)], z[(2, phase)])
        y[(1, phase)] = y1
        y[(2, phase)] = y2

    return TransmissionRecord(
        cfg=cfg,
        plan=plan,
        trace=trace,
        precoders=precoders,
        symbols=symbols,
        noise_power=float(noise_power),
        x=x,
        y=y,
        z=z,
    )


def with_noise(record: TransmissionRecord, noise_power: float, noise_seed: int) -> TransmissionRecord:
    """Same transmissions, fresh noise.

    Valid because no transmit signal depends on receiver noise (transmitter
    reconstructions are noiseless by design), so y = clean + z can be
    re-noised without re-running the phases.  This is what makes SNR sweeps
    cheap.
    """
    if noise_power < 0:
        raise ValueError("noise_power must be nonnegative")
    rng = rng_from_seed((noise_seed, 3))
    sigma = np.sqrt(noise_power)
    y, z = {}, {}
    for phase in Phase:
        for j in (1, 2):
            clean = record.clean_y(j, phase)
            zz = sigma * complex_gaussian(rng, clean.shape[0]) if noise_power > 0 else np.zeros_like(clean)
            z[(j, phase)] = zz
            y[(j, phase)] = clean + zz
    return replace(record, noise_power=float(noise_power), y=y, z=z)


def replay_residual(record: TransmissionRecord) -> float:
    """Max |y - (H1j x1 + H2j x2 + z)| over all phases and receivers.

    Rebuilds the propagation from the holistic block-diagonal phase
    matrices, which is an independent path from the slot-wise construction
    in `run_scheme`; exact records give 0 up to floating-point roundoff.
    """
    worst = 0.0
    for phase in Phase:
        for j in (1, 2):
            expect = (
                record.trace.phase_block(1, j, phase, record.plan) @ record.x[(1, phase)]
                + record.trace.phase_block(2, j, phase, record.plan) @ record.x[(2, phase)]
                + record.z[(j, phase)]
            )
            diff = record.y[(j, phase)] - expect
            if diff.size:
                worst = max(worst, float(np.max(np.abs(diff))))
    return worst


_SWAP_PHASE = {
    Phase.I: Phase.II,
    Phase.II: Phase.I,
    Phase.III: Phase.V,
    Phase.IV: Phase.VI,
    Phase.V: Phase.III,
    Phase.VI: Phase.IV,
    Phase.VII: Phase.VII,
}


def swap_roles(record: TransmissionRecord) -> TransmissionRecord:
    """Relabel transmitters/receivers 1<->2 so receiver-2 analysis can reuse
    the receiver-1 machinery.

    The schedule is symmetric (I<->II, III<->V, IV<->VI, VII fixed), so the
    swapped record is a genuine record of the mirrored run: channel entries
    are moved between the paired phases with indices flipped, symbol groups
    are exchanged (a-family <-> b-family), and all signals follow.  Applying
    the swap twice returns an identical record.
    """
    trace, plan = record.trace, record.plan
    h = trace.h
    h_swapped = np.empty_like(h)
    for phase in Phase:
        src = _SWAP_PHASE[phase]
        dst_slots = phase_slots(phase, plan)
        src_slots = phase_slots(src, plan)
        for t_dst, t_src in zip(dst_slots, src_slots):
            for i in (1, 2):
                for j in (1, 2):
                    h_swapped[i - 1, j - 1, t_dst - 1] = h[2 - i, 2 - j, t_src - 1]
    swapped_trace = ChannelTrace(trace.cfg, trace.total_slots, trace.seed, h_swapped)

    sy = record.symbols
    swapped_symbols = SymbolSet(
        u1=sy.u2,
        u2=sy.u1,
        a1a=sy.b2a,
        a1b=sy.b2b,
        a2=sy.b1,
        b1=sy.a2,
        b2a=sy.a1a,
        b2b=sy.a1b,
    )
    x = {(i, p): record.x[(3 - i, _SWAP_PHASE[p])] for i in (1, 2) for p in Phase}
    y = {(j, p): record.y[(3 - j, _SWAP_PHASE[p])] for j in (1, 2) for p in Phase}
    z = {(j, p): record.z[(3 - j, _SWAP_PHASE[p])] for j in (1, 2) for p in Phase}
    return TransmissionRecord(
        cfg=record.cfg,
        plan=plan,
        trace=swapped_trace,
        precoders=record.precoders,
        symbols=swapped_symbols,
        noise_power=record.noise_power,
        x=x,
        y=y,
        z=z,
    )
