import numpy as np
import pytest

from conftest import make_record, make_setup
from xsdof.channel import Phase, phase_slots
from xsdof.params import AntennaConfig, optimal_phase_plan, phase_plan
from xsdof.scheme import (
    SymbolSet,
    generate_symbols,
    replay_residual,
    run_scheme,
    swap_roles,
    with_noise,
)


def test_symbol_lengths(cfg32, plan32):
    sy = generate_symbols(plan32, cfg32, seed=0)
    assert sy.u1.shape == sy.u2.shape == (15,)
    assert sy.a1a.shape == sy.a2.shape == sy.b1.shape == sy.b2a.shape == (3,)
    assert sy.a1b.shape == sy.b2b.shape == (12,)


def test_noiseless_replay_exact(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=1)
    assert replay_residual(record) < 1e-11


def test_noisy_replay_exact(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=1, noise_power=0.1, noise_seed=4)
    assert replay_residual(record) < 1e-11


def test_silent_transmitters(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=2)
    assert np.all(record.x[(2, Phase.I)] == 0)
    assert np.all(record.x[(1, Phase.II)] == 0)


def test_noise_is_recorded_and_scales(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=3, noise_power=0.25, noise_seed=1)
    z = np.concatenate([record.z[(1, p)] for p in Phase])
    assert np.var(z) == pytest.approx(0.25, rel=0.25)
    clean = make_record(cfg32, plan32, seed=3)
    for p in Phase:
        assert np.allclose(record.clean_y(1, p), clean.y[(1, p)], atol=1e-12)


def test_with_noise_reuses_transmissions(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=4)
    noisy = with_noise(record, 0.01, noise_seed=9)
    assert noisy.noise_power == 0.01
    for key in record.x:
        assert np.array_equal(noisy.x[key], record.x[key])
    rerun = run_scheme(record.trace, record.precoders, record.symbols, record.plan,
                       noise_power=0.01, noise_seed=9)
    for key in record.y:
        assert np.allclose(noisy.y[key], rerun.y[key], atol=1e-12)


def test_per_slot_transmit_structure(cfg32, plan32):
    # slot k of each phase equals its per-slot definition, noiseless mode
    record = make_record(cfg32, plan32, seed=5)
    sy, pc, tr = record.symbols, record.precoders, record.trace
    m = 3
    y1_i = record.y[(1, Phase.I)]
    x3 = record.x[(1, Phase.III)]
    for k in range(1):
        want = sy.a1a[k * m : (k + 1) * m] + pc.phi_slice(k) @ y1_i
        assert np.allclose(x3[k * m : (k + 1) * m], want, atol=1e-12)
    # phase IV, transmitter 2 re-encodes the other receiver's phase-III mixture
    mix = tr.phase_block(2, 2, Phase.III, record.plan) @ record.x[(2, Phase.III)]
    x4 = record.x[(2, Phase.IV)]
    for k in range(4):
        assert np.allclose(x4[k * m : (k + 1) * m], pc.gamma_slice(k) @ mix, atol=1e-12)
    # phase VII, transmitter 1, per-slot theta spreading over N antennas
    inner = (
        tr.phase_block(2, 2, Phase.IV, record.plan)
        @ pc.gamma
        @ tr.phase_block(1, 2, Phase.III, record.plan)
        @ record.x[(1, Phase.III)]
        - tr.phase_block(1, 2, Phase.IV, record.plan) @ record.x[(1, Phase.IV)]
    )
    x7 = record.x[(1, Phase.VII)]
    n = 2
    for k in range(4):
        assert np.allclose(x7[k * n : (k + 1) * n], pc.theta_slice(k) @ inner, atol=1e-11)


def test_zero_data_transmissions_linear_in_an(cfg32, plan32):
    trace, pc, sy = make_setup(cfg32, plan32, seed=6)
    zeros = {name: np.zeros_like(getattr(sy, name))
             for name in ("a1a", "a1b", "a2", "b1", "b2a", "b2b")}
    sy0 = SymbolSet(u1=sy.u1, u2=sy.u2, **zeros)
    record = run_scheme(trace, pc, sy0, plan32)
    h11_i = trace.phase_block(1, 1, Phase.I, plan32)
    h21_ii = trace.phase_block(2, 1, Phase.II, plan32)
    assert np.allclose(record.x[(1, Phase.III)], pc.phi @ h11_i @ sy.u1, atol=1e-12)
    assert np.allclose(record.x[(2, Phase.III)], pc.phi @ h21_ii @ sy.u2, atol=1e-12)
    assert np.allclose(record.x[(1, Phase.IV)], pc.omega @ h11_i @ sy.u1, atol=1e-12)
    # doubling the AN doubles every later transmission
    sy2 = SymbolSet(u1=2 * sy.u1, u2=2 * sy.u2, **zeros)
    double = run_scheme(trace, pc, sy2, plan32)
    for i in (1, 2):
        for p in (Phase.III, Phase.IV, Phase.V, Phase.VI, Phase.VII):
            assert np.allclose(double.x[(i, p)], 2 * record.x[(i, p)], atol=1e-10)


def test_causality_audit_clean(cfg32, plan32):
    record = make_record(cfg32, plan32, seed=7)
    audit = record.trace.audit
    assert audit.accesses
    assert not audit.violations()


def test_degenerate_plan_runs():
    cfg = AntennaConfig(4, 2)
    plan = phase_plan(6, 0, 6, 6)
    record = make_record(cfg, plan, seed=8)
    assert record.x[(1, Phase.III)].shape == (0,)
    assert record.y[(2, Phase.V)].shape == (0,)
    # with no phase-III signal to re-encode, transmitter 2 is silent in phase IV
    assert np.all(record.x[(2, Phase.IV)] == 0)
    assert record.x[(1, Phase.VII)].shape == (12,)
    assert replay_residual(record) < 1e-11
    assert not record.trace.audit.violations()


class TestSwapRoles:
    def test_involution(self, cfg32, plan32):
        record = make_record(cfg32, plan32, seed=9, noise_power=0.05, noise_seed=2)
        double = swap_roles(swap_roles(record))
        assert np.array_equal(double.trace.h, record.trace.h)
        for key in record.x:
            assert np.array_equal(double.x[key], record.x[key])
        for key in record.y:
            assert np.array_equal(double.y[key], record.y[key])

    def test_phase_correspondence(self, cfg32, plan32):
        record = make_record(cfg32, plan32, seed=10, noise_power=0.05, noise_seed=3)
        swapped = swap_roles(record)
        pairs = {Phase.I: Phase.II, Phase.III: Phase.V, Phase.IV: Phase.VI, Phase.VII: Phase.VII}
        for dst, src in pairs.items():
            assert np.array_equal(swapped.x[(1, dst)], record.x[(2, src)])
            assert np.array_equal(swapped.y[(1, dst)], record.y[(2, src)])
            assert np.array_equal(swapped.z[(2, dst)], record.z[(1, src)])

    def test_symbol_relabeling(self, cfg32, plan32):
        record = make_record(cfg32, plan32, seed=11)
        swapped = swap_roles(record)
        sy, sw = record.symbols, swapped.symbols
        assert np.array_equal(sw.u1, sy.u2)
        assert np.array_equal(sw.a1a, sy.b2a)
        assert np.array_equal(sw.a1b, sy.b2b)
        assert np.array_equal(sw.a2, sy.b1)

    def test_swapped_record_replays(self, cfg32, plan32):
        record = make_record(cfg32, plan32, seed=12, noise_power=0.01, noise_seed=5)
        assert replay_residual(swap_roles(record)) < 1e-11

    def test_swapped_schedule_slot_map(self, cfg32, plan32):
        record = make_record(cfg32, plan32, seed=13)
        swapped = swap_roles(record)
        # swapped phase III slots carry the original phase V channel, indices flipped
        t_dst = phase_slots(Phase.III, record.plan)[0]
        t_src = phase_slots(Phase.V, record.plan)[0]
        assert np.array_equal(swapped.trace.matrix(1, 2, t_dst), record.trace.matrix(2, 1, t_src))
