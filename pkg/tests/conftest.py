import numpy as np
import pytest

from xsdof import (
    AntennaConfig,
    generate_precoders,
    generate_symbols,
    generate_trace,
    optimal_phase_plan,
    phase_plan,
    run_scheme,
)


@pytest.fixture
def cfg32():
    return AntennaConfig(3, 2)


@pytest.fixture
def plan32():
    return phase_plan(5, 1, 4, 4)


def make_setup(cfg, plan, seed):
    """Trace, precoders and symbols for one integerized plan."""
    plan = plan.integerized()
    total = int(plan.total_duration())
    trace = generate_trace(cfg, total, seed)
    pc = generate_precoders(plan, cfg, seed)
    sy = generate_symbols(plan, cfg, seed)
    return trace, pc, sy


def make_record(cfg, plan, seed, noise_power=0.0, noise_seed=0):
    plan = plan.integerized()
    trace, pc, sy = make_setup(cfg, plan, seed)
    return run_scheme(trace, pc, sy, plan, noise_power=noise_power, noise_seed=noise_seed)


def null_space(matrix, rtol=1e-10):
    """Orthonormal basis of the right null space (SVD based)."""
    a = np.asarray(matrix)
    if min(a.shape) == 0:
        return np.eye(a.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(a)
    cutoff = rtol * (s[0] if len(s) else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    return vh[rank:].conj().T
