"""xsdof: a desk-scale laboratory for secure degrees-of-freedom on the
two-user MIMO X channel with delayed transmitter-side CSI.

The package has two layers:

* an exact layer (`params`) that evaluates the achievable sum-SDoF, the
  optimal phase durations, and the security constraints in rational
  arithmetic, and
* a simulation layer (`channel`, `precoding`, `scheme`, `analysis`,
  `decoder`) that runs the seven-phase artificial-noise scheme on random
  channel draws, certifies the rank claims behind decodability and
  security numerically, evaluates the Gaussian leakage proxy, and decodes
  at finite SNR.

`cli` exposes the whole laboratory as the ``xsdof`` command.
"""

from .params import (
    AntennaConfig,
    ConstraintReport,
    PhasePlan,
    Regime,
    RegimeError,
    antenna_threshold,
    ceil_threshold,
    classify_regime,
    optimal_phase_plan,
    phase_plan,
    scheme_sdof,
    sdof_lower_bound,
    security_constraints_ok,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    complex_gaussian,
    logdet_capacity,
    numeric_rank,
    rng_from_seed,
    spawn_seeds,
)
from .channel import (
    CausalityError,
    ChannelTrace,
    CsiAudit,
    Phase,
    generate_trace,
    load_trace,
    phase_slots,
    save_trace,
)
from .precoding import PrecoderSet, generate_precoders, load_precoders, save_precoders
from .scheme import (
    SymbolSet,
    TransmissionRecord,
    generate_symbols,
    replay_residual,
    run_scheme,
    swap_roles,
    with_noise,
)
from .analysis import (
    DecodingSystem,
    SecuritySystem,
    assemble_H1,
    assemble_security,
    leakage_logdet,
    leakage_prelog,
    rank_A_formula,
    rank_B_formula,
    rank_H1_formula,
)
from .decoder import DecodeResult, RankDeficiencyError, build_lhs, decode

__version__ = "0.1.0"
