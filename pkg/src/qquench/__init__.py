"""Phase-quench waveform measurement simulator and reconstructor.

Quench one time-bin of a complex waveform by a phase factor, project onto a
fixed post-selection state, and invert the measured probability responses
back into the full complex amplitude envelope. Includes a seeded Gaussian
noise model, fidelity scoring, depth sweeps, CSV/JSON plumbing, and a CLI.
"""

from ._kernels import available_backends, get_backend, set_backend
from .errors import (
    DegenerateBaselineError,
    DimensionMismatchError,
    IncompleteDepthsError,
    IndexOutOfRangeError,
    NonFiniteInputError,
    QuenchError,
    SingularDepthError,
    UnknownWaveformError,
    ZeroVectorError,
)
from .fidelity import (
    FidelityScores,
    SweepResult,
    depth_sweep,
    fidelity_amplitude,
    fidelity_overall,
    fidelity_phase,
    score_reconstruction,
)
from .io import (
    load_response_map,
    load_reconstruction,
    load_sweep_fidelity,
    load_sweep_map,
    load_waveform,
    save_reconstruction,
    save_response_map,
    save_sweep_fidelity,
    save_sweep_map,
    save_waveform,
)
from .quench import (
    NoiseModel,
    QuenchConfig,
    ResponseMap,
    ResponseRecord,
    apply_quench,
    measure_with_noise,
    projection_probability,
    response_factor,
    scan,
)
from .reconstruct import (
    ReconstructionResult,
    amplitude_nodes,
    gauge_fix,
    invert_general,
    invert_pm_halfpi,
    phase_envelope,
    reconstruct_wavefunction,
    wrap_phase,
)
from .states import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_BINS,
    WAVEFORM_NAMES,
    BasisGrid,
    PostSelector,
    WavefunctionState,
    builtin_waveform,
    dft_post_selector,
    inner_product,
    make_state,
    sample_envelope,
    uniform_post_selector,
)

__version__ = "0.1.0"

__all__ = [
    "BasisGrid",
    "DEFAULT_BINS",
    "DEFAULT_BIN_WIDTH",
    "DegenerateBaselineError",
    "DimensionMismatchError",
    "FidelityScores",
    "IncompleteDepthsError",
    "IndexOutOfRangeError",
    "NoiseModel",
    "NonFiniteInputError",
    "PostSelector",
    "QuenchConfig",
    "QuenchError",
    "ReconstructionResult",
    "ResponseMap",
    "ResponseRecord",
    "SingularDepthError",
    "SweepResult",
    "UnknownWaveformError",
    "WAVEFORM_NAMES",
    "WavefunctionState",
    "ZeroVectorError",
    "amplitude_nodes",
    "apply_quench",
    "available_backends",
    "builtin_waveform",
    "depth_sweep",
    "dft_post_selector",
    "fidelity_amplitude",
    "fidelity_overall",
    "fidelity_phase",
    "gauge_fix",
    "get_backend",
    "inner_product",
    "invert_general",
    "invert_pm_halfpi",
    "load_reconstruction",
    "load_response_map",
    "load_sweep_fidelity",
    "load_sweep_map",
    "load_waveform",
    "make_state",
    "measure_with_noise",
    "phase_envelope",
    "projection_probability",
    "reconstruct_wavefunction",
    "response_factor",
    "sample_envelope",
    "save_reconstruction",
    "save_response_map",
    "save_sweep_fidelity",
    "save_sweep_map",
    "save_waveform",
    "scan",
    "score_reconstruction",
    "set_backend",
    "uniform_post_selector",
    "wrap_phase",
]
