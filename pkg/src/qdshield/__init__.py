"""Two-qubit dephasing dynamics under continuous decoupling drives.

Integrates the weak-coupling interaction-picture master equation for two
qubits in independent ohmic boson baths, with an optional continuous sigma_x
drive that shields quantum correlations, and evaluates superfidelity,
concurrence, and quantum discord along the trajectories.
"""

__version__ = "0.1.0"

from .bath import BathParams, KernelMoments, advance_moments, kernel_D, occupation, spectral_density, trigamma
from .control import ControlSchedule, decoupling_residual, lambda_coefficients, u0_two_qubit
from .engine import (
    MomentState,
    SimulationConfig,
    Trajectory,
    dephasing_oracle_coherence,
    evolve,
    master_rhs,
    memory_operator,
)
from .errors import (
    IntegrationAbortError,
    InternalConsistencyError,
    NumericalFailureError,
    PositivityViolationError,
    StateCorruptionError,
)
from .measures import (
    DiscordResult,
    MeasurementBasis,
    OptimizerSettings,
    bell_diagonal_discord_oracle,
    bell_diagonal_state,
    classical_correlation,
    concurrence,
    correlation_vector,
    mutual_information,
    quantum_discord,
    superfidelity,
    von_neumann_entropy,
)
from .operators import (
    IDENTITY_2,
    IDENTITY_4,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    general_eigenvalues,
    hermitian_eigensystem,
    partial_trace,
    su2_exponential,
    tensor_product,
    validate_density_matrix,
)
from .scenarios import (
    RunRecord,
    Scenario,
    build_initial_state,
    effectiveness_time,
    run_figure,
    run_scenario,
    sudden_transition_time,
    temperature_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
