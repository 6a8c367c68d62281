"""gateforge: piecewise-constant pulse synthesis for universal quantum gates.

Learns control fields that realize the gate set {H, S, T_pi8, CNOT} by
gradient ascent on a phase-invariant overlap objective, extends to
dissipative (Lindblad) dynamics in superoperator form, and produces
uncertainty-robust pulses by training on a deterministic sample grid and
testing on random draws.
"""

from .grape import (
    OptimizationConfig,
    OptimizationReport,
    PropagatorChain,
    fidelity,
    gradient,
    optimize,
    phi,
    propagate,
)
from .lindblad import (
    ChannelChain,
    OpenTarget,
    choi_matrix,
    open_fidelity,
    open_gradient,
    open_optimize,
    open_target,
    propagate_channel,
)
from .linalg import expm, hs_inner, kron
from .model import (
    CollapseTerm,
    ControlTerm,
    HamiltonianModel,
    LindbladModel,
    TargetGate,
    UncertaintyChannel,
    UncertaintyModel,
    UncertaintySample,
    hamiltonian_at,
    liouvillian,
    standard_gate,
)
from .pulse import (
    ConstantInit,
    ControlSchedule,
    RandomInit,
    SinInit,
    clip,
    init_schedule,
    resample,
)
from .slc import (
    TestReport,
    augmented_fidelity,
    augmented_gradient,
    test,
    train,
    training_grid,
)
from .config import ExperimentConfig, load_config, load_preset, list_presets

__version__ = "0.1.0"
