"""Lindblad dynamics: exact propagation, first-order error patterns, analytic channels and trajectories."""
from .schedule import (
    GateSchedule,
    LindbladChannel,
    Segment,
    embed_operator,
    lowering,
    pad_to_qubits,
    qubit_decoherence,
    three_level_relaxation,
)
from .master import (
    exact_channel_chi,
    exact_superoperator,
    liouvillian,
    propagate_density,
    schedule_unitary,
)
from .first_order import first_order_error, first_order_fidelity
from .analytic import analytic_channel, ramsey_cos_avg, ramsey_signal, thermal_rates
from .trajectories import (
    TrajectoryRecord,
    average_density,
    spanning_states,
    trajectory_channel_estimate,
    trajectory_sample,
)
