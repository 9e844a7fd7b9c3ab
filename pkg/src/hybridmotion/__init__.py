"""Loop-shaped stiff and impedance motion controllers with threshold-based
reshaping, plus the transfer-function algebra and contact simulation behind
them."""

from .analysis import (
    BodeGrid,
    FrequencySample,
    IdentificationError,
    StepMetrics,
    bode_magnitude,
    identify_first_order_integrator,
    step_metrics,
    synthetic_frf,
    trace_step_metrics,
)
from .ratfun import (
    ImproperError,
    PoleEvaluationError,
    Polynomial,
    RationalTF,
    RootFindingError,
    StateSpaceModel,
    TransferFunctionError,
    discretize_tustin,
    format_tf,
    parse_tf,
    poly_roots,
    ss_to_tf,
    tf_add,
    tf_evaluate,
    tf_feedback,
    tf_invert,
    tf_is_stable,
    tf_multiply,
    tf_to_state_space,
)
from .simcore import (
    ContactEnvironment,
    DiscreteController,
    HybridSupervisor,
    Mode,
    PlantParams,
    PlantState,
    Scenario,
    SimulationError,
    TraceRecord,
    contact_force,
    controller_step,
    paper_scenario,
    plant_step,
    run_scenario,
    supervisor_step,
)
from .synthesis import (
    EnvironmentImpedance,
    PidGains,
    ReshapeSpec,
    SoftController,
    control_sensitivity,
    impedance_tf,
    make_experimental_soft,
    make_pid,
    make_stiff_loopshape,
    make_viscous_impedance,
    nominal_plant,
    sensitivity,
    stiffness_from_impedance,
    target_sensitivity,
)

__version__ = "0.1.0"
