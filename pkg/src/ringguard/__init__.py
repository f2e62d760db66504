"""Simulator and kinematics library for an aerial robot carrying an actuated
expandable scissor-ring propeller guard."""

__version__ = "0.1.0"

from .actuation import (
    ActuatorMode,
    ActuatorState,
    GuardCommand,
    RackPinionSpec,
    displacement_to_theta,
    emergency_expand,
    rack_spec_for_band,
    rack_spec_for_guard,
)
from .assembly import (
    BillOfMaterials,
    GuardConfiguration,
    GuardKind,
    assemble,
    bill_of_materials,
    clearance_check,
    coverage_volume,
)
from .engine import EventLog, Metrics, Simulation, metrics_summary, run_headless
from .flight import (
    DroneParams,
    DroneState,
    PidGains,
    Trajectory,
    payload_feasibility,
    step_dynamics,
)
from .policy import (
    BoxObstacle,
    ObstacleTag,
    PlaneObstacle,
    PolicyConfig,
    SphereObstacle,
    bump_hints,
    freefall_detect,
    local_capacity,
    proximity_policy,
    resolve_contacts,
)
from .scenario import Scenario, load_scenario, scenario_from_dict, scenario_to_dict
from .scissor import (
    DeploymentState,
    RingSpec,
    calibrate_ring,
    calibrate_segment_length,
    forward_kinematics,
    inverse_kinematics,
    kink_angle_for_closure,
)

__all__ = [
    "ActuatorMode",
    "ActuatorState",
    "BillOfMaterials",
    "BoxObstacle",
    "DeploymentState",
    "DroneParams",
    "DroneState",
    "EventLog",
    "GuardCommand",
    "GuardConfiguration",
    "GuardKind",
    "Metrics",
    "ObstacleTag",
    "PidGains",
    "PlaneObstacle",
    "PolicyConfig",
    "RackPinionSpec",
    "RingSpec",
    "Scenario",
    "Simulation",
    "SphereObstacle",
    "Trajectory",
    "assemble",
    "bill_of_materials",
    "bump_hints",
    "calibrate_ring",
    "calibrate_segment_length",
    "clearance_check",
    "coverage_volume",
    "displacement_to_theta",
    "emergency_expand",
    "forward_kinematics",
    "freefall_detect",
    "inverse_kinematics",
    "kink_angle_for_closure",
    "load_scenario",
    "local_capacity",
    "metrics_summary",
    "payload_feasibility",
    "proximity_policy",
    "rack_spec_for_band",
    "rack_spec_for_guard",
    "resolve_contacts",
    "run_headless",
    "scenario_from_dict",
    "scenario_to_dict",
    "step_dynamics",
    "__version__",
]
