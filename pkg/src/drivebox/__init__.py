"""drivebox: a batched 2D driving simulator and RL environment.

Rectangle agents with pluggable kinematic models move over triangle-mesh
maps; the package detects infractions (collision, off-road, wrong-way,
red-light crossing), renders egocentric birdview frames, mocks the
INITIALIZE/DRIVE behavior service, and exposes a waypoint-following RL task
locally and over a JSON-lines socket protocol.
"""
from . import errors
from ._kernels import BACKEND as KERNEL_BACKEND
from .env import DrivingEnv, StepResult, compute_reward
from .geometry import OrientedRect, Pose2, normalize_angle, rects_overlap
from .infraction import (
    InfractionReport,
    check_collision,
    check_offroad,
    check_traffic_light,
    check_wrong_way,
    infraction_report,
)
from .kinematics import (
    AgentAttributes,
    BicycleModel,
    TeleportingModel,
    UnconstrainedModel,
    jacobian_check,
)
from .maps import MapBundle, load_bundled_map, load_map, save_map
from .npc import (
    DriveRequest,
    DriveResponse,
    InitializeRequest,
    LocalMockPolicy,
    NpcController,
    RemoteStub,
    ReplayPolicy,
    apply_npc_states,
    read_replay_log,
    write_replay_log,
)
from .renderer import BirdviewFrame, ColorMap, RenderConfig, read_ppm, render, write_ppm
from .scenario import RewardConfig, Scenario, load_bundled_scenario, load_scenario
from .world import (
    AgentBatch,
    BoundaryRemoval,
    FrameRecorder,
    InfractionMonitor,
    ReplayController,
    Simulator,
    TrafficControl,
    WorldState,
    advance_controls,
    lift,
    world_step,
    wrap,
)

__version__ = "0.1.0"

__all__ = [
    "AgentAttributes",
    "AgentBatch",
    "BicycleModel",
    "BirdviewFrame",
    "BoundaryRemoval",
    "ColorMap",
    "DriveRequest",
    "DriveResponse",
    "DrivingEnv",
    "FrameRecorder",
    "InfractionMonitor",
    "InfractionReport",
    "InitializeRequest",
    "KERNEL_BACKEND",
    "LocalMockPolicy",
    "MapBundle",
    "NpcController",
    "OrientedRect",
    "Pose2",
    "RemoteStub",
    "RenderConfig",
    "ReplayController",
    "ReplayPolicy",
    "RewardConfig",
    "Scenario",
    "Simulator",
    "StepResult",
    "TeleportingModel",
    "TrafficControl",
    "UnconstrainedModel",
    "WorldState",
    "advance_controls",
    "apply_npc_states",
    "check_collision",
    "check_offroad",
    "check_traffic_light",
    "check_wrong_way",
    "compute_reward",
    "errors",
    "infraction_report",
    "jacobian_check",
    "lift",
    "load_bundled_map",
    "load_bundled_scenario",
    "load_map",
    "load_scenario",
    "normalize_angle",
    "read_ppm",
    "read_replay_log",
    "rects_overlap",
    "render",
    "save_map",
    "wrap",
    "world_step",
    "write_ppm",
    "write_replay_log",
]
