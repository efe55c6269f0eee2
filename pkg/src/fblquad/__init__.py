"""Multirotor feedback linearization with thrust-lag compensation and an
online-learned disturbance model, plus the baselines and harness used to
compare them in simulation."""
from .baselines import (
    AdaptiveEstimatorState, CascadedGains, adaptive_frequency_response, adaptive_update,
    cascaded_control, reduced_attitude_control,
)
from .config import ScenarioConfig, load_config
from .dynamics import PlantCommand, PlantParams, VehicleState, WindField, step
from .fbl import DisturbanceTriple, FblControllerState, FblGains, fbl_control
from .io import export_csv, read_csv
from .kernels import BACKEND
from .learner import DisturbanceModel, FeatureConfig, build_pair
from .metrics import MetricsSummary, compute_metrics, metrics_for_log
from .runner import RunLog, run_scenario
from .trajectories import FlatReference, StepSequence, Weave, YawInPlace

__version__ = "0.1.0"

__all__ = [
    "AdaptiveEstimatorState", "BACKEND", "CascadedGains", "DisturbanceModel", "DisturbanceTriple",
    "FblControllerState", "FblGains", "FeatureConfig", "FlatReference", "MetricsSummary",
    "PlantCommand", "PlantParams", "RunLog", "ScenarioConfig", "StepSequence", "VehicleState",
    "Weave", "WindField", "YawInPlace", "adaptive_frequency_response", "adaptive_update",
    "build_pair", "cascaded_control", "compute_metrics", "export_csv", "fbl_control",
    "load_config", "metrics_for_log", "read_csv", "reduced_attitude_control", "run_scenario",
    "step",
]
