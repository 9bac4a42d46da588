"""feedgate: adaptive regulation between telemetry streams and a render surface."""

from .buffer import BufferedEvent, EnqueueOutcome, RingBuffer
from .compactor import BurstCompactor, ClusterNode, ClusterSummary, expand
from .config import AppConfig, ConfigError, load_config, load_model_file
from .engine import ExternalSignals, PipelineEngine
from .events import EventValidationError, PriorityClass, ScoredEvent, TelemetryEvent
from .policy import (
    AnalystState,
    CyclePlan,
    Orchestrator,
    PendingItem,
    RenderPolicy,
    SystemSignals,
    derive_analyst_state,
    plan_cycle,
    select_policy,
)
from .scoring import (
    ActorFrequencyTracker,
    FeatureVector,
    InvestigationContext,
    ScorerModel,
    classify,
    extract_features,
    score_event,
)
from .sim import (
    CostModel,
    MetricsReport,
    Strategy,
    SustainCriteria,
    compare_strategies,
    find_max_sustainable,
    run_simulation,
)
from .sink import RecordingSink, RenderCommand, VisualStyle, style_for
from .workload import AnalystScript, BurstSpec, WorkloadSpec, generate_stream

__all__ = [
    "AnalystScript",
    "AnalystState",
    "AppConfig",
    "ActorFrequencyTracker",
    "BufferedEvent",
    "BurstCompactor",
    "BurstSpec",
    "ClusterNode",
    "ClusterSummary",
    "ConfigError",
    "CostModel",
    "CyclePlan",
    "EnqueueOutcome",
    "EventValidationError",
    "ExternalSignals",
    "FeatureVector",
    "InvestigationContext",
    "MetricsReport",
    "Orchestrator",
    "PendingItem",
    "PipelineEngine",
    "PriorityClass",
    "RecordingSink",
    "RenderCommand",
    "RenderPolicy",
    "RingBuffer",
    "ScoredEvent",
    "ScorerModel",
    "Strategy",
    "SustainCriteria",
    "SystemSignals",
    "TelemetryEvent",
    "VisualStyle",
    "WorkloadSpec",
    "classify",
    "compare_strategies",
    "derive_analyst_state",
    "expand",
    "extract_features",
    "find_max_sustainable",
    "generate_stream",
    "load_config",
    "load_model_file",
    "plan_cycle",
    "run_simulation",
    "score_event",
    "select_policy",
    "style_for",
]
