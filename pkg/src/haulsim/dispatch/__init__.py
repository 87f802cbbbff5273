from .base import (
    DispatchPolicy,
    DumpSiteView,
    LoadSiteView,
    MineSnapshot,
    RoadView,
    ShovelView,
    SpotView,
    available_policies,
    get_policy,
    register_policy,
)
from .baselines import (
    BASELINE_NAMES,
    FixedGroupDispatcher,
    NaiveDispatcher,
    NearestDispatcher,
    RandomDispatcher,
    SPTFDispatcher,
    SQDispatcher,
    fixed_group_assign,
    productivity_ratio,
)

__all__ = [
    "BASELINE_NAMES",
    "DispatchPolicy",
    "DumpSiteView",
    "FixedGroupDispatcher",
    "LoadSiteView",
    "MineSnapshot",
    "NaiveDispatcher",
    "NearestDispatcher",
    "RandomDispatcher",
    "RoadView",
    "SPTFDispatcher",
    "SQDispatcher",
    "ShovelView",
    "SpotView",
    "available_policies",
    "fixed_group_assign",
    "get_policy",
    "productivity_ratio",
    "register_policy",
]
