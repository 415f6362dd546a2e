from .profiler import AllocationSite, LifetimeRecord, LifetimeProfiler
from .analysis import Recommendation, SiteGroup, SiteRationale, analyze, group_by_death
from .report import render_text, render_json, suggested_actions

__all__ = [
    "AllocationSite",
    "LifetimeRecord",
    "LifetimeProfiler",
    "Recommendation",
    "SiteGroup",
    "SiteRationale",
    "analyze",
    "group_by_death",
    "render_text",
    "render_json",
    "suggested_actions",
]
