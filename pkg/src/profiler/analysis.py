"""Turn lifetime records into pretenuring recommendations."""

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Any

import numpy as np

from src.profiler.profiler import LifetimeProfiler
from src.utils.errors import InsufficientDataError
from src.utils.logger import get_logger

logger = get_logger(__name__)

LONG_LIVED_LABEL = "long-lived"


@dataclass
class SiteRationale:
    """Why a site was (or was not) recommended."""
    site_id: str
    alloc_count: int
    alloc_bytes: int
    completed: int
    censored: int
    median_lifetime: Optional[float] = None
    median_death_epoch: Optional[float] = None
    cohort: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SiteGroup:
    """Sites whose objects should share one generation."""
    label: str
    sites: List[str]
    median_death_epoch: Optional[float] = None


@dataclass
class Recommendation:
    groups: List[SiteGroup] = field(default_factory=list)
    pretenure_sites: List[str] = field(default_factory=list)
    rationale: Dict[str, SiteRationale] = field(default_factory=dict)
    epoch: int = 0

    def group_of(self, site_id: str) -> Optional[str]:
        for group in self.groups:
            if site_id in group.sites:
                return group.label
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "groups": [asdict(group) for group in self.groups],
            "pretenure_sites": list(self.pretenure_sites),
            "rationale": {site: r.to_dict() for site, r in sorted(self.rationale.items())},
        }


def group_by_death(candidates: Dict[str, float], tolerance: int) -> List[List[str]]:
    """Greedy grouping over sorted median death epochs.

    A group is anchored at its earliest member; a site joins while it dies within
    ``tolerance`` epochs of the anchor.
    """
    ordered = sorted(candidates.items(), key=lambda item: (item[1], item[0]))
    groups: List[List[str]] = []
    anchor = None
    for site_id, death in ordered:
        if anchor is None or death - anchor > tolerance:
            groups.append([site_id])
            anchor = death
        else:
            groups[-1].append(site_id)
    return groups


def analyze(profiler: LifetimeProfiler, long_lived_epochs: int = 4, cohort_tolerance: int = 2) -> Recommendation:
    """Recommend which sites to pretenure and how to group them into generations.

    Medians use completed records only. A site with no completed record whose
    objects are all at least ``long_lived_epochs`` old joins the long-lived group.
    """
    if profiler.collections_observed == 0:
        raise InsufficientDataError("no completed collection has been observed")

    by_site: Dict[str, List] = {}
    for record in profiler.records:
        by_site.setdefault(record.site_id, []).append(record)

    current = profiler.epoch
    rationale: Dict[str, SiteRationale] = {}
    candidates: Dict[str, float] = {}
    long_lived: List[str] = []

    for site_id in sorted(by_site):
        records = by_site[site_id]
        site = profiler.sites[site_id]
        done = [r for r in records if r.completed]
        entry = SiteRationale(
            site_id=site_id,
            alloc_count=site.alloc_count,
            alloc_bytes=site.alloc_bytes,
            completed=len(done),
            censored=len(records) - len(done),
        )
        rationale[site_id] = entry
        if done:
            entry.median_lifetime = float(np.median([r.lifetime for r in done]))
            entry.median_death_epoch = float(np.median([r.death_epoch for r in done]))
            if entry.median_lifetime >= long_lived_epochs:
                candidates[site_id] = entry.median_death_epoch
        elif min(current - r.birth_epoch for r in records) >= long_lived_epochs:
            long_lived.append(site_id)

    recommendation = Recommendation(epoch=current, rationale=rationale)
    for index, sites in enumerate(group_by_death(candidates, cohort_tolerance), start=1):
        label = f"cohort-{index}"
        for site_id in sites:
            rationale[site_id].cohort = label
        recommendation.groups.append(SiteGroup(label, sites, candidates[sites[0]]))
    if long_lived:
        for site_id in long_lived:
            rationale[site_id].cohort = LONG_LIVED_LABEL
        recommendation.groups.append(SiteGroup(LONG_LIVED_LABEL, long_lived))

    recommendation.pretenure_sites = sorted(site for group in recommendation.groups for site in group.sites)
    logger.info(
        f"Analyzed {len(by_site)} sites: {len(recommendation.pretenure_sites)} to pretenure "
        f"in {len(recommendation.groups)} generations"
    )
    return recommendation
