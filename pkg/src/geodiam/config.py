"""Scale-relative numerical tolerances.

All ``*_rel`` values are multiplied by the bounding-box diagonal of the
surface in question (``deg_rel`` by its square).
"""

from dataclasses import dataclass, fields, replace

import os

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class Tolerances:
    pt_rel: float = 1e-10
    deg_rel: float = 1e-12
    conv: float = 1e-9
    iso_rel: float = 1e-8
    straight_rel: float = 1e-9
    match_rel: float = 1e-6
    chain_rel: float = 1e-6
    snap_rel: float = 1e-6
    exact_graph: float = 1e-12

    def override(self, **kwargs):
        known = {f.name for f in fields(self)}
        unknown = set(kwargs) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **kwargs)


DEFAULT_TOLERANCES = Tolerances()


def node_budget(default=DEFAULT_BUDGET):
    """Node budget for exact searches, honouring ``GEODIAM_BUDGET``."""
    raw = os.environ.get("GEODIAM_BUDGET")
    if raw is None:
        return default
    value = int(raw)
    if value <= 0:
        raise ValueError("GEODIAM_BUDGET must be positive")
    return value
