"""MILP construction: container, base formulation and charger tiers."""

from .builder import (
    BigMBook,
    BuildOptions,
    build_budget_constraint,
    build_charging_access,
    build_costs,
    build_grid_connection,
    build_model,
    build_station_capacity,
    build_truck_energy,
    compute_bigm,
    expected_counts,
    set_objective,
)
from .ir import BINARY, CONTINUOUS, INTEGER, LinConstraint, LinExpr, ModelIR, VarRef, make_name
from .tiers import (
    ChargerCatalog,
    TierLinParams,
    build_station_deploy_indicator,
    build_tier_constraints,
    tier_indicator_exact,
    tier_probe,
)
