"""Python bindings for the pinching-antenna sum-rate optimiser."""

from ._core import (
    BudgetExceeded,
    InvalidConfig,
    SystemConfig,
    channel_gain_map,
    dbm_to_watts,
    drop_users,
    grad_check,
    oracle_check,
    solve,
    sweep,
    user_rates,
    watts_to_dbm,
)

__all__ = [
    "BudgetExceeded",
    "InvalidConfig",
    "SystemConfig",
    "channel_gain_map",
    "dbm_to_watts",
    "drop_users",
    "grad_check",
    "oracle_check",
    "solve",
    "sweep",
    "user_rates",
    "watts_to_dbm",
]
