"""Family drivers, transfer systems and the (2,3) reduction table."""

from c2kit.recurrences.families import FamilySpec, UnsupportedRoute, c2_sequence, mirror_cancellation
from c2kit.recurrences.fit import fit_recurrence, fit_values
from c2kit.recurrences.table23 import table23_seeds, table23_sequence, table23_system
from c2kit.recurrences.transfer import (
    RecurrenceSystem,
    base_seeds,
    build_transfer,
    minimize,
    run_transfer,
    seed_states,
)

__all__ = [
    "FamilySpec",
    "RecurrenceSystem",
    "UnsupportedRoute",
    "base_seeds",
    "build_transfer",
    "c2_sequence",
    "fit_recurrence",
    "fit_values",
    "minimize",
    "mirror_cancellation",
    "run_transfer",
    "seed_states",
    "table23_seeds",
    "table23_sequence",
    "table23_system",
]
