"""relforge: a deterministic release-automation engine.

The engine resolves a declarative control center, computes versions from
issue metadata and tag history, plans branches and merges, maintains a
machine-readable changelog, manages SPDX licensing, and turns repository
events into ordered action plans.  It never talks to a hosting platform;
every side effect is expressed as data for a thin adapter to apply.
"""

__version__ = "0.1.0"

GENERATED_HEADER = "generated by relforge — do not edit"
