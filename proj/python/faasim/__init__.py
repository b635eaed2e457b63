"""Serverless worker-pool simulation and excess-energy accounting."""

from ._faasim import (
    ArrivalRecord,
    ComparisonRow,
    ComparisonSummary,
    EnergySeries,
    Error,
    Extrapolation,
    IoError,
    IsolationProfile,
    ParseError,
    SimResult,
    SimTotals,
    TimestepMetrics,
    Trace,
    TraceStats,
    ValidationError,
    break_even_idle,
    build_trace,
    builtin_profile,
    builtin_profiles,
    compare,
    energy_csv,
    excess_energy,
    extrapolate_power,
    generate_synthetic,
    integrate_power,
    load_profiles,
    min_capacity,
    parse_trace,
    simulate,
    summary_json,
    trace_stats,
    validate_trace,
)

__version__ = "0.1.0"
