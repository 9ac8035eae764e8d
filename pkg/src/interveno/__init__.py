"""interveno: epidemic intervention forecasting and scenario simulation.

Pipeline: ingest daily region CSVs (cases, testing, weather, mobility,
policy levels, small-business revenue), lag-expand into a supervised
matrix, fit a ridge + random forest + gradient boosting ensemble with
time-aware tuning, back-test out-of-time, then recursively forecast
35 days under what-if policy/mobility/testing/vaccine scenarios with
local and global explanations.
"""
__version__ = "0.1.0"
