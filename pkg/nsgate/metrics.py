from prometheus_client import Counter, Histogram

INTEGRATIONS_TOTAL = Counter(
    "nsgate_integrations_total", "Master-equation integrations completed"
)
INTEGRATION_DURATION_SECONDS = Histogram(
    "nsgate_integration_duration_seconds", "Wall time of one integration, step doubling included"
)
SWEEP_POINTS_TOTAL = Counter(
    "nsgate_sweep_points_total", "Fidelity sweep points evaluated"
)
VERIFY_CHECKS_TOTAL = Counter(
    "nsgate_verify_checks_total", "Verification battery checks run", ["result"]
)
GATE_RUNS_TOTAL = Counter(
    "nsgate_gate_runs_total", "Gate synthesis and simulation requests"
)
