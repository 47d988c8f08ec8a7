"""
A small Monte Carlo comparison
==============================

Twenty trials of the benchmark design: a 200-point step target, ten
sources of 400 points, eight of them informative. Transfer with the
informative set beats a single source, which beats the target alone.
Set PCTRANSFER_WORKERS to use several processes.
"""

from pctransfer.simulation import (
    ConfigurationSpec,
    ScenarioSpec,
    SelectionSettings,
    format_summary,
    run_monte_carlo,
    summarize,
)

scenario = ScenarioSpec(gamma=0.5, n0=200, sigma=0.5)
config = ConfigurationSpec(informative=tuple(range(1, 9)), alpha=0.2, H=0.15, K=10)

# fewer permutations than the default keep this quick
selection = SelectionSettings(screen_width=50, B=200, q=0.995)
methods = ["l0", "l0-T-1", "l0-T-Ahat", "l0-T-A", "l0-T-K"]
results = run_monte_carlo(scenario, config, methods, trials=20, base_seed=0, selection=selection)
print(format_summary(summarize(results)))
