"""Two-day post-storm comparison of both controllers (desk-size, ~2 minutes).

Run:  python3 demos/04_storm_week.py
"""

import numpy as np

from offgrid import (
    SolverOptions,
    build_scenario,
    compute_metrics,
    default_config,
    run_closed_loop,
    synthesize_weather,
)

config = default_config().replace(horizon_steps=36)
weather = synthesize_weather(3, "post-storm", seed=7)
scenario = build_scenario(weather, config, days=2)
options = SolverOptions(rel_gap_limit=0.01, time_limit=1.0)
band = (config.fridge.t_min_c, config.fridge.t_max_c)

results = {}
for controller in ("baseline", "proposed"):
    trace = run_closed_loop(controller, scenario, config, options)
    results[controller] = (trace, compute_metrics(trace, band))
    print(f"{controller}: done ({len(trace)} steps)")

print(f"\n{'metric':40s} {'baseline':>10} {'proposed':>10}")
b, p = results["baseline"][1], results["proposed"][1]
print(f"{'fridge violation (h/day)':40s} {b.temp_violation_hours_per_day:10.3f} "
      f"{p.temp_violation_hours_per_day:10.3f}")
print(f"{'secondary not served (% time)':40s} {b.secondary_unserved_pct:10.2f} "
      f"{p.secondary_unserved_pct:10.2f}")
print(f"{'primary not served (h/day)':40s} {b.primary_unserved_hours_per_day:10.3f} "
      f"{p.primary_unserved_hours_per_day:10.3f}")

for name, (trace, _) in results.items():
    temps = np.array([r.t_fr_end for r in trace])
    print(f"\n{name}: fridge temperature spark over day 1 "
          f"(min {temps.min():.1f}, max {temps.max():.1f} degC)")
    bins = " .:-=+*#%@"
    lo, hi = -2.0, 14.0
    line = "".join(
        bins[int(np.clip((t - lo) / (hi - lo) * (len(bins) - 1), 0, len(bins) - 1))]
        for t in temps[0:144:2]
    )
    print("  " + line)
