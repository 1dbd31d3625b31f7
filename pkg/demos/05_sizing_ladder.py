"""Standalone sizing arithmetic and the study's size/cost ladder.

Run:  python3 demos/05_sizing_ladder.py
"""

import dataclasses

from offgrid import SizingSpec, size_ladder, size_system

spec = SizingSpec()
print("sizing assumptions (all tunable on the spec):")
for f in dataclasses.fields(spec):
    print(f"  {f.name:22s} {getattr(spec, f.name)}")

size = size_system(spec)
print(f"\nresult: {size.describe()}, "
      f"{size.n_battery_strings} string(s) of {size.n_battery_series} units, "
      f"${size.total_cost:.0f}")

print("\nmore storage days:")
for days in (1.0, 2.0, 3.0):
    s = size_system(dataclasses.replace(spec, storage_days=days))
    print(f"  {days:.0f} day(s): {s.describe():32s} ${s.total_cost:.0f}")

print("\nthe study ladder (panels / units are fixed catalog entries):")
for s in size_ladder():
    print(f"  {s.label}: {s.describe():32s} ${s.total_cost:.0f}")
