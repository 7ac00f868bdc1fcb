"""
Driving runs from the command line
==================================

The ``chemoflux`` command reads an INI configuration. This script writes one,
then calls the same entry point the console script uses.
"""
import json
import tempfile
from pathlib import Path

from chemoflux.cli import main
from chemoflux.output import read_series

CONFIG = """
[model]
m = 1
p = 1
q = 2
chi = 0.1
xi = 1
alpha = 0.1
beta = 1
gamma = 1
delta = 1

[grid]
extent = 1.0
cells = 128

[initial]
profile = two-bump
amplitude = 1.0
offset = 0.2

[output]
snapshot_every = 100
"""

work = Path(tempfile.mkdtemp())
config = work / "run.ini"
config.write_text(CONFIG)

print("check-conditions exit code:", main(["--quiet", "check-conditions", str(config)]))
print("simulate exit code:", main(["simulate", str(config)]))

out = work / "chemoflux-out"
summary = json.loads((out / "summary.json").read_text())
print("stopping reason:", summary["stopping_reason"])
print("snapshots:", sorted(p.name for p in out.glob("u_*.dat")))
series = read_series(out / "series.csv")
print(f"{len(series['t'])} samples, energy {series['phi_energy'][0]:.4f} -> {series['phi_energy'][-1]:.2e}")

# Exit code 1 flags invalid input, with one line per problem.
config.write_text(CONFIG.replace("chi = 0.1", "chi = -1\nspeed = 3"))
print("invalid config exit code:", main(["simulate", str(config)]))
