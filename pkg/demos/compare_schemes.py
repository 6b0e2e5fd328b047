"""Compare the three array schemes on the desk-scale scenario.

Run with ``python3 demos/compare_schemes.py``. Takes a few seconds.
"""
import warnings
from pathlib import Path

from leoma.cli import prepare
from leoma.scenario import parse_scenario
from leoma.solver import optimize, power_gain_metrics, to_db

spec = parse_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "desk.json")
_, slots, _ = prepare(spec)
station = spec.station()
print(f"{len(slots)} slots, {sum(not s.servable for s in slots)} with no visible satellite")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    results = {scheme: optimize(slots, station, spec.solver(scheme)) for scheme in spec.schemes}

for scheme, res in results.items():
    desired, interference = power_gain_metrics(res, slots, station)
    print(
        f"{scheme:5s} rate {res.avg_rate:.4f} bps/Hz after {res.iterations:3d} iterations, "
        f"signal {to_db(desired):7.2f} dB, interference {to_db(interference):8.2f} dB"
    )

# the moved antennas no longer sit on a lattice
print("MA layout in wavelengths:")
print((results["MA"].layout / station.wavelength).round(3))
