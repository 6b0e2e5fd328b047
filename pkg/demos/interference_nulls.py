"""Show how far each scheme suppresses the interferers in one busy slot.

Run with ``python3 demos/interference_nulls.py``.
"""
import warnings
from pathlib import Path

import numpy as np

from leoma.channel import beam_pattern, direction_angles
from leoma.cli import prepare
from leoma.scenario import parse_scenario
from leoma.solver import optimize

spec = parse_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "desk.json")
_, slots, _ = prepare(spec)
station = spec.station()
m = max(range(len(slots)), key=lambda i: len(slots[i].interferers))
slot = slots[m]
print(f"slot {m + 1}: serving satellite plus {len(slot.interferers)} interferers")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    for scheme in spec.schemes:
        res = optimize(slots, station, spec.solver(scheme))
        w = res.weights[m] / np.linalg.norm(res.weights[m])
        gain = beam_pattern(res.layout, w, slot.wave_vectors)
        print(f"\n{scheme}")
        for link, g in zip((slot.serving, *slot.interferers), gain):
            el, az = np.degrees(direction_angles(link.a_eff, station.wavelength))
            role = "serving " if link is slot.serving else "interfer"
            print(f"  {role} elev {el:5.1f} azim {az:7.1f}  array gain {10 * np.log10(g + 1e-300):7.2f} dB")
