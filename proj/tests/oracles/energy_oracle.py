#!/usr/bin/env python3
"""Standalone monthly energy balance, written separately from the C++ code.

Used once to freeze the golden numbers in test_climate.cpp:
    python3 tests/oracles/energy_oracle.py content/content_pack.json
"""
import json
import sys

DAYS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def annual(pack, location, orientation, wall_u, window_u, shgc, sp_h, sp_c, shades, cooling):
    room = pack["room"]
    loc = next(l for l in pack["climate"]["locations"] if l["id"] == location)
    f_or = pack["climate"]["orientation_factors"][orientation]
    h = wall_u * room["opaque_wall_area"] + window_u * room["window_area"] + 0.34 * room["air_change_rate"] * room["volume"]
    heat = cool = 0.0
    for m in range(12):
        t = DAYS[m] * 24.0
        te = loc["temperature"][m]
        q_sol = shgc * room["window_area"] * loc["irradiance"][m] * f_or * (0.3 if shades else 1.0)
        q_gain = (room["internal_gains"] * room["floor_area"] + q_sol) * t
        heat += max(0.0, h * max(0.0, sp_h - te) * t - 0.9 * q_gain)
        if cooling:
            gain = q_gain + h * max(0.0, te - sp_c) * t
            cool += max(0.0, gain - 0.9 * h * max(0.0, sp_c - te) * t)
    a = room["floor_area"] * 1000.0
    return heat / a, cool / a


if __name__ == "__main__":
    pack = json.load(open(sys.argv[1]))
    cases = [
        ("Graz", "S", 0.21, 1.1, 0.6, 21, 25, False, True),
        ("Helsinki", "SE", 0.35, 2.0, 0.8, 22, 25, False, True),
        ("Athens", "W", 1.5, 2.8, 0.7, 25, 27, True, True),
    ]
    for c in cases:
        hh, cc = annual(pack, *c)
        print(c, repr(hh), repr(cc))
