#!/usr/bin/env python3
"""Regenerate the [material] sections of data/materials.db.

Optical constants come from xraydb (Chantler f1/f2 tables for delta,
Elam photoabsorption plus scattering for beta). Densities are the xraydb
elemental defaults except amorphous sputtered carbon, which is taken at
2.0 g/cm^3.

    pip install xraydb
    python3 tools/gen_optical_constants.py > /tmp/materials_section.db
"""
import xraydb

ENERGIES_KEV = {
    "Fe57": 14.4125,
    "Sn119": 23.8795,
    "Tm169": 8.41017,
    "Os187": 9.756,
}

DENSITIES = {
    "Pt": xraydb.atomic_density("Pt"),
    "Pd": xraydb.atomic_density("Pd"),
    "C": 2.0,
    "Fe": xraydb.atomic_density("Fe"),
    "Sn": xraydb.atomic_density("Sn"),
    "Tm": xraydb.atomic_density("Tm"),
    "Os": xraydb.atomic_density("Os"),
}

print(f"# generated by tools/gen_optical_constants.py with xraydb {xraydb.__version__}")
for name, rho in DENSITIES.items():
    for iso, e_kev in ENERGIES_KEV.items():
        delta, beta, _ = xraydb.xray_delta_beta(name, rho, e_kev * 1e3)
        print()
        print(f"# {name} at {iso} line, rho = {rho:g} g/cm^3")
        print("[material]")
        print(f"name={name}")
        print(f"energy_keV={e_kev}")
        print(f"delta={delta:.6e}")
        print(f"beta={beta:.6e}")
