#!/usr/bin/env python3
"""Regenerates the bundled material tables under data/.

Photon: total mass attenuation coefficients (coherent included) are
tabulated reference values; the Compton share is the free-electron
Klein-Nishina cross-section, the remainder is treated as absorption
("photoelectric fraction", clamped to [0, 1]).

Electron: collision stopping power from the Bethe formula for electrons
(no density effect) with a crude radiative term, CSDA range by
trapezoidal integration of 1/S.

Alpha: Bragg-Kleeman scaled range, R = 0.56e-3 * A^(1/3) * 0.318 * E^1.5 g/cm2.

Muon: flat minimum-ionizing plateau.

Neutron: smoothed elastic cross-sections (barn) times atom density.
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
NA = 6.02214076e23
RE = 2.8179403262e-13  # cm
ME = 510.99895  # keV

MATERIALS = {
    # name: density, Z/A, Z_eff, I (eV), A_eff (alpha), muon dE/dx (MeV cm2/g), molar mass, neutron A
    "silicon": dict(rho=2.33, zoa=0.49848, z=14, i=173.0, a=28.09, mu=1.66, molar=28.086, na=28),
    "copper": dict(rho=8.96, zoa=0.45636, z=29, i=322.0, a=63.55, mu=1.403, molar=63.546, na=63),
    "lead": dict(rho=11.35, zoa=0.39575, z=82, i=823.0, a=207.2, mu=1.122, molar=207.2, na=207),
    "stainless_steel": dict(rho=7.9, zoa=0.46557, z=26, i=286.0, a=55.85, mu=1.451, molar=55.845, na=56),
    "cryoperm": dict(rho=8.7, zoa=0.47708, z=28, i=311.0, a=58.69, mu=1.425, molar=58.69, na=58),
    "aluminum": dict(rho=2.699, zoa=0.48181, z=13, i=166.0, a=26.98, mu=1.615, molar=26.98, na=27),
    "fr4": dict(rho=1.85, zoa=0.52, z=10, i=110.0, a=16.0, mu=1.75, molar=None, na=1),
}

# Total mu/rho (cm2/g) with coherent scattering.
ENERGIES = [10, 15, 20, 30, 40, 50, 60, 80, 100, 150, 200, 300, 400, 500, 600, 800,
            1000, 1250, 1500, 2000, 3000, 4000, 5000, 6000, 8000, 10000]
MU_RHO = {
    "silicon": [33.89, 10.34, 4.464, 1.436, 0.7012, 0.4385, 0.3207, 0.2228, 0.1835, 0.1448,
                0.1275, 0.1082, 0.09614, 0.08748, 0.08077, 0.07082, 0.06361, 0.05688, 0.05183,
                0.04480, 0.03678, 0.03240, 0.02967, 0.02788, 0.02574, 0.02462],
    "copper": [215.9, 74.05, 33.79, 10.92, 4.862, 2.613, 1.593, 0.7630, 0.4584, 0.2217, 0.1559,
               0.1119, 0.09413, 0.08362, 0.07625, 0.06605, 0.05901, 0.05261, 0.04803, 0.04205,
               0.03599, 0.03318, 0.03177, 0.03108, 0.03074, 0.03103],
    "stainless_steel": [170.6, 57.08, 25.68, 8.176, 3.629, 1.958, 1.205, 0.5952, 0.3717, 0.1964,
                        0.1460, 0.1099, 0.09400, 0.08414, 0.07704, 0.06699, 0.05995, 0.05350,
                        0.04883, 0.04265, 0.03621, 0.03312, 0.03146, 0.03057, 0.02991, 0.02994],
    "cryoperm": [209.0, 70.81, 32.20, 10.34, 4.600, 2.474, 1.512, 0.7306, 0.4444, 0.2188, 0.1582,
                 0.1154, 0.09765, 0.08698, 0.07944, 0.06891, 0.06160, 0.05494, 0.05015, 0.04387,
                 0.03745, 0.03444, 0.03289, 0.03210, 0.03164, 0.03185],
    "aluminum": [26.23, 7.955, 3.441, 1.128, 0.5685, 0.3681, 0.2778, 0.2018, 0.1704, 0.1378,
                 0.1223, 0.1042, 0.09276, 0.08445, 0.07802, 0.06841, 0.06146, 0.05496, 0.05006,
                 0.04324, 0.03541, 0.03106, 0.02836, 0.02655, 0.02437, 0.02318],
    "fr4": [20.0, 6.2, 2.8, 0.95, 0.50, 0.33, 0.26, 0.195, 0.168, 0.138, 0.124, 0.106, 0.0945,
            0.0861, 0.0796, 0.0699, 0.0628, 0.0562, 0.0512, 0.0441, 0.0358, 0.0312, 0.0283,
            0.0263, 0.0238, 0.0224],
}
LEAD = [(10, 130.6), (13.03, 67.0), (13.04, 162.3), (15, 111.6), (20, 86.36), (30, 30.32),
        (40, 14.36), (50, 8.041), (60, 5.021), (80, 2.419), (88.0, 1.910), (88.01, 7.683),
        (100, 5.549), (150, 2.014), (200, 0.9985), (300, 0.4031), (400, 0.2323), (500, 0.1614),
        (600, 0.1248), (800, 0.08870), (1000, 0.07102), (1250, 0.05876), (1500, 0.05222),
        (2000, 0.04606), (3000, 0.04234), (4000, 0.04197), (5000, 0.04272), (6000, 0.04391),
        (8000, 0.04675), (10000, 0.04972)]

NEUTRON_SIGMA_B = {
    "silicon": [(1e-6, 2.2), (1e-3, 2.0), (10, 2.0), (30, 1.5), (55, 6.0), (80, 1.8), (100, 2.0),
                (200, 3.8), (500, 3.8), (1000, 2.8), (2000, 2.2), (3000, 2.4), (5000, 1.7),
                (10000, 1.2), (20000, 0.95)],
    "copper": [(1e-6, 7.8), (1e-3, 7.8), (1, 7.5), (10, 7.0), (100, 5.0), (500, 4.5), (1000, 3.4),
               (2000, 3.0), (5000, 2.8), (10000, 2.5), (20000, 2.3)],
    "lead": [(1e-6, 11.2), (1, 11.2), (100, 10.0), (500, 7.0), (1000, 5.0), (2000, 4.5),
             (5000, 5.5), (10000, 2.9), (20000, 2.9)],
    "stainless_steel": [(1e-6, 11.4), (1, 11.0), (10, 8.0), (30, 3.0), (100, 3.5), (500, 3.0),
                        (1000, 2.5), (2000, 2.8), (5000, 2.2), (10000, 1.3), (20000, 1.2)],
    "cryoperm": [(1e-6, 17.0), (10, 15.0), (100, 7.0), (500, 4.0), (1000, 3.0), (5000, 2.3),
                 (10000, 1.4), (20000, 1.2)],
    "aluminum": [(1e-6, 1.4), (10, 1.4), (35, 3.0), (100, 3.0), (500, 2.5), (1000, 2.3),
                 (2000, 2.3), (5000, 1.9), (10000, 1.0), (20000, 0.9)],
}
# Macroscopic sigma (1/cm) directly for the hydrogenous laminate.
FR4_SIGMA = [(1e-6, 0.80), (1e-3, 0.78), (1, 0.75), (10, 0.70), (100, 0.55), (500, 0.38),
             (1000, 0.30), (2000, 0.22), (5000, 0.13), (10000, 0.08), (20000, 0.06)]


def klein_nishina(e_kev):
    k = e_kev / ME
    a = (1 + k) / k**2 * (2 * (1 + k) / (1 + 2 * k) - math.log(1 + 2 * k) / k)
    b = math.log(1 + 2 * k) / (2 * k) - (1 + 3 * k) / (1 + 2 * k) ** 2
    return 2 * math.pi * RE**2 * (a + b)


def electron_stopping(m, t_kev):
    tau = t_kev / ME
    gamma = tau + 1
    beta2 = 1 - 1 / gamma**2
    i_ratio = m["i"] * 1e-3 / ME
    f = 1 - beta2 + (tau**2 / 8 - (2 * tau + 1) * math.log(2)) / (tau + 1) ** 2
    arg = tau**2 * (tau + 2) / (2 * i_ratio**2)
    col = 0.153537 * m["zoa"] / beta2 * (math.log(arg) + f)
    rad = col * m["z"] * (t_kev + ME) / 800e3
    return (col + rad) * 1e3  # keV cm2/g


def log_grid(lo, hi, per_decade):
    n = int(round(math.log10(hi / lo) * per_decade))
    return [lo * 10 ** (i / per_decade) for i in range(n + 1)]


def header(f, lines):
    for l in lines:
        f.write(f"# {l}\n")


def write_photon(name, m):
    rows = LEAD if name == "lead" else list(zip(ENERGIES, MU_RHO[name]))
    with open(os.path.join(HERE, "photon", f"{name}.txt"), "w") as f:
        header(f, [f"{name}: photon mass attenuation (coherent included)",
                   "photo_fraction = 1 - Klein-Nishina share, clamped to [0, 1]"])
        f.write("energy_keV mu_rho_cm2_g photo_fraction\n")
        for e, mu in rows:
            compton = NA * m["zoa"] * klein_nishina(e)
            pf = min(1.0, max(0.0, 1 - compton / mu))
            f.write(f"{e:g} {mu:.6g} {pf:.5f}\n")


def write_electron(name, m):
    grid = log_grid(1.0, 10000.0, 10)
    s = [electron_stopping(m, e) for e in grid]
    # Range at the first grid point: T / S approximated as half the linear estimate.
    r = [grid[0] / s[0] / 2]
    for k in range(1, len(grid)):
        r.append(r[-1] + (grid[k] - grid[k - 1]) * 0.5 * (1 / s[k] + 1 / s[k - 1]))
    with open(os.path.join(HERE, "electron", f"{name}.txt"), "w") as f:
        header(f, [f"{name}: electron stopping power and CSDA range",
                   "Bethe collision term (no density effect) plus radiative term ~ Z*E/800 MeV"])
        f.write("energy_keV dedx_keV_cm2_g csda_g_cm2\n")
        for e, si, ri in zip(grid, s, r):
            f.write(f"{e:.6g} {si:.6g} {ri:.6g}\n")


def write_alpha(name, m):
    grid = log_grid(10.0, 10000.0, 10)
    with open(os.path.join(HERE, "alpha", f"{name}.txt"), "w") as f:
        header(f, [f"{name}: alpha CSDA range, Bragg-Kleeman scaling of the air range"])
        f.write("energy_keV csda_g_cm2\n")
        for e in grid:
            r = 0.56e-3 * m["a"] ** (1 / 3) * 0.318 * (e / 1000) ** 1.5
            f.write(f"{e:.6g} {r:.6g}\n")


def write_muon(name, m):
    with open(os.path.join(HERE, "muon", f"{name}.txt"), "w") as f:
        header(f, [f"{name}: muon mean energy loss, minimum-ionizing plateau"])
        f.write("energy_keV dedx_keV_cm2_g\n")
        for e in [1e5, 1e6, 4e6, 1e7, 1e8]:
            f.write(f"{e:g} {m['mu'] * 1e3:g}\n")


def write_neutron(name, m):
    if name == "fr4":
        rows = FR4_SIGMA
    else:
        n = m["rho"] * NA / m["molar"]
        rows = [(e, n * s * 1e-24) for e, s in NEUTRON_SIGMA_B[name]]
    with open(os.path.join(HERE, "neutron", f"{name}.txt"), "w") as f:
        header(f, [f"{name}: smoothed macroscopic elastic cross-section"])
        f.write("energy_keV sigma_per_cm\n")
        for e, s in rows:
            f.write(f"{e:g} {s:.6g}\n")


def main():
    with open(os.path.join(HERE, "materials.txt"), "w") as f:
        header(f, ["Bundled materials. Each name has tables in photon/, electron/, alpha/,",
                   "muon/ and neutron/. neutron_A is the mass number of the nucleus that",
                   "dominates elastic scattering."])
        f.write("name density_g_cm3 neutron_A note\n")
        notes = {
            "silicon": "high-resistivity chip substrate",
            "copper": "box and holder and plates and cables",
            "lead": "external and internal shields",
            "stainless_steel": "top flange and RF component bodies",
            "cryoperm": "magnetic shield, treated as nickel",
            "aluminum": "radiation shields and vacuum can",
            "fr4": "PCB laminate, hydrogen-dominated neutron scattering",
        }
        for name, m in MATERIALS.items():
            f.write(f"{name} {m['rho']} {m['na']} {notes[name]}\n")
    for name, m in MATERIALS.items():
        write_photon(name, m)
        write_electron(name, m)
        write_alpha(name, m)
        write_muon(name, m)
        write_neutron(name, m)


if __name__ == "__main__":
    main()
