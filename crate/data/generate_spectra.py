#!/usr/bin/env python3
"""Regenerates the bundled source spectra under data/spectra/.

Both are shape approximations normalized to a total flux; scenarios may
rescale the total. Format: upper bin edge (keV), flux per bin (1/cm2/s).
The first row carries zero flux and only fixes the lowest edge.
"""
import math
import os

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "spectra")


def write(name, comment, edges, flux):
    with open(os.path.join(HERE, name), "w") as f:
        for c in comment:
            f.write(f"# {c}\n")
        f.write("upper_edge_keV flux_cm2_s\n")
        f.write(f"{edges[0]:.6g} 0\n")
        for e, v in zip(edges[1:], flux):
            f.write(f"{e:.6g} {v:.6g}\n")


def gamma(total=2.5):
    edges = [20 + 10 * i for i in range(269)]  # 20 .. 2700 keV
    centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
    cont = [(c / 100) ** 2 / (1 + (c / 100) ** 3.3) for c in centers]
    s = sum(cont)
    w = [0.75 * v / s for v in cont]
    lines = {1460.8: 0.08, 2614.5: 0.03, 583.2: 0.015, 609.3: 0.03, 911.2: 0.015,
             1764.5: 0.01, 1120.3: 0.01, 351.9: 0.02, 295.2: 0.01, 238.6: 0.02, 969.0: 0.01}
    for e, frac in lines.items():
        i = int((e - 20) // 10)
        w[i] += frac
    norm = sum(w)
    write("gamma_lab.txt",
          ["environmental gamma flux, laboratory above ground",
           "smooth scattered continuum plus K-40, U and Th chain lines",
           f"total {total} per cm2 per s"],
          edges, [total * v / norm for v in w])


def neutron(total=0.018):
    n = 103  # 1e-6 .. ~2e4 keV at 10 bins per decade
    edges = [1e-6 * 10 ** (i / 10) for i in range(n + 1)]
    kt = 2.53e-5
    t_evap = 0.9e3
    w_th, w_epi, w_ev = [], [], []
    for a, b in zip(edges, edges[1:]):
        c = math.sqrt(a * b)
        du = math.log(b / a)
        w_th.append(c * c / kt**2 * math.exp(-c / kt) * du)
        w_epi.append(du if 1e-4 < c < 1e2 else 0.0)
        w_ev.append(c * c / t_evap**2 * math.exp(-c / t_evap) * du)
    comps = [(w_th, 0.3), (w_epi, 0.3), (w_ev, 0.4)]
    flux = [0.0] * n
    for w, frac in comps:
        s = sum(w)
        for i, v in enumerate(w):
            flux[i] += frac * v / s
    write("neutron_lab.txt",
          ["environmental neutron flux, laboratory above ground",
           "thermal Maxwellian, 1/E slowing-down region and evaporation peak",
           f"total {total} per cm2 per s"],
          edges, [total * v for v in flux])


if __name__ == "__main__":
    gamma()
    neutron()
