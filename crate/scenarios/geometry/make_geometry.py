#!/usr/bin/env python3
"""Writes the cryostat geometry variants (no shield, external lead,
internal lead, both). Positions below are absolute, in cm; the files store
mm offsets relative to the parent."""

import os

# name, solid, dims (cm), material, parent, absolute centre (cm)
# Lid hole radius for the cryostat stem (cm).
LID_HOLE = float(os.environ.get("LID_HOLE", "7.0"))
# Floor thickness under the can (cm).
FLOOR = float(os.environ.get("FLOOR", "5.0"))

BASE = [
    ("world", "box", (260, 260, 260), "vacuum", None, (0, 0, 0)),
    # Outer vacuum can, 300 K, 5 mm walls.
    ("ovc", "cylinder", (22.0, 30.0), "stainless_steel", "world", (0, 0, 0.0)),
    ("ovc_vac", "cylinder", (21.5, 29.5), "vacuum", "ovc", (0, 0, 0.0)),
    # 50 K and 4 K radiation shields, 3 mm.
    ("shield50", "cylinder", (20.5, 26.5), "aluminum", "ovc_vac", (0, 0, -1.5)),
    ("vac50", "cylinder", (20.2, 26.2), "vacuum", "shield50", (0, 0, -1.5)),
    ("shield4k", "cylinder", (19.5, 23.5), "aluminum", "vac50", (0, 0, -2.5)),
    ("vac4k", "cylinder", (19.2, 23.2), "vacuum", "shield4k", (0, 0, -2.5)),
    # Still can, 2 mm copper.
    ("still", "cylinder", (18.8, 20.0), "copper", "vac4k", (0, 0, -4.0)),
    ("still_vac", "cylinder", (18.6, 19.8), "vacuum", "still", (0, 0, -4.0)),
    ("mc_plate", "cylinder", (18.0, 0.3), "copper", "still_vac", (0, 0, 1.8)),
    # CryoPerm magnetic shield: 78.8 mm diameter, 1 mm wall, 193.5 mm tall,
    # hanging from the mixing-chamber plate, with a 1 mm bottom cap.
    ("cryoperm", "shell", (3.84, 3.94, 9.675), "cryoperm", "still_vac", (0, 0, -8.175)),
    ("cryoperm_cap", "cylinder", (3.94, 0.05), "cryoperm", "still_vac", (0, 0, -17.90)),
    ("shield_inner", "cylinder", (3.84, 9.675), "vacuum", "still_vac", (0, 0, -8.175)),
    # Copper box around the chip: thick base, 3 mm lid. The chip sits on a
    # copper pedestal, flush with the top of the PCB, which frames it with
    # a 100 um gap. The holder is two bars from the box to the plate,
    # leaving the view upward open.
    ("box", "box", (2.5, 2.0, 1.2), "copper", "shield_inner", (0, 0, -0.44075)),
    ("cavity", "box", (1.3, 1.1, 0.3), "vacuum", "box", (0, 0, 0.15925)),
    ("pcb_n", "box", (1.1025, 0.21375, 0.0785), "fr4", "cavity", (0, 0.57375, -0.0622)),
    ("pcb_s", "box", (1.1025, 0.21375, 0.0785), "fr4", "cavity", (0, -0.57375, -0.0622)),
    ("pcb_e", "box", (0.24875, 0.36, 0.0785), "fr4", "cavity", (0.85375, 0, -0.0622)),
    ("pcb_w", "box", (0.24875, 0.36, 0.0785), "fr4", "cavity", (-0.85375, 0, -0.0622)),
    ("pedestal", "box", (0.605, 0.36, 0.0621), "copper", "cavity", (0, 0, -0.0784)),
    ("chip", "box", (0.595, 0.35, 0.01625), "silicon", "cavity", (0, 0, 0.0)),
    ("holder_a", "box", (0.5, 2.0, 0.370375), "copper", "shield_inner", (2.0, 0, 1.129625)),
    ("holder_b", "box", (0.5, 2.0, 0.370375), "copper", "shield_inner", (-2.0, 0, 1.129625)),
    # RF chain below the plate.
    ("sma", "box", (0.4, 0.4, 0.4), "copper", "shield_inner", (0, 2.5, -0.4)),
    ("coax_cu", "cylinder", (0.1095, 6.5), "copper", "still_vac", (5.0, 0, -5.0)),
    ("switch", "box", (2.0, 1.5, 1.75), "stainless_steel", "still_vac", (9.0, 0, -2.5)),
    ("circulator", "box", (1.0, 1.0, 0.8), "stainless_steel", "still_vac", (-9.0, 0, -2.5)),
    ("circulator2", "box", (1.2, 1.0, 1.0), "stainless_steel", "still_vac", (0, 9.0, -2.5)),
    ("isolator", "box", (1.5, 1.2, 1.0), "stainless_steel", "still_vac", (0, -9.0, -2.5)),
    ("attenuators", "cylinder", (0.3, 1.0), "copper", "still_vac", (6.0, 6.0, -2.5)),
    ("filters", "box", (0.6, 0.6, 1.5), "stainless_steel", "still_vac", (-6.0, -6.0, -2.5)),
    # Superconducting lines from 4 K down to the plate, at the plate edge.
    ("coax_nbti", "cylinder", (0.11, 4.5), "copper", "still_vac", (18.2, 0, 10.5)),
    # 4 K amplifier and the 300 K to 4 K lines.
    ("amplifier", "box", (1.5, 1.0, 0.5), "stainless_steel", "vac4k", (0, 0, 18.0)),
    ("coax_cube", "cylinder", (0.11, 1.4), "copper", "vac50", (0, 0, 22.8)),
]

EXTERNAL = [
    # 10 cm lead can, 80 cm inner height; the lid leaves a hole for the
    # cryostat stem.
    ("ext_lead", "shell", (30.0, 40.0, 40.0), "lead", "world", (0, 0, -5.0)),
    ("ext_floor", "cylinder", (40.0, FLOOR / 2), "lead", "world", (0, 0, -45.0 - FLOOR / 2)),
    ("ext_lid", "shell", (LID_HOLE, 40.0, 5.0), "lead", "world", (0, 0, 40.0)),
]

INTERNAL = [
    # 3 cm lead disk above the mixing-chamber plate.
    ("int_lead", "disk", (18.0, 1.5), "lead", "still_vac", (0, 0, 3.8)),
]

SURFACES = [
    # S1 encloses cryostat and shields; S2 encloses the magnetic shield, the
    # plate region and the internal disk; S3 surrounds the chip for neutrons.
    ("S1", 45.0, 55.0, (0, 0, -5.0)),
    ("S2", 18.5, 5.5, (0, 0, 0.0)),
    ("S3", 2.0, 1.0, (0, 0, 0.0)),
]


def mm(x):
    v = round(x * 10.0, 6)
    return ("%.6f" % v).rstrip("0").rstrip(".")


def write(path, title, vols):
    centre = {v[0]: v[5] for v in vols}
    out = ["# " + title, "# Lengths in mm; dims are half extents; offsets relative to the parent."]
    for name, solid, dims, mat, parent, c in vols:
        f = ["volume", "name=" + name, "solid=" + solid, "dims=" + ",".join(mm(d) for d in dims), "material=" + mat]
        if parent:
            p = centre[parent]
            f.append("parent=" + parent)
            f.append("offset=" + ",".join(mm(c[i] - p[i]) for i in range(3)))
        if name == "chip":
            f.append("active")
        out.append(" ".join(f))
    for name, r, h, c in SURFACES:
        out.append("surface name=%s radius=%s half_height=%s center=%s" % (name, mm(r), mm(h), ",".join(mm(x) for x in c)))
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


here = os.path.dirname(os.path.abspath(__file__))
write(os.path.join(here, "cryostat.geo"), "Cryostat without lead shields.", BASE)
write(os.path.join(here, "cryostat_ext.geo"), "Cryostat inside the external lead shield.", BASE + EXTERNAL)
write(os.path.join(here, "cryostat_int.geo"), "Cryostat with the internal lead disk.", BASE + INTERNAL)
write(os.path.join(here, "cryostat_full.geo"), "Cryostat with internal and external lead shields.", BASE + EXTERNAL + INTERNAL)
