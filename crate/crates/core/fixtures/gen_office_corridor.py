"""Regenerates office_corridor.json.

Usage: python3 gen_office_corridor.py OUT [rooms_per_side] [room_depth] [corridor_width] [passes]
"""
import json, random, sys

out = sys.argv[1]
n = int(sys.argv[2]) if len(sys.argv) > 2 else 13
depth = float(sys.argv[3]) if len(sys.argv) > 3 else 9.0
cw = float(sys.argv[4]) if len(sys.argv) > 4 else 2.0
passes = int(sys.argv[5]) if len(sys.argv) > 5 else 2
W = 5.0 * n
ylo, yhi = depth, depth + cw          # corridor band
H = 2 * depth + cw
yc = (ylo + yhi) / 2
doors = [5 * i + 2.5 for i in range(n)]

walls = []
for y in (ylo, yhi):
    xs = [0.0]
    for d in doors:
        xs += [d - 0.5, d + 0.5]
    xs.append(W)
    for a, b in zip(xs[0::2], xs[1::2]):
        walls.append([a, y, b, y])
for i in range(1, n):
    walls.append([5.0 * i, 0.0, 5.0 * i, ylo])
    walls.append([5.0 * i, yhi, 5.0 * i, H])

rng = random.Random(7)
aps = []
for i in range(n):
    aps.append((5 * i + rng.uniform(0.8, 4.2), rng.uniform(yhi + 1.0, H - 0.8)))
    aps.append((5 * i + rng.uniform(0.8, 4.2), rng.uniform(0.8, ylo - 1.0)))
for k in range(4):
    aps.append((W * (2 * k + 1) / 8, yc))
aps = [{"mac": "02:00:00:00:00:%02x" % (j + 1), "x": round(x, 1), "y": round(y, 1)} for j, (x, y) in enumerate(aps)]

# Two passes along the corridor; every room is entered and left along its
# centreline, once per pass.
wp = [(1.0, yc)]
for p in range(passes):
    inset = 1.5 + (p % 2)
    order = doors if p % 2 == 0 else list(reversed(doors))
    for x in order:
        wp += [(x, yc), (x, H - inset), (x, yc), (x, inset), (x, yc)]
    wp.append((W - 1.0, yc) if p % 2 == 0 else (1.0, yc))

doc = {
    "floorplan": {"bounds": {"xmin": 0.0, "ymin": 0.0, "xmax": W, "ymax": H}, "walls": walls},
    "aps": aps,
    "waypoints": [{"x": x, "y": y} for x, y in wp],
    "sim": {"seed": 1},
    "static_map_spacing": 2.0,
}
with open(out, "w") as f:
    json.dump(doc, f, indent=2)
    f.write("\n")
