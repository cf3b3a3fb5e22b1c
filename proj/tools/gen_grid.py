#!/usr/bin/env python3
"""Regenerate the shipped .grid files.

Branch lists come from the MATPOWER/pandapower IEEE cases. Bus coordinates
are synthetic: a seeded Fruchterman-Reingold layout (networkx.spring_layout)
of the bus graph, scaled to a square of the requested side length. IEEE 14
uses hand-placed coordinates after the usual one-line diagram instead, since
the force-directed layout always pulls the {4,7,9} hub substation off the
convex hull.

RADIUS is the region radius_threshold calibrated for the shipped coordinates
(IEEE 14 -> 4 regions, IEEE 118 -> 8 regions).

    python3 tools/gen_grid.py ieee14 data/ieee14.grid
"""
import argparse

import networkx as nx
import pandapower.networks as pn

# Transformer branches (by bus number). IEEE 14: the three tap-changing
# transformers. IEEE 118: the nine tap-changing transformers plus the
# 68-116 and 86-87 voltage-level ties.
CASES = {
    "ieee14": dict(net=pn.case14, trafos={(4, 7), (4, 9), (5, 6)},
                   side=1000.0, seed=None, radius=430.0,
                   coords={1: (0, 700), 2: (100, 300), 3: (450, 0),
                           4: (600, 100), 5: (300, 500), 6: (400, 750),
                           7: (850, 200), 8: (1000, 600), 9: (750, 450),
                           10: (650, 750), 11: (500, 850), 12: (250, 1000),
                           13: (450, 1000), 14: (800, 900)}),
    "ieee118": dict(net=pn.case118,
                    trafos={(5, 8), (25, 26), (17, 30), (37, 38), (59, 63),
                            (61, 64), (65, 66), (68, 69), (80, 81),
                            (68, 116), (86, 87)},
                    side=3000.0, seed=7, radius=700.0, coords=None),
}


def branches(net):
    out = []
    for a, b in zip(net.line.from_bus, net.line.to_bus):
        out.append((int(a) + 1, int(b) + 1))
    for a, b in zip(net.trafo.hv_bus, net.trafo.lv_bus):
        out.append((int(a) + 1, int(b) + 1))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("case", choices=sorted(CASES))
    ap.add_argument("out")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--radius", type=float)
    args = ap.parse_args()
    case = CASES[args.case]
    seed = case["seed"] if args.seed is None else args.seed
    net = case["net"]()
    br = branches(net)
    g = nx.Graph()
    g.add_nodes_from(range(1, len(net.bus) + 1))
    g.add_edges_from(br)
    side = case["side"]
    if case["coords"] is not None and args.seed is None:
        pos = case["coords"]
        note = "hand-placed after the one-line diagram"
    else:
        pos = nx.spring_layout(g, seed=seed, iterations=200)
        note = f"spring_layout(seed={seed})"
    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    with open(args.out, "w") as f:
        f.write(f"# {args.case}: {len(g)} buses, {len(br)} branches\n")
        f.write(f"# coordinates: {note}, scaled to {side:.0f} m\n")
        radius = args.radius if args.radius is not None else case["radius"]
        if radius is not None:
            f.write(f"RADIUS {radius:.1f}\n")
        for b in sorted(g.nodes):
            x = (pos[b][0] - min(xs)) / span * side
            y = (pos[b][1] - min(ys)) / span * side
            f.write(f"BUS {b} {x:.1f} {y:.1f}\n")
        for a, b in br:
            kind = "T" if tuple(sorted((a, b))) in case["trafos"] else "L"
            f.write(f"BRANCH {a} {b} {kind}\n")


if __name__ == "__main__":
    main()
