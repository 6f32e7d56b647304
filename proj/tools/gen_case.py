#!/usr/bin/env python3
"""Build the bundled 37-bus / Sioux Falls / 42-node CN scenario.

The distribution feeder is the IEEE 37-node topology and spot loads laid out
over the Sioux Falls street grid. Couplings, fleets and damage are synthetic
and deterministic (fixed RNG seed), so rerunning the script reproduces the
committed file byte for byte.

usage: gen_case.py [output.json]
"""

import json
import math
import random
import sys

SEED = 37024

# --- Distribution feeder --------------------------------------------------

# (bus, x_km, y_km). Substation in the north-west corner; the feeder fans out
# south and east over the city.
BUSES = [
    ("799", 2.0, 21.5), ("701", 3.5, 20.0), ("702", 5.5, 19.0),
    ("705", 8.5, 19.5), ("742", 10.5, 20.5), ("712", 11.0, 18.5),
    ("713", 4.0, 16.0), ("704", 4.0, 13.5), ("714", 2.5, 12.0),
    ("718", 2.0, 9.5), ("720", 5.5, 11.0), ("707", 5.0, 8.0),
    ("724", 3.0, 6.0), ("722", 5.5, 5.0), ("706", 7.5, 9.5),
    ("725", 8.0, 7.0),
    ("703", 8.0, 16.5), ("727", 10.5, 15.5), ("744", 12.5, 16.5),
    ("728", 14.5, 17.5), ("729", 14.0, 15.0), ("730", 9.0, 13.5),
    ("709", 10.0, 11.5), ("775", 11.0, 13.0), ("731", 8.5, 10.5),
    ("708", 12.0, 9.5), ("732", 14.0, 10.5), ("733", 12.5, 7.5),
    ("734", 13.0, 5.5), ("710", 15.0, 5.5), ("735", 16.5, 6.5),
    ("736", 16.0, 3.5), ("737", 11.5, 4.5), ("738", 10.5, 3.0),
    ("711", 9.0, 2.5), ("741", 7.5, 2.0), ("740", 9.0, 1.0),
]

LOADS = {
    "701": 630, "712": 85, "713": 85, "714": 38, "718": 85, "720": 85,
    "722": 161, "724": 42, "725": 42, "727": 42, "728": 126, "729": 42,
    "730": 85, "731": 85, "732": 42, "733": 85, "734": 42, "735": 85,
    "736": 42, "737": 140, "738": 126, "740": 85, "741": 42, "742": 93,
    "744": 42,
}

LINES = [
    ("799", "701"), ("701", "702"), ("702", "705"), ("702", "713"),
    ("702", "703"), ("703", "727"), ("703", "730"), ("704", "714"),
    ("704", "720"), ("705", "742"), ("705", "712"), ("706", "725"),
    ("707", "724"), ("707", "722"), ("708", "733"), ("708", "732"),
    ("709", "731"), ("709", "708"), ("710", "735"), ("710", "736"),
    ("711", "741"), ("711", "740"), ("713", "704"), ("714", "718"),
    ("720", "707"), ("720", "706"), ("727", "744"), ("730", "709"),
    ("733", "734"), ("734", "737"), ("734", "710"), ("737", "738"),
    ("738", "711"), ("744", "728"), ("744", "729"), ("775", "709"),
]

# Normally open ties between neighbouring laterals, actuated from either end.
TIES = [("706", "731"), ("722", "741"), ("732", "735")]

STATIONS = {"704": 10.0, "730": 10.0, "708": 10.0}
FAULTS = ["713-704", "703-730", "709-708", "720-707"]

# --- Sioux Falls ------------------------------------------------------------

NODES = {
    1: (50000, 510000), 2: (320000, 510000), 3: (50000, 440000),
    4: (130000, 440000), 5: (220000, 440000), 6: (320000, 440000),
    7: (420000, 380000), 8: (320000, 380000), 9: (220000, 380000),
    10: (220000, 320000), 11: (130000, 320000), 12: (50000, 320000),
    13: (50000, 50000), 14: (130000, 190000), 15: (220000, 190000),
    16: (320000, 320000), 17: (320000, 260000), 18: (420000, 320000),
    19: (320000, 190000), 20: (320000, 50000), 21: (220000, 50000),
    22: (220000, 130000), 23: (130000, 130000), 24: (130000, 50000),
}
ROADS = [
    (1, 2), (1, 3), (2, 6), (3, 4), (3, 12), (4, 5), (4, 11), (5, 6), (5, 9),
    (6, 8), (7, 8), (7, 18), (8, 9), (8, 16), (9, 10), (10, 11), (10, 15),
    (10, 16), (10, 17), (11, 12), (11, 14), (12, 13), (13, 24), (14, 15),
    (14, 23), (15, 19), (15, 22), (16, 17), (16, 18), (17, 19), (18, 20),
    (19, 20), (20, 21), (20, 22), (21, 22), (21, 24), (22, 23), (23, 24),
]
UNITS_PER_KM = 25000.0

SIGNAL_KW = 10.0
LAMP_KW_PER_KM = 2.5  # 50 W lamps every 20 m, shared by both directions
BACKGROUND_VEH_PER_KM = 12.0

# --- Communication network --------------------------------------------------

CN_COLS, CN_ROWS = 6, 7
CN_X0, CN_Y0, CN_STEP = 1.5, 2.0, 2.95
CN_RANGE_KM = 3.0
CN_KW = 5.0
CENTRALS = {(0, 6), (1, 6)}  # (col, row) of the gateway nodes

# --- Fleets -----------------------------------------------------------------

N_MESS = 5
N_EV = 1300
EV_SCATTER_KM = 1.2
MESS_DEPOT_JUNCTION = "1"
UAV_HOME = (3.0, 20.5)
SWAP_SITE = (9.5, 11.0)


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def r3(v):
    return round(v, 3)


def build():
    rng = random.Random(SEED)
    pos = {b: (x, y) for b, x, y in BUSES}
    junction_pos = {
        str(n): (x / UNITS_PER_KM, y / UNITS_PER_KM) for n, (x, y) in NODES.items()
    }

    # Facilities and their demand, coupled to the nearest bus whose spot load
    # still has room. Buses without load (switching nodes) host nothing.
    capacity = {b: float(LOADS.get(b, 0)) for b, _, _ in BUSES}

    def couple(p, kw):
        order = sorted(capacity, key=lambda b: (dist(p, pos[b]), b))
        for b in order:
            if capacity[b] + 1e-9 >= kw:
                capacity[b] -= kw
                return b
        raise SystemExit("not enough bus load to host facility demand")

    junctions = []
    junction_cpl = {}
    for n in sorted(NODES):
        jid = str(n)
        p = junction_pos[jid]
        junctions.append({"id": jid, "x_km": r3(p[0]), "y_km": r3(p[1]),
                          "demand_kw": SIGNAL_KW})
        junction_cpl[jid] = couple(p, SIGNAL_KW)

    lanes = []
    lane_cpl = {}
    for a, b in ROADS:
        for u, v in ((a, b), (b, a)):
            pu, pv = junction_pos[str(u)], junction_pos[str(v)]
            length = dist(pu, pv)
            n_sec = max(1, math.ceil(length / 2.0))
            sec = [r3(length / n_sec)] * n_sec
            sec[-1] = r3(length - sum(sec[:-1]))
            lid = f"{u}-{v}"
            kw = r3(LAMP_KW_PER_KM * sum(sec) / 2.0)
            lanes.append({"id": lid, "from": str(u), "to": str(v), "demand_kw": kw,
                          "sections": sec,
                          "background_vehicles": r3(BACKGROUND_VEH_PER_KM * sum(sec))})
            mid = ((pu[0] + pv[0]) / 2.0, (pu[1] + pv[1]) / 2.0)
            lane_cpl[lid] = couple(mid, kw)

    cn_nodes = []
    cn_cpl = {}
    for row in range(CN_ROWS):
        for col in range(CN_COLS):
            nid = f"cn{row * CN_COLS + col + 1:02d}"
            p = (CN_X0 + col * CN_STEP, CN_Y0 + row * CN_STEP)
            central = (col, row) in CENTRALS
            node = {"id": nid, "x_km": r3(p[0]), "y_km": r3(p[1]),
                    "range_km": CN_RANGE_KM, "demand_kw": CN_KW}
            if central:
                node["central"] = True
            cn_nodes.append(node)
            cn_cpl[nid] = couple(p, CN_KW)

    buses = []
    for b, x, y in BUSES:
        bus = {"id": b, "x_km": x, "y_km": y, "load_kw": float(LOADS.get(b, 0))}
        if b == "799":
            bus["source"] = True
        if b in STATIONS:
            bus["v2gs"] = True
            bus["station_demand_kw"] = STATIONS[b]
            near = min(junction_pos, key=lambda j: (dist(pos[b], junction_pos[j]), int(j)))
            bus["access_junction"] = near
        buses.append(bus)

    lines = [{"id": f"{a}-{b}", "from": a, "to": b} for a, b in LINES]
    lines += [{"id": f"{a}-{b}", "from": a, "to": b, "closed": False, "control": "both"}
              for a, b in TIES]

    vehicles = []
    for i in range(N_MESS):
        p = junction_pos[MESS_DEPOT_JUNCTION]
        vehicles.append({"id": f"mess{i + 1}", "kind": "mess", "x_km": r3(p[0]),
                         "y_km": r3(p[1]), "junction": MESS_DEPOT_JUNCTION,
                         "output_kw": 500.0, "energy_kwh": 776.0})
    jids = sorted(junction_pos, key=int)
    for i in range(N_EV):
        j = jids[rng.randrange(len(jids))]
        ang = rng.uniform(0.0, 2.0 * math.pi)
        rad = EV_SCATTER_KM * math.sqrt(rng.random())
        p = (junction_pos[j][0] + rad * math.cos(ang), junction_pos[j][1] + rad * math.sin(ang))
        vehicles.append({"id": f"ev{i + 1:04d}", "kind": "ev", "x_km": r3(p[0]),
                         "y_km": r3(p[1]), "junction": j,
                         "output_kw": 50.0, "energy_kwh": 150.0})

    uavs = [{"id": f"uav{i + 1}", "speed_kmh": 180.0, "range_budget_km": 50.0,
             "cn_range_km": 1.0} for i in range(5)]
    warehouses = [
        {"id": "depot", "kind": "set_off", "x_km": UAV_HOME[0], "y_km": UAV_HOME[1]},
        {"id": "swap", "kind": "battery_swap", "x_km": SWAP_SITE[0], "y_km": SWAP_SITE[1],
         "swap_duration_s": 60.0},
    ]

    return {
        "schema_version": 1,
        "name": "case37_sioux24_cn42",
        "params": {
            "lane_limit_kmh": 60.0, "lane_degraded_kmh": 25.0,
            "junction_limit_kmh": 30.0, "junction_degraded_kmh": 3.3,
            "eta": 0.3, "participation": "bernoulli", "seed": 20240501,
            "omega_lane": 0.4, "omega_junction": 0.4, "speed_floor_kmh": 3.0,
            "jam_density_veh_per_km": 150.0, "junction_capacity_vph": 1800.0,
            "junction_degraded_capacity_vph": 600.0, "uav_work_duration_s": 120.0,
            "uav_hover_equiv_kmh": 60.0, "horizon_s": 10800.0,
            "routing_node_budget": 200000, "udssf_subset_cap": 3, "tolerance": 1e-9,
        },
        "pdn": {"buses": buses, "lines": lines},
        "utn": {"junctions": junctions, "lanes": lanes},
        "cn": {"nodes": cn_nodes},
        "couplings": {"cn": cn_cpl, "junctions": junction_cpl, "lanes": lane_cpl},
        "fleets": {"vehicles": vehicles, "uavs": uavs, "warehouses": warehouses},
        "damage": {"lines": FAULTS, "buses": []},
    }


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/case37_sioux24_cn42.json"
    with open(out, "w", encoding="utf-8") as f:
        json.dump(build(), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
