"""Author the bundled scenarios.

Run from the repo root after generate_maps.py:
``python3 scripts/generate_scenarios.py``. Writes scenario JSON files into
src/drivebox/data/scenarios/, validates each against its map (waypoints on
mesh, spawn rectangles fully on-road, no spawn/predefined overlap), then
smoke-runs a short episode per scenario.
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from drivebox.env import DrivingEnv                      # noqa: E402
from drivebox.geometry import OrientedRect, Pose2, rect_corners_batch, rects_overlap  # noqa: E402
from drivebox.maps import load_bundled_map               # noqa: E402
from drivebox.scenario import load_scenario, scenario_from_dict  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "drivebox" / "data" / "scenarios"

PI = math.pi
HPI = math.pi / 2


def scenarios() -> dict[str, dict]:
    ew_lights = [
        {"id": "tl_e", "kind": "traffic_light",
         "program": [["green", 40], ["yellow", 5], ["red", 35]]},
        {"id": "tl_w", "kind": "traffic_light",
         "program": [["green", 40], ["yellow", 5], ["red", 35]]},
        {"id": "tl_n", "kind": "traffic_light",
         "program": [["red", 45], ["green", 30], ["yellow", 5]]},
        {"id": "tl_s", "kind": "traffic_light",
         "program": [["red", 45], ["green", 30], ["yellow", 5]]},
    ]
    red_first = [
        {"id": "tl_e", "kind": "traffic_light",
         "program": [["red", 80], ["green", 115], ["yellow", 5]]},
        {"id": "tl_w", "kind": "traffic_light",
         "program": [["red", 80], ["green", 115], ["yellow", 5]]},
        {"id": "tl_n", "kind": "traffic_light",
         "program": [["green", 75], ["yellow", 5], ["red", 120]]},
        {"id": "tl_s", "kind": "traffic_light",
         "program": [["green", 75], ["yellow", 5], ["red", 120]]},
    ]
    return {
        # plain lane-following, also used by benchmarks and examples
        "straight_empty": {
            "map": "straight_road",
            "ego_spawns": [[10.0, -1.75, 0.0, 5.0]],
            "waypoints": [[60.0, -1.75], [110.0, -1.75], [160.0, -1.75],
                          [195.0, -1.75]],
        },
        # -- training ------------------------------------------------------
        "empty_intersection": {
            "map": "four_way",
            "ego_spawns": [[-40.0, -1.75, 0.0, 5.0], [-30.0, -1.75, 0.0, 5.0]],
            "waypoints": [[-15.0, -1.75], [0.0, -1.75], [20.0, -1.75],
                          [45.0, -1.75]],
        },
        "crowded_highway": {
            "map": "straight_road",
            "ego_spawns": [[10.0, -1.75, 0.0, 5.0]],
            "waypoints": [[60.0, -1.75], [110.0, -1.75], [160.0, -1.75]],
            "npc_count": 12,
        },
        "crowded_left_turn": {
            "map": "four_way",
            "ego_spawns": [[-30.0, -1.75, 0.0, 4.0]],
            "waypoints": [[-10.0, -1.75], [-0.52, 0.52], [1.75, 10.0],
                          [1.75, 35.0]],
            "npc_count": 8,
        },
        "controlled_intersection": {
            "map": "four_way",
            "ego_spawns": [[-35.0, -1.75, 0.0, 5.0]],
            "waypoints": [[-10.0, -1.75], [15.0, -1.75], [40.0, -1.75]],
            "npc_count": 6,
            "controls": ew_lights,
        },
        "roundabout_rush": {
            "map": "roundabout",
            "ego_spawns": [[55.0, 1.75, PI, 5.0]],
            "waypoints": [[32.0, 1.75], [17.2, 8.0], [0.0, 19.0],
                          [1.75, 40.0]],
            "npc_count": 6,
        },
        # -- validation ----------------------------------------------------
        "parked_car": {
            "map": "straight_road",
            "ego_spawns": [[5.0, -1.75, 0.0, 5.0]],
            "waypoints": [[20.0, -1.75], [45.0, -1.75], [70.0, -1.75],
                          [95.0, -1.75]],
            "predefined_agents": [
                {"state": [30.0, -1.75, 0.0, 0.0], "static": True},
            ],
        },
        "three_way_merge": {
            "map": "three_way",
            "ego_spawns": [[1.75, -40.0, HPI, 4.0]],
            "waypoints": [[1.75, -15.0], [6.0, -1.75], [25.0, -1.75],
                          [45.0, -1.75]],
            "npc_count": 4,
        },
        "chicken": {
            "map": "straight_road",
            "ego_spawns": [[10.0, -1.75, 0.0, 5.0]],
            "waypoints": [[40.0, -1.75], [70.0, -1.75], [100.0, -1.75],
                          [130.0, -1.75]],
            "predefined_agents": [
                {"state": [80.0, -1.75, PI, 8.0], "static": False},
            ],
        },
        "roundabout_val": {
            "map": "roundabout",
            "ego_spawns": [[1.75, -50.0, HPI, 5.0]],
            "waypoints": [[1.75, -30.0], [8.0, -17.2], [19.0, 0.0],
                          [35.0, -1.75], [50.0, -1.75]],
            "npc_count": 4,
        },
        "traffic_lights": {
            "map": "four_way",
            "ego_spawns": [[-30.0, -1.75, 0.0, 4.0]],
            "waypoints": [[-10.0, -1.75], [10.0, -1.75], [35.0, -1.75]],
            "npc_count": 4,
            "controls": red_first,
        },
    }


def check_on_mesh(bundle, states, attrs, label: str) -> None:
    states = np.asarray(states, dtype=np.float64).reshape(-1, 4)
    corners = rect_corners_batch(
        states[:, 0], states[:, 1], states[:, 2],
        np.full(len(states), attrs[0]), np.full(len(states), attrs[1]),
    )
    on = bundle.mesh.contains(corners.reshape(-1, 2)).reshape(len(states), 4)
    if not on.all():
        bad = int(np.flatnonzero(~on.all(axis=1))[0])
        raise SystemExit(f"{label}[{bad}] rectangle leaves the mesh")


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, data in scenarios().items():
        sc = scenario_from_dict(data)
        bundle = load_bundled_map(sc.map_name)
        sc.validate_against(bundle)
        dims = (sc.ego_attrs.length, sc.ego_attrs.width)
        check_on_mesh(bundle, sc.ego_spawns, dims, f"{name}: ego_spawns")
        for i, agent in enumerate(sc.predefined):
            check_on_mesh(bundle, [agent.state],
                          (agent.attrs.length, agent.attrs.width),
                          f"{name}: predefined[{i}]")
            other = OrientedRect(
                Pose2(agent.state[0], agent.state[1], agent.state[2]),
                agent.attrs.length, agent.attrs.width)
            for spawn in sc.ego_spawns:
                ego = OrientedRect(Pose2(spawn[0], spawn[1], spawn[2]),
                                   dims[0], dims[1])
                if rects_overlap(ego, other):
                    raise SystemExit(f"{name}: spawn overlaps predefined[{i}]")

        path = OUT_DIR / f"{name}.json"
        import json
        path.write_text(json.dumps(data, indent=1), encoding="utf-8")
        load_scenario(path)  # round-trip check

        env = DrivingEnv(name)
        obs, info = env.reset(seed=7)
        steps = 0
        for _ in range(20):
            result = env.step(np.array([0.0, 0.2]))
            steps += 1
            if result.terminated or result.truncated:
                break
        print(f"{name}: npc={info['npc_count']} steps={steps} "
              f"r_last={result.reward:+.3f} obs={obs.shape}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
