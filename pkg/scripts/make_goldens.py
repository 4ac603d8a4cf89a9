"""Regenerate the renderer golden fixtures.

Run from the repo root: ``python3 scripts/make_goldens.py``. Renders three
hand-built worlds with the default config and freezes the frames as binary
PPM files under tests/golden/. Also writes upscaled PNG copies to
/tmp/goldens/ for eyeballing (not part of the repo).

Goldens pin the rasterizer's exact output; regenerate only on a deliberate
rendering change, and eyeball the PNGs before committing.
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from drivebox.geometry import Pose2                     # noqa: E402
from drivebox.kinematics import AgentAttributes, BicycleModel  # noqa: E402
from drivebox.maps import load_bundled_map              # noqa: E402
from drivebox.renderer import RenderConfig, render, write_ppm  # noqa: E402
from drivebox.world import (                            # noqa: E402
    AgentBatch, TrafficControl, WorldState, advance_controls,
)

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "golden"
PREVIEW_DIR = Path("/tmp/goldens")

A = AgentAttributes()


def vehicles(states: list[list[float]]) -> dict:
    batch = AgentBatch.create(BicycleModel(), [A] * len(states), states)
    return {"vehicle": batch}


def controls_for(bundle, programs: dict[str, list]) -> list[TrafficControl]:
    out = []
    for rect, control_id in bundle.stop_lines:
        program = programs.get(control_id)
        if program is None:
            out.append(TrafficControl(control_id, rect, "stop_sign"))
        else:
            out.append(TrafficControl(control_id, rect, "traffic_light",
                                      tuple(program)))
    return advance_controls(out, 0)


def scenes() -> dict:
    straight = load_bundled_map("straight_road")
    four = load_bundled_map("four_way")
    ring = load_bundled_map("roundabout")

    out = {}
    out["straight_mid"] = (
        WorldState(straight, vehicles([[100.0, -1.75, 0.0, 5.0]])),
        Pose2(100.0, -1.75, 0.0),
        np.array([110.0, -1.75]),
    )

    red = [("red", 10), ("green", 10)]
    green = [("green", 10), ("red", 10)]
    out["four_way_mix"] = (
        WorldState(
            four,
            vehicles([[-8.0, -1.75, 0.0, 4.0],
                      [8.0, 1.75, math.pi, 5.0],
                      [1.75, -8.0, 0.5 * math.pi, 3.0]]),
            controls_for(four, {"tl_e": red, "tl_w": red,
                                "tl_n": green, "tl_s": green}),
        ),
        Pose2(-8.0, -1.75, 0.0),
        np.array([10.0, -1.75]),
    )

    out["roundabout_ring"] = (
        WorldState(
            ring,
            vehicles([[0.0, -19.0, 0.0, 5.0],
                      [9.5, -16.4545, math.pi / 6.0, 4.0]]),
        ),
        Pose2(0.0, -19.0, 0.0),
        np.array([13.435, -13.435]),
    )
    return out


def main() -> int:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    PREVIEW_DIR.mkdir(parents=True, exist_ok=True)
    cfg = RenderConfig()
    for name, (world, camera, waypoint) in scenes().items():
        frame = render(world, camera, cfg, waypoint=waypoint)
        path = GOLDEN_DIR / f"{name}.ppm"
        write_ppm(path, frame.pixels)

        from PIL import Image
        big = np.kron(frame.pixels, np.ones((6, 6, 1), dtype=np.uint8))
        Image.fromarray(big).save(PREVIEW_DIR / f"{name}.png")
        print(f"{name}: {frame.pixels.shape} -> {path.name}, "
              f"{np.unique(frame.pixels.reshape(-1, 3), axis=0).shape[0]} colors")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
