import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from subgoal_tamp import harness
from subgoal_tamp.geometry import Rect, Vec2
from subgoal_tamp.scene import parse_scene

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def rect_doc(x0, y0, x1, y1, angle=None):
    d = {"cx": (x0 + x1) / 2, "cy": (y0 + y1) / 2, "hw": (x1 - x0) / 2, "hh": (y1 - y0) / 2}
    if angle is not None:
        d["angle"] = angle
    return d


def make_scene(size=(4.0, 4.0), walls=(), agent=(0.5, 0.5), objects=(("goal", 2.0, 2.0, 0.25),),
               goal=(3.0, 3.0, 3.9, 3.9), radius=0.25, human=None, name="test"):
    doc = {
        "name": name,
        "bounds": rect_doc(0, 0, *size),
        "walls": [rect_doc(*w, angle=0.0) for w in walls],
        "agent": {"x": agent[0], "y": agent[1], "radius": radius},
        "objects": [{"id": i, "cx": x, "cy": y, "hw": h, "hh": h} for i, x, y, h in objects],
        "goal": rect_doc(*goal),
        "goal_object": objects[0][0],
    }
    if human is not None:
        doc["human_subgoals"] = human
    return parse_scene(json.dumps(doc))


@pytest.fixture
def open_scene():
    return make_scene()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def bundled(name):
    return harness.load_scene(harness.resolve_scene(name))


def unit_rect(x, y, h=1.0, angle=0.0):
    return Rect(Vec2(x, y), Vec2(h, h), angle)
