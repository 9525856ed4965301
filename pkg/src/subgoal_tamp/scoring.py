"""Feasibility score used both to prioritize nodes and to filter subgoals."""

from __future__ import annotations

from dataclasses import dataclass

from .scene import Configuration, Scene, line_of_sight


@dataclass(frozen=True)
class ScoreWeights:
    w_sight_goal: float = 10.0
    w_sight_agent: float = 5.0
    # distance thresholds in units of the normalized scene (bounds -> unit square)
    d_near: float = 0.2
    d_mid: float = 0.4
    v_near: float = 5.0
    v_mid: float = 2.0
    movables_block: bool = True

    def __post_init__(self):
        if not self.d_near < self.d_mid:
            raise ValueError("d_near must be smaller than d_mid")
        if min(self.w_sight_goal, self.w_sight_agent, self.v_near, self.v_mid, self.d_near) < 0:
            raise ValueError("weights must be non-negative")

    def scaled(self, k: float) -> ScoreWeights:
        return ScoreWeights(
            self.w_sight_goal * k, self.w_sight_agent * k, self.d_near, self.d_mid,
            self.v_near * k, self.v_mid * k, self.movables_block,
        )


def score_terms(scene: Scene, c: Configuration, w: ScoreWeights) -> tuple[int, int, float]:
    """(v_o, v_g, d): goal sight, agent sight and normalized distance to the goal."""
    o = scene.goal_object
    v_o = int(line_of_sight(scene, c, o, "goal", w.movables_block))
    v_g = int(line_of_sight(scene, c, o, "agent", w.movables_block))
    d = c.objects[o].dist(scene.goal_region.center) / scene.scale
    return v_o, v_g, d


def score(scene: Scene, c: Configuration, w: ScoreWeights = ScoreWeights()) -> float:
    v_o, v_g, d = score_terms(scene, c, w)
    v_dist = w.v_near if d < w.d_near else w.v_mid if d < w.d_mid else 0.0
    return w.w_sight_goal * v_o + w.w_sight_agent * v_g + v_dist
