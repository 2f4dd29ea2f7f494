"""Progress metrics between a board state and a target structure.

Four companion metrics: IoU over per-cell code sets, layer-exact
completion, per-position set accuracy, and their unweighted mean.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import ALL_POSITIONS, WorldState


@dataclass(frozen=True)
class ProgressReport:
    iou: float
    completion: float
    position_accuracy: float
    overall: float

    def as_dict(self) -> dict[str, float]:
        return {
            "iou": self.iou,
            "completion": self.completion,
            "position_accuracy": self.position_accuracy,
            "overall": self.overall,
        }


def compute_progress(state: WorldState, target: WorldState) -> ProgressReport:
    """Score a board against a target.

    IoU treats each cell's stack as a set of block codes (duplicates
    collapse; insensitive to order within a stack). Completion counts
    layer-exact code matches over the target's filled cells. Position
    accuracy is the fraction of the nine positions whose code sets match
    exactly (empty matches empty). Degenerate denominators score 1.0 so an
    empty target is trivially complete.
    """
    inter = union = 0
    exact = target_cells = 0
    positions_matched = 0
    for pos in ALL_POSITIONS:
        cur = state.codes(pos)
        tgt = target.codes(pos)
        cur_set, tgt_set = set(cur), set(tgt)
        inter += len(cur_set & tgt_set)
        union += len(cur_set | tgt_set)
        target_cells += len(tgt)
        exact += sum(1 for k in range(min(len(cur), len(tgt))) if cur[k] == tgt[k])
        if cur_set == tgt_set:
            positions_matched += 1

    iou = inter / union if union else 1.0
    completion = exact / target_cells if target_cells else 1.0
    position_accuracy = positions_matched / len(ALL_POSITIONS)
    overall = (iou + completion + position_accuracy) / 3
    return ProgressReport(iou, completion, position_accuracy, overall)


def is_complete(state: WorldState, target: WorldState) -> bool:
    """True when every cell's code list equals the target's exactly.

    Stricter than completion == 1.0 alone, which is blind to surplus
    blocks stacked on top of a finished structure.
    """
    return all(state.codes(pos) == target.codes(pos) for pos in ALL_POSITIONS)
