"""Grid-world maps and the deterministic maze MDP built from them.

Map file format: UTF-8 text, one row per line, equal-length rows over the
alphabet ``.`` (empty), ``#`` (wall), ``G`` (goal, exactly one).  State
indices are assigned row-major over the non-wall cells, so walls are not
states.

Reward rules for the built MDP:

* moving into the goal cell yields mean reward +1;
* moving into a wall or off the grid leaves the state unchanged and
  yields mean reward -1;
* every other valid move yields mean reward 0;
* the goal state is absorbing: all of its actions self-loop with mean
  reward 0.

Transitions are deterministic; the only stochasticity of a noisy
grid-world is the clipped Gaussian reward noise.

Bundled maps (``fedq.grids.BUNDLED_MAPS``): map5x5 and map11x11 are open
rooms with a centered goal; map17x17w is a four-rooms maze; map5x5w and
map6x6w are small walled layouts.  The walled 5x5/6x6 layouts are
plausible hand-drawn mazes, not reproductions of any particular figure.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    EmptyMapError,
    GoalCountError,
    InvalidGammaError,
    RaggedRowsError,
    UnknownCharError,
)
from .mdp import NoiseSpec, TabularMDP

EMPTY, WALL, GOAL = ".", "#", "G"

# Action order: up, down, left, right.
ACTION_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))
ACTION_NAMES = ("up", "down", "left", "right")
N_ACTIONS = 4

BUNDLED_MAPS = ("map5x5", "map5x5w", "map6x6w", "map11x11", "map17x17w")


@dataclass(frozen=True)
class GridSpec:
    """Parsed grid: cell layout plus the row-major non-wall state indexing."""

    rows: int
    cols: int
    cells: tuple[str, ...]  # row-major, length rows * cols
    goal_index: int  # state index of the goal

    @property
    def n_states(self) -> int:
        return sum(1 for c in self.cells if c != WALL)

    def cell(self, r: int, c: int) -> str:
        return self.cells[r * self.cols + c]

    def state_positions(self) -> list[tuple[int, int]]:
        """(row, col) of each state, in state-index order."""
        return [
            (i // self.cols, i % self.cols)
            for i, ch in enumerate(self.cells)
            if ch != WALL
        ]

    def state_at(self, r: int, c: int) -> int | None:
        """State index of cell (r, c), or None for walls/off-grid."""
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            return None
        if self.cell(r, c) == WALL:
            return None
        state = 0
        for i in range(r * self.cols + c):
            if self.cells[i] != WALL:
                state += 1
        return state


def parse_map(text: str) -> GridSpec:
    """Parse map text into a GridSpec.

    Raises EmptyMapError, RaggedRowsError, UnknownCharError or
    GoalCountError on malformed input.
    """
    lines = text.splitlines()
    if not lines or all(len(line) == 0 for line in lines):
        raise EmptyMapError("map has no rows")
    cols = len(lines[0])
    if any(len(line) != cols for line in lines):
        raise RaggedRowsError("map rows have unequal lengths")
    if cols == 0:
        raise EmptyMapError("map rows are empty")
    cells = "".join(lines)
    bad = sorted(set(cells) - {EMPTY, WALL, GOAL})
    if bad:
        raise UnknownCharError(f"unknown map characters: {bad}")
    n_goals = cells.count(GOAL)
    if n_goals != 1:
        raise GoalCountError(f"map must contain exactly one 'G', found {n_goals}")

    goal_state = 0
    for ch in cells:
        if ch == GOAL:
            break
        if ch != WALL:
            goal_state += 1
    return GridSpec(rows=len(lines), cols=cols, cells=tuple(cells), goal_index=goal_state)


def build_gridworld(grid: GridSpec, noise: NoiseSpec = NoiseSpec(), gamma: float = 0.8) -> TabularMDP:
    """Build the deterministic maze MDP for a parsed grid.

    r_max is 1 + noise.clip so that every sampled reward magnitude is
    within the bound carried by the convergence analysis.
    """
    if not 0.0 < gamma < 1.0:
        raise InvalidGammaError(f"gamma must lie in (0, 1), got {gamma}")

    positions = grid.state_positions()
    index_of = {pos: s for s, pos in enumerate(positions)}
    n = len(positions)

    transition = np.zeros((n, N_ACTIONS, n))
    reward_mean = np.zeros((n, N_ACTIONS))
    goal = grid.goal_index
    for s, (r, c) in enumerate(positions):
        for a, (dr, dc) in enumerate(ACTION_DELTAS):
            if s == goal:
                transition[s, a, s] = 1.0
                continue
            dest = index_of.get((r + dr, c + dc))
            if dest is None:  # wall or off-grid: stay, pay the penalty
                transition[s, a, s] = 1.0
                reward_mean[s, a] = -1.0
            else:
                transition[s, a, dest] = 1.0
                reward_mean[s, a] = 1.0 if dest == goal else 0.0

    return TabularMDP(
        transition=transition,
        reward_mean=reward_mean,
        gamma=gamma,
        noise=noise,
        r_max=1.0 + noise.clip,
    )


def map_path(name: str) -> Path:
    """Filesystem path of a bundled map."""
    if name not in BUNDLED_MAPS:
        raise KeyError(f"unknown bundled map {name!r}; choose from {BUNDLED_MAPS}")
    with resources.as_file(resources.files("fedq").joinpath(f"maps/{name}.txt")) as p:
        return Path(p)


def load_map(name_or_path: str | Path) -> GridSpec:
    """Load a map by bundled name (e.g. 'map5x5') or by file path."""
    if isinstance(name_or_path, str) and name_or_path in BUNDLED_MAPS:
        path = map_path(name_or_path)
    else:
        path = Path(name_or_path)
    return parse_map(path.read_text(encoding="utf-8"))
