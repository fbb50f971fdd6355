"""Tour of the grid-world environments and the fixed-point oracle.

Loads each bundled map, solves it exactly by value iteration, and prints
the optimal state values together with the greedy policy as arrows.
"""
import numpy as np

import fedq

ARROWS = {0: "^", 1: "v", 2: "<", 3: ">"}


def render(name: str) -> None:
    grid = fedq.load_map(name)
    mdp = fedq.build_gridworld(grid, noise=fedq.NoiseSpec(std=0.5, clip=0.5), gamma=0.8)
    q_star = fedq.value_iteration(mdp, tol=1e-10)
    policy = fedq.greedy_policy(q_star)
    values = q_star.max(axis=1)

    print(f"\n=== {name}: {mdp.n_states} states, {mdp.n_actions} actions "
          f"(gamma={mdp.gamma}, r_max={mdp.r_max}) ===")
    positions = {pos: s for s, pos in enumerate(grid.state_positions())}
    for r in range(grid.rows):
        cells = []
        for c in range(grid.cols):
            if grid.cell(r, c) == "#":
                cells.append("  ## ")
            elif positions[(r, c)] == grid.goal_index:
                cells.append("  G  ")
            else:
                s = positions[(r, c)]
                cells.append(f"{values[s]:4.2f}{ARROWS[int(policy[s])]}")
        print(" ".join(cells))
    residual = np.max(np.abs(fedq.exact_bellman(mdp, q_star) - q_star))
    print(f"fixed-point residual: {residual:.2e}")


if __name__ == "__main__":
    for name in ("map5x5", "map5x5w", "map6x6w"):
        render(name)
    print("\n(map11x11 and map17x17w render the same way; try render('map17x17w'))")
