#!/usr/bin/env python3
"""Regenerates the fixture maps under maps/ ('#' occupied, '.' free)."""

import os

HERE = os.path.dirname(os.path.abspath(__file__))
MAPS = os.path.join(HERE, "..", "maps")


def blank(w, h):
    grid = [["#"] * w for _ in range(h)]
    return grid


def carve(grid, x0, y0, x1, y1):
    for y in range(y0, y1):
        for x in range(x0, x1):
            grid[y][x] = "."


def wall(grid, x0, y0, x1, y1):
    for y in range(y0, y1):
        for x in range(x0, x1):
            grid[y][x] = "#"


def write(name, grid):
    path = os.path.join(MAPS, name)
    with open(path, "w") as f:
        for row in grid:
            f.write("".join(row) + "\n")
    print(f"wrote {path} ({len(grid[0])}x{len(grid)})")


def empty_room():
    # 8 m x 8 m interior at 0.1 m/cell
    g = blank(82, 82)
    carve(g, 1, 1, 81, 81)
    write("empty_room.txt", g)


def two_room():
    # two 6 m x 5 m rooms, one 0.4 m doorway in a 0.2 m wall
    g = blank(124, 52)
    carve(g, 1, 1, 61, 51)
    carve(g, 63, 1, 123, 51)
    carve(g, 61, 24, 63, 28)  # doorway
    write("two_room.txt", g)


def four_room():
    # ~20 m x 15 m, 2x2 rooms, chain topology A-B-D-C (3 doorways)
    w, h = 200, 150
    g = blank(w, h)
    carve(g, 1, 1, w - 1, h - 1)
    wall(g, 99, 1, 101, h - 1)   # vertical partition
    wall(g, 1, 74, w - 1, 76)    # horizontal partition
    carve(g, 99, 30, 101, 34)    # A-B (top wall, upper doorway)
    carve(g, 150, 74, 154, 76)   # B-D (right column)
    carve(g, 99, 110, 101, 114)  # C-D (bottom wall)
    write("four_room.txt", g)


def eight_room():
    # ~24 m x 12 m, 2 rows x 4 columns of ~6 m x 6 m rooms
    w, h = 240, 120
    g = blank(w, h)
    carve(g, 1, 1, w - 1, h - 1)
    for xc in (59, 119, 179):
        wall(g, xc, 1, xc + 2, h - 1)
    wall(g, 1, 59, w - 1, 61)
    # top row left-to-right doorways
    carve(g, 59, 20, 61, 24)
    carve(g, 119, 35, 121, 39)
    carve(g, 179, 18, 181, 22)
    # bottom row doorways
    carve(g, 59, 95, 61, 99)
    carve(g, 119, 80, 121, 84)
    carve(g, 179, 100, 181, 104)
    # vertical connections between the rows (columns 1 and 4)
    carve(g, 28, 59, 32, 61)
    carve(g, 208, 59, 212, 61)
    write("eight_room.txt", g)


def backtrack():
    # T-shaped corridors for the scripted backtracking trace: the junction
    # sees both branches, the south branch cannot see the east one
    w, h = 90, 60
    g = blank(w, h)
    carve(g, 4, 4, 16, 16)     # start alcove (junction room), 1.2 m square
    carve(g, 8, 16, 14, 46)    # south leg, 0.6 m wide, 3 m long
    carve(g, 16, 7, 80, 13)    # east leg, 0.6 m wide, 6.4 m long
    carve(g, 8, 46, 30, 56)    # south room (frontier target C1)
    write("backtrack.txt", g)


if __name__ == "__main__":
    os.makedirs(MAPS, exist_ok=True)
    empty_room()
    two_room()
    four_room()
    eight_room()
    backtrack()
