"""Unit-square Delaunay meshes for the unstructured reconstruction sweep.

Writes data/meshes/square_l{0..3}.node/.ele in the Triangle text format,
with maximum triangle area 0.01 / 4**l and roughly the triangle counts of
Triangle's quality meshes under that budget (150, 620, 2472, 9899). Points
are a jittered hexagonal lattice plus evenly spaced boundary points, so the
hull is the square.
"""

import math
import pathlib

import numpy as np
from scipy.spatial import Delaunay

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "meshes"
COUNTS = [150, 620, 2472, 9899]
JITTER = 0.06
SEED = 20240501


def points(spacing, rng):
    """Boundary points at `spacing` plus a jittered hexagonal interior."""
    k = max(1, round(1.0 / spacing))
    t = np.arange(k) / k
    bnd = np.concatenate([
        np.stack([t, np.zeros(k)], 1),
        np.stack([np.ones(k), t], 1),
        np.stack([1.0 - t, np.ones(k)], 1),
        np.stack([np.zeros(k), 1.0 - t], 1),
    ])
    dy = spacing * math.sqrt(3) / 2
    inner = []
    for j in range(1, int(1.0 / dy) + 1):
        y = j * dy
        x0 = spacing / 2 if j % 2 else 0.0
        for x in np.arange(x0, 1.0, spacing):
            inner.append((x, y))
    inner = np.array(inner) + rng.uniform(-JITTER, JITTER, (len(inner), 2)) * spacing
    keep = np.all((inner > 0.45 * spacing) & (inner < 1.0 - 0.45 * spacing), axis=1)
    return np.concatenate([bnd, inner[keep]])


def signed_areas(p, tris):
    a, b, c = p[tris[:, 0]], p[tris[:, 1]], p[tris[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for level in range(4):
        max_area = 0.01 / 4**level
        # scan spacings around equilateral triangles of the mean area; keep
        # the count closest to the target that respects the budget
        base = math.sqrt(4.0 / (math.sqrt(3) * COUNTS[level]))
        best = None
        for f in np.arange(0.85, 1.15, 0.0025):
            p = points(base * f, np.random.default_rng(SEED + level))
            tris = Delaunay(p).simplices.copy()
            if np.abs(signed_areas(p, tris)).max() > max_area:
                continue
            miss = abs(len(tris) - COUNTS[level])
            if best is None or miss < best[0]:
                best = (miss, p, tris)
        _, p, tris = best
        area = signed_areas(p, tris)
        flip = area < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
        area = np.abs(area)
        assert abs(area.sum() - 1.0) < 1e-12, area.sum()
        assert area.max() <= max_area, (area.max(), max_area)
        assert len(np.unique(tris)) == len(p)
        with open(OUT / f"square_l{level}.node", "w") as f:
            f.write(f"# unit square, max area {max_area:g}\n{len(p)} 2 0 0\n")
            for i, (x, y) in enumerate(p, 1):
                f.write(f"{i} {float(x)!r} {float(y)!r}\n")
        with open(OUT / f"square_l{level}.ele", "w") as f:
            f.write(f"{len(tris)} 3 0\n")
            for i, (a, b, c) in enumerate(tris, 1):
                f.write(f"{i} {a + 1} {b + 1} {c + 1}\n")
        print(level, len(p), len(tris), area.max() / max_area, area.min() / max_area)


if __name__ == "__main__":
    main()
