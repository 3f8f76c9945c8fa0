"""Builds the coarse mesh asset for the cylinder scattering domain.

Domain: (-1,1)^2 minus the disk of radius 0.2 about (0,-1). The disk cuts
into the bottom side, so the boundary is a single loop. Output is the
`trimesh 1` text format read by `mixwave::mesh::read_mesh`.

Usage: python3 tools/make_scattering_mesh.py > crates/core/assets/scattering_coarse.mesh
"""
import math
import sys

import numpy as np
from scipy.spatial import Delaunay

H = 0.125
R = 0.2
CENTER = np.array([0.0, -1.0])


def boundary_points():
    pts = []
    # bottom-left: (-1,-1) -> (-0.2,-1)
    n = round(0.8 / H)
    pts += [(-1.0 + 0.8 * i / n, -1.0) for i in range(n)]
    # semicircle: (-0.2,-1) -> (0.2,-1) through (0,-0.8)
    m = max(3, round(math.pi * R / H))
    pts += [(CENTER[0] + R * math.cos(math.pi - math.pi * i / m),
             CENTER[1] + R * math.sin(math.pi - math.pi * i / m)) for i in range(m)]
    # bottom-right: (0.2,-1) -> (1,-1)
    pts += [(0.2 + 0.8 * i / n, -1.0) for i in range(n)]
    k = round(2.0 / H)
    pts += [(1.0, -1.0 + 2.0 * i / k) for i in range(k)]
    pts += [(1.0 - 2.0 * i / k, 1.0) for i in range(k)]
    pts += [(-1.0, 1.0 - 2.0 * i / k) for i in range(k)]
    return np.array(pts)


def interior_points():
    pts = []
    dy = H * math.sqrt(3) / 2
    rows = int(2.0 / dy) + 2
    for r in range(rows):
        y = -1.0 + r * dy
        shift = 0.5 * H if r % 2 else 0.0
        x = -1.0 + shift
        while x < 1.0:
            p = np.array([x, y])
            inside = -1 < x < 1 and -1 < y < 1
            far_box = min(x + 1, 1 - x, y + 1, 1 - y) > 0.55 * H
            far_disk = np.linalg.norm(p - CENTER) > R + 0.55 * H
            if inside and far_box and far_disk:
                pts.append(p)
            x += H
    return np.array(pts)


def in_disk(p):
    return np.linalg.norm(p - CENTER) < R - 1e-12


def triangulate(pts):
    tri = Delaunay(pts)
    cells = []
    for s in tri.simplices:
        c = pts[s].mean(axis=0)
        if in_disk(c):
            continue
        a, b, d = pts[s]
        area = 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]))
        if abs(area) < 1e-12:
            continue
        cells.append(list(s) if area > 0 else [s[0], s[2], s[1]])
    return np.array(cells)


def main():
    bnd = boundary_points()
    nb = len(bnd)
    inner = interior_points()
    pts = np.vstack([bnd, inner])
    # a few sweeps of Laplacian smoothing on interior vertices
    for _ in range(8):
        cells = triangulate(pts)
        acc = np.zeros_like(pts)
        cnt = np.zeros(len(pts))
        for c in cells:
            for i in range(3):
                for j in range(3):
                    if i != j:
                        acc[c[i]] += pts[c[j]]
                        cnt[c[i]] += 1
        new = pts.copy()
        mask = np.arange(len(pts)) >= nb
        new[mask] = acc[mask] / cnt[mask][:, None]
        pts = new
    cells = triangulate(pts)

    edges = {}
    for c in cells:
        for i in range(3):
            a, b = sorted((c[(i + 1) % 3], c[(i + 2) % 3]))
            edges[(a, b)] = edges.get((a, b), 0) + 1
    boundary = []
    for (a, b), n in sorted(edges.items()):
        if n != 1:
            continue
        pa, pb = pts[a], pts[b]
        mid = 0.5 * (pa + pb)
        if abs(pa[0]) > 1 - 1e-12 and abs(pb[0]) > 1 - 1e-12:
            tag = "dirichlet_p"
        elif abs(pa[1]) > 1 - 1e-12 and abs(pb[1]) > 1 - 1e-12:
            tag = "neumann_u"
        elif abs(np.linalg.norm(pa - CENTER) - R) < 1e-12 and abs(np.linalg.norm(pb - CENTER) - R) < 1e-12:
            tag = "scatterer"
        else:
            raise SystemExit(f"unclassified boundary edge at {mid}")
        boundary.append((a, b, tag))

    out = sys.stdout
    out.write("trimesh 1\n")
    out.write(f"vertices {len(pts)}\n")
    for p in pts:
        out.write(f"{p[0]:.17g} {p[1]:.17g}\n")
    out.write(f"cells {len(cells)}\n")
    for c in cells:
        out.write(f"{c[0]} {c[1]} {c[2]}\n")
    out.write(f"boundary {len(boundary)}\n")
    for a, b, t in boundary:
        out.write(f"{a} {b} {t}\n")

    # quality report on stderr
    angles = []
    for c in cells:
        P = pts[c]
        for i in range(3):
            u = P[(i + 1) % 3] - P[i]
            v = P[(i + 2) % 3] - P[i]
            angles.append(math.degrees(math.acos(np.dot(u, v) / np.linalg.norm(u) / np.linalg.norm(v))))
    hmax = max(np.linalg.norm(pts[c[i]] - pts[c[(i + 1) % 3]]) for c in cells for i in range(3))
    sys.stderr.write(f"V={len(pts)} C={len(cells)} B={len(boundary)} min_angle={min(angles):.1f} max_angle={max(angles):.1f} hmax={hmax:.4f}\n")


if __name__ == "__main__":
    main()
