"""Readers and writers: CSV/JSON point clouds, SVG closed paths, OFF/OBJ meshes."""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DomainError
from .geometry import PointCloud

_COORDS = ("x", "y", "z")


def _fmt(v: float) -> str:
    return repr(float(v))


def write_csv(path, points, t=None) -> Path:
    """RFC 4180 CSV with a header row: x,y[,z], optionally preceded by a parameter column t."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    header = list(_COORDS[: pts.shape[1]])
    rows = pts
    if t is not None:
        header = ["t"] + header
        rows = np.column_stack([np.asarray(t, dtype=float), pts])
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> PointCloud:
    """Read a cloud written by :func:`write_csv` (a header row is optional; a t column is dropped)."""
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DomainError(f"{path}: no rows")
    header = [c.strip().lower() for c in rows[0]]
    cols = None
    if all(h in ("t", *_COORDS) for h in header):
        cols = [i for i, h in enumerate(header) if h in _COORDS]
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric entry ({exc})") from None
    if cols is not None:
        data = data[:, cols]
    if data.ndim != 2 or data.shape[1] not in (2, 3) or len(data) == 0:
        raise DomainError(f"{path}: expected rows of 2 or 3 coordinates")
    return PointCloud(data)


def write_json_cloud(path, points) -> Path:
    path = Path(path)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    path.write_text(json.dumps({"points": pts.tolist()}, indent=1))
    return path


def read_cloud(path) -> PointCloud:
    """Read a CSV or JSON (``{"points": [[...], ...]}`` or a bare list) point cloud."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        if isinstance(data, dict):
            data = data.get("points")
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3) or len(arr) == 0:
            raise DomainError(f"{path}: expected a list of 2D or 3D points")
        return PointCloud(arr)
    return read_csv(path)


def svg_path(points) -> str:
    pts = np.asarray(points, dtype=float)
    head = f"M {_fmt(pts[0, 0])} {_fmt(pts[0, 1])}"
    body = " ".join(f"L {_fmt(x)} {_fmt(y)}" for x, y in pts[1:])
    return f"{head} {body} Z"


def write_svg(path, points, stroke_width: float | None = None, margin: float = 0.05) -> Path:
    """SVG 1.1 document with the closed curve through ``points``.

    One user unit equals one length unit; the y axis is flipped by a group
    transform so the drawing keeps the mathematical orientation.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("SVG export needs a 2D curve")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    pad = margin * span
    sw = stroke_width if stroke_width is not None else span / 500.0
    x0, y0 = lo[0] - pad, -(hi[1] + pad)
    w, h = hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad
    doc = (
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}" width="{_fmt(w)}" height="{_fmt(h)}">\n'
        f'  <g transform="scale(1,-1)">\n'
        f'    <path d="{svg_path(pts)}" fill="none" stroke="black" stroke-width="{_fmt(sw)}"/>\n'
        "  </g>\n</svg>\n")
    path = Path(path)
    path.write_text(doc)
    return path


def read_svg_path(path) -> np.ndarray:
    """Vertices of the first path written by :func:`write_svg`."""
    text = Path(path).read_text()
    m = re.search(r'<path[^>]*\sd="([^"]+)"', text)
    if not m:
        raise DomainError(f"{path}: no path element")
    nums = [float(v) for v in re.findall(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?", m.group(1))]
    return np.array(nums).reshape(-1, 2)


def hull_mesh(points, directions=None):
    """Triangle mesh of a boundary sample, faces oriented counterclockwise seen from outside.

    Faces come from the convex hull of ``directions`` when given (the sample
    is then taken to be indexed like the directions) and from the hull of
    the points otherwise.
    """
    pts = np.asarray(points, dtype=float)
    base = pts if directions is None else np.asarray(directions, dtype=float)
    hull = ConvexHull(base)
    faces = hull.simplices.copy()
    tri = base[faces]
    nrm = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    flip = np.einsum("ij,ij->i", nrm, hull.equations[:, :3]) < 0
    faces[flip] = faces[flip][:, ::-1]
    return pts, faces


def write_off(path, points, faces) -> Path:
    pts = np.asarray(points, dtype=float)
    lines = ["OFF", f"{len(pts)} {len(faces)} 0"]
    lines += [" ".join(_fmt(v) for v in p) for p in pts]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in faces]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_off(path):
    tokens = Path(path).read_text().split()
    if not tokens or tokens[0] != "OFF":
        raise DomainError(f"{path}: not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    pts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        k = int(tokens[pos])
        faces.append([int(v) for v in tokens[pos + 1:pos + 1 + k]])
        pos += 1 + k
    return pts, np.array(faces, dtype=int)


def write_obj(path, points, faces) -> Path:
    pts = np.asarray(points, dtype=float)
    lines = [f"v {' '.join(_fmt(v) for v in p)}" for p in pts]
    lines += ["f " + " ".join(str(int(i) + 1) for i in f) for f in faces]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_obj(path):
    pts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            pts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(v.split("/")[0]) - 1 for v in parts[1:]])
    return np.array(pts), np.array(faces, dtype=int)


def write_mesh(path, points, faces) -> Path:
    path = Path(path)
    if path.suffix.lower() == ".obj":
        return write_obj(path, points, faces)
    return write_off(path, points, faces)


def write_report(path, report) -> Path:
    path = Path(path)
    path.write_text(report.dumps() + "\n")
    return path
