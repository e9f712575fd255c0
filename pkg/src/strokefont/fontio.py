"""Vectorize glyph rasters (Moore-neighbor boundary tracing) and emit SVG
glyphs plus a FontForge-compatible SFD file.

Contours use straight segments only and live on a 1000-unit em square
(ascent 800, descent 200, baseline at y=0); the raster bounding box is
scaled so its larger side spans the em and its bottom sits on the descent
line. Outer contours have positive signed area under the screen-y (y-down)
convention, holes negative. The SFD subset written here is read back by
parse_sfd, which doubles as the format's executable documentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import check_binary

ASCENT = 800
DESCENT = 200
EM = ASCENT + DESCENT
SIDE_BEARING = 50

# Clockwise ring from north, in screen coordinates (y down).
_RING = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]


@dataclass
class Contour:
    points: list  # (x, y) em units, closure implicit
    is_hole: bool = False


@dataclass
class FontProject:
    family_name: str
    glyphs: dict = field(default_factory=dict)  # codepoint -> [Contour]
    advances: dict = field(default_factory=dict)  # codepoint -> em units
    ascent: int = ASCENT
    descent: int = DESCENT


def shoelace(points) -> float:
    """Raw shoelace sum; sign depends on the coordinate convention."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def signed_area_screen(points) -> float:
    """Signed area of an em-space contour under the screen-y (y-down) convention.

    Em y points up, screens point down, so the raw shoelace flips sign;
    positive means clockwise as drawn on screen.
    """
    return -shoelace(points)


def _moore_trace(ink, start, backtrack):
    """Walk the boundary clockwise; stops by Jacob's criterion."""
    contour = [start]
    current = start
    entry = backtrack
    first = (start, backtrack)
    for _ in range(8 * len(ink) + 8):
        base = _RING.index((entry[0] - current[0], entry[1] - current[1]))
        nxt = None
        for k in range(1, 9):
            off = _RING[(base + k) % 8]
            cand = (current[0] + off[0], current[1] + off[1])
            if cand in ink:
                prev_off = _RING[(base + k - 1) % 8]
                nxt = (cand, (current[0] + prev_off[0], current[1] + prev_off[1]))
                break
        if nxt is None:
            return contour  # isolated pixel
        current, entry = nxt
        if (current, entry) == first:
            return contour
        contour.append(current)
    return contour


def _outer_starts(arr):
    """First pixel (row-major) of each 8-connected ink component."""
    from .raster import connected_components

    return [comp.pixels[0] for comp in connected_components(arr)]


def _hole_starts(arr):
    """Topmost-left pixel of each 4-connected background hole."""
    h, w = arr.shape
    visited = np.zeros((h, w), dtype=bool)
    holes = []
    for y0 in range(h):
        for x0 in range(w):
            if arr[y0, x0] or visited[y0, x0]:
                continue
            stack = [(x0, y0)]
            visited[y0, x0] = True
            pixels = []
            touches_border = False
            while stack:
                x, y = stack.pop()
                pixels.append((x, y))
                if x in (0, w - 1) or y in (0, h - 1):
                    touches_border = True
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nx, ny = x + dx, y + dy
                    if 0 <= nx < w and 0 <= ny < h and not arr[ny, nx] and not visited[ny, nx]:
                        visited[ny, nx] = True
                        stack.append((nx, ny))
            if not touches_border:
                holes.append(min(pixels, key=lambda p: (p[1], p[0])))
    return holes


def trace_boundary_pixels(img):
    """Pixel-space boundary walks: (outer_contours, hole_contours)."""
    arr = check_binary(img)
    ink = {(int(x), int(y)) for y, x in zip(*np.nonzero(arr))}
    outers = [_moore_trace(ink, s, (s[0] - 1, s[1])) for s in _outer_starts(arr)]
    holes = []
    for hx, hy in _hole_starts(arr):
        start = (hx, hy - 1)  # ink pixel directly above the hole's topmost pixel
        holes.append(_moore_trace(ink, start, (hx, hy)))
    return outers, holes


def _orient(points, want_positive):
    if len(points) >= 3:
        area = signed_area_screen(points)
        if (area > 0) != want_positive and area != 0:
            return [points[0]] + points[1:][::-1]
    return points


def _dedup(points):
    out = []
    for p in points:
        if not out or out[-1] != p:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def trace_contours(glyph) -> list:
    """Boundary contours of a glyph raster, mapped onto the em square."""
    raster = glyph.raster if hasattr(glyph, "raster") else glyph
    arr = check_binary(raster)
    ys, xs = np.nonzero(arr)
    if len(ys) == 0:
        raise ValueError("cannot trace an empty glyph")
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    scale = EM / max(x1 - x0 + 1, y1 - y0 + 1)

    def to_em(p):
        return (SIDE_BEARING + int((p[0] - x0) * scale + 0.5),
                int((y1 - p[1]) * scale + 0.5) - DESCENT)

    outers, holes = trace_boundary_pixels(arr)
    contours = []
    for pixel_points, is_hole in [(c, False) for c in outers] + [(c, True) for c in holes]:
        # Screen-y flips under the em mapping, so orient in em space directly.
        points = _dedup([to_em(p) for p in pixel_points])
        if len(points) < 3:
            continue  # degenerate sliver (single pixel or 1-px line)
        contours.append(Contour(points=_orient(points, not is_hole), is_hole=is_hole))
    if not contours:
        raise ValueError("glyph produced no traceable contours")
    return contours


def douglas_peucker(points, epsilon):
    """Simplify an open polyline, keeping points that deviate more than epsilon."""
    if len(points) <= 2:
        return list(points)
    ax, ay = points[0]
    bx, by = points[-1]
    dmax, index = -1.0, 0
    for i in range(1, len(points) - 1):
        px, py = points[i]
        if (ax, ay) == (bx, by):
            d = ((px - ax) ** 2 + (py - ay) ** 2) ** 0.5
        else:
            d = abs((bx - ax) * (ay - py) - (ax - px) * (by - ay)) / \
                (((bx - ax) ** 2 + (by - ay) ** 2) ** 0.5)
        if d > dmax:
            dmax, index = d, i
    if dmax > epsilon:
        left = douglas_peucker(points[:index + 1], epsilon)
        right = douglas_peucker(points[index:], epsilon)
        return left[:-1] + right
    return [points[0], points[-1]]


def simplify(contours, epsilon) -> list:
    """Douglas-Peucker per closed contour; epsilon 0 is a no-op."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if epsilon == 0:
        return [Contour(list(c.points), c.is_hole) for c in contours]
    out = []
    for contour in contours:
        pts = contour.points
        # Split the ring at the point farthest from the start so both halves
        # are open polylines with stable anchors.
        far = max(range(len(pts)), key=lambda i: (pts[i][0] - pts[0][0]) ** 2
                  + (pts[i][1] - pts[0][1]) ** 2)
        if far == 0:
            simplified = pts[:3]
        else:
            first = douglas_peucker(pts[:far + 1], epsilon)
            second = douglas_peucker(pts[far:] + [pts[0]], epsilon)
            simplified = first[:-1] + second[:-1]
        if len(simplified) < 3:
            simplified = pts[:]  # refuse to collapse below a polygon
        out.append(Contour(points=simplified, is_hole=contour.is_hole))
    return out


def _path_data(contours, flip_y):
    parts = []
    for contour in contours:
        pts = contour.points
        if flip_y:
            pts = [(x, ASCENT - y) for x, y in pts]
        parts.append("M " + " L ".join(f"{x} {y}" for x, y in pts) + " Z")
    return " ".join(parts)


def export_svg(codepoint: int, contours) -> str:
    """Standalone SVG (1000x1000 viewBox, even-odd fill, screen y-axis)."""
    if not contours:
        raise ValueError("empty glyph: no contours to export")
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000">\n'
        f'  <!-- U+{codepoint:04X} -->\n'
        f'  <path d="{_path_data(contours, flip_y=True)}" fill="black" fill-rule="evenodd"/>\n'
        "</svg>\n"
    )


def glyph_name(codepoint: int) -> str:
    return f"uni{codepoint:04X}"


def export_sfd(project: FontProject) -> str:
    """Serialize the project as a FontForge Spline Font Database (v3.0) text."""
    if not project.glyphs:
        raise ValueError("empty project: no glyphs to export")
    lines = [
        "SplineFontDB: 3.0",
        f"FontName: {project.family_name}",
        f"FullName: {project.family_name}",
        f"FamilyName: {project.family_name}",
        "Weight: Regular",
        "UnderlinePosition: -100",
        "UnderlineWidth: 50",
        f"Ascent: {project.ascent}",
        f"Descent: {project.descent}",
        "LayerCount: 2",
        'Layer: 0 0 "Back" 1',
        'Layer: 1 0 "Fore" 0',
        "Encoding: UnicodeFull",
        f"BeginChars: 1114112 {len(project.glyphs)}",
    ]
    for index, codepoint in enumerate(sorted(project.glyphs)):
        contours = project.glyphs[codepoint]
        if not contours:
            raise ValueError(f"glyph U+{codepoint:04X} has no contours")
        lines.append("")
        lines.append(f"StartChar: {glyph_name(codepoint)}")
        lines.append(f"Encoding: {codepoint} {codepoint} {index}")
        lines.append(f"Width: {project.advances.get(codepoint, EM)}")
        lines.append("Flags: W")
        lines.append("LayerCount: 2")
        lines.append("Fore")
        lines.append("SplineSet")
        for contour in contours:
            x0, y0 = contour.points[0]
            lines.append(f"{x0} {y0} m 1")
            for x, y in contour.points[1:]:
                lines.append(f"{x} {y} l 1")
            lines.append(f"{x0} {y0} l 1")  # explicit closure back to the start
        lines.append("EndSplineSet")
        lines.append("EndChar")
    lines.append("EndChars")
    lines.append("EndSplineFont")
    return "\n".join(lines) + "\n"


def parse_sfd(text: str) -> FontProject:
    """Read back the SFD subset written by export_sfd."""
    if not text.startswith("SplineFontDB: 3.0"):
        raise ValueError("not a SplineFontDB 3.0 file")
    project = FontProject(family_name="", glyphs={}, advances={})
    codepoint = None
    width = None
    points = []
    in_splines = False
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("FamilyName: "):
            project.family_name = line.split(": ", 1)[1]
        elif line.startswith("Ascent: "):
            project.ascent = int(line.split(": ")[1])
        elif line.startswith("Descent: "):
            project.descent = int(line.split(": ")[1])
        elif line.startswith("Encoding: ") and codepoint is None and any(ch.isdigit() for ch in line.split(": ")[1]):
            parts = line.split(": ")[1].split()
            if len(parts) == 3:
                codepoint = int(parts[0])
        elif line.startswith("Width: "):
            width = int(line.split(": ")[1])
        elif line == "SplineSet":
            in_splines = True
            contours = []
            points = []
        elif line == "EndSplineSet":
            if points:
                contours.append(points)
            in_splines = False
            project.glyphs[codepoint] = [
                Contour(points=_dedup(pts), is_hole=signed_area_screen(pts) < 0)
                for pts in contours
            ]
            project.advances[codepoint] = width if width is not None else EM
        elif in_splines:
            parts = line.split()
            if len(parts) >= 4 and parts[2] in ("m", "l"):
                x, y = int(parts[0]), int(parts[1])
                if parts[2] == "m":
                    if points:
                        contours.append(points)
                    points = [(x, y)]
                else:
                    points.append((x, y))
        elif line == "EndChar":
            codepoint = None
            width = None
    return project


def _advance(contours) -> int:
    xs = [x for c in contours for x, _ in c.points]
    return max(xs) + SIDE_BEARING


def build_font_project(glyph_rasters: dict, family_name: str, epsilon=0.0) -> FontProject:
    """Trace + simplify every raster in {codepoint: BinaryRaster}."""
    project = FontProject(family_name=family_name)
    for codepoint, raster in sorted(glyph_rasters.items()):
        contours = simplify(trace_contours(raster), epsilon)
        project.glyphs[codepoint] = contours
        project.advances[codepoint] = _advance(contours)
    return project


def rasterize_contours(contours, size=256) -> np.ndarray:
    """Scanline even-odd fill of em-space contours onto a size x size raster."""
    all_pts = [p for c in contours for p in c.points]
    min_x = min(p[0] for p in all_pts)
    max_x = max(p[0] for p in all_pts)
    min_y = min(p[1] for p in all_pts)
    max_y = max(p[1] for p in all_pts)
    span = max(max_x - min_x, max_y - min_y, 1)
    inner = size - 8
    scale = inner / span

    def to_px(p):
        return (4 + (p[0] - min_x) * scale, 4 + (max_y - p[1]) * scale)

    edges = []
    for contour in contours:
        pts = [to_px(p) for p in contour.points]
        for i in range(len(pts)):
            edges.append((pts[i], pts[(i + 1) % len(pts)]))
    out = np.zeros((size, size), dtype=np.uint8)
    for row in range(size):
        ys = row + 0.5
        crossings = []
        for (x0, y0), (x1, y1) in edges:
            if (y0 <= ys < y1) or (y1 <= ys < y0):
                crossings.append(x0 + (ys - y0) * (x1 - x0) / (y1 - y0))
        crossings.sort()
        for i in range(0, len(crossings) - 1, 2):
            xa, xb = crossings[i], crossings[i + 1]
            start = int(np.ceil(xa - 0.5))
            stop = int(np.ceil(xb - 0.5))
            if stop > start:
                out[row, max(start, 0):min(stop, size)] = 1
    return out
