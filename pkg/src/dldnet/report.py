"""Minimal static SVG rendering of mean-ROC bands."""

from __future__ import annotations

from dldnet.metrics import MeanRocBand

WIDTH = 420
HEIGHT = 420
MARGIN = 50
COLORS = {"train": "#1f77b4", "test": "#d62728"}


def _xy(fpr: float, tpr: float) -> tuple[float, float]:
    side = WIDTH - 2 * MARGIN
    return MARGIN + fpr * side, HEIGHT - MARGIN - tpr * side


def _path(points) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in points)


def band_svg(bands: dict[str, MeanRocBand]) -> str:
    """Mean ROC line and a +/- 1 sd shaded band per family, with the chance diagonal."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, y0 = _xy(0, 0)
    x1, y1 = _xy(1, 1)
    parts.append(f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{x1 - x0:.2f}" height="{y0 - y1:.2f}" fill="none" stroke="black"/>')
    parts.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="gray" stroke-dasharray="4,4"/>')
    for i, tick in enumerate((0.0, 0.25, 0.5, 0.75, 1.0)):
        tx, ty = _xy(tick, 0)
        parts.append(f'<text x="{tx:.2f}" y="{ty + 16:.2f}" font-size="10" text-anchor="middle">{tick:g}</text>')
        lx, ly = _xy(0, tick)
        parts.append(f'<text x="{lx - 6:.2f}" y="{ly + 3:.2f}" font-size="10" text-anchor="end">{tick:g}</text>')
    parts.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">False positive rate</text>')
    parts.append(
        f'<text x="14" y="{HEIGHT / 2:.0f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">True positive rate</text>'
    )
    for row, (family, band) in enumerate(sorted(bands.items())):
        color = COLORS.get(family, "#555555")
        upper = [_xy(f, min(1.0, m + s)) for f, m, s in zip(band.fpr, band.mean_tpr, band.sd_tpr)]
        lower = [_xy(f, max(0.0, m - s)) for f, m, s in zip(band.fpr, band.mean_tpr, band.sd_tpr)]
        parts.append(f'<polygon points="{_path(upper + lower[::-1])}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        mean = [_xy(f, m) for f, m in zip(band.fpr, band.mean_tpr)]
        parts.append(f'<polyline points="{_path(mean)}" fill="none" stroke="{color}" stroke-width="2"/>')
        lx, ly = _xy(0.55, 0.12 + 0.08 * row)
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" font-size="12" fill="{color}">'
            f"{family}: AUC {band.mean_auc:.3f} ± {band.sd_auc:.3f}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
