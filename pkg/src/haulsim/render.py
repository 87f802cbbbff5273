"""Deterministic SVG rendering: bird's-eye frames from tick records and
line charts for production / waiting curves.

Rendering is a pure function of (record, config): the same inputs yield
byte-identical SVG, so frames can be regenerated from any replay.
"""

from __future__ import annotations

from .config import MineConfig
from .entities import TruckState

FRAME_W, FRAME_H = 800, 620
MARGIN = 60

STATE_COLORS = {
    TruckState.AT_CHARGING.value: "#888888",
    TruckState.EMPTY_RUN.value: "#1f77b4",
    TruckState.WAITING_FOR_LOADING.value: "#ff7f0e",
    TruckState.LOADING.value: "#d62728",
    TruckState.FULL_RUN.value: "#2ca02c",
    TruckState.WAITING_FOR_UNLOADING.value: "#9467bd",
    TruckState.UNLOADING.value: "#8c564b",
    TruckState.UNDER_REPAIR.value: "#e377c2",
    TruckState.BROKEN.value: "#000000",
}


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Scaler:
    def __init__(self, cfg: MineConfig):
        xs, ys = [], []
        for name, pos in _site_positions(cfg).items():
            xs.append(pos[0])
            ys.append(pos[1])
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        self.x0, self.y0 = x0, y0
        self.sx = (FRAME_W - 2 * MARGIN) / max(x1 - x0, 1e-9)
        self.sy = (FRAME_H - 2 * MARGIN) / max(y1 - y0, 1e-9)

    def pt(self, xy) -> tuple[float, float]:
        x = MARGIN + (xy[0] - self.x0) * self.sx
        y = FRAME_H - MARGIN - (xy[1] - self.y0) * self.sy
        return x, y


def _site_positions(cfg: MineConfig) -> dict[str, tuple[float, float]]:
    pos = {cfg.charging_site.name: cfg.charging_site.position}
    pos.update({s.name: s.position for s in cfg.load_sites})
    pos.update({d.name: d.position for d in cfg.dump_sites})
    return pos


def render_frame(record: dict, cfg: MineConfig) -> str:
    """One tick as an SVG frame: sites, roads, state-colored trucks and
    queue badges at load/dump sites."""
    sc = _Scaler(cfg)
    pos = _site_positions(cfg)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{FRAME_W}" height="{FRAME_H}" '
        f'viewBox="0 0 {FRAME_W} {FRAME_H}">',
        f'<rect width="{FRAME_W}" height="{FRAME_H}" fill="#fbfbf8"/>',
        f'<text x="12" y="20" font-size="14" font-family="monospace">'
        f't = {record["t"]:.1f} min</text>',
    ]
    # roads
    charging = cfg.charging_site.name
    for a, b in ([(charging, s.name) for s in cfg.load_sites]
                 + [(s.name, d.name) for s in cfg.load_sites for d in cfg.dump_sites]):
        xa, ya = sc.pt(pos[a])
        xb, yb = sc.pt(pos[b])
        road = record["roads"].get(f"{a}--{b}", {})
        color = "#c9b458" if road.get("status") == "UnderMaintenance" else "#dddddd"
        out.append(f'<line x1="{_f(xa)}" y1="{_f(ya)}" x2="{_f(xb)}" y2="{_f(yb)}" '
                   f'stroke="{color}" stroke-width="2"/>')
    # sites
    x, y = sc.pt(pos[charging])
    out.append(f'<rect x="{_f(x - 8)}" y="{_f(y - 8)}" width="16" height="16" '
               f'fill="#4477aa"/>')
    out.append(f'<text x="{_f(x + 10)}" y="{_f(y - 10)}" font-size="11" '
               f'font-family="monospace">{charging}</text>')
    for s in cfg.load_sites:
        x, y = sc.pt(pos[s.name])
        q = record["load_sites"][s.name]["queue"] + record["load_sites"][s.name]["parking"]
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="9" fill="#cc6633"/>')
        out.append(f'<text x="{_f(x + 10)}" y="{_f(y - 10)}" font-size="11" '
                   f'font-family="monospace">{s.name} q={q}</text>')
    for d in cfg.dump_sites:
        x, y = sc.pt(pos[d.name])
        q = record["dump_sites"][d.name]["queue"]
        tons = record["dump_sites"][d.name]["tons"]
        out.append(f'<rect x="{_f(x - 8)}" y="{_f(y - 8)}" width="16" height="16" '
                   f'fill="#55aa66"/>')
        out.append(f'<text x="{_f(x + 10)}" y="{_f(y - 10)}" font-size="11" '
                   f'font-family="monospace">{d.name} q={q} {tons:.0f}t</text>')
    # trucks
    for tid in sorted(record["trucks"]):
        t = record["trucks"][tid]
        x, y = sc.pt(t["xy"])
        color = STATE_COLORS.get(t["state"], "#ff00ff")
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="4" fill="{color}" '
                   f'stroke="#333333" stroke-width="0.5"/>')
    # legend
    ly = 36
    for state, color in STATE_COLORS.items():
        out.append(f'<circle cx="{FRAME_W - 150}" cy="{ly}" r="5" fill="{color}"/>')
        out.append(f'<text x="{FRAME_W - 140}" y="{ly + 4}" font-size="10" '
                   f'font-family="monospace">{state}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_chart(
    series: dict[str, list[tuple[float, float]]],
    *,
    title: str,
    x_label: str,
    y_label: str,
    width: int = 720,
    height: int = 420,
) -> str:
    """Step-line chart for one or more (t, value) series."""
    pad = 56
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
               "#8c564b", "#e377c2", "#7f7f7f"]
    xs = [p[0] for pts in series.values() for p in pts] or [0.0]
    ys = [p[1] for pts in series.values() for p in pts] or [0.0]
    x1 = max(xs) or 1.0
    y1 = max(ys) or 1.0
    sx = (width - 2 * pad) / x1
    sy = (height - 2 * pad) / y1

    def px(x):
        return pad + x * sx

    def py(y):
        return height - pad - y * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width // 2}" y="22" font-size="14" text-anchor="middle" '
        f'font-family="monospace">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        f'stroke="#333333"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="#333333"/>',
        f'<text x="{width // 2}" y="{height - 16}" font-size="11" text-anchor="middle" '
        f'font-family="monospace">{x_label}</text>',
        f'<text x="16" y="{height // 2}" font-size="11" text-anchor="middle" '
        f'font-family="monospace" transform="rotate(-90 16 {height // 2})">{y_label}</text>',
    ]
    for k in range(5):
        xv = x1 * k / 4
        yv = y1 * k / 4
        out.append(f'<text x="{_f(px(xv))}" y="{height - pad + 16}" font-size="10" '
                   f'text-anchor="middle" font-family="monospace">{xv:.0f}</text>')
        out.append(f'<text x="{pad - 6}" y="{_f(py(yv) + 3)}" font-size="10" '
                   f'text-anchor="end" font-family="monospace">{yv:.0f}</text>')
        out.append(f'<line x1="{pad}" y1="{_f(py(yv))}" x2="{width - pad}" '
                   f'y2="{_f(py(yv))}" stroke="#eeeeee"/>')
    ly = 40
    for idx, (label, pts) in enumerate(series.items()):
        color = palette[idx % len(palette)]
        if pts:
            coords = []
            prev_y = pts[0][1]
            for (x, y) in pts:
                coords.append(f"{_f(px(x))},{_f(py(prev_y))}")
                coords.append(f"{_f(px(x))},{_f(py(y))}")
                prev_y = y
            coords.append(f"{_f(px(x1))},{_f(py(prev_y))}")
            out.append(f'<polyline points="{" ".join(coords)}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<rect x="{width - 190}" y="{ly - 9}" width="10" height="10" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{width - 176}" y="{ly}" font-size="11" '
                   f'font-family="monospace">{label}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"
