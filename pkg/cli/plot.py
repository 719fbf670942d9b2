import logging
import os
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.fuchsian import OctagonPresentation  # noqa: E402
from core.geometry import BoundaryPoint, Geodesic  # noqa: E402
from lab.boundary_maps import Earthquake  # noqa: E402

logger = logging.getLogger(__name__)

ARC_PARAMETERS = np.linspace(-14.0, 14.0, 400)


def _draw_geodesic(ax, geodesic: Geodesic, **style) -> None:
    z = geodesic.point(ARC_PARAMETERS)
    ax.plot(z.real, z.imag, **style)


def render_disk(
    path: str,
    group: OctagonPresentation,
    earthquake: Optional[Earthquake] = None,
    orbits: Sequence[Sequence[float]] = (),
    max_lifts: int = 200,
) -> str:
    """
    Draw the disk with the octagon, the lifts of the twist curve, the central
    plate basepoint, the affected-region intervals and sampled boundary orbits.

    Returns:
        str: the written SVG path.
    """
    fig, ax = plt.subplots(figsize=(7, 7))
    circle = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 720))
    ax.plot(circle.real, circle.imag, color="black", linewidth=0.8)

    vertices = group.domain.vertices
    for k in range(8):
        start, end = vertices[k], vertices[(k + 1) % 8]
        side = Geodesic.through(start, end)
        s = np.linspace(side.parameter(start), side.parameter(end), 60)
        z = side.point(s)
        ax.plot(z.real, z.imag, color="tab:gray", linewidth=1.0)

    if earthquake is not None:
        pairs = list(zip(earthquake.lift_starts, earthquake.lift_ends))[:max_lifts]
        for start, end in pairs:
            lift = Geodesic.from_endpoints(BoundaryPoint(start), BoundaryPoint(end))
            _draw_geodesic(ax, lift, color="tab:blue", linewidth=0.5, alpha=0.6)
        for region in earthquake.regions:
            arc = np.exp(1j * (region.start + np.linspace(0.0, region.width, 50)))
            ax.plot(1.02 * arc.real, 1.02 * arc.imag, color="tab:orange", linewidth=2.0)
        p = earthquake.basepoint
        ax.plot([p.real], [p.imag], marker="o", color="tab:red", markersize=4)

    for orbit in orbits:
        points = np.exp(1j * np.asarray(orbit))
        ax.scatter(1.05 * points.real, 1.05 * points.imag, s=6, color="tab:green")

    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.axis("off")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path
