"""Figure rendering for qcurv6 artifacts.

Strictly file-driven: the renderers read the solver's documented CSV/JSON
schemas and never recompute any mathematics.
"""

from .render import PlotSpec, render

__all__ = ["PlotSpec", "render"]
