"""Inside dynamics of pulled and pushed reaction-diffusion fronts."""

__version__ = "0.1.0"

from .errors import FrontLabError  # noqa: E402,F401
