"""Reduced-order simulator and analysis toolkit for dual-port grid-forming
control of PMSG wind turbines with back-to-back converters."""

from ._kernel import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
