"""Engagement-dynamics toolkit for video platforms.

Subpackages cover meta-level feature sensitivity (randomized single-layer
regression plus kernel feature selection), post-publication optimization
impact, subscriber/view causality testing, upload-schedule analytics, and
decomposition of cumulative view counts into virality, migration, and
exogenous-event components - together with synthetic generators that make
every estimator verifiable against known ground truth.
"""

from . import data, elm, gompertz, granger, hsic, metaopt, numkit, schedule, synth
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "data",
    "elm",
    "gompertz",
    "granger",
    "hsic",
    "metaopt",
    "numkit",
    "schedule",
    "synth",
    "KERNEL_BACKEND",
    "__version__",
]
