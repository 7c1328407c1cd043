"""Python bindings for the NR-V2X SPS resource-starvation AoI study.

The compiled extension normally sits next to this file. During development
(running against a plain CMake build tree) point AOISTARVE_EXT_DIR at the
directory containing the built ``_aoistarve`` module.
"""

import os
import sys

_ext_dir = os.environ.get("AOISTARVE_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from ._aoistarve import (  # noqa: F401
        ValidationError,
        average_aoi,
        builtin_services,
        config_hash,
        dtmc_mean_first_passage,
        effective_sch_prob,
        simulate,
        violation_probability,
    )
except ImportError:  # development layout: extension in a CMake build tree
    from _aoistarve import (  # noqa: E402,F401
        ValidationError,
        average_aoi,
        builtin_services,
        config_hash,
        dtmc_mean_first_passage,
        effective_sch_prob,
        simulate,
        violation_probability,
    )

__all__ = [
    "ValidationError",
    "average_aoi",
    "builtin_services",
    "config_hash",
    "dtmc_mean_first_passage",
    "effective_sch_prob",
    "simulate",
    "violation_probability",
]
