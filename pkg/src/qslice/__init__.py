"""Numerics for coherent states on quaternionic slices.

Submodules: :mod:`quatcore` (quaternion algebra and slices), :mod:`measures`
(moment measures and radial rules), :mod:`integrate` (quadrature over slices
and over H), :mod:`fock` (truncated quaternionic Hilbert space),
:mod:`cs_kernel` (coherent states, kernels, transforms), :mod:`operators`
(ladder and displacement operators), :mod:`directint` (discretized direct
integrals) and :mod:`checks` (the verification suite behind the CLI).
"""
from . import checks, cs_kernel, directint, errors, fock, integrate, measures, operators, quatcore
from .checks import SuiteConfig, SuiteReport, check_ids, run_suite
from .cs_kernel import *  # noqa: F401,F403
from .directint import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .fock import *  # noqa: F401,F403
from .integrate import *  # noqa: F401,F403
from .measures import *  # noqa: F401,F403
from .operators import *  # noqa: F401,F403
from .quatcore import *  # noqa: F401,F403

__version__ = "0.1.0"
