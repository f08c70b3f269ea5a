"""Privacy wrappers for untrusted black-box functions on set-valued data.

Every mechanism here only gets query access to a function ``f`` over subsets
of the sensitive dataset ``x`` and only ever queries subsets close to ``x``.
"""

from privwrap.config import PAPER_PROFILE, TEST_PROFILE, EngineLimits, PrivacyParams, Profile
from privwrap.domain import (
    BlackBox,
    BudgetExceeded,
    Dataset,
    LocalityViolation,
    PluginFailure,
    RangeSpec,
    ValidationError,
    multiset_adapter,
    multiset_restore,
)
from privwrap.lattice import LatticeView, down_neighborhood
from privwrap.output import WrapperOutput
from privwrap.shifted_inverse import build_gipp, inverse_loss, shifted_inverse
from privwrap.autosense import MonotonizedBox, autosense_wrap, monotonize
from privwrap.stabilization import (
    StabilityContext,
    cond_monotonize,
    cond_monotonize_level,
    max_stable_size,
    proxy_P,
    proxy_T,
    stabilize,
)
from privwrap.claimed import lipschitz_filter, modified_tahoe, small_diameter, subset_extension
from privwrap.double_mono import double_mono_wrap, double_monotonize, median_exp_mech, offset

__all__ = [
    "PAPER_PROFILE",
    "TEST_PROFILE",
    "BlackBox",
    "BudgetExceeded",
    "Dataset",
    "EngineLimits",
    "LatticeView",
    "LocalityViolation",
    "MonotonizedBox",
    "PluginFailure",
    "PrivacyParams",
    "Profile",
    "RangeSpec",
    "StabilityContext",
    "ValidationError",
    "WrapperOutput",
    "autosense_wrap",
    "build_gipp",
    "cond_monotonize",
    "cond_monotonize_level",
    "double_mono_wrap",
    "double_monotonize",
    "down_neighborhood",
    "inverse_loss",
    "lipschitz_filter",
    "max_stable_size",
    "median_exp_mech",
    "modified_tahoe",
    "monotonize",
    "multiset_adapter",
    "multiset_restore",
    "offset",
    "proxy_P",
    "proxy_T",
    "shifted_inverse",
    "small_diameter",
    "stabilize",
    "subset_extension",
]
