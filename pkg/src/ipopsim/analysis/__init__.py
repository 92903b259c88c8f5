"""Transfer-function algebra (``tf``) and trace metrics (``metrics``)."""
from .tf import (FreqPoint, RationalTf, StabilityResult, controller_tf, freq_response,
                 leso_tf_matrix, pi_tf, poles, prefilter_tf, root_locus, stability_check,
                 tf_arithmetic)

__all__ = [
    "FreqPoint", "RationalTf", "StabilityResult", "controller_tf", "freq_response",
    "leso_tf_matrix", "pi_tf", "poles", "prefilter_tf", "root_locus", "stability_check",
    "tf_arithmetic",
]
