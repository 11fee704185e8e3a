"""ASCIFIT: isotonic regression when an adversary may flip response signs."""

from .datagen import (AsciModel, ErrorAdaptive, Identity, Rademacher, SampleSet, SignOfGamma,
                      example1_model, example2_model, generate, linear_signal, worst_case_adaptive)
from .estimator import (EstimatorConfig, FitResult, RateBoundConfig, RootDiagnostics, big_g, fit,
                        mse_envelope, preprocess, rate_bound_r_n2, solve_sigma)
from .folded_normal import (EvalAccuracy, FoldedParams, folded_mean, folded_mean_dmu,
                            folded_mean_inverse, folded_square_var, folded_var, j_sigma)
from .isotonic import IsotonicFit, maxmin_oracle, pava, pava_lower_bounded

__version__ = "0.1.0"
