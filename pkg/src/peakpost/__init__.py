"""Peak detection and post-selection inference on smooth Gaussian fields.

Subpackage layout:

* model      -- covariance kernels, derivative tensors, bump signals
* field      -- grids, covariance factorization, counter-based sampling
* peaks      -- local maxima of a gridded field with sub-grid refinement
* detect     -- truncated-Gaussian height test and thresholds
* infer      -- post-selection pivots and confidence regions (height, location)
* randomized -- carve / split inference after randomized selection
* theory     -- analytic approximations (intensities, densities, power)
* metrics    -- error-rate and coverage estimators
* harness    -- Monte Carlo experiment runner and CLI
"""

from . import (detect, errors, field, harness, infer, metrics, model, peaks,
               randomized, special, theory)

__all__ = ["detect", "errors", "field", "harness", "infer", "metrics",
           "model", "peaks", "randomized", "special", "theory"]

__version__ = "0.1.0"
