"""Good-continuation networks of polynomial pieces, beamlets and beams.

The package builds graph-structured nets for smooth surfaces and curves,
uses them to detect geometric objects buried in point-cloud or pixel noise,
and computes filamentarity statistics of volumetric datasets.
"""

from gcnets.smoothness import (
    HolderParams,
    DerivedConstants,
    compute_constants,
    smoothness_degree,
    scale_link,
    scale_for_class,
    TrigOracle,
    PolyOracle,
    oracle_from_json,
    taylor_polynomial,
    validate_function_oracle,
    validate_curve_oracle,
    LineCurve,
    ParametricCurve,
)

__version__ = "0.1.0"
