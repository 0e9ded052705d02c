"""Decentralized two-measurement gradient descent over lossy channels.

The heavy lifting lives in the compiled ``_dspg`` module; this package
re-exports it under a stable name for both installed wheels (where the
extension sits inside the package) and build-tree runs (where it sits on
``sys.path`` directly).
"""

try:
    from . import _dspg as _impl
except ImportError:  # build-tree layout
    import _dspg as _impl

_EXPORTS = [
    "ConfigError",
    "DspgError",
    "EstimatorDiagnostics",
    "ExperimentConfig",
    "NumericalOverflowError",
    "ObjectiveSet",
    "QuadraticSpec",
    "SweepRow",
    "consensus_minimizer",
    "dspg_estimate",
    "enumerate_diagnostics",
    "load_config_file",
    "make_quadratic_set",
    "make_quadratic_spec",
    "make_quartic_1d",
    "parse_config",
    "run_consensus",
    "run_diagnostics",
    "run_simulation",
    "run_sweep",
    "sample_perturbation",
    "variance_bound",
]

globals().update({name: getattr(_impl, name) for name in _EXPORTS})

__all__ = list(_EXPORTS)
