"""Calibrated per-input loss-quantile scores with distribution-free flagging.

Thin wrapper over the compiled extension; the full pipeline lives in C++.
"""

from locus._core import (  # noqa: F401
    AggregationMode,
    CalibratedBound,
    ComputationError,
    FlagRule,
    IsolationForest,
    LabelVarianceScore,
    LossCdfEngine,
    Predictor,
    RunMetrics,
    ScarcityIndex,
    SplitDataset,
    Standardizer,
    SyntheticOracle,
    SyntheticSpec,
    TabularData,
    TuneReport,
    TuneRow,
    ValidationError,
    __version__,
    apply_standardizer,
    calibrate_artifact,
    calibrate_level,
    cdf_draws,
    certify_epsilons,
    certify_lambda,
    compute_metrics,
    default_alpha_grid,
    default_lambda_grid,
    default_rule,
    empirical_quantile,
    envelope_cdf,
    fit_engine,
    fit_predictor,
    fit_standardizer,
    generate_synthetic,
    invert_cdf,
    invert_standardizer,
    load_csv,
    make_splits,
    matched_acceptance_threshold,
    mean_cdf,
    mode_envelope,
    mode_envelope_scarcity,
    mode_mean,
    pit_values,
    predict_all,
    realized_losses,
    run_benchmark_json,
    score_csv,
    synthetic_spec_from_json,
    tau_from_quantile,
    tune_alpha,
    tune_lambda,
    verify_artifact_probes,
    write_csv,
)
