"""Forecast-error anomaly detection.

A recurrent forecaster learns a series' normal behavior; its absolute
prediction errors feed three detection rules (Gaussian log-density,
extreme-value peaks-over-threshold, Tukey fence) whose distributional
assumptions are checked with Shapiro-Wilk and Anderson-Darling tests and
whose detections are scored with precision/recall/F1.
"""

from .errors import DataError, EvtadError, NumericalError
from .evaluation import (ConfusionCounts, MatchSpec, MetricsReport,
                         compute_metrics, group_events, match_detections)
from .evt import (GpdFit, calibrate_q, detect_evt, evt_threshold, fit_gpd,
                  fit_pot, gpd_cdf, initial_threshold, sample_gpd,
                  tail_probabilities, tail_probability)
from .forecaster import (ForecasterConfig, ModelParams, TrainReport, forward,
                         gradient_check, init_params, load_checkpoint,
                         load_external_errors, predict_errors,
                         save_checkpoint, train)
from .gaussian import (GaussianFit, detect_gaussian, fit_gaussian, log_pd,
                       tune_tau_g)
from .pipeline import PipelineConfig, run_pipeline
from .series import (ErrorSeries, SplitSpec, TimeSeries, WindowSet,
                     absolute_errors, load_csv, make_windows, split)
from .stattests import TestReport, anderson_darling_gpd, shapiro_wilk
from .tukey import TukeyFit, detect_tukey, fit_tukey

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts", "DataError", "ErrorSeries", "EvtadError",
    "ForecasterConfig", "GaussianFit", "GpdFit", "MatchSpec", "MetricsReport",
    "ModelParams", "NumericalError", "PipelineConfig", "SplitSpec",
    "TestReport", "TimeSeries", "TrainReport", "TukeyFit", "WindowSet",
    "absolute_errors", "anderson_darling_gpd", "calibrate_q",
    "compute_metrics", "detect_evt", "detect_gaussian", "detect_tukey",
    "evt_threshold", "fit_gaussian", "fit_gpd", "fit_pot", "fit_tukey",
    "forward", "gpd_cdf", "gradient_check", "group_events", "init_params",
    "initial_threshold", "load_checkpoint", "load_csv",
    "load_external_errors", "log_pd", "make_windows", "match_detections",
    "predict_errors", "run_pipeline", "sample_gpd", "save_checkpoint",
    "shapiro_wilk", "split", "tail_probabilities", "tail_probability",
    "train", "tune_tau_g",
]
