"""Cross-learning scores: dataset similarity through bidirectional
cross-domain generalization, transferable-zone verdicts, and the
synthetic benchmark harness around them."""

from .data import (Dataset, FoldPlan, LossKind, TaskKind, load_csv,
                   make_folds, mean_loss, save_csv)
from .errors import CrossLearnError, NumericError, ParseError, ValidationError
from .models import (FittedModel, ModelSpec, cv_error, default_models, fit,
                     predict)
from .oracles import (LdaOracleParams, ProbitOracleParams, oracle_lda,
                      oracle_monte_carlo, oracle_probit,
                      oracle_probit_smallnoise, oracle_score)
from .score import (ClsEstimate, EnsembleWeights, cls_ensemble, cls_single,
                    cls_weighted_asymmetric, cls_weighted_avg, evaluate_panel)
from .synth import (GeneratorSpec, OracleModel, bayes_predict,
                    orthogonal_complement, rotate_to_cosine, sample_dataset,
                    spec_pair)
from .zones import (EstimatorConfig, Zone, ZoneThresholds, baseline_error,
                    classify, relative_error_reduction, thresholds)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
