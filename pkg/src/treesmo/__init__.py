"""Tree-ensemble surrogates with predictive uncertainty for sequential
model-based optimisation.

The main entry points are :func:`treesmo.forest.fit_forest` with one of the
presets from :func:`treesmo.forest.preset` (``"bwo"`` for bagging with
oversampling and random split locations), :func:`treesmo.gp.fit_gp` for
the Gaussian-process baseline, and :func:`treesmo.smo.run_smo` for the
optimisation loop.
"""

from .core import Bounds, Dataset, PredictiveDistribution, SeededRng, derive_stream, validate_dataset
from .forest import Forest, ForestConfig, ResampleStrategy, fit_forest, predict, preset
from .gp import GpModel, fit_gp
from .smo import Problem, SmoHistory, SurrogateChoice, regret_curve, run_smo
from .tree import DecisionTree, TreeConfig, build_tree

__version__ = "0.1.0"

__all__ = [
    "Bounds", "Dataset", "PredictiveDistribution", "SeededRng", "derive_stream",
    "validate_dataset", "Forest", "ForestConfig", "ResampleStrategy", "fit_forest",
    "predict", "preset", "GpModel", "fit_gp", "Problem", "SmoHistory", "SurrogateChoice",
    "regret_curve", "run_smo", "DecisionTree", "TreeConfig", "build_tree",
]
