"""Fine-tuning/inference adapter around extractive QA models.

Consumes SQuAD2.0-format corpus files and produces the prediction files
the nlu2qa scorer reads; no other coupling to the conversion toolkit.
"""

from .corpus import CorpusError, QaExample, load_squad
from .finetune import Hyperparams, finetune
from .predict import PredictOptions, predict

__version__ = "0.1.0"

__all__ = [
    "CorpusError",
    "QaExample",
    "load_squad",
    "Hyperparams",
    "finetune",
    "PredictOptions",
    "predict",
    "__version__",
]
