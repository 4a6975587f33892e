"""Convolutional networks over sparse one-hot text (seq-CNN, bow-CNN, parallel
branches) with bag-of-n-gram and NB-LM baselines."""

from .baselines import (BowScheme, LinearModel, TrainingDiverged, bow_vectorize, linear_train,
                        nb_lm_train, nb_weights)
from .metrics import error_rate, f_measures
from .nn import (Branch, BranchSpec, ConfigError, Network, PoolingSpec, backward, conv_forward,
                 forward, pool, predict, predict_scores, prepare, response_normalize,
                 square_loss)
from .regions import RegionConfig, SparseVector, bow_regions, pad, seq_regions
from .text import (OOV, DataError, Document, TokenizerOptions, Vocabulary, build_ngram_vocabulary,
                   build_vocabulary, encode, extract_ngrams, tokenize)
from .train import TrainConfig, sgd_train, top_regions

__version__ = "0.1.0"
