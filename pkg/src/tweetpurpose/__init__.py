"""Purpose classification of political tweets.

Pipeline stages live in separate modules: ``corpus`` (filtering and
normalization), ``annotations`` (gold labels and agreement statistics),
``lexicons`` (emotion lexicons, PMI induction), ``textproc`` (tokenizer,
negation, resource files), ``features``, ``learner`` (linear SVM),
``evalharness`` (cross-validation, ablation, t-tests) and ``cli``.
"""

__version__ = "0.1.0"
