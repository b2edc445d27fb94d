"""Layer-wise representation probing toolkit.

Submodules
----------
corpus      CoNLL-U parsing, inflection labels, stratified splits, control tasks
tensorstore seekable binary container for per-layer activation matrices
probes      ridge, two-layer MLP, and one-vs-all forest classifier families
metrics     accuracy, macro-F1, selectivity, separability gap, layer trends
geometry    PCA spectra and intrinsic dimensionality profiles
analogy     analogy-completion ranks for subtoken vs whole-word vectors
config      run configuration loading and validation
pipeline    end-to-end runs behind the CLI subcommands
"""

from layerprobe import (
    analogy,
    config,
    corpus,
    geometry,
    metrics,
    probes,
    tensorstore,
)

__version__ = "0.1.0"

__all__ = [
    "analogy",
    "config",
    "corpus",
    "geometry",
    "metrics",
    "probes",
    "tensorstore",
    "__version__",
]
