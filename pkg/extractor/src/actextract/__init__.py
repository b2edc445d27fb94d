"""Transformer activation extraction into the layerprobe container format.

`extract` runs a checkpoint over every manifest sentence and stores the
hidden state of each target word's last subword token at every layer;
`embeddings` exports the input-embedding table with per-word encodings;
`tokstats` reports tokens-per-target-word statistics under both counting
conventions.
"""

from actextract.core import (
    AlignmentRecord,
    ExtractionResult,
    extract_activations,
    target_char_span,
)
from actextract.embeddings import export_embeddings, word_encoding
from actextract.stats import tokenization_stats

__version__ = "0.1.0"

__all__ = [
    "AlignmentRecord",
    "ExtractionResult",
    "extract_activations",
    "target_char_span",
    "export_embeddings",
    "word_encoding",
    "tokenization_stats",
]
