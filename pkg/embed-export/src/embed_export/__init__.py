"""Offline paragraph-embedding exporter for EMB1 vector files."""
from .encoders import HashedEncoder, SentenceModelEncoder, make_encoder
from .errors import ExportError
from .exporter import Encoder, ExportManifest, export_embeddings
from .grouping import GROUP_SIZE, WORD_LIMIT, ParagraphText, iter_paragraphs, paragraphs_of

__version__ = "0.1.0"

__all__ = [
    "Encoder",
    "ExportError",
    "ExportManifest",
    "GROUP_SIZE",
    "HashedEncoder",
    "ParagraphText",
    "SentenceModelEncoder",
    "WORD_LIMIT",
    "export_embeddings",
    "iter_paragraphs",
    "make_encoder",
    "paragraphs_of",
]
