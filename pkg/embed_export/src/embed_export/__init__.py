"""Export frame-level embeddings from pretrained speech encoders to EMB1 files."""

from .emb1 import Emb1Error, read_emb1, write_emb1
from .encoder import EncoderError, SpeechEncoder
from .exporter import ExportError, ExportJob, ExportResult, export

__version__ = "0.1.0"
