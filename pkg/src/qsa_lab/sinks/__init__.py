from .base import Bundle, Sink, csv_text, npz_bytes
from .file import FileSink
from .stdout import StdoutSink

__all__ = ["Bundle", "FileSink", "Sink", "StdoutSink", "csv_text", "npz_bytes"]
