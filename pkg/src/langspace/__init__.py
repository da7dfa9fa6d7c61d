"""Language-embedding-space tools for zero-shot multilingual TTS conditioning."""
__version__ = "0.1.0"
