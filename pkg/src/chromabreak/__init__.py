"""chromabreak: a chaos-based colour image cipher and its chosen-plaintext break."""

__version__ = "0.1.0"
