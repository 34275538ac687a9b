"""Sequential Peres-Mermin measurements on a two-qubit system shared with passerby observers."""

__version__ = "0.1.0"
