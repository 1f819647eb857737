"""Generation, storage and transmission expansion planning as a mixed-integer program."""

__version__ = "0.1.0"
