"""brepforge: procedural multi-storey building B-reps with dataset tooling."""

__version__ = "0.1.0"
