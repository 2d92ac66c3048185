"""Motion planning and execution simulation for a 6-DOF arm working near a seated user."""

__version__ = "0.1.0"
