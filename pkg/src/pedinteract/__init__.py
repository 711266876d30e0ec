"""Bottom-up analysis of robot-pedestrian interactions from mission logs."""

__version__ = "0.1.0"
