"""Box girder bridge inspection: GTSP coverage planning and lidar-guided flight simulation."""

__version__ = "0.1.0"
