"""Active-space FCIDUMP generation with an embedded RHF/CASCI backend."""

from .jobs import GeometryJob, generate, generate_scan, MOLECULES

__all__ = ["GeometryJob", "generate", "generate_scan", "MOLECULES"]
