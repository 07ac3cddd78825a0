"""Knowledge graph embedding with parameterized quantum circuits."""

__version__ = "1.0.0"
