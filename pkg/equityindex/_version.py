"""
Version of the installed package.
"""

__version__: str = "0.1.0"
