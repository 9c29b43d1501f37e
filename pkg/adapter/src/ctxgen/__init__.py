"""Query-context generator behind the target/context file boundary."""

__version__ = "0.1.0"
