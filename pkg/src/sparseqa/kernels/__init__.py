"""Kernel backend selection.

The compiled Cython kernel is preferred when importable; otherwise the
pure-Python fallback is used. Set SPARSEQA_KERNEL=python|cython to force a
backend (forcing cython fails loudly if the extension was not built).
"""

import os

_forced = os.environ.get("SPARSEQA_KERNEL", "").strip().lower()
if _forced not in ("", "cython", "python"):
    raise ValueError(f"SPARSEQA_KERNEL must be 'cython' or 'python', got '{_forced}'")

if _forced == "python":
    from sparseqa.kernels import pyfallback as _impl

    BACKEND = "python"
else:
    try:
        from sparseqa.kernels import _bm25 as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        from sparseqa.kernels import pyfallback as _impl  # type: ignore[no-redef]

        BACKEND = "python"

score_terms = _impl.score_terms


def available_backends() -> list[str]:
    """Backends importable in this environment (for benchmarks and tests)."""
    found = ["python"]
    try:
        from sparseqa.kernels import _bm25  # noqa: F401

        found.insert(0, "cython")
    except ImportError:
        pass
    return found
