"""Minimal CPU executor for model graphs (compiled kernels with numpy fallback)."""

from .kernels import BACKENDS, backend_name, set_backend

__all__ = ["BACKENDS", "backend_name", "set_backend"]
