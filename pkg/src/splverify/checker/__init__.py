"""Bounded model checking of woven programs and product simulators."""

from .engine import (BOUND_EXCEEDED, SAFE, VIOLATION, CheckMetrics, CheckOptions, ErrorPath, Step,
                     Verdict, check, enumerate_executions, error_path, replay)
from .render import render_error_path

__all__ = ["BOUND_EXCEEDED", "SAFE", "VIOLATION", "CheckMetrics", "CheckOptions", "ErrorPath", "Step",
           "Verdict", "check", "enumerate_executions", "error_path", "render_error_path", "replay"]
