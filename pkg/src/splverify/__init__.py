"""Verification of software product lines.

Feature modules written in FML are composed by superimposition, specified by
feature-local automata, and verified either product by product or through a
single product simulator produced by variability encoding.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .checker import CheckOptions, Verdict, check, render_error_path, replay
from .composer import compose, weave
from .featuremodel import FeatureModel, parse_feature_model
from .fml.parser import parse_automata, parse_feature_module
from .fml.printer import pretty_print
from .harness import analyze_orderings, compare_strategies, verify_brute_force, verify_simulator
from .productline import ProductLine, load_manifest, typecheck_product_line
from .varenc import select, var_enc, weave_simulator

__all__ = ["__version__", "CheckOptions", "Verdict", "check", "render_error_path", "replay",
           "compose", "weave", "FeatureModel", "parse_feature_model", "parse_automata",
           "parse_feature_module", "pretty_print", "analyze_orderings", "compare_strategies",
           "verify_brute_force", "verify_simulator", "ProductLine", "load_manifest",
           "typecheck_product_line", "select", "var_enc", "weave_simulator"]
