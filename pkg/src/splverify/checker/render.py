"""Text rendering of counterexamples."""

from __future__ import annotations


def render_error_path(path, feature_order=None) -> str:
    """Numbered listing: one step per line with its contributing feature.

    Branch steps show their condition as ``[cond]`` and the direction taken.
    An empty path renders as the empty string.
    """
    if path is None or not path.steps:
        return ""
    lines = []
    if path.automaton:
        lines.append(f"violation of {path.automaton} at {path.site}")
    if path.selection is not None:
        order = feature_order or sorted(path.selection)
        lines.append("product: " + ", ".join(f for f in order if f in path.selection))
    if path.choices:
        lines.append("nondet choices: " + " ".join(str(c) for c in path.choices))
    width = len(str(len(path.steps)))
    fw = max(len(s.feature or "-") for s in path.steps)
    for s in path.steps:
        text = s.statement
        if s.condition is not None:
            cond = text
            if cond.startswith(("if (", "while (")) and cond.endswith(")"):
                cond = cond[cond.index("(") + 1:-1]
            text = f"[{cond}] {s.condition}"
        lines.append(f"{s.index:>{width}}  {(s.feature or '-'):<{fw}}  {s.location:<10} {text}")
    return "\n".join(lines) + "\n"
