"""The diagram language: text in, contracted morph out."""

from importlib import resources

from .semantics import (
    BUILDERS,
    DiagramTypeError,
    TypedWire,
    build_node,
    evaluate,
    node_legs,
    plan,
    to_network,
    typecheck,
)
from .syntax import (
    Builder,
    Dense,
    Diagram,
    DiagramError,
    DiagramSyntaxError,
    LegDecl,
    NodeDecl,
    PortRef,
    WireDecl,
    format_diagram,
    parse,
)

__all__ = [
    "BUILDERS",
    "Builder",
    "Dense",
    "Diagram",
    "DiagramError",
    "DiagramSyntaxError",
    "DiagramTypeError",
    "LegDecl",
    "NodeDecl",
    "PortRef",
    "TypedWire",
    "WireDecl",
    "build_node",
    "corpus_files",
    "evaluate",
    "format_diagram",
    "load",
    "node_legs",
    "parse",
    "plan",
    "read_corpus",
    "to_network",
    "typecheck",
]


def corpus_files() -> list[str]:
    """Names of the example diagrams shipped with the package."""
    root = resources.files("propic") / "corpus"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".prop"))


def read_corpus(name: str) -> str:
    if not name.endswith(".prop"):
        name += ".prop"
    return (resources.files("propic") / "corpus" / name).read_text()


def load(path) -> Diagram:
    with open(path) as fh:
        return parse(fh.read())
