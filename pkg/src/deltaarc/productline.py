"""Loading a product line (core ``.arc`` files, ``.delta`` files, one ``.fm``) from disk."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .adl import load_library
from .delta import Delta, load_deltas
from .errors import ParseError
from .features import FeatureModel, load_feature_model
from .model import ArchitectureLibrary
from .syntax import ParseDiagnostic, Severity

EXTENSIONS = (".arc", ".delta", ".fm")


@dataclass(frozen=True)
class ProductLine:
    library: ArchitectureLibrary
    deltas: tuple[Delta, ...] = ()
    feature_model: Optional[FeatureModel] = None
    sources: dict = field(default_factory=dict, compare=False)


def collect_files(paths: Iterable[str]) -> dict[str, list[str]]:
    """Group input files by extension; directories are scanned recursively."""
    found: dict[str, list[str]] = {ext: [] for ext in EXTENSIONS}
    for path in paths:
        if os.path.isdir(path):
            for root, dirs, files in os.walk(path):
                dirs.sort()
                for name in sorted(files):
                    ext = os.path.splitext(name)[1]
                    if ext in found:
                        found[ext].append(os.path.join(root, name))
        else:
            ext = os.path.splitext(path)[1]
            if ext not in found:
                raise ParseError(
                    [ParseDiagnostic(Severity.ERROR, 1, 1, f"unsupported file type {ext or '(none)'}", "INPUT", path)]
                )
            if not os.path.exists(path):
                raise ParseError([ParseDiagnostic(Severity.ERROR, 1, 1, "no such file", "INPUT", path)])
            found[ext].append(path)
    return {ext: sorted(set(files)) for ext, files in found.items()}


def load_product_line(paths: Iterable[str]) -> ProductLine:
    files = collect_files(paths)
    diagnostics: list[ParseDiagnostic] = []
    library = ArchitectureLibrary()
    deltas: list[Delta] = []
    fm = None
    try:
        library = load_library(files[".arc"])
    except ParseError as err:
        diagnostics.extend(err.diagnostics)
    try:
        deltas = load_deltas(files[".delta"])
    except ParseError as err:
        diagnostics.extend(err.diagnostics)
    if len(files[".fm"]) > 1:
        diagnostics.append(
            ParseDiagnostic(Severity.ERROR, 1, 1, "more than one feature model given", "INPUT", files[".fm"][1])
        )
    elif files[".fm"]:
        try:
            fm = load_feature_model(files[".fm"][0])
        except ParseError as err:
            diagnostics.extend(err.diagnostics)
    if diagnostics:
        raise ParseError(sorted(diagnostics, key=ParseDiagnostic.sort_key))
    return ProductLine(library, tuple(deltas), fm, files)
