"""Flat feature models, configurations and exhaustive enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .constraints import Constraint, ConstraintParser, evaluate, features_of, print_constraint
from .errors import EnumerationCapExceeded, ParseError, UnknownFeature
from .model import is_identifier
from .syntax import Severity, with_path

DEFAULT_ENUMERATION_CAP = 20


@dataclass(frozen=True)
class Configuration:
    selected: frozenset[str]
    # feature names of the model the configuration belongs to, if known
    declared: Optional[frozenset[str]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "selected", frozenset(self.selected))
        if self.declared is not None:
            object.__setattr__(self, "declared", frozenset(self.declared))
            for name in self.selected:
                if name not in self.declared:
                    raise UnknownFeature(name)

    @property
    def label(self) -> str:
        """Directory-friendly name: sorted features joined with ``+``."""
        return "+".join(sorted(self.selected))

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(self.selected)) + "}"


@dataclass(frozen=True)
class FeatureModel:
    root_name: str
    features: tuple[tuple[str, bool], ...]  # (name, optional)
    cross_tree: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        names = [n for n, _ in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be distinct")
        for n in names:
            if not is_identifier(n):
                raise ValueError(f"invalid feature name {n!r}")
        for c in self.cross_tree:
            for lit in features_of(c):
                if lit not in names:
                    raise UnknownFeature(lit)

    @property
    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.features)

    @property
    def mandatory(self) -> list[str]:
        return [n for n, opt in self.features if not opt]

    @property
    def optional(self) -> list[str]:
        return [n for n, opt in self.features if opt]

    def configuration(self, selected: Iterable[str]) -> Configuration:
        return Configuration(frozenset(selected), self.names)


@dataclass(frozen=True)
class Validation:
    ok: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_configuration(fm: FeatureModel, cfg: Configuration | Iterable[str]) -> Validation:
    selected = cfg.selected if isinstance(cfg, Configuration) else frozenset(cfg)
    for name in sorted(selected):
        if name not in fm.names:
            raise UnknownFeature(name)
    reasons = [f"mandatory feature {n} not selected" for n in fm.mandatory if n not in selected]
    for c in fm.cross_tree:
        if not evaluate(c, selected, fm.names):
            reasons.append(f"constraint violated: {print_constraint(c)}")
    return Validation(not reasons, tuple(reasons))


def enumerate_configurations(fm: FeatureModel, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Configuration]:
    """All valid configurations, ordered lexicographically by their sorted feature lists."""
    optional = fm.optional
    if len(optional) > cap:
        raise EnumerationCapExceeded(f"{len(optional)} optional features exceed the cap of {cap}")
    base = frozenset(fm.mandatory)
    found = []
    for mask in itertools.product((False, True), repeat=len(optional)):
        selected = base | {n for n, on in zip(optional, mask) if on}
        if validate_configuration(fm, selected):
            found.append(fm.configuration(selected))
    found.sort(key=lambda c: sorted(c.selected))
    return found


def parse_feature_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


class FeatureModelParser(ConstraintParser):
    def feature_model(self) -> FeatureModel:
        self.expect("featuremodel")
        root = self.expect_ident("feature model name").text
        self.expect("{")
        features: list[tuple[str, bool]] = []
        seen: set[str] = set()
        constraints: list[tuple[Constraint, object]] = []
        while not self.at("}") and self.tok.kind != "eof":
            if self.at("mandatory") or self.at("optional"):
                optional = self.advance().text == "optional"
                while True:
                    tok = self.expect_ident("feature name")
                    if tok.text in seen:
                        self.report(tok, f"duplicate feature {tok.text!r}", "DUP-NAME")
                    seen.add(tok.text)
                    features.append((tok.text, optional))
                    if not self.accept(","):
                        break
                self.expect(";")
            elif self.at("constraint"):
                tok = self.advance()
                constraints.append((self.constraint(), tok))
                self.expect(";")
            else:
                self.fail(f"expected 'mandatory', 'optional' or 'constraint', found {self.describe(self.tok)}")
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail(f"expected end of input, found {self.describe(self.tok)}")
        for c, tok in constraints:
            for lit in features_of(c):
                if lit not in seen:
                    self.report(tok, f"constraint mentions undeclared feature {lit!r}", "UNKNOWN-FEATURE")
        if any(d.severity is Severity.ERROR for d in self.diagnostics):
            return None
        return FeatureModel(root, tuple(features), tuple(c for c, _ in constraints))


def parse_feature_model(text: str) -> FeatureModel:
    parser = FeatureModelParser(text)
    return parser.run(parser.feature_model)


def load_feature_model(path: str) -> FeatureModel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_feature_model(text)
    except ParseError as err:
        raise with_path(err, path) from None


def print_feature_model(fm: FeatureModel) -> str:
    lines = [f"featuremodel {fm.root_name} {{"]
    for name, optional in fm.features:
        lines.append(f"    {'optional' if optional else 'mandatory'} {name};")
    for c in fm.cross_tree:
        lines.append(f"    constraint {print_constraint(c)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
