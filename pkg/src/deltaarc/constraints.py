"""Boolean application conditions over features.

Grammar: ``!`` binds tightest, then ``&&``, then ``||``; binary operators
associate to the left; parentheses group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterator, Optional, Union

from .errors import UnknownFeature
from .model import is_identifier
from .syntax import Parser


@dataclass(frozen=True)
class Feature:
    name: str

    def __post_init__(self) -> None:
        if not is_identifier(self.name):
            raise ValueError(f"invalid feature name {self.name!r}")


@dataclass(frozen=True)
class Not:
    operand: "Constraint"


@dataclass(frozen=True)
class And:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Or:
    left: "Constraint"
    right: "Constraint"


Constraint = Union[Feature, Not, And, Or]


def features_of(c: Constraint) -> Iterator[str]:
    if isinstance(c, Feature):
        yield c.name
    elif isinstance(c, Not):
        yield from features_of(c.operand)
    else:
        yield from features_of(c.left)
        yield from features_of(c.right)


def evaluate(c: Constraint, config, declared: Optional[AbstractSet[str]] = None) -> bool:
    """Truth value of ``c`` when exactly the features of ``config`` are selected.

    ``config`` is a Configuration or any set of feature names. Literals outside
    the declared feature set raise UnknownFeature.
    """
    selected = getattr(config, "selected", config)
    if declared is None:
        declared = getattr(config, "declared", None)
    if declared is not None:
        for name in features_of(c):
            if name not in declared:
                raise UnknownFeature(name)
    return _eval(c, selected)


def _eval(c: Constraint, selected: AbstractSet[str]) -> bool:
    if isinstance(c, Feature):
        return c.name in selected
    if isinstance(c, Not):
        return not _eval(c.operand, selected)
    if isinstance(c, And):
        return _eval(c.left, selected) and _eval(c.right, selected)
    return _eval(c.left, selected) or _eval(c.right, selected)


_PREC = {Or: 1, And: 2, Not: 3, Feature: 4}


def print_constraint(c: Constraint) -> str:
    """Concrete syntax with the minimal parentheses needed to reparse to the same tree."""
    if isinstance(c, Feature):
        return c.name
    if isinstance(c, Not):
        inner = print_constraint(c.operand)
        return "!" + (f"({inner})" if _PREC[type(c.operand)] < 3 else inner)
    op, prec = ("||", 1) if isinstance(c, Or) else ("&&", 2)
    left = print_constraint(c.left)
    if _PREC[type(c.left)] < prec:
        left = f"({left})"
    right = print_constraint(c.right)
    # left associativity: an equal-precedence right operand needs parentheses
    if _PREC[type(c.right)] <= prec:
        right = f"({right})"
    return f"{left} {op} {right}"


class ConstraintParser(Parser):
    def constraint(self) -> Constraint:
        node = self.conjunction()
        while self.accept("||"):
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> Constraint:
        node = self.negation()
        while self.accept("&&"):
            node = And(node, self.negation())
        return node

    def negation(self) -> Constraint:
        if self.accept("!"):
            return Not(self.negation())
        if self.accept("("):
            node = self.constraint()
            self.expect(")")
            return node
        return Feature(self.expect_ident("feature name").text)

    def whole_constraint(self) -> Constraint:
        node = self.constraint()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.describe(self.tok)} after constraint")
        return node


def parse_constraint(text: str) -> Constraint:
    parser = ConstraintParser(text)
    return parser.run(parser.whole_constraint)
