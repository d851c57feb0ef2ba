"""In-memory component/connector model.

All values are frozen dataclasses holding tuples, so they can be shared
freely. Connectors may carry several targets as written in source; the
engine and the checks work on the single-target form returned by
:meth:`ComponentDefinition.normalized_connectors`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import AmbiguousComponentType, UnknownComponentType

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


def _check_ident(text: str) -> str:
    if not isinstance(text, str) or not is_identifier(text):
        raise ValueError(f"invalid identifier: {text!r}")
    return text


@dataclass(frozen=True, order=True)
class QualifiedName:
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("qualified name needs at least one segment")
        for seg in self.segments:
            _check_ident(seg)

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        return cls(tuple(text.split(".")))

    @property
    def last(self) -> str:
        return self.segments[-1]

    @property
    def is_simple(self) -> bool:
        return len(self.segments) == 1

    def __str__(self) -> str:
        return ".".join(self.segments)


class Direction(Enum):
    IN = "in"
    OUT = "out"


class Origin(Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


class AutoconnectMode(Enum):
    OFF = "off"
    PORT = "port"
    TYPE = "type"


@dataclass(frozen=True)
class PortDecl:
    direction: Direction
    data_type: str
    name: str
    implicitly_named: bool = False

    def __post_init__(self) -> None:
        _check_ident(self.data_type)
        _check_ident(self.name)
        if self.implicitly_named and self.name != self.data_type:
            raise ValueError(f"implicit port name {self.name!r} must equal its type")

    @classmethod
    def implicit(cls, direction: Direction, data_type: str) -> "PortDecl":
        return cls(direction, data_type, data_type, True)


@dataclass(frozen=True)
class SubcomponentDecl:
    component_type: QualifiedName
    instance_name: str
    implicitly_named: bool = False

    def __post_init__(self) -> None:
        _check_ident(self.instance_name)
        if self.implicitly_named and self.instance_name != self.component_type.last:
            raise ValueError("implicit instance name must equal the type's last segment")

    @classmethod
    def implicit(cls, component_type: QualifiedName | str) -> "SubcomponentDecl":
        if isinstance(component_type, str):
            component_type = QualifiedName.parse(component_type)
        return cls(component_type, component_type.last, True)


@dataclass(frozen=True, order=True)
class PortRef:
    """A port of the enclosing component (``subcomponent is None``) or of a subcomponent."""

    subcomponent: Optional[str]
    port: str

    @classmethod
    def parse(cls, text: str) -> "PortRef":
        if "." in text:
            sub, port = text.split(".", 1)
            return cls(sub, port)
        return cls(None, text)

    def __str__(self) -> str:
        return self.port if self.subcomponent is None else f"{self.subcomponent}.{self.port}"

    def _key(self) -> tuple[str, str]:
        return (self.subcomponent or "", self.port)


@dataclass(frozen=True)
class Connector:
    source: PortRef
    targets: tuple[PortRef, ...]
    origin: Origin = Origin.EXPLICIT

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("connector needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate connector target")
        if self.source in self.targets:
            raise ValueError("connector source appears among its targets")

    @classmethod
    def single(cls, source: PortRef, target: PortRef, origin: Origin = Origin.EXPLICIT) -> "Connector":
        return cls(source, (target,), origin)

    @property
    def target(self) -> PortRef:
        """The only target of a normalized connector."""
        if len(self.targets) != 1:
            raise ValueError("connector is not normalized")
        return self.targets[0]

    def split(self) -> Iterator["Connector"]:
        for t in self.targets:
            yield Connector(self.source, (t,), self.origin)

    def endpoints(self) -> tuple[PortRef, ...]:
        return (self.source, *self.targets)


@dataclass(frozen=True)
class ComponentDefinition:
    package: QualifiedName
    name: str
    autoconnect: AutoconnectMode = AutoconnectMode.OFF
    ports: tuple[PortDecl, ...] = ()
    subcomponents: tuple[SubcomponentDecl, ...] = ()
    connectors: tuple[Connector, ...] = ()
    inner_definitions: tuple["ComponentDefinition", ...] = ()

    def __post_init__(self) -> None:
        _check_ident(self.name)
        for attr in ("ports", "subcomponents", "connectors", "inner_definitions"):
            value = getattr(self, attr)
            if not isinstance(value, tuple):
                object.__setattr__(self, attr, tuple(value))

    @property
    def qualified_name(self) -> str:
        return f"{self.package}.{self.name}"

    def port(self, name: str) -> Optional[PortDecl]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def subcomponent(self, name: str) -> Optional[SubcomponentDecl]:
        for s in self.subcomponents:
            if s.instance_name == name:
                return s
        return None

    def inner(self, name: str) -> Optional["ComponentDefinition"]:
        for d in self.inner_definitions:
            if d.name == name:
                return d
        return None

    def normalized_connectors(self) -> tuple[Connector, ...]:
        out: list[Connector] = []
        seen: set[tuple[PortRef, PortRef]] = set()
        for c in self.connectors:
            for single in c.split():
                key = (single.source, single.target)
                if key not in seen:
                    seen.add(key)
                    out.append(single)
        return tuple(out)


@dataclass(frozen=True)
class Interface:
    entries: frozenset[tuple[str, Direction, str]]

    def __len__(self) -> int:
        return len(self.entries)


def interface_of(definition: ComponentDefinition) -> Interface:
    return Interface(frozenset((p.name, p.direction, p.data_type) for p in definition.ports))


@dataclass(frozen=True)
class ArchitectureLibrary:
    """Closed set of component definitions keyed by fully qualified name."""

    definitions: Mapping[str, ComponentDefinition] = field(default_factory=dict)

    def __post_init__(self) -> None:
        defs = dict(sorted(self.definitions.items()))
        for key, d in defs.items():
            if key != d.qualified_name:
                raise ValueError(f"library key {key!r} does not match {d.qualified_name!r}")
        object.__setattr__(self, "definitions", MappingProxyType(defs))

    @classmethod
    def of(cls, definitions: Iterable[ComponentDefinition]) -> "ArchitectureLibrary":
        defs: dict[str, ComponentDefinition] = {}
        for d in definitions:
            if d.qualified_name in defs:
                raise ValueError(f"duplicate definition {d.qualified_name}")
            defs[d.qualified_name] = d
        return cls(defs)

    def __len__(self) -> int:
        return len(self.definitions)

    def __iter__(self) -> Iterator[ComponentDefinition]:
        return iter(self.definitions.values())

    def __contains__(self, name: object) -> bool:
        return isinstance(name, (str, QualifiedName)) and self.find(name) is not None

    def __getitem__(self, name: str | QualifiedName) -> ComponentDefinition:
        found = self.find(name)
        if found is None:
            raise UnknownComponentType(str(name))
        return found

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArchitectureLibrary):
            return NotImplemented
        return dict(self.definitions) == dict(other.definitions)

    __hash__ = None  # type: ignore[assignment]

    def find(self, name: str | QualifiedName) -> Optional[ComponentDefinition]:
        """Look up by qualified name, or by simple name when that is unambiguous.

        Raises AmbiguousComponentType for a simple name shared by several packages.
        """
        key = lookup_key(self.definitions, name)
        return None if key is None else self.definitions[key]

    def replace(self, definition: ComponentDefinition) -> "ArchitectureLibrary":
        defs = dict(self.definitions)
        defs[definition.qualified_name] = definition
        return ArchitectureLibrary(defs)


def lookup_key(definitions: Mapping[str, object], name: str | QualifiedName) -> Optional[str]:
    """Key of ``name`` in a qualified-name mapping, accepting unambiguous simple names."""
    text = str(name)
    if text in definitions:
        return text
    if "." in text:
        return None
    hits = [k for k in definitions if k.rsplit(".", 1)[-1] == text]
    if len(hits) > 1:
        raise AmbiguousComponentType(text, hits)
    return hits[0] if hits else None


def resolve(
    lib: ArchitectureLibrary,
    scope: ComponentDefinition,
    sub: SubcomponentDecl,
    enclosing: Sequence[ComponentDefinition] = (),
) -> ComponentDefinition:
    """Definition instantiated by ``sub`` inside ``scope``.

    Inner definitions of ``scope`` (then of the ``enclosing`` definitions,
    innermost last) shadow library definitions.
    """
    if sub.component_type.is_simple:
        for candidate in (scope, *reversed(enclosing)):
            inner = candidate.inner(sub.component_type.last)
            if inner is not None:
                return inner
    found = lib.find(sub.component_type)
    if found is None:
        raise UnknownComponentType(str(sub.component_type))
    return found


def _definition_key(d: ComponentDefinition) -> tuple:
    return (
        str(d.package),
        d.name,
        d.autoconnect,
        frozenset((p.direction, p.data_type, p.name) for p in d.ports),
        frozenset((str(s.component_type), s.instance_name) for s in d.subcomponents),
        frozenset((c.source, c.target) for c in d.normalized_connectors()),
        frozenset(_definition_key(i) for i in d.inner_definitions),
    )


def canonical_form(lib: ArchitectureLibrary) -> frozenset:
    """Order- and origin-insensitive fingerprint of a library."""
    return frozenset(_definition_key(d) for d in lib)


def structurally_equal(a: ArchitectureLibrary, b: ArchitectureLibrary) -> bool:
    return canonical_form(a) == canonical_form(b)


def definitions_equal(a: ComponentDefinition, b: ComponentDefinition) -> bool:
    return _definition_key(a) == _definition_key(b)


def invariant_violations(d: ComponentDefinition) -> list[str]:
    """Names of broken definition invariants; empty when the definition is sound."""
    problems: list[str] = []
    port_names = [p.name for p in d.ports]
    if len(set(port_names)) != len(port_names):
        problems.append(f"{d.name}: duplicate port names")
    sub_names = [s.instance_name for s in d.subcomponents]
    if len(set(sub_names)) != len(sub_names):
        problems.append(f"{d.name}: duplicate subcomponent names")
    inner_names = [i.name for i in d.inner_definitions]
    if len(set(inner_names)) != len(inner_names) or set(inner_names) & set(sub_names):
        problems.append(f"{d.name}: clashing inner definition names")
    targets = [c.target for c in d.normalized_connectors()]
    if len(set(targets)) != len(targets):
        problems.append(f"{d.name}: port with several incoming connectors")
    for inner in d.inner_definitions:
        problems.extend(invariant_violations(inner))
    return problems


def iter_definitions(
    lib: ArchitectureLibrary,
) -> Iterator[tuple[str, ComponentDefinition, tuple[ComponentDefinition, ...]]]:
    """Yield ``(display name, definition, enclosing definitions)`` for every definition, inner ones included."""

    def walk(name: str, d: ComponentDefinition, enclosing: tuple[ComponentDefinition, ...]):
        yield name, d, enclosing
        for inner in d.inner_definitions:
            yield from walk(f"{name}.{inner.name}", inner, enclosing + (d,))

    for d in lib:
        yield from walk(d.qualified_name, d, ())
