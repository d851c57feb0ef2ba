"""Delta selection, ordering, application, autoconnect expansion and confluence checking.

Deltas are applied to a mutable working copy of the library (``_Def``
objects) and frozen again afterwards; callers only ever see immutable models.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .analysis import WellFormednessFinding, check_wellformed
from .constraints import evaluate
from .delta import (
    DEFAULT_PACKAGE,
    Add,
    ComponentReference,
    ConnectorReference,
    Delta,
    DeltaStatement,
    Modify,
    PortReference,
    Remove,
    Replace,
)
from .errors import (
    AmbiguousComponentType,
    CyclicDeltaOrder,
    DeltaArcError,
    FactorialCapExceeded,
    InvalidConfiguration,
)
from .features import Configuration, FeatureModel, validate_configuration
from .model import (
    ArchitectureLibrary,
    AutoconnectMode,
    ComponentDefinition,
    Connector,
    Direction,
    Origin,
    PortDecl,
    PortRef,
    QualifiedName,
    SubcomponentDecl,
    canonical_form,
    lookup_key,
)

DEFAULT_CONFLUENCE_CAP = 5040


class Condition(Enum):
    C1_DuplicateSubcomponent = "C1"
    C2_DuplicatePort = "C2"
    C3_ConnectorTargetTakenOrMissing = "C3"
    C4a_RemoveMissing = "C4a"
    C4b_RemoveConnectedPort = "C4b"
    C5_RemoveConnectedSubcomponent = "C5"
    C6_ModifyMissing = "C6"
    C7_InterfaceMismatch = "C7"


@dataclass(frozen=True)
class ApplicabilityError:
    condition: Condition
    delta: str
    component: str
    detail: str

    @property
    def code(self) -> str:
        return self.condition.value

    def format(self) -> str:
        return f"{self.delta}: error {self.condition.name}: in {self.component}: {self.detail}"


@dataclass(frozen=True)
class OrderingError:
    cycle: tuple[str, ...]
    code: str = "CYCLIC-ORDER"

    def format(self) -> str:
        return f"deltas: error {self.code}: " + " -> ".join(self.cycle)


class DeltaNotApplicable(DeltaArcError):
    def __init__(self, errors: list[ApplicabilityError]):
        self.errors = errors
        super().__init__("; ".join(e.format() for e in errors))


# -- working copy ---------------------------------------------------------------


class _Def:
    __slots__ = ("package", "name", "autoconnect", "ports", "subcomponents", "connectors", "inner_definitions")

    def __init__(self, d: ComponentDefinition):
        self.package = d.package
        self.name = d.name
        self.autoconnect = d.autoconnect
        self.ports = list(d.ports)
        self.subcomponents = list(d.subcomponents)
        self.connectors = list(d.normalized_connectors())
        self.inner_definitions = [_Def(i) for i in d.inner_definitions]

    def freeze(self) -> ComponentDefinition:
        return ComponentDefinition(
            self.package,
            self.name,
            self.autoconnect,
            tuple(self.ports),
            tuple(self.subcomponents),
            tuple(self.connectors),
            tuple(i.freeze() for i in self.inner_definitions),
        )

    @property
    def qualified_name(self) -> str:
        return f"{self.package}.{self.name}"

    def port(self, name: str) -> Optional[PortDecl]:
        return next((p for p in self.ports if p.name == name), None)

    def subcomponent(self, name: str) -> Optional[SubcomponentDecl]:
        return next((s for s in self.subcomponents if s.instance_name == name), None)

    def inner(self, name: str) -> Optional["_Def"]:
        return next((i for i in self.inner_definitions if i.name == name), None)

    def interface(self) -> frozenset:
        return frozenset((p.name, p.direction, p.data_type) for p in self.ports)


class _Work:
    def __init__(self, lib: ArchitectureLibrary):
        self.defs: dict[str, _Def] = {k: _Def(d) for k, d in lib.definitions.items()}

    def freeze(self) -> ArchitectureLibrary:
        return ArchitectureLibrary({k: d.freeze() for k, d in self.defs.items()})

    def find(self, name: str | QualifiedName) -> Optional[_Def]:
        try:
            key = lookup_key(self.defs, name)
        except AmbiguousComponentType:
            return None
        return None if key is None else self.defs[key]

    def resolve(self, chain: Sequence[_Def], component_type: QualifiedName) -> Optional[_Def]:
        if component_type.is_simple:
            for scope in reversed(chain):
                inner = scope.inner(component_type.last)
                if inner is not None:
                    return inner
        return self.find(component_type)

    def walk(self) -> Iterator[tuple[str, tuple[_Def, ...]]]:
        """Every definition as ``(display name, chain)``; the chain ends with the definition itself."""

        def rec(name: str, chain: tuple[_Def, ...]):
            yield name, chain
            for inner in chain[-1].inner_definitions:
                yield from rec(f"{name}.{inner.name}", chain + (inner,))

        for key in sorted(self.defs):
            yield from rec(key, (self.defs[key],))


def _pkg_of_library(work: _Work) -> QualifiedName:
    packages = {str(d.package) for d in work.defs.values()}
    if len(packages) == 1:
        return QualifiedName.parse(packages.pop())
    return DEFAULT_PACKAGE


def _rehome(d: ComponentDefinition, package: QualifiedName) -> ComponentDefinition:
    from dataclasses import replace

    return replace(d, package=package, inner_definitions=tuple(_rehome(i, package) for i in d.inner_definitions))


# -- autoconnect ------------------------------------------------------------------


def _expand(work: _Work, chain: Sequence[_Def], warnings: list[str]) -> None:
    c = chain[-1]
    if c.autoconnect is AutoconnectMode.OFF:
        return
    sub_defs = {s.instance_name: work.resolve(chain, s.component_type) for s in c.subcomponents}

    def port_of(ref: PortRef) -> Optional[PortDecl]:
        if ref.subcomponent is None:
            return c.port(ref.port)
        target = sub_defs.get(ref.subcomponent)
        return None if target is None else target.port(ref.port)

    c.connectors = [
        k for k in c.connectors
        if k.origin is Origin.EXPLICIT or (port_of(k.source) is not None and port_of(k.target) is not None)
    ]

    sources: list[tuple[PortRef, PortDecl]] = [(PortRef(None, p.name), p) for p in c.ports if p.direction is Direction.IN]
    targets: list[tuple[PortRef, PortDecl]] = [(PortRef(None, p.name), p) for p in c.ports if p.direction is Direction.OUT]
    for s in c.subcomponents:
        sub_def = sub_defs[s.instance_name]
        if sub_def is None:
            continue
        for p in sub_def.ports:
            entry = (PortRef(s.instance_name, p.name), p)
            (sources if p.direction is Direction.OUT else targets).append(entry)

    taken = {k.target for k in c.connectors}
    by_name = c.autoconnect is AutoconnectMode.PORT
    for tref, tport in targets:
        if tref in taken:
            continue
        candidates = []
        for sref, sport in sources:
            if sref.subcomponent is None and tref.subcomponent is None:
                continue  # parent-to-parent forwarding is never implicit
            if sref.subcomponent is not None and sref.subcomponent == tref.subcomponent:
                continue
            if by_name:
                if sport.name != tport.name:
                    continue
                if sport.data_type != tport.data_type:
                    warnings.append(
                        f"{c.qualified_name}: ports {sref} and {tref} share a name but not a type; not connected"
                    )
                    continue
            elif sport.data_type != tport.data_type:
                continue
            candidates.append(sref)
        if len(candidates) == 1:
            c.connectors.append(Connector.single(candidates[0], tref, Origin.IMPLICIT))
            taken.add(tref)
        elif len(candidates) > 1:
            warnings.append(
                f"{c.qualified_name}: ambiguous autoconnect for {tref} from {', '.join(map(str, candidates))}"
            )


def expand_autoconnect(
    lib: ArchitectureLibrary,
    definition: ComponentDefinition,
    enclosing: Sequence[ComponentDefinition] = (),
    warnings: Optional[list[str]] = None,
) -> ComponentDefinition:
    """Add implicit connectors to ``definition`` according to its autoconnect mode.

    Explicit connectors and already-connected targets are left alone;
    implicit connectors whose endpoints no longer exist are dropped first.
    """
    work = _Work(lib)
    chain = [_Def(e) for e in enclosing] + [_Def(definition)]
    _expand(work, chain, warnings if warnings is not None else [])
    return chain[-1].freeze()


def expand_library(lib: ArchitectureLibrary, warnings: Optional[list[str]] = None) -> ArchitectureLibrary:
    """Expand autoconnect in every definition, inner ones included."""
    work = _Work(lib)
    sink = warnings if warnings is not None else []
    for _, chain in list(work.walk()):
        _expand(work, chain, sink)
    return work.freeze()


# -- delta application ------------------------------------------------------------


class _Failed(Exception):
    def __init__(self, error: ApplicabilityError):
        self.error = error


class _Application:
    def __init__(self, work: _Work, delta: Delta):
        self.work = work
        self.delta = delta
        # definitions changed by the delta that should be re-expanded
        self.touched: list[_Def] = []
        self.touched_relaxed: list[_Def] = []

    def fail(self, condition: Condition, component: str, detail: str):
        raise _Failed(ApplicabilityError(condition, self.delta.name, component, detail))

    def touch(self, d: _Def, relaxed: bool) -> None:
        if all(d is not t for t in self.touched):
            self.touched.append(d)
        if relaxed and all(d is not t for t in self.touched_relaxed):
            self.touched_relaxed.append(d)

    # top level

    def run(self) -> None:
        for s in self.delta.statements:
            self.top_level(s, self.delta.expand_autoconnect)

    def top_level(self, s: DeltaStatement, relaxed: bool) -> None:
        work = self.work
        if isinstance(s, Modify):
            try:
                key = lookup_key(work.defs, s.target)
            except AmbiguousComponentType as exc:
                self.fail(Condition.C6_ModifyMissing, str(s.target), str(exc))
            if key is None:
                self.fail(Condition.C6_ModifyMissing, str(s.target), f"no component named {s.target}")
            self.modify((work.defs[key],), s, relaxed)
        elif isinstance(s, Add) and isinstance(s.element, ComponentDefinition):
            d = s.element if s.package_given else _rehome(s.element, _pkg_of_library(work))
            if d.qualified_name in work.defs:
                self.fail(Condition.C1_DuplicateSubcomponent, d.qualified_name, "component definition already exists")
            work.defs[d.qualified_name] = _Def(d)
            self.touch(work.defs[d.qualified_name], relaxed)
        elif isinstance(s, Remove) and isinstance(s.element, ComponentReference):
            try:
                key = lookup_key(work.defs, s.element.component_type)
            except AmbiguousComponentType as exc:
                self.fail(Condition.C4a_RemoveMissing, str(s.element.component_type), str(exc))
            if key is None:
                self.fail(Condition.C4a_RemoveMissing, str(s.element.component_type), "no such component definition")
            del work.defs[key]
        elif isinstance(s, Replace):
            hits = [
                chain for _, chain in work.walk()
                if (sub := chain[-1].subcomponent(s.old.element_name)) is not None
                and _same_type(sub.component_type, s.old.component_type)
            ]
            if not hits:
                self.fail(Condition.C4a_RemoveMissing, str(s.old.component_type), f"no subcomponent {s.old.element_name} to replace")
            for chain in hits:
                self.replace(chain, s, relaxed)
        else:
            raise ValueError(f"statement {s!r} needs an enclosing modify")

    def modify(self, chain: tuple[_Def, ...], m: Modify, relaxed: bool) -> None:
        relaxed = relaxed or m.expand_autoconnect
        self.touch(chain[-1], relaxed)
        for s in m.statements:
            self.nested(chain, s, relaxed)

    # inside a component

    def nested(self, chain: tuple[_Def, ...], s: DeltaStatement, relaxed: bool) -> None:
        c = chain[-1]
        where = c.qualified_name if len(chain) == 1 else ".".join([chain[0].qualified_name, *(x.name for x in chain[1:])])
        if isinstance(s, Modify):
            inner = c.inner(s.target.last) if s.target.is_simple else None
            if inner is None:
                self.fail(Condition.C6_ModifyMissing, where, f"no inner component {s.target}")
            self.modify(chain + (inner,), s, relaxed)
        elif isinstance(s, Add):
            self.add(chain, where, s, relaxed)
        elif isinstance(s, Remove):
            self.remove(chain, where, s, relaxed)
        elif isinstance(s, Replace):
            if c.subcomponent(s.old.element_name) is None:
                self.fail(Condition.C4a_RemoveMissing, where, f"no subcomponent {s.old.element_name} to replace")
            self.replace(chain, s, relaxed)
        else:  # pragma: no cover
            raise TypeError(s)

    def add(self, chain, where: str, s: Add, relaxed: bool) -> None:
        c = chain[-1]
        e = s.element
        if isinstance(e, PortReference):
            decl = e.to_decl()
            if c.port(decl.name) is not None:
                self.fail(Condition.C2_DuplicatePort, where, f"port {decl.name} already exists")
            c.ports.append(decl)
        elif isinstance(e, ComponentReference):
            name = e.element_name
            if c.subcomponent(name) is not None or c.inner(name) is not None:
                self.fail(Condition.C1_DuplicateSubcomponent, where, f"subcomponent {name} already exists")
            c.subcomponents.append(SubcomponentDecl(e.component_type, name, e.instance_name is None))
        elif isinstance(e, ComponentDefinition):
            if c.subcomponent(e.name) is not None or c.inner(e.name) is not None:
                self.fail(Condition.C1_DuplicateSubcomponent, where, f"inner component {e.name} already exists")
            c.inner_definitions.append(_Def(_rehome(e, c.package)))
        elif isinstance(e, ConnectorReference):
            incoming = {k.target for k in c.connectors}
            if self._port_of(chain, e.source) is None:
                self.fail(Condition.C3_ConnectorTargetTakenOrMissing, where, f"source {e.source} does not exist")
            for t in e.targets:
                if t in incoming:
                    self.fail(Condition.C3_ConnectorTargetTakenOrMissing, where, f"target {t} already has an incoming connector")
                if self._port_of(chain, t) is None:
                    self.fail(Condition.C3_ConnectorTargetTakenOrMissing, where, f"target {t} does not exist")
            c.connectors.extend(e.to_connector().split())
        else:  # pragma: no cover
            raise TypeError(e)
        self.touch(c, relaxed)

    def _port_of(self, chain, ref: PortRef) -> Optional[PortDecl]:
        c = chain[-1]
        if ref.subcomponent is None:
            return c.port(ref.port)
        sub = c.subcomponent(ref.subcomponent)
        if sub is None:
            return None
        sub_def = self.work.resolve(chain, sub.component_type)
        return None if sub_def is None else sub_def.port(ref.port)

    def _match_port(self, c: _Def, where: str, ref: PortReference) -> PortDecl:
        def fits(p: PortDecl) -> bool:
            return p.data_type == ref.data_type and (ref.direction is None or p.direction is ref.direction)

        if ref.name is not None:
            p = c.port(ref.name)
            if p is None or not fits(p):
                self.fail(Condition.C4a_RemoveMissing, where, f"no port {ref.name} of type {ref.data_type}")
            return p
        p = c.port(ref.data_type)
        if p is not None and fits(p):
            return p
        typed = [p for p in c.ports if fits(p)]
        if len(typed) != 1:
            what = "no" if not typed else "several"
            self.fail(Condition.C4a_RemoveMissing, where, f"{what} ports of type {ref.data_type}")
        return typed[0]

    def remove(self, chain, where: str, s: Remove, relaxed: bool) -> None:
        c = chain[-1]
        e = s.element
        if isinstance(e, PortReference):
            p = self._match_port(c, where, e)
            ref = PortRef(None, p.name)
            incident = [k for k in c.connectors if ref in k.endpoints()]
            if incident and not relaxed:
                self.fail(Condition.C4b_RemoveConnectedPort, where, f"port {p.name} is used by {len(incident)} connector(s)")
            c.connectors = [k for k in c.connectors if ref not in k.endpoints()]
            c.ports.remove(p)
            if relaxed:
                self._cascade_port_removal(c, p.name)
        elif isinstance(e, ComponentReference):
            name = e.element_name
            sub = c.subcomponent(name)
            if sub is not None:
                if not _same_type(sub.component_type, e.component_type):
                    self.fail(Condition.C4a_RemoveMissing, where, f"subcomponent {name} is of type {sub.component_type}")
                incident = [k for k in c.connectors if any(r.subcomponent == name for r in k.endpoints())]
                if incident and not relaxed:
                    self.fail(
                        Condition.C5_RemoveConnectedSubcomponent, where,
                        f"subcomponent {name} is used by {len(incident)} connector(s)",
                    )
                c.connectors = [k for k in c.connectors if all(r.subcomponent != name for r in k.endpoints())]
                c.subcomponents.remove(sub)
            elif c.inner(name) is not None:
                c.inner_definitions.remove(c.inner(name))
            else:
                self.fail(Condition.C4a_RemoveMissing, where, f"no subcomponent {name}")
        elif isinstance(e, ConnectorReference):
            for t in e.targets:
                if not any(k.source == e.source and k.target == t for k in c.connectors):
                    self.fail(Condition.C4a_RemoveMissing, where, f"no connector {e.source} -> {t}")
            gone = set(e.targets)
            c.connectors = [k for k in c.connectors if not (k.source == e.source and k.target in gone)]
        else:  # pragma: no cover
            raise TypeError(e)
        self.touch(c, relaxed)

    def _cascade_port_removal(self, removed_from: _Def, port: str) -> None:
        for _, chain in self.work.walk():
            d = chain[-1]
            for sub in d.subcomponents:
                if self.work.resolve(chain, sub.component_type) is removed_from:
                    ref = PortRef(sub.instance_name, port)
                    d.connectors = [k for k in d.connectors if ref not in k.endpoints()]

    def replace(self, chain, s: Replace, relaxed: bool) -> None:
        c = chain[-1]
        where = c.qualified_name
        old_name = s.old.element_name
        old_sub = c.subcomponent(old_name)
        if not _same_type(old_sub.component_type, s.old.component_type):
            self.fail(Condition.C4a_RemoveMissing, where, f"subcomponent {old_name} is of type {old_sub.component_type}")
        old_def = self.work.resolve(chain, old_sub.component_type)
        new_def = self.work.resolve(chain, s.new.component_type)
        if old_def is None or new_def is None:
            missing = s.new.component_type if new_def is None else old_sub.component_type
            self.fail(Condition.C7_InterfaceMismatch, where, f"cannot resolve component type {missing}")
        if old_def.interface() != new_def.interface():
            self.fail(
                Condition.C7_InterfaceMismatch, where,
                f"{s.new.component_type} does not have the interface of {old_sub.component_type}",
            )
        new_name = s.new.element_name
        if new_name != old_name and (c.subcomponent(new_name) is not None or c.inner(new_name) is not None):
            self.fail(Condition.C1_DuplicateSubcomponent, where, f"subcomponent {new_name} already exists")
        new_sub = SubcomponentDecl(s.new.component_type, new_name, s.new.instance_name is None)
        c.subcomponents[c.subcomponents.index(old_sub)] = new_sub

        def rename(r: PortRef) -> PortRef:
            return PortRef(new_name, r.port) if r.subcomponent == old_name else r

        c.connectors = [Connector.single(rename(k.source), rename(k.target), k.origin) for k in c.connectors]
        self.touch(c, relaxed)

    def expansion_targets(self, before: dict[int, frozenset]) -> list[tuple[str, tuple[_Def, ...]]]:
        roots = self.touched_relaxed
        changed = [d for d in roots if before.get(id(d)) != d.interface()]
        selected = []
        for name, chain in self.work.walk():
            d = chain[-1]
            if any(d is r for r in roots):
                selected.append((name, chain))
                continue
            for sub in d.subcomponents:
                target = self.work.resolve(chain, sub.component_type)
                if target is not None and any(target is x for x in changed):
                    selected.append((name, chain))
                    break
        return selected


def _same_type(actual: QualifiedName, wanted: QualifiedName) -> bool:
    if actual == wanted:
        return True
    return (actual.is_simple or wanted.is_simple) and actual.last == wanted.last


def apply_delta(lib: ArchitectureLibrary, delta: Delta, warnings: Optional[list[str]] = None) -> ArchitectureLibrary:
    """Apply one delta; raises DeltaNotApplicable on the first statement that breaks a condition."""
    work = _Work(lib)
    before = {id(chain[-1]): chain[-1].interface() for _, chain in work.walk()}
    app = _Application(work, delta)
    try:
        app.run()
    except _Failed as failed:
        raise DeltaNotApplicable([failed.error]) from None
    sink = warnings if warnings is not None else []
    for _, chain in app.expansion_targets(before):
        _expand(work, chain, sink)
    return work.freeze()


# -- selection and ordering ---------------------------------------------------


def select_deltas(deltas: Sequence[Delta], fm: FeatureModel, cfg: Configuration) -> list[Delta]:
    return [d for d in deltas if evaluate(d.when, cfg.selected, fm.names)]


def _predecessors(d: Delta, names: set[str]) -> set[str]:
    out = set()
    for p in d.predecessors:
        text = str(p)
        if text in names:
            out.add(text)
        elif p.last in names:
            out.add(p.last)
    return out


def order_deltas(selected: Sequence[Delta]) -> list[Delta]:
    """Topological order over ``after`` edges; incomparable deltas go by ascending name."""
    by_name = {d.name: d for d in selected}
    names = set(by_name)
    preds = {d.name: _predecessors(d, names) - {d.name} for d in selected}
    self_loops = [d.name for d in selected if d.name in _predecessors(d, names)]
    if self_loops:
        raise CyclicDeltaOrder([self_loops[0], self_loops[0]])
    succs: dict[str, list[str]] = {n: [] for n in names}
    for n, ps in preds.items():
        for p in ps:
            succs[p].append(n)
    indegree = {n: len(ps) for n, ps in preds.items()}
    ready = [n for n, k in indegree.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(by_name[n])
        for m in succs[n]:
            indegree[m] -= 1
            if indegree[m] == 0:
                heapq.heappush(ready, m)
    if len(order) != len(selected):
        raise CyclicDeltaOrder(_find_cycle({n: preds[n] for n in names if indegree[n] > 0}))
    return order


def _find_cycle(preds: dict[str, set[str]]) -> list[str]:
    # every remaining node has a remaining predecessor, so walking backwards must revisit a node
    node = min(preds)
    path: list[str] = []
    seen: dict[str, int] = {}
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(p for p in preds[node] if p in preds)
    cycle = path[seen[node]:]
    cycle.reverse()
    return cycle + [cycle[0]]


def linearizations(selected: Sequence[Delta]) -> Iterator[list[Delta]]:
    """Every order of ``selected`` compatible with the ``after`` edges among them."""
    names = {d.name for d in selected}
    preds = {d.name: _predecessors(d, names) for d in selected}
    ordered = sorted(selected, key=lambda d: d.name)

    def rec(done: list[Delta], placed: frozenset[str]):
        if len(done) == len(ordered):
            yield list(done)
            return
        for d in ordered:
            if d.name not in placed and preds[d.name] <= placed:
                done.append(d)
                yield from rec(done, placed | {d.name})
                done.pop()

    yield from rec([], frozenset())


def count_linearizations(selected: Sequence[Delta]) -> int:
    names = {d.name for d in selected}
    preds = {d.name: frozenset(_predecessors(d, names)) for d in selected}

    @lru_cache(maxsize=None)
    def count(placed: frozenset[str]) -> int:
        if len(placed) == len(names):
            return 1
        return sum(count(placed | {n}) for n in names if n not in placed and preds[n] <= placed)

    return count(frozenset())


# -- derivation -------------------------------------------------------------------


@dataclass
class DerivationReport:
    configuration: Configuration
    applied_order: list[str] = field(default_factory=list)
    result: Optional[ArchitectureLibrary] = None
    errors: list = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    findings: list[WellFormednessFinding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.result is not None

    @property
    def application_errors(self) -> list:
        return [e for e in self.errors if isinstance(e, (ApplicabilityError, OrderingError))]


def _fold(core: ArchitectureLibrary, order: Iterable[Delta], warnings: list[str]) -> ArchitectureLibrary:
    lib = core
    for d in order:
        lib = apply_delta(lib, d, warnings)
    return lib


def derive_variant(
    lib: ArchitectureLibrary, deltas: Sequence[Delta], fm: FeatureModel, cfg: Configuration
) -> DerivationReport:
    """Select, order and apply the deltas for ``cfg``, then check the final architecture.

    The core library's own autoconnect statements are expanded before any
    delta is applied.
    """
    validation = validate_configuration(fm, cfg)
    if not validation:
        raise InvalidConfiguration(f"{cfg}: " + "; ".join(validation.reasons))
    report = DerivationReport(cfg)
    known = {d.name for d in deltas}
    for d in deltas:
        for p in d.predecessors:
            if str(p) not in known and p.last not in known:
                report.warnings.append(f"delta {d.name}: unknown predecessor {p} ignored")
    selected = select_deltas(deltas, fm, cfg)
    try:
        ordered = order_deltas(selected)
    except CyclicDeltaOrder as exc:
        report.errors.append(OrderingError(tuple(exc.cycle)))
        return report
    report.applied_order = [d.name for d in ordered]
    try:
        current = _fold(expand_library(lib, report.warnings), ordered, report.warnings)
    except DeltaNotApplicable as exc:
        report.errors.extend(exc.errors)
        return report
    report.findings = check_wellformed(current)
    errors = [f for f in report.findings if f.is_error]
    if errors:
        report.errors.extend(errors)
        return report
    report.warnings.extend(f.format() for f in report.findings)
    report.result = current
    return report


@dataclass(frozen=True)
class ConfluenceResult:
    confluent: bool
    orders_checked: int
    counterexample: Optional[tuple[tuple[str, ...], tuple[str, ...]]] = None
    outcomes: tuple = ()

    def format(self) -> str:
        if self.confluent:
            return f"confluent ({self.orders_checked} order(s) checked)"
        a, b = self.counterexample
        return f"not confluent: [{', '.join(a)}] and [{', '.join(b)}] give different results"


def check_confluence(
    lib: ArchitectureLibrary,
    deltas: Sequence[Delta],
    fm: FeatureModel,
    cfg: Configuration,
    cap: int = DEFAULT_CONFLUENCE_CAP,
) -> ConfluenceResult:
    """Apply the applicable deltas in every admissible order and compare the results.

    An order that fails counts as its own outcome, keyed by the failing
    condition, so a failing order never matches a succeeding one.
    """
    selected = select_deltas(deltas, fm, cfg)
    total = count_linearizations(selected)
    if total > cap:
        raise FactorialCapExceeded(f"{total} admissible delta orders exceed the cap of {cap}")
    core = expand_library(lib)
    first_key = first_order = None
    outcomes = []
    checked = 0
    for order in linearizations(selected):
        checked += 1
        names = tuple(d.name for d in order)
        try:
            key = ("ok", canonical_form(_fold(core, order, [])))
        except DeltaNotApplicable as exc:
            key = ("failed", tuple((e.delta, e.code) for e in exc.errors))
        outcomes.append((names, key[0] if key[0] == "ok" else key))
        if first_key is None:
            first_key, first_order = key, names
        elif key != first_key:
            return ConfluenceResult(False, checked, (first_order, names), tuple(outcomes))
    return ConfluenceResult(True, checked, None, tuple(outcomes))
