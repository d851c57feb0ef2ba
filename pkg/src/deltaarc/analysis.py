"""Context conditions for final architectures and whole-product-line checks."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import UnknownComponentType
from .model import (
    ArchitectureLibrary,
    ComponentDefinition,
    Direction,
    PortDecl,
    PortRef,
    iter_definitions,
    resolve,
)
from .syntax import Severity


class FindingCode(Enum):
    W1_UnresolvedType = "W1"
    W2_DanglingPortRef = "W2"
    W3_DirectionViolation = "W3"
    W4_TypeMismatch = "W4"
    W5_MultipleWriters = "W5"
    W6_UnconnectedPort = "W6"


@dataclass(frozen=True)
class WellFormednessFinding:
    code: FindingCode
    component: str
    detail: str
    severity: Severity = Severity.ERROR

    def __post_init__(self) -> None:
        expected = Severity.WARNING if self.code is FindingCode.W6_UnconnectedPort else Severity.ERROR
        if self.severity is not expected:
            object.__setattr__(self, "severity", expected)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def format(self) -> str:
        return f"{self.component}: {self.severity.value} {self.code.name}: {self.detail}"


def _check_definition(
    lib: ArchitectureLibrary,
    name: str,
    d: ComponentDefinition,
    enclosing: tuple[ComponentDefinition, ...],
) -> list[WellFormednessFinding]:
    out: list[WellFormednessFinding] = []

    def finding(code: FindingCode, detail: str) -> None:
        out.append(WellFormednessFinding(code, name, detail))

    sub_defs: dict[str, Optional[ComponentDefinition]] = {}
    for s in d.subcomponents:
        try:
            sub_defs[s.instance_name] = resolve(lib, d, s, enclosing)
        except UnknownComponentType as exc:
            sub_defs[s.instance_name] = None
            finding(FindingCode.W1_UnresolvedType, f"subcomponent {s.instance_name}: {exc}")

    def port_of(ref: PortRef) -> Optional[PortDecl]:
        if ref.subcomponent is None:
            return d.port(ref.port)
        sub_def = sub_defs.get(ref.subcomponent)
        return None if sub_def is None else sub_def.port(ref.port)

    connectors = d.normalized_connectors()
    for c in connectors:
        src, tgt = port_of(c.source), port_of(c.target)
        if src is None or tgt is None:
            missing = [str(r) for r, p in ((c.source, src), (c.target, tgt)) if p is None]
            finding(FindingCode.W2_DanglingPortRef, f"connector {c.source} -> {c.target}: no port {', '.join(missing)}")
            continue
        src_ok = (c.source.subcomponent is None) == (src.direction is Direction.IN)
        tgt_ok = (c.target.subcomponent is None) == (tgt.direction is Direction.OUT)
        if not (src_ok and tgt_ok):
            finding(FindingCode.W3_DirectionViolation, f"connector {c.source} -> {c.target} runs against port directions")
            continue
        if src.data_type != tgt.data_type:
            finding(FindingCode.W4_TypeMismatch, f"connector {c.source} -> {c.target}: {src.data_type} vs {tgt.data_type}")

    for target, n in sorted(Counter(c.target for c in connectors).items(), key=lambda kv: kv[0]._key()):
        if n > 1:
            finding(FindingCode.W5_MultipleWriters, f"port {target} has {n} incoming connectors")

    if d.subcomponents:
        used = {ref for c in connectors for ref in c.endpoints()}
        for p in d.ports:
            if PortRef(None, p.name) not in used:
                finding(FindingCode.W6_UnconnectedPort, f"port {p.name} is not connected")
        for s in d.subcomponents:
            sub_def = sub_defs[s.instance_name]
            if sub_def is None:
                continue
            for p in sub_def.ports:
                if PortRef(s.instance_name, p.name) not in used:
                    finding(FindingCode.W6_UnconnectedPort, f"port {s.instance_name}.{p.name} is not connected")
    return out


def check_wellformed(lib: ArchitectureLibrary) -> list[WellFormednessFinding]:
    findings: list[WellFormednessFinding] = []
    for name, d, enclosing in iter_definitions(lib):
        findings.extend(_check_definition(lib, name, d, enclosing))
    findings.sort(key=lambda f: (f.component, f.code.value, f.detail))
    return findings


def errors_only(findings: Sequence[WellFormednessFinding]) -> list[WellFormednessFinding]:
    return [f for f in findings if f.is_error]


# -- product lines ------------------------------------------------------------


class RowStatus(Enum):
    OK = "OK"
    APPLICATION_ERROR = "APPLICATION-ERROR"
    ILL_FORMED = "ILL-FORMED"
    NON_CONFLUENT = "NON-CONFLUENT"


@dataclass
class ProductLineRow:
    configuration: object
    status: RowStatus
    detail: str = ""
    applied_order: list[str] = field(default_factory=list)
    report: object = None
    confluence: object = None

    def format(self) -> str:
        status = self.status.value + (f"({self.detail})" if self.detail else "")
        order = ", ".join(self.applied_order) or "-"
        return f"{self.configuration.label:<40} {status:<28} {order}"


def check_product_line(lib, deltas, fm, cap: Optional[int] = None, confluence_cap: Optional[int] = None) -> list[ProductLineRow]:
    """Derive, check and (if several deltas apply) confluence-check every valid configuration."""
    from .engine import DEFAULT_CONFLUENCE_CAP, check_confluence, derive_variant
    from .features import DEFAULT_ENUMERATION_CAP, enumerate_configurations

    rows = []
    for cfg in enumerate_configurations(fm, cap if cap is not None else DEFAULT_ENUMERATION_CAP):
        report = derive_variant(lib, deltas, fm, cfg)
        row = ProductLineRow(cfg, RowStatus.OK, applied_order=list(report.applied_order), report=report)
        if report.application_errors:
            row.status = RowStatus.APPLICATION_ERROR
            row.detail = ",".join(sorted({e.code for e in report.application_errors}))
        elif report.errors:
            row.status = RowStatus.ILL_FORMED
            row.detail = ",".join(sorted({e.code.value for e in report.errors}))
        if len(report.applied_order) > 1:
            verdict = check_confluence(
                lib, deltas, fm, cfg, confluence_cap if confluence_cap is not None else DEFAULT_CONFLUENCE_CAP
            )
            row.confluence = verdict
            if not verdict.confluent and row.status is RowStatus.OK:
                row.status = RowStatus.NON_CONFLUENT
        rows.append(row)
    return rows


def format_table(rows: Sequence[ProductLineRow]) -> str:
    header = f"{'configuration':<40} {'status':<28} applied deltas"
    return "\n".join([header, "-" * len(header)] + [r.format() for r in rows]) + "\n"
