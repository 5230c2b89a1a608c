"""Test-intent compilation into logical topologies.

Each session kind has a wrap-around template: the device under test is
surrounded by test equipment over the interfaces the test exercises. The
compiler resolves participants by device kind, checks them against the
template and emits the digital adjacencies (per interface), the analog RF
paths and any impairment insertion points.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from otic.errors import (
    IncompatibleProfile,
    PlaneOrderError,
    TemplateViolation,
    ValidationError,
)
from otic.inventory import DeviceKind, Inventory, Medium, Role, feature_catalog
from otic.ipam import InterfaceKind, coerce_interface
from otic.vlan import Plane

TOPOLOGY_VERSION = 1
EXTERNAL = "external"

DK = DeviceKind
IK = InterfaceKind


class SessionKind(str, Enum):
    RU_CONFORMANCE = "ru_conformance"
    DU_CONFORMANCE = "du_conformance"
    WG4_IOT = "wg4_iot"
    WG5_IOT = "wg5_iot"
    E2E = "e2e"
    E2E_MOBILITY = "e2e_mobility"


class AnalogMode(str, Enum):
    RADIATED = "radiated"
    CONDUCTED = "conducted"

    @property
    def medium(self) -> Medium:
        return Medium.RF_ANTENNA if self is AnalogMode.RADIATED else Medium.RF_COAXIAL


# kind -> (min, max) participants; max None means unbounded
_TEMPLATES: dict[SessionKind, dict[DeviceKind, tuple[int, Optional[int]]]] = {
    SessionKind.RU_CONFORMANCE: {DK.RU: (1, 1), DK.DU_EMULATOR: (1, 1), DK.VST: (1, 1)},
    SessionKind.DU_CONFORMANCE: {DK.DU: (1, 1), DK.RU_UE_EMULATOR: (1, 1),
                                 DK.CORE_EMULATOR: (1, 1)},
    SessionKind.WG4_IOT: {DK.RU: (1, 1), DK.DU: (1, 1), DK.UE_EMULATOR: (1, 1),
                          DK.CORE_EMULATOR: (1, 1)},
    SessionKind.WG5_IOT: {DK.CU: (1, 1), DK.DU: (1, 1)},
    SessionKind.E2E: {DK.UE_EMULATOR: (1, 1), DK.RU: (1, 1), DK.DU: (1, 1), DK.CU: (1, 1),
                      DK.CORE_EMULATOR: (1, 1)},
    SessionKind.E2E_MOBILITY: {DK.UE_EMULATOR: (1, 1), DK.RU: (2, None), DK.DU: (1, None),
                               DK.CU: (1, 1), DK.CORE_EMULATOR: (1, 1)},
}
_OPTIONAL = {DK.T_GM: (0, 1), DK.IMPAIRMENT_EMULATOR: (0, 1)}
_MANAGERS = (DK.MONITOR, DK.COMPUTE)
_RAN_NODES = (DK.CU, DK.DU, DK.RU)
WG5_EXTRA = frozenset({IK.E1, IK.X2, IK.XN})

_OFH_PLANES = {IK.OFH_M: frozenset({Plane.M}), IK.OFH_CU: frozenset({Plane.CU_C, Plane.CU_U})}


@dataclass(frozen=True)
class Options:
    """Knobs accepted by :func:`compile_topology` and session planning."""

    analog_mode: AnalogMode = AnalogMode.CONDUCTED
    impair: frozenset = frozenset()
    delay_ms: Optional[float] = None
    splane_source: Optional[str] = None
    interfaces: frozenset = frozenset()
    o1_overlay: bool = False
    plane_separation: bool = False
    shared: bool = False

    @classmethod
    def from_dict(cls, doc: Optional[Mapping]) -> "Options":
        doc = dict(doc or {})
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown options {sorted(unknown)}")
        if "analog_mode" in doc:
            doc["analog_mode"] = AnalogMode(doc["analog_mode"])
        for key in ("impair", "interfaces"):
            if key in doc:
                doc[key] = frozenset(coerce_interface(i) for i in doc[key])
        return cls(**doc)

    def to_dict(self) -> dict:
        return {
            "analog_mode": self.analog_mode.value,
            "impair": sorted(i.value for i in self.impair),
            "delay_ms": self.delay_ms,
            "splane_source": self.splane_source,
            "interfaces": sorted(i.value for i in self.interfaces),
            "o1_overlay": self.o1_overlay,
            "plane_separation": self.plane_separation,
            "shared": self.shared,
        }


@dataclass(frozen=True, order=True)
class DigitalEdge:
    interface: InterfaceKind
    a: str  # device port ids
    b: str
    planes: frozenset = frozenset()

    @property
    def devices(self) -> tuple[str, str]:
        return self.a.split(":")[0], self.b.split(":")[0]

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "interface": self.interface.value,
                "planes": sorted(p.value for p in self.planes)}


@dataclass(frozen=True, order=True)
class AnalogEdge:
    a: str
    b: str
    mode: AnalogMode

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "mode": self.mode.value}


@dataclass(frozen=True, order=True)
class Impairment:
    edge: DigitalEdge
    device: Optional[str] = None
    delay_ms: Optional[float] = None

    def to_dict(self) -> dict:
        return {"edge": self.edge.to_dict(), "device": self.device, "delay_ms": self.delay_ms}


VlanClass = tuple[InterfaceKind, Optional[Plane]]


@dataclass(frozen=True)
class LogicalTopology:
    kind: Optional[SessionKind]
    digital_edges: tuple[DigitalEdge, ...] = ()
    analog_edges: tuple[AnalogEdge, ...] = ()
    impairments: tuple[Impairment, ...] = ()
    splane_source: Optional[str] = None
    plane_separation: bool = False

    def interfaces(self) -> list[InterfaceKind]:
        return sorted({e.interface for e in self.digital_edges}, key=lambda k: k.value)

    def l3_interfaces(self) -> list[InterfaceKind]:
        return [k for k in self.interfaces() if k.has_subnet]

    def edge_classes(self, edge: DigitalEdge) -> list[VlanClass]:
        if self.plane_separation and edge.interface is IK.OFH_CU:
            return [(IK.OFH_CU, Plane.CU_C), (IK.OFH_CU, Plane.CU_U)]
        return [(edge.interface, None)]

    def vlan_classes(self) -> list[VlanClass]:
        """Distinct VLAN demands, one VID each."""
        seen: dict[VlanClass, None] = {}
        for e in self.digital_edges:
            for c in self.edge_classes(e):
                seen[c] = None
        return sorted(seen, key=lambda c: (c[0].value, c[1].value if c[1] else ""))

    def adjacencies(self) -> dict[frozenset, list[InterfaceKind]]:
        """Digital edges grouped by the device pair they join."""
        out: dict[frozenset, list[InterfaceKind]] = defaultdict(list)
        for e in self.digital_edges:
            out[frozenset(e.devices)].append(e.interface)
        return dict(out)

    def devices(self) -> set[str]:
        ports = [p for e in self.digital_edges for p in (e.a, e.b)]
        ports += [p for e in self.analog_edges for p in (e.a, e.b)]
        devs = {p.split(":")[0] for p in ports}
        devs |= {i.device for i in self.impairments if i.device}
        return devs

    def to_dict(self) -> dict:
        return {
            "version": TOPOLOGY_VERSION,
            "kind": self.kind.value if self.kind else None,
            "edges": [e.to_dict() for e in self.digital_edges],
            "analog": [e.to_dict() for e in self.analog_edges],
            "impairments": [i.to_dict() for i in self.impairments],
            "splane_source": self.splane_source,
            "plane_separation": self.plane_separation,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "LogicalTopology":
        def edge(d):
            return DigitalEdge(coerce_interface(d["interface"]), d["a"], d["b"],
                               frozenset(Plane(p) for p in d["planes"]))
        return cls(
            kind=SessionKind(doc["kind"]) if doc.get("kind") else None,
            digital_edges=tuple(edge(d) for d in doc["edges"]),
            analog_edges=tuple(AnalogEdge(d["a"], d["b"], AnalogMode(d["mode"]))
                               for d in doc["analog"]),
            impairments=tuple(Impairment(edge(d["edge"]), d["device"], d["delay_ms"])
                              for d in doc["impairments"]),
            splane_source=doc.get("splane_source"),
            plane_separation=doc.get("plane_separation", False),
        )


def _resolve_roles(inventory: Inventory, kind: SessionKind, participants: Sequence[str],
                   options: Options) -> dict[DeviceKind, list[str]]:
    template = dict(_TEMPLATES[kind])
    template.update(_OPTIONAL)
    if options.o1_overlay:
        template.update({k: (0, 1) for k in _MANAGERS})
    if len(set(participants)) != len(participants):
        raise TemplateViolation("participants listed twice")
    by_kind: dict[DeviceKind, list[str]] = defaultdict(list)
    for dev_id in participants:
        dev = inventory.device(dev_id)
        if dev.kind not in template:
            raise TemplateViolation(f"{dev_id} ({dev.kind.value}) has no role in {kind.value}")
        by_kind[dev.kind].append(dev_id)
    missing = [k.value for k, (lo, _) in template.items() if len(by_kind[k]) < lo]
    if missing:
        raise TemplateViolation(f"{kind.value} is missing {', '.join(missing)}")
    for k, (_, hi) in template.items():
        if hi is not None and len(by_kind[k]) > hi:
            raise TemplateViolation(f"{kind.value} takes at most {hi} {k.value}")
    return by_kind


def _digital_port(inventory: Inventory, dev_id: str) -> str:
    att = inventory.attachment(dev_id)
    if att:
        return att[0]
    for p in inventory.device(dev_id).ports:
        if p.medium.digital:
            return p.id
    raise ValidationError(f"{dev_id} has no ethernet port")


def _analog_ports(inventory: Inventory, dev_a: str, dev_b: str, mode: AnalogMode) -> tuple[str, str]:
    pa = [p.id for p in inventory.device(dev_a).ports if p.medium is mode.medium]
    pb = [p.id for p in inventory.device(dev_b).ports if p.medium is mode.medium]
    if not pa or not pb:
        lacking = dev_a if not pa else dev_b
        raise ValidationError(f"{lacking} has no {mode.medium.value} port for {mode.value} testing")
    for a in pa:
        for b in pb:
            if inventory.analog_link_between(a, b):
                return a, b
    return pa[0], pb[0]


def compile_topology(inventory: Inventory, kind: SessionKind | str, participants: Sequence[str],
                     options: Optional[Options] = None) -> LogicalTopology:
    """Expand a test intent into its logical topology.

    Raises TemplateViolation when participants do not match the kind's role
    template; no partial topology is ever returned.
    """
    kind = SessionKind(kind)
    options = options or Options()
    roles = _resolve_roles(inventory, kind, participants, options)

    def one(k: DeviceKind) -> str:
        return roles[k][0]

    edges: list[DigitalEdge] = []
    analog: list[AnalogEdge] = []

    def link(x: str, y: str, *ifaces: InterfaceKind) -> None:
        px, py = _digital_port(inventory, x), _digital_port(inventory, y)
        for iface in ifaces:
            edges.append(DigitalEdge(iface, px, py, _OFH_PLANES.get(iface, frozenset())))

    def rf(x: str, y: str) -> None:
        a, b = _analog_ports(inventory, x, y, options.analog_mode)
        analog.append(AnalogEdge(a, b, options.analog_mode))

    fronthaul = (IK.OFH_M, IK.OFH_CU)
    tgm = roles[DK.T_GM][0] if roles[DK.T_GM] else None
    if kind is SessionKind.RU_CONFORMANCE:
        link(one(DK.DU_EMULATOR), one(DK.RU), *fronthaul)
        rf(one(DK.RU), one(DK.VST))
        default_sync = tgm or one(DK.DU_EMULATOR)
        sync_choices = {one(DK.DU_EMULATOR)}
    elif kind is SessionKind.DU_CONFORMANCE:
        link(one(DK.RU_UE_EMULATOR), one(DK.DU), *fronthaul)
        link(one(DK.DU), one(DK.CORE_EMULATOR), IK.NG)
        default_sync = tgm or one(DK.RU_UE_EMULATOR)
        sync_choices = {one(DK.RU_UE_EMULATOR)}
    elif kind is SessionKind.WG4_IOT:
        rf(one(DK.UE_EMULATOR), one(DK.RU))
        link(one(DK.DU), one(DK.RU), *fronthaul)
        link(one(DK.DU), one(DK.CORE_EMULATOR), IK.F1)
        default_sync = tgm or one(DK.DU)
        sync_choices = {one(DK.DU), one(DK.RU)}
    elif kind is SessionKind.WG5_IOT:
        extra = set(options.interfaces)
        if extra - WG5_EXTRA:
            raise TemplateViolation(f"wg5_iot cannot exercise {sorted(i.value for i in extra - WG5_EXTRA)}")
        link(one(DK.CU), one(DK.DU), IK.F1, *sorted(extra, key=lambda i: i.value))
        default_sync = tgm
        sync_choices = set()
    else:
        rus, dus = roles[DK.RU], roles[DK.DU]
        if kind is SessionKind.E2E_MOBILITY and len(dus) > len(rus):
            raise TemplateViolation("e2e_mobility needs at least as many RUs as DUs")
        for i, ru in enumerate(rus):
            rf(one(DK.UE_EMULATOR), ru)
            link(dus[i % len(dus)], ru, *fronthaul)
        for du in dus:
            link(du, one(DK.CU), IK.F1)
        link(one(DK.CU), one(DK.CORE_EMULATOR), IK.NG)
        default_sync = tgm or dus[0]
        sync_choices = set(dus)

    if options.o1_overlay:
        managers = [d for k in _MANAGERS for d in roles[k]]
        if len(managers) != 1:
            raise TemplateViolation("o1_overlay needs exactly one monitor or compute participant")
        for dev_id in participants:
            dev = inventory.device(dev_id)
            if dev.role is Role.DUT and dev.kind in _RAN_NODES:
                link(managers[0], dev_id, IK.O1)

    splane = options.splane_source or default_sync
    if options.splane_source and options.splane_source != EXTERNAL:
        if options.splane_source not in sync_choices | ({tgm} if tgm else set()):
            raise TemplateViolation(f"{options.splane_source} cannot source the S-plane here")
    if kind in (SessionKind.RU_CONFORMANCE, SessionKind.DU_CONFORMANCE, SessionKind.WG4_IOT) \
            and splane is None:
        raise TemplateViolation("an S-plane source is required")

    impairments = []
    if options.impair:
        present = {e.interface for e in edges}
        absent = set(options.impair) - present
        if absent:
            raise TemplateViolation(f"cannot impair {sorted(i.value for i in absent)}: not in topology")
        imp_dev = roles[DK.IMPAIRMENT_EMULATOR][0] if roles[DK.IMPAIRMENT_EMULATOR] else None
        for e in edges:
            if e.interface in options.impair:
                impairments.append(Impairment(e, imp_dev, options.delay_ms))
    elif roles[DK.IMPAIRMENT_EMULATOR]:
        raise TemplateViolation("impairment emulator given but no interface to impair")

    return LogicalTopology(
        kind=kind,
        digital_edges=tuple(sorted(set(edges))),
        analog_edges=tuple(sorted(set(analog))),
        impairments=tuple(sorted(impairments)),
        splane_source=splane,
        plane_separation=options.plane_separation,
    )


# -- IOT profile -------------------------------------------------------


@dataclass(frozen=True)
class IotProfile:
    du_features: Mapping[str, tuple[str, ...]]
    ru_features: Mapping[str, tuple[str, ...]]
    common: Mapping[str, tuple[str, ...]]

    def to_dict(self) -> dict:
        def plain(m):
            return {k: list(v) for k, v in sorted(m.items())}
        return {"du_features": plain(self.du_features), "ru_features": plain(self.ru_features),
                "common": plain(self.common)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "IotProfile":
        def tup(m):
            return {k: tuple(v) for k, v in m.items()}
        return cls(tup(doc["du_features"]), tup(doc["ru_features"]), tup(doc["common"]))


def mandatory_features() -> frozenset[str]:
    return frozenset(k for k, v in feature_catalog()["features"].items() if v["mandatory"])


def _as_sets(features: Mapping[str, Iterable]) -> dict[str, frozenset[str]]:
    out = {}
    for k, v in features.items():
        out[k] = frozenset([str(v)] if isinstance(v, (str, int)) else (str(x) for x in v))
    return out


def match_iot_profile(du_features: Mapping, ru_features: Mapping) -> IotProfile:
    """Key-wise intersection of what the DU and RU vendors support.

    A mandatory key that both sides omit is unconstrained; one that only one
    side declares, or whose intersection is empty, makes the pair
    incompatible. Optional keys with no overlap are dropped.
    """
    du, ru = _as_sets(du_features), _as_sets(ru_features)
    mandatory = mandatory_features()
    common = {}
    for key in sorted(set(du) | set(ru)):
        if key in du and key in ru:
            both = du[key] & ru[key]
            if both:
                common[key] = tuple(sorted(both))
            elif key in mandatory:
                raise IncompatibleProfile(f"no common value for {key}: "
                                          f"du {sorted(du[key])} vs ru {sorted(ru[key])}")
        elif key in mandatory:
            raise IncompatibleProfile(f"{key} declared by only one side")

    def tup(m):
        return {k: tuple(sorted(v)) for k, v in sorted(m.items())}
    return IotProfile(tup(du), tup(ru), common)


# -- plane checklist ---------------------------------------------------


class CheckPlane(str, Enum):
    M_PLANE = "m_plane"
    S_PLANE = "s_plane"
    CU_PLANE = "cu_plane"
    PERFORMANCE = "performance"


class Status(str, Enum):
    PENDING = "pending"
    PASSED = "passed"
    FAILED = "failed"


PLANE_ORDER = tuple(CheckPlane)


@dataclass
class PlaneChecklist:
    """M-plane, then S-plane, then CU-plane, then performance."""

    status: dict = field(default_factory=lambda: {p: Status.PENDING for p in PLANE_ORDER})

    @property
    def eligible(self) -> Optional[CheckPlane]:
        for plane in PLANE_ORDER:
            st = self.status[plane]
            if st is Status.PENDING:
                return plane
            if st is Status.FAILED:
                return None
        return None

    def advance(self, plane: CheckPlane | str, result: Status | str) -> "PlaneChecklist":
        plane, result = CheckPlane(plane), Status(result)
        if result is Status.PENDING:
            raise ValidationError("result must be passed or failed")
        if self.eligible is not plane:
            nxt = self.eligible
            why = f"next eligible plane is {nxt.value}" if nxt else "checklist is blocked or complete"
            raise PlaneOrderError(f"cannot record {plane.value}: {why}")
        self.status[plane] = result
        return self

    def to_dict(self) -> dict:
        return {p.value: s.value for p, s in self.status.items()}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PlaneChecklist":
        return cls({p: Status(doc[p.value]) for p in PLANE_ORDER})
