"""Physical inventory: sites, switches, devices, ports and cabling.

Ids are generated sequentially (``site1``, ``sw1``, ``dev1``, ``link1``) and
port ids are ``<node id>:<port name>``. Nothing is ever deleted, which keeps
export ordering and id generation trivially deterministic.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Optional, Union

from otic._util import natural_key
from otic.errors import (
    DuplicateError,
    MediumMismatch,
    NotFound,
    PortOccupied,
    ValidationError,
)

logger = logging.getLogger(__name__)

INVENTORY_VERSION = 1


class SiteKind(str, Enum):
    DATA_CENTER = "data_center"
    LAB = "lab"
    ANECHOIC_CHAMBER = "anechoic_chamber"
    OUTDOOR = "outdoor"


class ClockRole(str, Enum):
    NONE = "none"
    T_BC = "t_bc"
    T_GM = "t_gm"


class Role(str, Enum):
    DUT = "dut"
    TE = "te"
    SERVICE = "service"


class DeviceKind(str, Enum):
    CU = "cu"
    DU = "du"
    RU = "ru"
    UE_EMULATOR = "ue_emulator"
    DU_EMULATOR = "du_emulator"
    RU_UE_EMULATOR = "ru_ue_emulator"
    CORE_EMULATOR = "core_emulator"
    VST = "vst"
    IMPAIRMENT_EMULATOR = "impairment_emulator"
    T_GM = "t_gm"
    COMPUTE = "compute"
    VPN = "vpn"
    STORAGE = "storage"
    DIRECTORY = "directory"
    DNS = "dns"
    MONITOR = "monitor"


class Medium(str, Enum):
    ETHERNET = "ethernet"
    RF_COAXIAL = "rf_coaxial"
    RF_ANTENNA = "rf_antenna"
    GPS_COAX = "gps_coax"

    @property
    def digital(self) -> bool:
        return self is Medium.ETHERNET


class LinkKind(str, Enum):
    ACCESS = "access"
    TRUNK = "trunk"
    ANALOG = "analog"
    OOB = "oob"


@lru_cache(maxsize=None)
def feature_catalog() -> dict:
    """The shipped feature catalog (``otic/data/features.json``)."""
    text = resources.files("otic").joinpath("data/features.json").read_text()
    return json.loads(text)


def normalize_features(features: Optional[Mapping]) -> dict[str, tuple[str, ...]]:
    """Coerce a feature mapping to ``{key: sorted tuple of str}``.

    Keys outside the catalog are kept but trigger a warning.
    """
    known = feature_catalog()["features"]
    out: dict[str, tuple[str, ...]] = {}
    for key, value in (features or {}).items():
        if key not in known:
            warnings.warn(f"feature {key!r} is not in the catalog", stacklevel=2)
        if isinstance(value, (str, int)):
            value = [value]
        out[str(key)] = tuple(sorted({str(v) for v in value}))
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class PortSpec:
    name: str
    medium: Medium = Medium.ETHERNET
    capacity_gbps: float = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "medium", Medium(self.medium))

    @classmethod
    def parse(cls, text: str) -> "PortSpec":
        """Parse ``name[:medium[:gbps]]``, e.g. ``eth0:ethernet:25``."""
        parts = text.split(":")
        if not parts[0] or len(parts) > 3:
            raise ValidationError(f"bad port spec {text!r}")
        medium = Medium(parts[1]) if len(parts) > 1 else Medium.ETHERNET
        cap = float(parts[2]) if len(parts) > 2 else 0
        return cls(parts[0], medium, cap)


PortLike = Union[PortSpec, str, tuple, Mapping]


def _coerce_spec(spec: PortLike) -> PortSpec:
    if isinstance(spec, PortSpec):
        return spec
    if isinstance(spec, str):
        return PortSpec.parse(spec)
    if isinstance(spec, Mapping):
        return PortSpec(spec["name"], Medium(spec.get("medium", "ethernet")),
                        spec.get("capacity_gbps", 0))
    name, medium, *rest = spec
    return PortSpec(name, Medium(medium), rest[0] if rest else 0)


def ethernet_ports(count: int, gbps: float, prefix: str = "p") -> list[PortSpec]:
    return [PortSpec(f"{prefix}{i}", Medium.ETHERNET, gbps) for i in range(1, count + 1)]


@dataclass(frozen=True)
class Port:
    id: str
    node: str
    name: str
    medium: Medium
    capacity_gbps: float

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "medium": self.medium.value,
                "capacity_gbps": self.capacity_gbps}


@dataclass(frozen=True)
class Site:
    id: str
    name: str
    kind: SiteKind

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "kind": self.kind.value}


@dataclass(frozen=True)
class Switch:
    id: str
    site: str
    model: str
    ports: tuple[Port, ...]
    clock_role: ClockRole = ClockRole.NONE

    def to_dict(self) -> dict:
        return {"id": self.id, "site": self.site, "model": self.model,
                "clock_role": self.clock_role.value,
                "ports": [p.to_dict() for p in self.ports]}


@dataclass(frozen=True)
class Device:
    id: str
    site: str
    owner: Optional[str]  # tenant id; None means OTIC-internal
    role: Role
    kind: DeviceKind
    ports: tuple[Port, ...]
    features: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "site": self.site, "owner": self.owner,
                "role": self.role.value, "kind": self.kind.value,
                "ports": [p.to_dict() for p in self.ports],
                "features": {k: list(v) for k, v in self.features.items()}}


@dataclass(frozen=True)
class PhysicalLink:
    id: str
    a: str
    b: str
    kind: LinkKind

    def other(self, port_id: str) -> str:
        return self.b if port_id == self.a else self.a

    def to_dict(self) -> dict:
        return {"id": self.id, "endpoint_a": self.a, "endpoint_b": self.b,
                "kind": self.kind.value}


class Inventory:
    """Mutable registry of the physical facility."""

    def __init__(self) -> None:
        self.sites: dict[str, Site] = {}
        self.switches: dict[str, Switch] = {}
        self.devices: dict[str, Device] = {}
        self.links: dict[str, PhysicalLink] = {}
        self._ports: dict[str, Port] = {}
        self._port_link: dict[str, str] = {}

    # -- registration -------------------------------------------------

    def register_site(self, name: str, kind: SiteKind | str) -> str:
        kind = SiteKind(kind)
        if any(s.name == name for s in self.sites.values()):
            raise DuplicateError(f"site name {name!r} already used")
        sid = f"site{len(self.sites) + 1}"
        self.sites[sid] = Site(sid, name, kind)
        return sid

    def register_switch(self, site: str, model: str, port_specs: Iterable[PortLike] = (),
                        clock_role: ClockRole | str = ClockRole.NONE) -> str:
        self._require_site(site)
        sw_id = f"sw{len(self.switches) + 1}"
        ports = self._make_ports(sw_id, port_specs)
        self.switches[sw_id] = Switch(sw_id, site, model, ports, ClockRole(clock_role))
        self._index(ports)
        return sw_id

    def register_device(self, site: str, owner: Optional[str], role: Role | str,
                        kind: DeviceKind | str, port_specs: Iterable[PortLike] = (),
                        features: Optional[Mapping] = None) -> str:
        self._require_site(site)
        role, kind = Role(role), DeviceKind(kind)
        if role is Role.DUT and not owner:
            raise ValidationError("a DUT must have an owning tenant")
        dev_id = f"dev{len(self.devices) + 1}"
        ports = self._make_ports(dev_id, port_specs)
        self.devices[dev_id] = Device(dev_id, site, owner or None, role, kind, ports,
                                      normalize_features(features))
        self._index(ports)
        return dev_id

    def add_link(self, port_a: str, port_b: str, kind: LinkKind | str) -> str:
        kind = LinkKind(kind)
        a, b = self.port(port_a), self.port(port_b)
        if a.id == b.id:
            raise ValidationError("cannot link a port to itself")
        if a.medium.digital != b.medium.digital:
            raise MediumMismatch(f"{a.id} ({a.medium.value}) vs {b.id} ({b.medium.value})")
        for p in (a, b):
            if p.id in self._port_link:
                raise PortOccupied(f"port {p.id} already in {self._port_link[p.id]}")
        if kind is LinkKind.ANALOG:
            if a.medium.digital:
                raise MediumMismatch("analog links need analog ports")
        elif not a.medium.digital:
            raise MediumMismatch(f"{kind.value} links need ethernet on both ends")
        on_switch = [self.is_switch_port(p.id) for p in (a, b)]
        if kind is LinkKind.TRUNK and not all(on_switch):
            raise ValidationError("trunk links join two switch ports")
        if kind is LinkKind.ACCESS and sum(on_switch) != 1:
            raise ValidationError("access links join a device port to a switch port")
        if kind is LinkKind.OOB and not any(on_switch):
            raise ValidationError("oob links must terminate on a switch")
        link_id = f"link{len(self.links) + 1}"
        self.links[link_id] = PhysicalLink(link_id, a.id, b.id, kind)
        self._port_link[a.id] = self._port_link[b.id] = link_id
        return link_id

    # -- queries ------------------------------------------------------

    def port(self, port_id: str) -> Port:
        try:
            return self._ports[port_id]
        except KeyError:
            raise NotFound(f"unknown port {port_id!r}") from None

    def has_port(self, port_id: str) -> bool:
        return port_id in self._ports

    def device(self, device_id: str) -> Device:
        try:
            return self.devices[device_id]
        except KeyError:
            raise NotFound(f"unknown device {device_id!r}") from None

    def is_switch_port(self, port_id: str) -> bool:
        return self.port(port_id).node in self.switches

    def link_of(self, port_id: str) -> Optional[PhysicalLink]:
        link_id = self._port_link.get(port_id)
        return self.links[link_id] if link_id else None

    def attached_switch_port(self, device_port: str) -> Optional[str]:
        """Switch port on the far end of a device port's access link."""
        link = self.link_of(device_port)
        if link is None or link.kind is not LinkKind.ACCESS:
            return None
        return link.other(device_port)

    def attachment(self, device_id: str) -> Optional[tuple[str, str]]:
        """First (device port, switch port) pair joined by an access link."""
        for p in self.device(device_id).ports:
            sp = self.attached_switch_port(p.id)
            if sp is not None:
                return p.id, sp
        return None

    def analog_link_between(self, port_a: str, port_b: str) -> Optional[PhysicalLink]:
        link = self.link_of(port_a)
        if link and link.kind is LinkKind.ANALOG and link.other(port_a) == port_b:
            return link
        return None

    def ports(self) -> list[Port]:
        return sorted(self._ports.values(), key=lambda p: natural_key(p.id))

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        def ordered(coll):
            return [coll[k].to_dict() for k in sorted(coll, key=natural_key)]
        return {
            "version": INVENTORY_VERSION,
            "sites": ordered(self.sites),
            "switches": ordered(self.switches),
            "devices": ordered(self.devices),
            "links": ordered(self.links),
        }

    def export_inventory(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Inventory":
        if doc.get("version") != INVENTORY_VERSION:
            raise ValidationError(f"unsupported inventory version {doc.get('version')!r}")
        inv = cls()
        for s in doc["sites"]:
            inv.sites[s["id"]] = Site(s["id"], s["name"], SiteKind(s["kind"]))
        for s in doc["switches"]:
            ports = inv._make_ports(s["id"], s["ports"])
            inv.switches[s["id"]] = Switch(s["id"], s["site"], s["model"], ports,
                                           ClockRole(s["clock_role"]))
            inv._index(ports)
        for d in doc["devices"]:
            ports = inv._make_ports(d["id"], d["ports"])
            feats = {k: tuple(v) for k, v in d["features"].items()}
            inv.devices[d["id"]] = Device(d["id"], d["site"], d["owner"], Role(d["role"]),
                                          DeviceKind(d["kind"]), ports, feats)
            inv._index(ports)
        for link in doc["links"]:
            pl = PhysicalLink(link["id"], link["endpoint_a"], link["endpoint_b"],
                              LinkKind(link["kind"]))
            inv.links[pl.id] = pl
            inv._port_link[pl.a] = inv._port_link[pl.b] = pl.id
        return inv

    @classmethod
    def import_inventory(cls, text: str) -> "Inventory":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Inventory) and self.to_dict() == other.to_dict()

    def __deepcopy__(self, memo: dict) -> "Inventory":
        # Records are frozen and never mutated after registration, so a copy
        # of the registries is as good as a deep copy and far cheaper.
        clone = Inventory.__new__(Inventory)
        for name, registry in vars(self).items():
            setattr(clone, name, dict(registry))
        return clone

    # -- internals ----------------------------------------------------

    def _require_site(self, site: str) -> None:
        if site not in self.sites:
            raise NotFound(f"unknown site {site!r}")

    def _make_ports(self, node: str, specs: Iterable[PortLike]) -> tuple[Port, ...]:
        ports, seen = [], set()
        for raw in specs:
            spec = _coerce_spec(raw)
            if ":" in spec.name or not spec.name:
                raise ValidationError(f"bad port name {spec.name!r}")
            if spec.name in seen:
                raise DuplicateError(f"duplicate port name {spec.name!r} on {node}")
            seen.add(spec.name)
            cap = spec.capacity_gbps if spec.medium.digital else 0
            ports.append(Port(f"{node}:{spec.name}", node, spec.name, spec.medium, cap))
        return tuple(ports)

    def _index(self, ports: Iterable[Port]) -> None:
        for p in ports:
            self._ports[p.id] = p
