"""Static model of the switched fabric.

Reachability is plain graph connectivity per VID: no MAC learning, no
flooding, no spanning tree. Inside a switch every non-shutdown port that
admits a VID shares that VID's segment; a trunk link carries the VID iff both
of its ends admit it; a device port joins the segment of the switch port its
access link lands on. Analog and OOB links never take part.

L3 is one logical router. Only routable subnets attach to it, and a policy
decides which attached pairs may talk: a tenant reaches its own subnets and
the OTIC services net, OTIC internal nets reach each other, and nothing
else unless an explicit route leak is configured.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Mapping, Optional, Union

from otic._util import natural_key
from otic.errors import NotFound, UnknownOwner, ValidationError
from otic.inventory import Inventory, LinkKind
from otic.topology import LogicalTopology, VlanClass

IPv4Network = ipaddress.IPv4Network


class PortMode(str, Enum):
    ACCESS = "access"
    TRUNK = "trunk"
    SHUTDOWN = "shutdown"


@dataclass(frozen=True)
class PortConfig:
    port: str
    mode: PortMode
    vids: frozenset = frozenset()
    oob: bool = False

    @classmethod
    def access(cls, port: str, vid: int) -> "PortConfig":
        return cls(port, PortMode.ACCESS, frozenset({vid}))

    @classmethod
    def trunk(cls, port: str, vids: Iterable[int]) -> "PortConfig":
        return cls(port, PortMode.TRUNK, frozenset(vids))

    @classmethod
    def shutdown(cls, port: str, oob: bool = False) -> "PortConfig":
        return cls(port, PortMode.SHUTDOWN, frozenset(), oob)

    def admits(self, vid: int) -> bool:
        return self.mode is not PortMode.SHUTDOWN and vid in self.vids

    def to_dict(self) -> dict:
        return {"port": self.port, "mode": self.mode.value, "vids": sorted(self.vids),
                "oob": self.oob}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PortConfig":
        return cls(doc["port"], PortMode(doc["mode"]), frozenset(doc["vids"]),
                   doc.get("oob", False))


@dataclass(frozen=True)
class RouterAttachment:
    subnet: IPv4Network
    kind: str  # otic | services | tenant | data
    tenants: frozenset = frozenset()
    label: str = ""
    routable: bool = True


@dataclass(frozen=True)
class Router:
    attachments: tuple[RouterAttachment, ...] = ()
    unroutable: tuple[IPv4Network, ...] = ()
    leaks: frozenset = frozenset()  # frozensets of two subnets routed despite policy


@dataclass(frozen=True)
class Grant:
    """Session-scoped permission for several tenants to share VIDs/subnets."""

    session: str
    tenants: frozenset
    vids: frozenset = frozenset()
    subnets: frozenset = frozenset()

    def covers_vid(self, vid: int, a: str, b: str) -> bool:
        return vid in self.vids and {a, b} <= self.tenants

    def covers_subnet(self, net_a: IPv4Network, net_b: IPv4Network, a: str, b: str) -> bool:
        hit = any(net_a.subnet_of(s) or net_b.subnet_of(s) for s in self.subnets)
        return hit and {a, b} <= self.tenants

    def to_dict(self) -> dict:
        return {"session": self.session, "tenants": sorted(self.tenants),
                "vids": sorted(self.vids), "subnets": sorted(str(s) for s in self.subnets)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Grant":
        return cls(doc["session"], frozenset(doc["tenants"]), frozenset(doc["vids"]),
                   frozenset(IPv4Network(s) for s in doc["subnets"]))


@dataclass(frozen=True)
class EdgeResult:
    kind: str  # digital | analog
    a: str
    b: str
    label: str
    vids: tuple[int, ...]
    passed: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "label": self.label,
                "vids": list(self.vids), "passed": self.passed, "reason": self.reason}


@dataclass(frozen=True)
class Violation:
    tenant_a: str
    endpoint_a: str
    tenant_b: str
    endpoint_b: str
    vid: Optional[int] = None
    l3_path: Optional[tuple[str, str]] = None

    def to_dict(self) -> dict:
        return {"tenant_a": self.tenant_a, "endpoint_a": self.endpoint_a,
                "tenant_b": self.tenant_b, "endpoint_b": self.endpoint_b,
                "vid": self.vid, "l3_path": list(self.l3_path) if self.l3_path else None}


@dataclass(frozen=True)
class VerificationReport:
    intent_results: tuple[EdgeResult, ...] = ()
    isolation_violations: tuple[Violation, ...] = ()

    @property
    def intent_passed(self) -> bool:
        return all(r.passed for r in self.intent_results)

    @property
    def isolated(self) -> bool:
        return not self.isolation_violations

    @property
    def passed(self) -> bool:
        return self.intent_passed and self.isolated

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(self.intent_results + other.intent_results,
                                  self.isolation_violations + other.isolation_violations)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "passed": self.passed,
            "intent_results": [r.to_dict() for r in self.intent_results],
            "isolation_violations": [v.to_dict() for v in self.isolation_violations],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "VerificationReport":
        res = tuple(EdgeResult(d["kind"], d["a"], d["b"], d["label"], tuple(d["vids"]),
                               d["passed"], d["reason"]) for d in doc["intent_results"])
        vio = tuple(Violation(d["tenant_a"], d["endpoint_a"], d["tenant_b"], d["endpoint_b"],
                              d["vid"], tuple(d["l3_path"]) if d["l3_path"] else None)
                    for d in doc["isolation_violations"])
        return cls(res, vio)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class FabricModel:
    inventory: Inventory
    configs: Mapping[str, PortConfig]
    router: Router = Router()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def config(self, switch_port: str) -> Optional[PortConfig]:
        return self.configs.get(switch_port)

    def active_vids(self) -> list[int]:
        return sorted({v for c in self.configs.values()
                       if c.mode is not PortMode.SHUTDOWN for v in c.vids})

    def _segment_port(self, port_id: str) -> Optional[str]:
        """Switch port whose config governs ``port_id`` (None if unattached)."""
        inv = self.inventory
        if inv.is_switch_port(port_id):
            return port_id
        return inv.attached_switch_port(port_id)

    def components(self, vid: int) -> dict[str, str]:
        """Map every switch port admitting ``vid`` to its segment root."""
        if vid in self._cache:
            return self._cache[vid]
        uf = _UnionFind()
        per_switch: dict[str, str] = {}
        for pid in sorted(self.configs):
            if not self.configs[pid].admits(vid):
                continue
            uf.find(pid)
            node = self.inventory.port(pid).node
            if node in per_switch:
                uf.union(per_switch[node], pid)
            else:
                per_switch[node] = pid
        for link in self.inventory.links.values():
            if link.kind is not LinkKind.TRUNK:
                continue
            ca, cb = self.configs.get(link.a), self.configs.get(link.b)
            if ca and cb and ca.admits(vid) and cb.admits(vid):
                uf.union(link.a, link.b)
        comps = {p: uf.find(p) for p in uf.parent}
        self._cache[vid] = comps
        return comps

    def segment_of(self, port_id: str, vid: int) -> Optional[str]:
        sp = self._segment_port(port_id)
        if sp is None:
            return None
        return self.components(vid).get(sp)

    def l2_reachable(self, port_a: str, port_b: str, vid: int) -> bool:
        for p in (port_a, port_b):
            self.inventory.port(p)  # raises NotFound
        sa, sb = self.segment_of(port_a, vid), self.segment_of(port_b, vid)
        return sa is not None and sa == sb

    # -- L3 -----------------------------------------------------------

    def _attachment(self, net: IPv4Network) -> Optional[RouterAttachment]:
        best = None
        for att in self.router.attachments:
            if net.subnet_of(att.subnet) and (best is None or att.subnet.prefixlen > best.subnet.prefixlen):
                best = att
        return best

    def _resolve(self, subnet: Union[str, IPv4Network]) -> Optional[RouterAttachment]:
        net = IPv4Network(subnet)
        att = self._attachment(net)
        if att is not None:
            return att
        if any(net.subnet_of(u) for u in self.router.unroutable):
            return None
        raise NotFound(f"{net} is unknown to the fabric")

    def l3_reachable(self, subnet_a: Union[str, IPv4Network], subnet_b: Union[str, IPv4Network]) -> bool:
        a, b = self._resolve(subnet_a), self._resolve(subnet_b)
        if a is None or b is None:
            return False
        return _routing_policy(a, b) or frozenset({a.subnet, b.subnet}) in self.router.leaks


def _routing_policy(a: RouterAttachment, b: RouterAttachment) -> bool:
    if a.subnet.overlaps(b.subnet):
        return True
    if "services" in (a.kind, b.kind):
        return True
    if not a.tenants and not b.tenants:
        return True
    if a.tenants and b.tenants:
        return bool(a.tenants & b.tenants)
    return False


def build_fabric(inventory: Inventory, port_configs: Iterable[PortConfig],
                 router: Optional[Router] = None,
                 active_vids: Optional[Iterable[int]] = None) -> FabricModel:
    """Validate switch port configs and freeze them into a model.

    ``active_vids`` (when given) is the set of allocated VIDs; configs naming
    any other VID are rejected.
    """
    active = set(active_vids) if active_vids is not None else None
    configs: dict[str, PortConfig] = {}
    for cfg in port_configs:
        if not inventory.has_port(cfg.port):
            raise NotFound(f"config references unknown port {cfg.port!r}")
        port = inventory.port(cfg.port)
        if not port.medium.digital:
            raise ValidationError(f"{cfg.port} is an analog port and takes no VLAN config")
        if not inventory.is_switch_port(cfg.port):
            raise ValidationError(f"{cfg.port} is not a switch port")
        if cfg.port in configs:
            raise ValidationError(f"two configs for {cfg.port}")
        if cfg.mode is PortMode.ACCESS and len(cfg.vids) != 1:
            raise ValidationError(f"access port {cfg.port} needs exactly one VID")
        if active is not None and not cfg.vids <= active:
            raise ValidationError(f"{cfg.port} references inactive VID(s) {sorted(cfg.vids - active)}")
        for vid in cfg.vids:
            if not 2 <= vid <= 4094:
                raise ValidationError(f"{cfg.port}: VID {vid} outside 2..4094")
        if cfg.mode is not PortMode.SHUTDOWN:
            configs[cfg.port] = cfg
    router = router or Router()
    for att in router.attachments:
        if not att.routable:
            raise ValidationError(f"{att.subnet} is not routable and cannot attach to the router")
    return FabricModel(inventory, configs, router)


def l2_reachable(fabric: FabricModel, port_a: str, port_b: str, vid: int) -> bool:
    return fabric.l2_reachable(port_a, port_b, vid)


def l3_reachable(fabric: FabricModel, subnet_a, subnet_b) -> bool:
    return fabric.l3_reachable(subnet_a, subnet_b)


def verify_intent(fabric: FabricModel, topology: LogicalTopology,
                  vlan_map: Mapping[VlanClass, int]) -> VerificationReport:
    """Check that every compiled edge is realized by the fabric."""
    impaired = {imp.edge: imp.device for imp in topology.impairments if imp.device}
    results = []
    for edge in topology.digital_edges:
        classes = topology.edge_classes(edge)
        missing = [c for c in classes if c not in vlan_map]
        if missing:
            raise ValidationError(f"no VID for {edge.interface.value} edge {edge.a}-{edge.b}")
        vids = tuple(vlan_map[c] for c in classes)
        bad = [v for v in vids if not fabric.l2_reachable(edge.a, edge.b, v)]
        reason = f"not L2-reachable on VID(s) {bad}" if bad else ""
        dev = impaired.get(edge)
        if not bad and dev:
            att = fabric.inventory.attachment(dev)
            if att is None or not all(fabric.l2_reachable(edge.a, att[0], v) for v in vids):
                reason = f"impairment emulator {dev} not in-line"
        results.append(EdgeResult("digital", edge.a, edge.b, edge.interface.value, vids,
                                  not reason, reason))
    for edge in topology.analog_edges:
        ok = fabric.inventory.analog_link_between(edge.a, edge.b) is not None
        results.append(EdgeResult("analog", edge.a, edge.b, edge.mode.value, (), ok,
                                  "" if ok else "no physical analog link"))
    return VerificationReport(tuple(results), ())


def verify_isolation(fabric: FabricModel, ownership: Mapping[str, Optional[str]],
                     shared_grants: Iterable[Grant] = ()) -> VerificationReport:
    """Find every tenant pair that can reach each other without a grant.

    ``ownership`` maps device id to tenant id (None for OTIC equipment).
    """
    grants = list(shared_grants)
    inv = fabric.inventory
    attached: list[tuple[str, str]] = []  # (device port, device id)
    for dev in sorted(inv.devices.values(), key=lambda d: natural_key(d.id)):
        for p in dev.ports:
            sp = inv.attached_switch_port(p.id)
            if sp is None or sp not in fabric.configs:
                continue
            if dev.id not in ownership:
                raise UnknownOwner(f"no owner recorded for {dev.id}")
            attached.append((p.id, dev.id))

    violations: list[Violation] = []
    for vid in fabric.active_vids():
        groups: dict[str, list[tuple[str, str, str]]] = {}
        for port_id, dev_id in attached:
            owner = ownership[dev_id]
            seg = fabric.segment_of(port_id, vid)
            if owner is not None and seg is not None:
                groups.setdefault(seg, []).append((owner, dev_id, port_id))
        for seg in sorted(groups):
            seen: set[frozenset] = set()
            for (ta, da, pa), (tb, db, pb) in combinations(groups[seg], 2):
                pair = frozenset({da, db})
                if ta == tb or pair in seen:
                    continue
                seen.add(pair)
                if not any(g.covers_vid(vid, ta, tb) for g in grants):
                    violations.append(Violation(ta, pa, tb, pb, vid=vid))

    atts = [a for a in fabric.router.attachments if a.tenants]
    for a, b in combinations(atts, 2):
        if a.tenants & b.tenants:
            continue
        if not fabric.l3_reachable(a.subnet, b.subnet):
            continue
        ta, tb = min(a.tenants), min(b.tenants)
        if any(g.covers_subnet(a.subnet, b.subnet, ta, tb) for g in grants):
            continue
        violations.append(Violation(ta, str(a.subnet), tb, str(b.subnet),
                                    l3_path=(str(a.subnet), str(b.subnet))))
    return VerificationReport((), tuple(violations))


def reachability_relation(fabric: FabricModel, ports: Iterable[str],
                          vids: Iterable[int]) -> frozenset:
    """All (port_a, port_b, vid) triples, a < b, that are L2-reachable."""
    ports = sorted(set(ports))
    out = set()
    for vid in vids:
        for a, b in combinations(ports, 2):
            if fabric.l2_reachable(a, b, vid):
                out.add((a, b, vid))
    return frozenset(out)
