"""Tenants, test sessions and the engine that owns all mutable state.

Every mutation goes through :meth:`Engine.execute`, the single writer: it
takes the engine lock, snapshots state, runs the command and either commits
(notifying the journal hook) or restores the snapshot on any exception. That
is what makes provisioning all-or-nothing across VLAN, IPAM and port state.
"""

from __future__ import annotations

import copy
import ipaddress
import logging
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from otic._util import digest, natural_key
from otic.errors import (
    DuplicateError,
    LifecycleError,
    NotFound,
    PortConflict,
    ProvisionError,
    StillReferenced,
    ValidationError,
)
from otic.fabric import (
    FabricModel,
    Grant,
    PortConfig,
    PortMode,
    Router,
    RouterAttachment,
    VerificationReport,
    build_fabric,
    verify_intent,
    verify_isolation,
)
from otic.inventory import DeviceKind, Inventory, LinkKind, _coerce_spec
from otic.ipam import ROUTABLE_INTERFACES, AddressPlan, InterfaceKind, coerce_interface
from otic.topology import (
    IotProfile,
    LogicalTopology,
    Options,
    PlaneChecklist,
    SessionKind,
    VlanClass,
    compile_topology,
    match_iot_profile,
)
from otic.vlan import Plane, VlanAllocator

logger = logging.getLogger(__name__)

STATE_VERSION = 1
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


class SessionState(str, Enum):
    DRAFT = "draft"
    PROVISIONED = "provisioned"
    ACTIVE = "active"
    TORN_DOWN = "torn_down"
    FAILED = "failed"


LIVE_STATES = frozenset({SessionState.PROVISIONED, SessionState.ACTIVE, SessionState.FAILED})


@dataclass
class Tenant:
    id: str
    block: Optional[str] = None

    @property
    def name(self) -> str:
        return self.id


@dataclass
class Allocations:
    vids: dict = field(default_factory=dict)       # VlanClass -> vid
    subnets: dict = field(default_factory=dict)    # InterfaceKind -> IPv4Network
    ports: dict = field(default_factory=dict)      # switch port -> frozenset of vids

    def empty(self) -> bool:
        return not (self.vids or self.subnets or self.ports)

    def to_dict(self) -> dict:
        return {
            "vids": [{"interface": i.value, "plane": p.value if p else None, "vid": v}
                     for (i, p), v in sorted(self.vids.items(), key=lambda kv: kv[1])],
            "subnets": [{"interface": i.value, "subnet": str(n)}
                        for i, n in sorted(self.subnets.items(), key=lambda kv: kv[0].value)],
            "port_configs": [{"port": p, "vids": sorted(v)}
                             for p, v in sorted(self.ports.items(), key=lambda kv: natural_key(kv[0]))],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Allocations":
        vids = {(coerce_interface(d["interface"]), Plane(d["plane"]) if d["plane"] else None): d["vid"]
                for d in doc["vids"]}
        subnets = {coerce_interface(d["interface"]): ipaddress.IPv4Network(d["subnet"])
                   for d in doc["subnets"]}
        ports = {d["port"]: frozenset(d["vids"]) for d in doc["port_configs"]}
        return cls(vids, subnets, ports)


@dataclass
class Session:
    id: str
    kind: SessionKind
    tenants: tuple[str, ...]
    participants: tuple[str, ...]
    options: Options
    topology: LogicalTopology
    state: SessionState = SessionState.DRAFT
    allocations: Allocations = field(default_factory=Allocations)
    checklist: PlaneChecklist = field(default_factory=PlaneChecklist)
    iot_profile: Optional[IotProfile] = None
    report: Optional[VerificationReport] = None

    def to_dict(self) -> dict:
        return {
            "version": STATE_VERSION,
            "id": self.id,
            "kind": self.kind.value,
            "state": self.state.value,
            "tenants": list(self.tenants),
            "participants": list(self.participants),
            "options": self.options.to_dict(),
            "topology": self.topology.to_dict(),
            "allocations": self.allocations.to_dict(),
            "checklist": self.checklist.to_dict(),
            "iot_profile": self.iot_profile.to_dict() if self.iot_profile else None,
            "report": self.report.to_dict() if self.report else None,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Session":
        return cls(
            id=doc["id"],
            kind=SessionKind(doc["kind"]),
            tenants=tuple(doc["tenants"]),
            participants=tuple(doc["participants"]),
            options=Options.from_dict(doc["options"]),
            topology=LogicalTopology.from_dict(doc["topology"]),
            state=SessionState(doc["state"]),
            allocations=Allocations.from_dict(doc["allocations"]),
            checklist=PlaneChecklist.from_dict(doc["checklist"]),
            iot_profile=IotProfile.from_dict(doc["iot_profile"]) if doc["iot_profile"] else None,
            report=VerificationReport.from_dict(doc["report"]) if doc["report"] else None,
        )


def _spec_dict(spec) -> dict:
    s = _coerce_spec(spec)
    return {"name": s.name, "medium": s.medium.value, "capacity_gbps": s.capacity_gbps}


class Engine:
    """All facility state plus the operations that change it."""

    _STATE_ATTRS = ("inventory", "plan", "vlans", "tenants", "sessions", "claims",
                    "overrides", "grants")

    def __init__(self, on_commit: Optional[Callable[[str, dict, str], None]] = None):
        self.inventory = Inventory()
        self.plan: Optional[AddressPlan] = None
        self.vlans = VlanAllocator()
        self.tenants: dict[str, Tenant] = {}
        self.sessions: dict[str, Session] = {}
        # switch port -> session -> vids that session needs on it
        self.claims: dict[str, dict[str, frozenset]] = {}
        self.overrides: dict[str, PortConfig] = {}
        self.grants: dict[str, Grant] = {}
        self.on_commit = on_commit
        self.journal = None
        self._lock = threading.RLock()

    # -- transactional writer -----------------------------------------

    def execute(self, command: str, payload: Optional[Mapping] = None) -> Any:
        """Run one journaled command atomically."""
        payload = dict(payload or {})
        handler = self._handlers().get(command)
        if handler is None:
            raise ValidationError(f"unknown command {command!r}")
        with self._lock:
            saved = copy.deepcopy({a: getattr(self, a) for a in self._STATE_ATTRS})
            try:
                result = handler(**payload)
            except BaseException:
                for name, value in saved.items():
                    setattr(self, name, value)
                raise
            if self.on_commit is not None:
                self.on_commit(command, payload, self.state_hash())
            return result

    def _handlers(self) -> dict[str, Callable]:
        return {
            "init_plan": self._init_plan,
            "register_site": self._register_site,
            "register_switch": self._register_switch,
            "register_device": self._register_device,
            "add_link": self._add_link,
            "create_tenant": self._create_tenant,
            "delete_tenant": self._delete_tenant,
            "plan_session": self._plan_session,
            "provision": self._provision,
            "verify": self._verify,
            "teardown": self._teardown,
            "advance_plane": self._advance_plane,
            "override_port": self._override_port,
            "clear_override": self._clear_override,
        }

    # -- public API (thin wrappers over execute) -----------------------

    def init_plan(self, base_prefix: str) -> AddressPlan:
        return self.execute("init_plan", {"base_prefix": str(base_prefix)})

    def register_site(self, name: str, kind: str) -> str:
        return self.execute("register_site", {"name": name, "kind": _val(kind)})

    def register_switch(self, site: str, model: str, port_specs: Iterable = (),
                        clock_role: str = "none") -> str:
        return self.execute("register_switch", {
            "site": site, "model": model, "clock_role": _val(clock_role),
            "port_specs": [_spec_dict(s) for s in port_specs]})

    def register_device(self, site: str, owner: Optional[str], role: str, kind: str,
                        port_specs: Iterable = (), features: Optional[Mapping] = None) -> str:
        feats = {k: [v] if isinstance(v, (str, int)) else sorted(map(str, v))
                 for k, v in (features or {}).items()}
        return self.execute("register_device", {
            "site": site, "owner": owner, "role": _val(role), "kind": _val(kind),
            "port_specs": [_spec_dict(s) for s in port_specs], "features": feats})

    def add_link(self, port_a: str, port_b: str, kind: str) -> str:
        return self.execute("add_link", {"port_a": port_a, "port_b": port_b, "kind": _val(kind)})

    def create_tenant(self, name: str) -> Tenant:
        return self.execute("create_tenant", {"name": name})

    def delete_tenant(self, name: str) -> None:
        return self.execute("delete_tenant", {"name": name})

    def plan_session(self, kind: str, tenants: Sequence[str], participants: Sequence[str],
                     options: Optional[Mapping | Options] = None) -> Session:
        if isinstance(options, Options):
            options = options.to_dict()
        return self.execute("plan_session", {
            "kind": _val(kind), "tenants": list(tenants), "participants": list(participants),
            "options": dict(options or {})})

    def provision(self, session_id: str) -> Session:
        return self.execute("provision", {"session_id": session_id})

    def verify(self, session_id: str) -> VerificationReport:
        return self.execute("verify", {"session_id": session_id})

    def teardown(self, session_id: str) -> Session:
        return self.execute("teardown", {"session_id": session_id})

    def advance_plane(self, session_id: str, plane: str, result: str) -> PlaneChecklist:
        return self.execute("advance_plane", {"session_id": session_id, "plane": _val(plane),
                                              "result": _val(result)})

    def override_port(self, port: str, mode: str, vids: Iterable[int] = ()) -> PortConfig:
        """Force a switch port config, bypassing session bookkeeping."""
        return self.execute("override_port", {"port": port, "mode": _val(mode),
                                              "vids": sorted(vids)})

    def clear_override(self, port: str) -> None:
        return self.execute("clear_override", {"port": port})

    # -- queries ------------------------------------------------------

    @property
    def lock(self) -> threading.RLock:
        return self._lock

    def session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFound(f"unknown session {session_id!r}") from None

    def tenant(self, name: str) -> Tenant:
        try:
            return self.tenants[name]
        except KeyError:
            raise NotFound(f"unknown tenant {name!r}") from None

    def active_sessions(self, tenant: Optional[str] = None) -> list[Session]:
        return [s for s in self.sessions.values()
                if s.state in LIVE_STATES and (tenant is None or tenant in s.tenants)]

    def ownership(self) -> dict[str, Optional[str]]:
        return {d.id: d.owner for d in self.inventory.devices.values()}

    def effective_port_configs(self) -> list[PortConfig]:
        """Config for every switch port; unclaimed ports are shut down."""
        out = []
        for sw_id in sorted(self.inventory.switches, key=natural_key):
            for port in self.inventory.switches[sw_id].ports:
                out.append(self._port_config(port.id))
        return out

    def _port_config(self, port_id: str) -> PortConfig:
        if port_id in self.overrides:
            return self.overrides[port_id]
        link = self.inventory.link_of(port_id)
        vids = frozenset().union(*self.claims.get(port_id, {}).values())
        if not vids or not self.inventory.port(port_id).medium.digital:
            return PortConfig.shutdown(port_id, oob=bool(link and link.kind is LinkKind.OOB))
        if link is not None and link.kind is LinkKind.ACCESS and len(vids) == 1:
            return PortConfig.access(port_id, next(iter(vids)))
        return PortConfig.trunk(port_id, vids)

    def router(self) -> Router:
        if self.plan is None:
            return Router()
        plan = self.plan
        atts = []
        for name, net in plan.otic_nets.items():
            kind = "services" if name == "services" else "otic"
            atts.append(RouterAttachment(net, kind, frozenset(), name))
        for tb in plan.tenant_blocks():
            owner = frozenset({tb.tenant})
            atts.append(RouterAttachment(tb.block, "tenant", owner, f"{tb.tenant}"))
            for label, net in tb.carved.items():
                atts.append(RouterAttachment(net, "tenant", owner, f"{tb.tenant}/{label}"))
        unroutable = []
        for iface, net in plan.data_nets.items():
            if iface not in ROUTABLE_INTERFACES:
                unroutable.append(net)
                continue
            atts.append(RouterAttachment(net, "data", frozenset(), iface.value))
            shared_tenants = frozenset().union(*(
                g.tenants for g in self.grants.values() if plan.shared_subnet(iface) in g.subnets))
            if shared_tenants:
                atts.append(RouterAttachment(plan.shared_subnet(iface), "data", shared_tenants,
                                             f"{iface.value}/shared"))
        for s in self.active_sessions():
            for iface, net in s.allocations.subnets.items():
                if iface in ROUTABLE_INTERFACES:
                    atts.append(RouterAttachment(net, "data", frozenset(s.tenants),
                                                 f"{iface.value}/{s.id}"))
        return Router(tuple(atts), tuple(unroutable))

    def fabric(self) -> FabricModel:
        return build_fabric(self.inventory, self.effective_port_configs(), self.router(),
                            active_vids=self.vlans.active.keys())

    def check_fabric(self) -> VerificationReport:
        """Intent for every live session plus facility-wide isolation."""
        fab = self.fabric()
        report = VerificationReport()
        for s in sorted(self.active_sessions(), key=lambda s: natural_key(s.id)):
            report = report.merge(verify_intent(fab, s.topology, s.allocations.vids))
        return report.merge(verify_isolation(fab, self.ownership(), self.grants.values()))

    # -- state documents ----------------------------------------------

    def state_document(self) -> dict:
        return {
            "version": STATE_VERSION,
            "inventory": self.inventory.to_dict(),
            "plan": self.plan.to_dict() if self.plan else None,
            "vlans": self.vlans.to_dict(),
            "tenants": [{"id": t.id, "block": t.block}
                        for t in sorted(self.tenants.values(), key=lambda t: t.id)],
            "sessions": [self.sessions[k].to_dict() for k in sorted(self.sessions, key=natural_key)],
            "claims": {p: {s: sorted(v) for s, v in sorted(c.items())}
                       for p, c in sorted(self.claims.items())},
            "overrides": [c.to_dict() for _, c in sorted(self.overrides.items())],
            "grants": [g.to_dict() for _, g in sorted(self.grants.items())],
        }

    @classmethod
    def from_state_document(cls, doc: Mapping, **kwargs) -> "Engine":
        if doc.get("version") != STATE_VERSION:
            raise ValidationError(f"unsupported state version {doc.get('version')!r}")
        eng = cls(**kwargs)
        eng.inventory = Inventory.from_dict(doc["inventory"])
        eng.plan = AddressPlan.from_dict(doc["plan"]) if doc["plan"] else None
        eng.vlans = VlanAllocator.from_dict(doc["vlans"])
        eng.tenants = {t["id"]: Tenant(t["id"], t["block"]) for t in doc["tenants"]}
        eng.sessions = {d["id"]: Session.from_dict(d) for d in doc["sessions"]}
        eng.claims = {p: {s: frozenset(v) for s, v in c.items()} for p, c in doc["claims"].items()}
        eng.overrides = {d["port"]: PortConfig.from_dict(d) for d in doc["overrides"]}
        eng.grants = {g["session"]: Grant.from_dict(g) for g in doc["grants"]}
        return eng

    def state_hash(self) -> str:
        return digest(self.state_document())

    def allocator_fingerprint(self) -> str:
        """Hash of every pool and claim table, ignoring session history."""
        doc = self.state_document()
        return digest({k: doc[k] for k in ("plan", "vlans", "claims", "overrides", "grants")})

    # -- command handlers ---------------------------------------------

    def _init_plan(self, base_prefix: str) -> AddressPlan:
        if self.plan is not None:
            raise DuplicateError(f"address plan already initialized ({self.plan.base})")
        self.plan = AddressPlan(base_prefix)
        return self.plan

    def _register_site(self, name: str, kind: str) -> str:
        return self.inventory.register_site(name, kind)

    def _register_switch(self, site, model, port_specs, clock_role) -> str:
        return self.inventory.register_switch(site, model, port_specs, clock_role)

    def _register_device(self, site, owner, role, kind, port_specs, features) -> str:
        if owner is not None:
            self.tenant(owner)
        return self.inventory.register_device(site, owner, role, kind, port_specs, features)

    def _add_link(self, port_a, port_b, kind) -> str:
        return self.inventory.add_link(port_a, port_b, kind)

    def _create_tenant(self, name: str) -> Tenant:
        if not _NAME_RE.match(name or ""):
            raise ValidationError(f"bad tenant name {name!r}")
        if self.plan is None:
            raise LifecycleError("initialize the address plan first")
        if name in self.tenants:
            raise DuplicateError(f"tenant {name!r} exists")
        block = self.plan.allocate_tenant_block(name)
        self.plan.carve_tenant_subnets(block)
        tenant = Tenant(name, str(block))
        self.tenants[name] = tenant
        return tenant

    def _delete_tenant(self, name: str) -> None:
        self.tenant(name)
        if self.active_sessions(name):
            raise StillReferenced(f"tenant {name!r} has live sessions")
        owned = [d.id for d in self.inventory.devices.values() if d.owner == name]
        if owned:
            raise StillReferenced(f"tenant {name!r} still owns {', '.join(owned)}")
        for s in self.sessions.values():
            if name in s.tenants and s.state is SessionState.DRAFT:
                s.state = SessionState.TORN_DOWN
        self.plan.release(self.tenants[name].block, holder=name)
        del self.tenants[name]

    def _plan_session(self, kind, tenants, participants, options) -> Session:
        kind = SessionKind(kind)
        opts = Options.from_dict(options)
        if not tenants:
            raise ValidationError("a session needs at least one tenant")
        for t in tenants:
            self.tenant(t)
        for dev_id in participants:
            dev = self.inventory.device(dev_id)
            if dev.owner is not None and dev.owner not in tenants:
                raise ValidationError(f"{dev_id} belongs to {dev.owner!r}, not to this session")
        topology = compile_topology(self.inventory, kind, participants, opts)
        profile = None
        if kind is SessionKind.WG4_IOT:
            by_kind = {self.inventory.device(d).kind: self.inventory.device(d) for d in participants}
            profile = match_iot_profile(by_kind[DeviceKind.DU].features,
                                        by_kind[DeviceKind.RU].features)
        sid = f"s{len(self.sessions) + 1}"
        session = Session(sid, kind, tuple(sorted(set(tenants))), tuple(participants), opts,
                          topology, iot_profile=profile)
        self.sessions[sid] = session
        return session

    def _provision(self, session_id: str) -> Session:
        s = self.session(session_id)
        if s.state in LIVE_STATES:
            return s
        if s.state is not SessionState.DRAFT:
            raise LifecycleError(f"{session_id} is {s.state.value}")
        busy = {d: o.id for o in self.active_sessions() for d in o.participants}
        clash = sorted(d for d in s.participants if d in busy)
        if clash:
            raise PortConflict(f"{', '.join(clash)} already claimed by {busy[clash[0]]}")
        alloc = Allocations()
        for iface, plane in s.topology.vlan_classes():
            alloc.vids[(iface, plane)] = self.vlans.allocate_vid(iface, s.id, plane)
        for iface in s.topology.l3_interfaces():
            alloc.subnets[iface] = self.plan_required().allocate_test_subnet(iface, s.id)

        needs: dict[str, set] = {}
        impaired = {imp.edge: imp.device for imp in s.topology.impairments if imp.device}
        for edge in s.topology.digital_edges:
            vids = {alloc.vids[c] for c in s.topology.edge_classes(edge)}
            ends = [edge.a, edge.b]
            if edge in impaired:
                att = self.inventory.attachment(impaired[edge])
                if att is None:
                    raise ProvisionError(f"{impaired[edge]} is not attached to a switch")
                ends.append(att[0])
            switch_ports = []
            for dp in ends:
                sp = self.inventory.attached_switch_port(dp)
                if sp is None:
                    raise ProvisionError(f"{dp} is not attached to a switch")
                switch_ports.append(sp)
                needs.setdefault(sp, set()).update(vids)
            root = self.inventory.port(switch_ports[0]).node
            for sp in switch_ports[1:]:
                for trunk_port in self._trunk_path(root, self.inventory.port(sp).node):
                    needs.setdefault(trunk_port, set()).update(vids)

        for port_id, vids in needs.items():
            frozen = frozenset(vids)
            self.claims.setdefault(port_id, {})[s.id] = frozen
            for v in frozen:
                self.vlans.hold(v)
            alloc.ports[port_id] = frozen

        if len(s.tenants) > 1 or s.options.shared:
            subnets = set(alloc.subnets.values())
            if s.options.shared:
                subnets |= {self.plan_required().shared_subnet(i) for i in alloc.subnets}
            self.grants[s.id] = Grant(s.id, frozenset(s.tenants), frozenset(alloc.vids.values()),
                                      frozenset(subnets))
        s.allocations = alloc
        s.state = SessionState.PROVISIONED
        logger.info("provisioned %s: vids=%s", s.id, sorted(alloc.vids.values()))
        return s

    def _trunk_path(self, src: str, dst: str) -> list[str]:
        """Switch ports along the shortest trunk path; ties go to the lowest link id."""
        if src == dst:
            return []
        adj: dict[str, list] = {}
        for lid in sorted(self.inventory.links, key=natural_key):
            link = self.inventory.links[lid]
            if link.kind is not LinkKind.TRUNK:
                continue
            na, nb = self.inventory.port(link.a).node, self.inventory.port(link.b).node
            adj.setdefault(na, []).append((nb, link.a, link.b))
            adj.setdefault(nb, []).append((na, link.b, link.a))
        prev: dict[str, tuple] = {src: None}
        queue = deque([src])
        while queue:
            node = queue.popleft()
            if node == dst:
                break
            for nxt, here, there in adj.get(node, []):
                if nxt not in prev:
                    prev[nxt] = (node, here, there)
                    queue.append(nxt)
        if dst not in prev:
            raise ProvisionError(f"no trunk path between {src} and {dst}")
        ports, node = [], dst
        while prev[node] is not None:
            parent, here, there = prev[node]
            ports += [here, there]
            node = parent
        return ports

    def _verify(self, session_id: str) -> VerificationReport:
        s = self.session(session_id)
        if s.state not in LIVE_STATES:
            raise LifecycleError(f"{session_id} is {s.state.value}; provision it first")
        fab = self.fabric()
        report = verify_intent(fab, s.topology, s.allocations.vids)
        report = report.merge(verify_isolation(fab, self.ownership(), self.grants.values()))
        s.report = report
        s.state = SessionState.ACTIVE if report.passed else SessionState.FAILED
        return report

    def _teardown(self, session_id: str) -> Session:
        s = self.session(session_id)
        if s.state not in LIVE_STATES:
            raise LifecycleError(f"{session_id} is {s.state.value}")
        for port_id in sorted(s.allocations.ports):
            for v in self.claims[port_id].pop(s.id):
                self.vlans.unhold(v)
            if not self.claims[port_id]:
                del self.claims[port_id]
            if port_id in self.overrides:
                self._clear_override(port_id)
        for vid in sorted(s.allocations.vids.values()):
            self.vlans.release_vid(vid)
        for net in s.allocations.subnets.values():
            self.plan_required().release(net, holder=s.id)
        self.grants.pop(s.id, None)
        s.allocations = Allocations()
        s.state = SessionState.TORN_DOWN
        return s

    def _advance_plane(self, session_id: str, plane: str, result: str) -> PlaneChecklist:
        s = self.session(session_id)
        if s.state not in (SessionState.PROVISIONED, SessionState.ACTIVE):
            raise LifecycleError(f"{session_id} is {s.state.value}")
        return s.checklist.advance(plane, result)

    def _override_port(self, port: str, mode: str, vids: list) -> PortConfig:
        if not self.inventory.is_switch_port(port):
            raise ValidationError(f"{port} is not a switch port")
        mode = PortMode(mode)
        if mode is PortMode.ACCESS and len(vids) != 1:
            raise ValidationError("access mode takes exactly one VID")
        cfg = {PortMode.SHUTDOWN: lambda: PortConfig.shutdown(port),
               PortMode.TRUNK: lambda: PortConfig.trunk(port, vids),
               PortMode.ACCESS: lambda: PortConfig.access(port, *vids)}[mode]()
        if port in self.overrides:
            self._clear_override(port)
        for v in cfg.vids:
            self.vlans.hold(v)
        self.overrides[port] = cfg
        return cfg

    def _clear_override(self, port: str) -> None:
        cfg = self.overrides.pop(port, None)
        if cfg is None:
            raise NotFound(f"no override on {port}")
        for v in cfg.vids:
            self.vlans.unhold(v)

    def plan_required(self) -> AddressPlan:
        if self.plan is None:
            raise LifecycleError("initialize the address plan first")
        return self.plan


def _val(x) -> Any:
    return x.value if isinstance(x, Enum) else x
