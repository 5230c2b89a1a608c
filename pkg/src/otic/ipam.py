"""Address plan for a facility /16.

Layout of ``X.Y.0.0/16``:

    X.Y.0.0/24    OOB           routable
    X.Y.1.0/24    management    routable
    X.Y.2.0/24    services      routable
    X.Y.4-100.0   tenant /24s   routable, first-fit by third octet
    X.Y.101.0/24  F1            not routed
    X.Y.102.0/24  NG            not routed
    X.Y.103.0/24  O1            not routed
    X.Y.104.0/24  E1            not routed
    X.Y.105.0/24  OFH M-plane   routable
    X.Y.106.0/24  X2            not routed (extension)
    X.Y.107.0/24  Xn            not routed (extension)

OFH CU-plane is L2 only and has no subnet. Inside every tenant /24 the
management /26 sits at .0, OOB /27 at .128 and VPN /29 at .160. Inside every
data /24 the shared /26 sits at .0 and per-test /29s are handed out first-fit
from .64 upwards.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Union

from otic._util import digest
from otic.errors import (
    DuplicateError,
    L2OnlyInterface,
    NotFound,
    PoolExhausted,
    StillReferenced,
    ValidationError,
)

IPv4Network = ipaddress.IPv4Network
PLAN_VERSION = 1


class InterfaceKind(str, Enum):
    F1 = "F1"
    NG = "NG"
    O1 = "O1"
    E1 = "E1"
    OFH_M = "OFH_M"
    OFH_CU = "OFH_CU"
    UU_ANALOG = "Uu_analog"
    X2 = "X2"
    XN = "Xn"

    @property
    def has_subnet(self) -> bool:
        return self in DATA_NET_OCTETS

    @property
    def vlan_capable(self) -> bool:
        return self is not InterfaceKind.UU_ANALOG


OTIC_NET_OCTETS = {"oob": 0, "management": 1, "services": 2}
TENANT_OCTETS = range(4, 101)
DATA_NET_OCTETS = {
    InterfaceKind.F1: 101,
    InterfaceKind.NG: 102,
    InterfaceKind.O1: 103,
    InterfaceKind.E1: 104,
    InterfaceKind.OFH_M: 105,
    InterfaceKind.X2: 106,
    InterfaceKind.XN: 107,
}
ROUTABLE_INTERFACES = frozenset({InterfaceKind.OFH_M})

# name -> (offset within the /24, prefix length)
TENANT_CARVING = {"management": (0, 26), "oob": (128, 27), "vpn": (160, 29)}
SHARED_PREFIX = 26
TEST_PREFIX = 29
TEST_OFFSETS = range(64, 256, 8)


def _net(text: Union[str, IPv4Network]) -> IPv4Network:
    try:
        return ipaddress.IPv4Network(text)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


@dataclass
class TenantBlock:
    tenant: str
    block: IPv4Network
    carved: dict[str, IPv4Network] = field(default_factory=dict)
    custom: dict[int, int] = field(default_factory=dict)  # offset -> prefixlen

    def subnets(self) -> list[IPv4Network]:
        extra = [_sub(self.block, off, plen) for off, plen in sorted(self.custom.items())]
        return list(self.carved.values()) + extra

    def to_dict(self) -> dict:
        return {
            "tenant": self.tenant,
            "block": str(self.block),
            "carved": {k: str(v) for k, v in self.carved.items()},
            "custom": [str(_sub(self.block, o, p)) for o, p in sorted(self.custom.items())],
        }


def _sub(parent: IPv4Network, offset: int, prefixlen: int) -> IPv4Network:
    return ipaddress.IPv4Network((int(parent.network_address) + offset, prefixlen))


def coerce_interface(value: Union[str, InterfaceKind]) -> InterfaceKind:
    if isinstance(value, InterfaceKind):
        return value
    for kind in InterfaceKind:
        if value in (kind.value, kind.name) or value.lower() == kind.value.lower():
            return kind
    raise ValidationError(f"unknown interface {value!r}")


class AddressPlan:
    """Stateful allocator over the /16 layout described in the module doc."""

    def __init__(self, base_prefix: Union[str, IPv4Network]):
        base = _net(base_prefix)
        if base.prefixlen != 16:
            raise ValidationError(f"{base} is not a /16")
        self.base = base
        self._blocks: dict[int, TenantBlock] = {}
        self._tests: dict[InterfaceKind, dict[int, str]] = {k: {} for k in DATA_NET_OCTETS}

    # -- fixed layout -------------------------------------------------

    def _octet(self, octet: int) -> IPv4Network:
        return _sub(self.base, octet << 8, 24)

    @property
    def otic_nets(self) -> dict[str, IPv4Network]:
        return {name: self._octet(o) for name, o in OTIC_NET_OCTETS.items()}

    @property
    def data_nets(self) -> dict[InterfaceKind, IPv4Network]:
        return {k: self._octet(o) for k, o in DATA_NET_OCTETS.items()}

    def data_net(self, interface: Union[str, InterfaceKind]) -> IPv4Network:
        kind = coerce_interface(interface)
        if not kind.has_subnet:
            raise L2OnlyInterface(f"{kind.value} has no subnet")
        return self._octet(DATA_NET_OCTETS[kind])

    def shared_subnet(self, interface: Union[str, InterfaceKind]) -> IPv4Network:
        return _sub(self.data_net(interface), 0, SHARED_PREFIX)

    # -- tenant pool --------------------------------------------------

    def tenant_block(self, tenant: str) -> Optional[TenantBlock]:
        for tb in self._blocks.values():
            if tb.tenant == tenant:
                return tb
        return None

    def tenant_blocks(self) -> list[TenantBlock]:
        return [self._blocks[o] for o in sorted(self._blocks)]

    def allocate_tenant_block(self, tenant: str) -> IPv4Network:
        if self.tenant_block(tenant) is not None:
            raise DuplicateError(f"tenant {tenant!r} already holds a block")
        free = [o for o in TENANT_OCTETS if o not in self._blocks]
        if not free:
            raise PoolExhausted(f"tenant pool exhausted ({len(TENANT_OCTETS)} blocks)")
        octet = free[0]
        self._blocks[octet] = TenantBlock(tenant, self._octet(octet))
        return self._blocks[octet].block

    def carve_tenant_subnets(self, block: Union[str, IPv4Network]) -> TenantBlock:
        tb = self._block_for(_net(block))
        if tb.carved:
            raise DuplicateError(f"{tb.block} already carved")
        tb.carved = {name: _sub(tb.block, off, plen)
                     for name, (off, plen) in TENANT_CARVING.items()}
        return tb

    def allocate_tenant_subnet(self, tenant: str, prefixlen: int) -> IPv4Network:
        """First-fit a custom subnet from the uncarved space of a tenant /24."""
        tb = self.tenant_block(tenant)
        if tb is None:
            raise NotFound(f"tenant {tenant!r} holds no block")
        if not 24 < prefixlen <= 30:
            raise ValidationError("custom tenant subnets must be /25../30")
        size = 1 << (32 - prefixlen)
        taken = [(o, o + (1 << (32 - p))) for o, p in tb.custom.items()]
        taken += [(o, o + (1 << (32 - p))) for o, p in TENANT_CARVING.values()] if tb.carved else []
        for off in range(0, 256, size):
            if all(off + size <= lo or off >= hi for lo, hi in taken):
                tb.custom[off] = prefixlen
                return _sub(tb.block, off, prefixlen)
        raise PoolExhausted(f"no free /{prefixlen} left in {tb.block}")

    # -- data nets ----------------------------------------------------

    def allocate_test_subnet(self, interface: Union[str, InterfaceKind], session: str) -> IPv4Network:
        kind = coerce_interface(interface)
        net = self.data_net(kind)
        used = self._tests[kind]
        for off in TEST_OFFSETS:
            if off not in used:
                used[off] = session
                return _sub(net, off, TEST_PREFIX)
        raise PoolExhausted(f"no free /{TEST_PREFIX} left in {kind.value} data net")

    def test_allocations(self) -> list[tuple[InterfaceKind, IPv4Network, str]]:
        out = []
        for kind, used in self._tests.items():
            net = self.data_net(kind)
            out += [(kind, _sub(net, off, TEST_PREFIX), s) for off, s in sorted(used.items())]
        return out

    # -- release ------------------------------------------------------

    def release(self, subnet: Union[str, IPv4Network], holder: Optional[str] = None) -> None:
        """Return an allocation to its pool.

        ``holder`` must name the session (for test /29s) or tenant (for
        tenant blocks and custom subnets) that owns it.
        """
        net = _net(subnet)
        for kind, dnet in self.data_nets.items():
            if net.prefixlen == TEST_PREFIX and net.subnet_of(dnet):
                off = int(net.network_address) - int(dnet.network_address)
                owner = self._tests[kind].get(off)
                if owner is None:
                    raise NotFound(f"{net} is not allocated")
                if owner != holder:
                    raise StillReferenced(f"{net} is held by session {owner!r}")
                del self._tests[kind][off]
                return
        for octet, tb in self._blocks.items():
            if net == tb.block:
                if tb.tenant != holder:
                    raise StillReferenced(f"{net} is held by tenant {tb.tenant!r}")
                del self._blocks[octet]
                return
            if net.subnet_of(tb.block):
                off = int(net.network_address) - int(tb.block.network_address)
                if tb.custom.get(off) != net.prefixlen:
                    break
                if tb.tenant != holder:
                    raise StillReferenced(f"{net} is held by tenant {tb.tenant!r}")
                del tb.custom[off]
                return
        raise NotFound(f"{net} is not an allocation")

    # -- routability --------------------------------------------------

    def is_routable(self, target: Union[str, InterfaceKind, IPv4Network]) -> bool:
        if isinstance(target, InterfaceKind) or (isinstance(target, str) and "/" not in target):
            kind = coerce_interface(target)
            return kind in ROUTABLE_INTERFACES
        net = _net(target)
        for onet in self.otic_nets.values():
            if net.subnet_of(onet):
                return True
        for kind, dnet in self.data_nets.items():
            if net.subnet_of(dnet):
                return kind in ROUTABLE_INTERFACES
        for tb in self._blocks.values():
            if net.subnet_of(tb.block):
                return True
        raise NotFound(f"{net} is not part of the plan")

    # -- introspection ------------------------------------------------

    def allocated_subnets(self) -> list[IPv4Network]:
        """Every subnet currently handed out (tenant blocks plus test /29s)."""
        nets = [tb.block for tb in self.tenant_blocks()]
        nets += [net for _, net, _ in self.test_allocations()]
        return nets

    def free_space(self) -> dict[str, int]:
        """Free address count per pool."""
        out = {"tenant_pool": 256 * (len(TENANT_OCTETS) - len(self._blocks))}
        for kind, used in self._tests.items():
            out[kind.value] = 8 * (len(TEST_OFFSETS) - len(used))
        return out

    def fingerprint(self) -> str:
        return digest(self.to_dict())

    def to_dict(self) -> dict:
        fixed = [{"name": n, "subnet": str(s), "routable": True}
                 for n, s in self.otic_nets.items()]
        data = []
        for kind, net in self.data_nets.items():
            data.append({
                "interface": kind.value,
                "subnet": str(net),
                "routable": kind in ROUTABLE_INTERFACES,
                "shared": str(self.shared_subnet(kind)),
                "test_blocks": [{"subnet": str(_sub(net, off, TEST_PREFIX)), "session": s}
                                for off, s in sorted(self._tests[kind].items())],
            })
        return {
            "version": PLAN_VERSION,
            "base_prefix": str(self.base),
            "fixed_nets": fixed,
            "l2_only": [InterfaceKind.OFH_CU.value],
            "tenant_blocks": [tb.to_dict() for tb in self.tenant_blocks()],
            "data_net_allocations": data,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "AddressPlan":
        if doc.get("version") != PLAN_VERSION:
            raise ValidationError(f"unsupported plan version {doc.get('version')!r}")
        plan = cls(doc["base_prefix"])
        for t in doc["tenant_blocks"]:
            block = _net(t["block"])
            tb = TenantBlock(t["tenant"], block)
            tb.carved = {k: _net(v) for k, v in t["carved"].items()}
            for c in t["custom"]:
                net = _net(c)
                tb.custom[int(net.network_address) - int(block.network_address)] = net.prefixlen
            plan._blocks[(int(block.network_address) >> 8) & 0xFF] = tb
        for d in doc["data_net_allocations"]:
            kind = coerce_interface(d["interface"])
            base = int(plan.data_net(kind).network_address)
            for tb in d["test_blocks"]:
                off = int(_net(tb["subnet"]).network_address) - base
                plan._tests[kind][off] = tb["session"]
        return plan

    def _block_for(self, net: IPv4Network) -> TenantBlock:
        for tb in self._blocks.values():
            if tb.block == net:
                return tb
        raise NotFound(f"{net} is not an allocated tenant block")


def init_plan(base_prefix: Union[str, IPv4Network]) -> AddressPlan:
    return AddressPlan(base_prefix)
