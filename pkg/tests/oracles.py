"""Independent reference implementations used to check the engine.

Nothing here imports the code paths it checks: the L2 oracle walks an
explicit (port, vid) graph built straight from inventory links and raw
config tuples, and the IPAM oracles enumerate candidate subnets with
``ipaddress`` instead of doing offset arithmetic.
"""

from __future__ import annotations

import ipaddress
import random
from collections import deque
from contextlib import contextmanager
from itertools import combinations

from otic.inventory import Inventory, LinkKind, PortSpec
from otic.fabric import PortConfig, PortMode


# -- L2 ----------------------------------------------------------------------


def bfs_l2_reachable(inventory: Inventory, configs, port_a: str, port_b: str, vid: int) -> bool:
    """Brute-force BFS over the (port, vid)-expanded graph."""
    admit = {}
    for c in configs:
        admit[c.port] = c.mode != PortMode.SHUTDOWN and vid in c.vids
    switch_ports = {}
    for sw in inventory.switches.values():
        switch_ports[sw.id] = [p.id for p in sw.ports]
    adj: dict[tuple, set] = {}

    def connect(x, y):
        adj.setdefault((x, vid), set()).add((y, vid))
        adj.setdefault((y, vid), set()).add((x, vid))

    for ports in switch_ports.values():
        live = [p for p in ports if admit.get(p)]
        for x, y in combinations(live, 2):
            connect(x, y)
    for link in inventory.links.values():
        if link.kind == LinkKind.TRUNK and admit.get(link.a) and admit.get(link.b):
            connect(link.a, link.b)
        if link.kind == LinkKind.ACCESS:
            sw_end = link.a if _on_switch(inventory, link.a) else link.b
            dev_end = link.b if sw_end == link.a else link.a
            if admit.get(sw_end):
                connect(sw_end, dev_end)

    def usable(p):
        if _on_switch(inventory, p):
            return bool(admit.get(p))
        return (p, vid) in adj

    if not usable(port_a) or not usable(port_b):
        return False
    if port_a == port_b:
        return True
    seen = {(port_a, vid)}
    queue = deque(seen)
    while queue:
        node = queue.popleft()
        if node == (port_b, vid):
            return True
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def _on_switch(inventory: Inventory, port_id: str) -> bool:
    return port_id.split(":")[0] in inventory.switches


# -- IPAM --------------------------------------------------------------------


def first_free_tenant_block(base: str, taken) -> ipaddress.IPv4Network | None:
    """Lowest /24 of ``base`` with third octet 4..100 not in ``taken``."""
    taken = {ipaddress.IPv4Network(t) for t in taken}
    for net in ipaddress.IPv4Network(base).subnets(new_prefix=24):
        octet = net.network_address.packed[2]
        if 4 <= octet <= 100 and net not in taken:
            return net
    return None


def first_free_test_subnet(data_net: str, taken) -> ipaddress.IPv4Network | None:
    """Lowest /29 of ``data_net`` outside the shared /26 and ``taken``."""
    dnet = ipaddress.IPv4Network(data_net)
    shared = next(dnet.subnets(new_prefix=26))
    taken = [ipaddress.IPv4Network(t) for t in taken]
    for cand in dnet.subnets(new_prefix=29):
        if cand.overlaps(shared) or any(cand.overlaps(t) for t in taken):
            continue
        return cand
    return None


# -- random fabrics ------------------------------------------------------------


def random_fabric(rng: random.Random, max_switches=5, max_devices=20, max_vids=30,
                  ports_per_switch=10):
    """Random inventory plus raw port configs within the given bounds."""
    inv = Inventory()
    site = inv.register_site("s", "data_center")
    n_sw = rng.randint(1, max_switches)
    switches = [inv.register_switch(site, "X", [PortSpec(f"p{i}") for i in range(ports_per_switch)])
                for _ in range(n_sw)]
    free = {sw: [f"{sw}:p{i}" for i in range(ports_per_switch)] for sw in switches}
    for sw in free.values():
        rng.shuffle(sw)
    for _ in range(rng.randint(0, 2 * n_sw)):
        if n_sw < 2:
            break
        a, b = rng.sample(switches, 2)
        if free[a] and free[b]:
            inv.add_link(free[a].pop(), free[b].pop(), "trunk")
    n_dev = rng.randint(1, max_devices)
    for _ in range(n_dev):
        dev = inv.register_device(site, None, "te", "compute",
                                  [PortSpec(f"e{i}") for i in range(rng.randint(1, 2))])
        for port in inv.devices[dev].ports:
            sw = rng.choice(switches)
            if free[sw] and rng.random() < 0.9:
                inv.add_link(port.id, free[sw].pop(), "access")
    vids = list(range(2, 2 + rng.randint(1, max_vids)))
    configs = []
    for port in inv.ports():
        if not _on_switch(inv, port.id):
            continue
        roll = rng.random()
        if roll < 0.2:
            continue
        if roll < 0.3:
            configs.append(PortConfig.shutdown(port.id))
        elif roll < 0.65:
            configs.append(PortConfig.access(port.id, rng.choice(vids)))
        else:
            k = rng.randint(0, min(len(vids), 6))
            configs.append(PortConfig.trunk(port.id, rng.sample(vids, k)))
    return inv, configs, vids


# -- fault injection -----------------------------------------------------------


@contextmanager
def scarce_vlans(engine, keep: int):
    """Temporarily hide all but the ``keep`` lowest free VIDs."""
    alloc = engine.vlans
    hidden = sorted(alloc._free_set)[keep:]
    for v in hidden:
        alloc._free_set.discard(v)
    alloc._free = sorted(alloc._free_set)
    try:
        yield
    finally:
        alloc = engine.vlans  # execute() may have swapped in a restored copy
        alloc._free_set.update(v for v in hidden if v not in alloc.active)
        alloc._free = sorted(alloc._free_set)


# -- engine-wide invariants ------------------------------------------------------


def check_invariants(engine) -> None:
    """Assert every cross-module invariant on an engine's state."""
    from collections import Counter
    from otic.session import LIVE_STATES, SessionState

    active = engine.vlans.active
    assert all(2 <= v <= 4094 for v in active)
    assert len(set(active.values())) == len(active)

    # every claimed or overridden VID is active and refcounts match
    refs = Counter()
    for port, per_session in engine.claims.items():
        for sid, vids in per_session.items():
            assert engine.sessions[sid].state in LIVE_STATES
            refs.update(vids)
    for cfg in engine.overrides.values():
        refs.update(cfg.vids)
    assert set(refs) <= set(active)
    assert all(engine.vlans.references(v) == n for v, n in refs.items())

    if engine.plan is not None:
        nets = engine.plan.allocated_subnets()
        nets += list(engine.plan.otic_nets.values()) + list(engine.plan.data_nets.values())
        blocks = [tb.block for tb in engine.plan.tenant_blocks()]
        tests = [n for _, n, _ in engine.plan.test_allocations()]
        top = list(engine.plan.otic_nets.values()) + list(engine.plan.data_nets.values()) + blocks
        for x, y in combinations(top, 2):
            assert not x.overlaps(y), (x, y)
        for x, y in combinations(tests, 2):
            assert not x.overlaps(y), (x, y)
        assert {tb.tenant for tb in engine.plan.tenant_blocks()} == set(engine.tenants)

    busy = Counter()
    for s in engine.sessions.values():
        if s.state in LIVE_STATES:
            busy.update(s.participants)
            for vid in s.allocations.vids.values():
                assert active[vid].session == s.id
            for iface, net in s.allocations.subnets.items():
                assert (iface, net, s.id) in engine.plan.test_allocations()
        else:
            assert s.allocations.empty()
            if s.state is SessionState.TORN_DOWN:
                assert s.id not in engine.grants
    assert all(n == 1 for n in busy.values()), "device claimed by two live sessions"

    for purpose in active.values():
        assert engine.sessions[purpose.session].state in LIVE_STATES

    ports = Counter()
    for link in engine.inventory.links.values():
        ports.update([link.a, link.b])
    assert all(n == 1 for n in ports.values())
