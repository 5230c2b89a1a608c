import ipaddress
import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from otic.errors import NotFound, UnknownOwner, ValidationError
from otic.fabric import (Grant, PortConfig, PortMode, Router, RouterAttachment, build_fabric,
                         l2_reachable, l3_reachable, reachability_relation, verify_intent,
                         verify_isolation)
from otic.fixtures import provision_standard
from otic.inventory import Inventory, PortSpec, ethernet_ports
from otic.ipam import InterfaceKind as IK
from otic.topology import AnalogEdge, AnalogMode, DigitalEdge, LogicalTopology

from tests.oracles import bfs_l2_reachable, random_fabric

N = ipaddress.IPv4Network


def two_switches():
    """sw1 hosts a (tenant A) and b (tenant B); sw2 hosts c (tenant A); one trunk."""
    inv = Inventory()
    site = inv.register_site("dc", "data_center")
    sw1 = inv.register_switch(site, "X", ethernet_ports(8, 100))
    sw2 = inv.register_switch(site, "X", ethernet_ports(8, 100))
    inv.add_link(f"{sw1}:p8", f"{sw2}:p8", "trunk")
    devs = {}
    for name, sw, port, owner in (("a", sw1, "p1", "A"), ("b", sw1, "p2", "B"), ("c", sw2, "p1", "A")):
        devs[name] = inv.register_device(site, owner, "dut", "compute",
                                         [PortSpec("eth0"), PortSpec("rf", "rf_coaxial")])
        inv.add_link(f"{devs[name]}:eth0", f"{sw}:{port}", "access")
    return inv, sw1, sw2, devs


def eth(dev):
    return f"{dev}:eth0"


# -- build_fabric ------------------------------------------------------------

def test_empty_configs_reach_nothing():
    inv, _, _, d = two_switches()
    fab = build_fabric(inv, [])
    for x, y in combinations(d.values(), 2):
        for vid in (2, 10, 4094):
            assert not fab.l2_reachable(eth(x), eth(y), vid)


def test_same_access_vid_forms_one_segment():
    inv, sw1, _, d = two_switches()
    fab = build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw1}:p2", 10)])
    assert fab.segment_of(eth(d["a"]), 10) == fab.segment_of(eth(d["b"]), 10) is not None
    assert len(set(fab.components(10).values())) == 1


def test_config_on_rf_or_unknown_port_rejected():
    inv, _, _, d = two_switches()
    with pytest.raises(ValidationError):
        build_fabric(inv, [PortConfig.access(f"{d['a']}:rf", 10)])
    with pytest.raises(NotFound):
        build_fabric(inv, [PortConfig.access("sw9:p1", 10)])


def test_inactive_and_out_of_range_vids_rejected():
    inv, sw1, _, _ = two_switches()
    with pytest.raises(ValidationError, match="inactive"):
        build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10)], active_vids={11})
    with pytest.raises(ValidationError):
        build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 4095)])
    with pytest.raises(ValidationError):
        build_fabric(inv, [PortConfig(f"{sw1}:p1", PortMode.ACCESS, frozenset({3, 4}))])


def test_unroutable_attachment_rejected():
    inv, *_ = two_switches()
    router = Router((RouterAttachment(N("10.0.101.0/24"), "data", routable=False),))
    with pytest.raises(ValidationError):
        build_fabric(inv, [], router)


# -- l2_reachable examples -------------------------------------------------------

def test_access_same_vid_same_switch():
    inv, sw1, _, d = two_switches()
    fab = build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw1}:p2", 10)])
    assert l2_reachable(fab, eth(d["a"]), eth(d["b"]), 10)


def test_access_different_vids():
    inv, sw1, _, d = two_switches()
    fab = build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw1}:p2", 20)])
    assert not l2_reachable(fab, eth(d["a"]), eth(d["b"]), 10)
    assert not l2_reachable(fab, eth(d["a"]), eth(d["b"]), 20)


@pytest.mark.parametrize("allowed", [{10}, {20}, {10, 20}, set()])
def test_trunk_allowed_set_against_oracle(allowed):
    inv, sw1, sw2, d = two_switches()
    cfgs = [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw2}:p1", 10),
            PortConfig.trunk(f"{sw1}:p8", allowed), PortConfig.trunk(f"{sw2}:p8", allowed)]
    fab = build_fabric(inv, cfgs)
    got = l2_reachable(fab, eth(d["a"]), eth(d["c"]), 10)
    assert got == bfs_l2_reachable(inv, cfgs, eth(d["a"]), eth(d["c"]), 10)
    assert got == (10 in allowed)


def test_trunk_needs_both_ends():
    inv, sw1, sw2, d = two_switches()
    cfgs = [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw2}:p1", 10),
            PortConfig.trunk(f"{sw1}:p8", {10}), PortConfig.trunk(f"{sw2}:p8", {20})]
    assert not build_fabric(inv, cfgs).l2_reachable(eth(d["a"]), eth(d["c"]), 10)


def test_unknown_port_in_query():
    inv, *_ = two_switches()
    with pytest.raises(NotFound):
        build_fabric(inv, []).l2_reachable("nope:eth0", "nope:eth1", 10)


# -- properties --------------------------------------------------------------

@settings(max_examples=150)
@given(st.integers(0, 2**32 - 1))
def test_oracle_equivalence_and_symmetry(seed):
    rng = random.Random(seed)
    inv, cfgs, vids = random_fabric(rng)
    fab = build_fabric(inv, cfgs)
    ports = [p.id for p in inv.ports()]
    for _ in range(30):
        a, b, vid = rng.choice(ports), rng.choice(ports), rng.choice(vids)
        got = fab.l2_reachable(a, b, vid)
        assert got == bfs_l2_reachable(inv, cfgs, a, b, vid)
        assert got == fab.l2_reachable(b, a, vid)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_removing_trunk_vid_is_monotone(seed):
    rng = random.Random(seed)
    inv, cfgs, vids = random_fabric(rng)
    trunks = [i for i, c in enumerate(cfgs) if c.mode is PortMode.TRUNK and c.vids]
    if not trunks:
        return
    i = rng.choice(trunks)
    drop = rng.choice(sorted(cfgs[i].vids))
    pruned = list(cfgs)
    pruned[i] = PortConfig.trunk(cfgs[i].port, cfgs[i].vids - {drop})
    dev_ports = [p.id for p in inv.ports() if p.node in inv.devices]
    before = reachability_relation(build_fabric(inv, cfgs), dev_ports, vids)
    after = reachability_relation(build_fabric(inv, pruned), dev_ports, vids)
    assert after <= before


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_isolation_soundness_by_exhaustive_scan(seed):
    rng = random.Random(seed)
    inv, cfgs, vids = random_fabric(rng, max_switches=3, max_devices=8, max_vids=5)
    owners = {dev: rng.choice(["A", "B", "C", None]) for dev in inv.devices}
    grants = []
    if rng.random() < 0.5:
        grants.append(Grant("g", frozenset(rng.sample(["A", "B", "C"], 2)),
                            frozenset(rng.sample(vids, min(2, len(vids))))))
    fab = build_fabric(inv, cfgs)
    report = verify_isolation(fab, owners, grants)

    expected = set()
    dev_ports = [(p.id, p.node) for p in inv.ports() if p.node in inv.devices]
    for vid in vids:
        for (pa, da), (pb, db) in combinations(dev_ports, 2):
            ta, tb = owners[da], owners[db]
            if None in (ta, tb) or ta == tb:
                continue
            if any(vid in g.vids and {ta, tb} <= g.tenants for g in grants):
                continue
            if bfs_l2_reachable(inv, cfgs, pa, pb, vid):
                expected.add((frozenset({da, db}), vid))
    got = {(frozenset({v.endpoint_a.split(":")[0], v.endpoint_b.split(":")[0]}), v.vid)
           for v in report.isolation_violations}
    assert got == expected
    assert report.isolated == (not expected)


# -- verification ----------------------------------------------------------------

def _ofh_topology(d):
    return LogicalTopology(None, digital_edges=(DigitalEdge(IK.OFH_M, eth(d["a"]), eth(d["c"])),),
                           analog_edges=(AnalogEdge(f"{d['a']}:rf", f"{d['c']}:rf", AnalogMode.CONDUCTED),))


def test_intent_passes_then_fails_without_trunk_vid():
    inv, sw1, sw2, d = two_switches()
    inv.add_link(f"{d['a']}:rf", f"{d['c']}:rf", "analog")
    vmap = {(IK.OFH_M, None): 10}
    good = [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw2}:p1", 10),
            PortConfig.trunk(f"{sw1}:p8", {10}), PortConfig.trunk(f"{sw2}:p8", {10})]
    report = verify_intent(build_fabric(inv, good), _ofh_topology(d), vmap)
    assert report.intent_passed and len(report.intent_results) == 2
    bad = good[:2] + [PortConfig.trunk(f"{sw1}:p8", set()), good[3]]
    report = verify_intent(build_fabric(inv, bad), _ofh_topology(d), vmap)
    assert [r.passed for r in report.intent_results if r.kind == "digital"] == [False]


def test_analog_edge_without_cable_fails():
    inv, *_, d = two_switches()
    report = verify_intent(build_fabric(inv, []), LogicalTopology(
        None, analog_edges=(AnalogEdge(f"{d['a']}:rf", f"{d['b']}:rf", AnalogMode.CONDUCTED),)), {})
    assert not report.intent_passed


def test_intent_missing_vid_mapping():
    inv, *_, d = two_switches()
    with pytest.raises(ValidationError):
        verify_intent(build_fabric(inv, []), _ofh_topology(d), {})


def test_empty_topology_passes_vacuously():
    inv, *_ = two_switches()
    assert verify_intent(build_fabric(inv, []), LogicalTopology(None), {}).passed


def test_constructed_leak_is_one_violation():
    inv, sw1, _, d = two_switches()
    fab = build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10), PortConfig.access(f"{sw1}:p2", 10)])
    owners = {dev: inv.devices[dev].owner for dev in inv.devices}
    report = verify_isolation(fab, owners)
    assert len(report.isolation_violations) == 1
    v = report.isolation_violations[0]
    assert {v.tenant_a, v.tenant_b} == {"A", "B"} and v.vid == 10


def test_grant_suppresses_violation_only_on_its_vids():
    inv, sw1, _, d = two_switches()
    cfgs = [PortConfig.trunk(f"{sw1}:p1", {10, 11}), PortConfig.trunk(f"{sw1}:p2", {10, 11})]
    owners = {dev: inv.devices[dev].owner for dev in inv.devices}
    grant = Grant("s1", frozenset({"A", "B"}), frozenset({10}))
    report = verify_isolation(build_fabric(inv, cfgs), owners, [grant])
    assert [v.vid for v in report.isolation_violations] == [11]


def test_missing_owner_rejected():
    inv, sw1, _, d = two_switches()
    fab = build_fabric(inv, [PortConfig.access(f"{sw1}:p1", 10)])
    with pytest.raises(UnknownOwner):
        verify_isolation(fab, {})


# -- L3 -------------------------------------------------------------------------

@pytest.fixture
def standard_sessions_provisioned(facility):
    provision_standard(facility)
    return facility.engine.fabric()


def test_l3_own_nets(standard_sessions_provisioned):
    assert l3_reachable(standard_sessions_provisioned, "10.77.4.160/29", "10.77.4.0/26")


def test_l3_cross_tenant_blocked(standard_sessions_provisioned):
    assert not l3_reachable(standard_sessions_provisioned, "10.77.4.0/26", "10.77.5.0/26")


def test_l3_tenant_to_services(standard_sessions_provisioned):
    assert l3_reachable(standard_sessions_provisioned, "10.77.5.0/26", "10.77.2.0/24")


@pytest.mark.parametrize("src", ["10.77.4.0/26", "10.77.2.0/24", "10.77.105.0/24", "10.77.101.0/24"])
def test_l3_nothing_reaches_f1(standard_sessions_provisioned, src):
    assert not l3_reachable(standard_sessions_provisioned, src, "10.77.101.64/29")
    assert not l3_reachable(standard_sessions_provisioned, src, "10.77.101.0/24")


def test_l3_unknown_subnet(standard_sessions_provisioned):
    with pytest.raises(NotFound):
        l3_reachable(standard_sessions_provisioned, "192.168.0.0/24", "10.77.4.0/26")


def test_l3_symmetric(standard_sessions_provisioned):
    nets = [a.subnet for a in standard_sessions_provisioned.router.attachments]
    for a, b in combinations(nets, 2):
        assert standard_sessions_provisioned.l3_reachable(a, b) == standard_sessions_provisioned.l3_reachable(b, a)


def test_route_leak_is_reported(facility):
    provision_standard(facility)
    fab = facility.engine.fabric()
    leak = frozenset({N("10.77.4.0/24"), N("10.77.5.0/24")})
    leaky = build_fabric(fab.inventory, fab.configs.values(),
                         Router(fab.router.attachments, fab.router.unroutable, frozenset({leak})))
    report = verify_isolation(leaky, facility.engine.ownership(), facility.engine.grants.values())
    assert [v.l3_path for v in report.isolation_violations] == [("10.77.4.0/24", "10.77.5.0/24")]
    assert verify_isolation(fab, facility.engine.ownership(), facility.engine.grants.values()).isolated
