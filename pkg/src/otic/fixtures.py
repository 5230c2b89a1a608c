"""A small reference facility: one data-center switch, one lab switch.

Mirrors the three-tenant parallel-testing layout: tenant1 runs a conducted
E2E test on CU1/DU1 (with its own RU2), tenant2 runs DU conformance on DU2
and tenant3 runs radiated RU conformance on RU1. Test equipment is
OTIC-owned. Used by the acceptance tests and the scripts in ``scripts/``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from otic.inventory import PortSpec, ethernet_ports
from otic.session import Engine

DC_PORTS = ethernet_ports(32, 100)
LAB_PORTS = ethernet_ports(48, 25) + ethernet_ports(6, 100, prefix="q")
OOB_GROUP = [f"p{i}" for i in range(25, 31)]  # sw1 ports reserved for BMC/OOB


@dataclass
class Facility:
    engine: Engine
    ids: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, name: str) -> str:
        return self.ids[name]

    def standard_sessions(self) -> dict[str, list]:
        return {
            "tenant1": ["e2e", ["tenant1"],
                        [self["UE-EMU"], self["RU2"], self["DU1"], self["CU1"], self["CORE-A"]],
                        {"analog_mode": "conducted"}],
            "tenant2": ["du_conformance", ["tenant2"],
                        [self["RU-UE-EMU"], self["DU2"], self["CORE-B"]], {}],
            "tenant3": ["ru_conformance", ["tenant3"],
                        [self["DU-EMU"], self["RU1"], self["VST"]], {"analog_mode": "radiated"}],
        }


def two_switch_facility(base_prefix: str = "10.77.0.0/16", engine: Engine | None = None) -> Facility:
    eng = engine or Engine()
    fac = Facility(eng)
    ids = fac.ids
    eng.init_plan(base_prefix)
    for t in ("tenant1", "tenant2", "tenant3"):
        eng.create_tenant(t)

    dc = ids["DataCenter-A"] = eng.register_site("DataCenter-A", "data_center")
    lab = ids["Lab-1"] = eng.register_site("Lab-1", "lab")
    sw1 = ids["sw-dc"] = eng.register_switch(dc, "S5232F-ON", DC_PORTS, "t_bc")
    sw2 = ids["sw-lab"] = eng.register_switch(lab, "S5248F-ON", LAB_PORTS, "t_bc")
    # two parallel 100G fibers between the spaces
    eng.add_link(f"{sw1}:p31", f"{sw2}:q1", "trunk")
    eng.add_link(f"{sw1}:p32", f"{sw2}:q2", "trunk")

    eth = PortSpec("eth0", "ethernet", 25)
    bmc = PortSpec("bmc", "ethernet", 1)
    coax = PortSpec("rf0", "rf_coaxial")
    ant = PortSpec("ant0", "rf_antenna")
    feats_du = {"bandwidth_mhz": ["100", "40"], "scs_khz": ["30"], "plane_s_source": ["lls_c3"]}
    feats_ru = {"bandwidth_mhz": ["100"], "scs_khz": ["30"], "plane_s_source": ["lls_c3"]}

    dc_devices = [
        ("CU1", "tenant1", "dut", "cu", [eth, bmc], {}),
        ("DU1", "tenant1", "dut", "du", [eth, bmc], feats_du),
        ("DU2", "tenant2", "dut", "du", [eth, bmc], feats_du),
        ("CORE-A", None, "te", "core_emulator", [eth], {}),
        ("CORE-B", None, "te", "core_emulator", [eth], {}),
        ("DU-EMU", None, "te", "du_emulator", [eth], {}),
        ("RU-UE-EMU", None, "te", "ru_ue_emulator", [eth], {}),
        ("VPN", None, "service", "vpn", [eth], {}),
    ]
    lab_devices = [
        ("RU2", "tenant1", "dut", "ru", [eth, coax], feats_ru),
        ("RU1", "tenant3", "dut", "ru", [eth, ant], feats_ru),
        ("UE-EMU", None, "te", "ue_emulator", [eth, coax, ant], {}),
        ("VST", None, "te", "vst", [eth, ant], {}),
        ("T-GM", None, "te", "t_gm", [eth, PortSpec("gps", "gps_coax")], {}),
    ]
    oob = iter(OOB_GROUP)
    for site, sw, devices in ((dc, sw1, dc_devices), (lab, sw2, lab_devices)):
        for i, (name, owner, role, kind, ports, feats) in enumerate(devices, start=1):
            dev = ids[name] = eng.register_device(site, owner, role, kind, ports, feats)
            eng.add_link(f"{dev}:eth0", f"{sw}:p{i}", "access")
            if any(p.name == "bmc" for p in ports):
                eng.add_link(f"{dev}:bmc", f"{sw1}:{next(oob)}", "oob")
    eng.add_link(f"{ids['RU2']}:rf0", f"{ids['UE-EMU']}:rf0", "analog")
    eng.add_link(f"{ids['RU1']}:ant0", f"{ids['VST']}:ant0", "analog")
    return fac


def provision_standard(fac: Facility) -> dict[str, str]:
    """Plan and provision the three parallel sessions; returns tenant -> session id."""
    out = {}
    for tenant, (kind, tenants, parts, opts) in fac.standard_sessions().items():
        s = fac.engine.plan_session(kind, tenants, parts, opts)
        fac.engine.provision(s.id)
        out[tenant] = s.id
    return out
