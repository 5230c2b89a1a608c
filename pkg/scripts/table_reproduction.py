"""Print the address plan for a /16: fixed nets, tenant carving and data nets.

    python scripts/table_reproduction.py --base 10.77.0.0/16 --tenants 7
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from otic.ipam import InterfaceKind, init_plan


@dataclass
class Config:
    base: str = "10.77.0.0/16"
    tenants: int = 2
    carve: tuple[int, ...] = (4, 10)  # third octets whose tenant /24 is carved
    test_allocations: int = 2  # NG test /29s to hand out
    json: bool = False


def run(cfg: Config) -> dict:
    plan = init_plan(cfg.base)
    blocks = [str(plan.allocate_tenant_block(f"tenant{i + 1}")) for i in range(cfg.tenants)]
    base = plan.base.network_address.packed
    carved = {}
    for octet in cfg.carve:
        block = f"{base[0]}.{base[1]}.{octet}.0/24"
        if any(b == block for b in blocks):
            tb = plan.carve_tenant_subnets(block)
            carved[block] = {k: str(v) for k, v in tb.carved.items()}
    tests = [str(plan.allocate_test_subnet("NG", f"s{i + 1}")) for i in range(cfg.test_allocations)]
    return {
        "config": asdict(cfg),
        "otic_nets": {k: (str(v), True) for k, v in plan.otic_nets.items()},
        "tenant_blocks": blocks,
        "data_nets": {k.value: (str(v), plan.is_routable(k)) for k, v in plan.data_nets.items()},
        "l2_only": [InterfaceKind.OFH_CU.value],
        "tenant_carving": carved,
        "ng_shared": str(plan.shared_subnet("NG")),
        "ng_tests": tests,
    }


def _yn(flag: bool) -> str:
    return "Y" if flag else "N"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", default=Config.base)
    ap.add_argument("--tenants", type=int, default=Config.tenants)
    ap.add_argument("--carve", type=int, nargs="*", default=list(Config.carve))
    ap.add_argument("--tests", type=int, default=Config.test_allocations)
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()
    cfg = Config(a.base, max(a.tenants, max(a.carve, default=4) - 3), tuple(a.carve), a.tests, a.json)
    out = run(cfg)
    if cfg.json:
        print(json.dumps(out, indent=2))
        return
    print(f"{'Type':<16}{'Name':<14}{'Subnet':<20}Routable")
    for name, (net, r) in out["otic_nets"].items():
        print(f"{'OTIC':<16}{name:<14}{net:<20}{_yn(r)}")
    for i, net in enumerate(out["tenant_blocks"][:a.tenants], start=1):
        print(f"{'Tenant':<16}{'tenant' + str(i):<14}{net:<20}Y")
    for name, (net, r) in out["data_nets"].items():
        print(f"{'5G data':<16}{name:<14}{net:<20}{_yn(r)}")
    print(f"{'5G data':<16}{'OFH_CU':<14}{'L2 only':<20}N")
    print()
    for block, nets in out["tenant_carving"].items():
        for name, net in nets.items():
            print(f"{block:<16}{name:<14}{net}")
    print()
    print(f"{'NG':<16}{'shared':<14}{out['ng_shared']}")
    for i, net in enumerate(out["ng_tests"], start=1):
        print(f"{'NG':<16}{'test ' + str(i):<14}{net}")


if __name__ == "__main__":
    main()
