"""Fill the VID space, confirm the refusal at capacity, and time churn.

    python scripts/vlan_capacity.py --churn 20000 --seed 1
"""

from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass

from otic.errors import PoolExhausted
from otic.vlan import CAPACITY, VlanAllocator


@dataclass
class Config:
    churn: int = 10_000  # random release/allocate pairs after filling
    seed: int = 0


def run(cfg: Config) -> dict:
    rng = random.Random(cfg.seed)
    alloc = VlanAllocator()
    t0 = time.perf_counter()
    vids = [alloc.allocate_vid("F1", f"s{i}") for i in range(CAPACITY)]
    fill = time.perf_counter() - t0
    try:
        alloc.allocate_vid("F1", "overflow")
        refused = False
    except PoolExhausted:
        refused = True
    alloc.release_vid(2)
    reuse = alloc.allocate_vid("F1", "reuse")

    t0 = time.perf_counter()
    live = dict(alloc.active)
    lowest_ok = True
    for n in range(cfg.churn):
        vid = rng.choice(list(live)) if n % 512 == 0 else rng.randrange(2, 4095)
        if vid not in live:
            continue
        alloc.release_vid(vid)
        del live[vid]
        got = alloc.allocate_vid("NG", f"c{n}")
        lowest_ok &= got == vid  # the only free VID must come back
        live[got] = None
    churn = time.perf_counter() - t0
    return {"capacity": CAPACITY, "allocated": len(vids), "first": vids[0], "last": vids[-1],
            "refused_at_capacity": refused, "reuse_after_release_2": reuse,
            "fill_seconds": round(fill, 4), "churn_pairs": cfg.churn,
            "churn_seconds": round(churn, 4), "lowest_free_invariant": lowest_ok}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--churn", type=int, default=Config.churn)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    for k, v in run(Config(a.churn, a.seed)).items():
        print(f"{k:<24}{v}")


if __name__ == "__main__":
    main()
