"""802.1Q VLAN ID allocation.

VIDs 0 (priority tag), 1 (default VLAN) and 4095 are never handed out,
leaving 4093 usable IDs. Allocation is lowest-free-first, so replaying the
same request sequence always yields the same VIDs.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Union

from otic._util import digest
from otic.errors import DuplicateError, NotFound, PoolExhausted, StillReferenced, ValidationError
from otic.ipam import InterfaceKind, coerce_interface

VID_MIN, VID_MAX = 2, 4094
RESERVED_VIDS = frozenset({0, 1, 4095})
CAPACITY = VID_MAX - VID_MIN + 1


class Plane(str, Enum):
    M = "m"
    CU_C = "cu_c"
    CU_U = "cu_u"


@dataclass(frozen=True, order=True)
class Purpose:
    interface: InterfaceKind
    session: str
    plane: Optional[Plane] = None

    @classmethod
    def of(cls, interface: Union[str, InterfaceKind], session: str,
           plane: Union[None, str, Plane] = None) -> "Purpose":
        return cls(coerce_interface(interface), session, Plane(plane) if plane else None)

    def to_dict(self) -> dict:
        return {"interface": self.interface.value, "session": self.session,
                "plane": self.plane.value if self.plane else None}

    def sort_key(self) -> tuple:
        return (self.interface.value, self.session, self.plane.value if self.plane else "")


class VlanAllocator:
    """Lowest-free VID allocator with per-VID reference counts.

    References are held by port configurations; a referenced VID cannot be
    released.
    """

    def __init__(self) -> None:
        self._free = list(range(VID_MIN, VID_MAX + 1))  # already a valid heap
        self._free_set = set(self._free)
        self._active: dict[int, Purpose] = {}
        self._by_purpose: dict[Purpose, int] = {}
        self._refs: Counter[int] = Counter()

    def allocate_vid(self, interface: Union[str, InterfaceKind], session: str,
                     plane: Union[None, str, Plane] = None) -> int:
        purpose = Purpose.of(interface, session, plane)
        if not purpose.interface.vlan_capable:
            raise ValidationError(f"{purpose.interface.value} is analog and takes no VLAN")
        if purpose in self._by_purpose:
            raise DuplicateError(f"purpose {purpose} already holds VID {self._by_purpose[purpose]}")
        if not self._free:
            raise PoolExhausted(f"all {CAPACITY} VLAN IDs are in use")
        vid = heapq.heappop(self._free)
        self._free_set.discard(vid)
        self._active[vid] = purpose
        self._by_purpose[purpose] = vid
        return vid

    def release_vid(self, vid: int) -> None:
        if vid in RESERVED_VIDS:
            raise ValidationError(f"VID {vid} is reserved")
        if vid not in self._active:
            raise NotFound(f"VID {vid} is not allocated")
        if self._refs[vid]:
            raise StillReferenced(f"VID {vid} is referenced by {self._refs[vid]} port config(s)")
        purpose = self._active.pop(vid)
        del self._by_purpose[purpose]
        self._free_set.add(vid)
        heapq.heappush(self._free, vid)

    def lookup(self, interface: Union[str, InterfaceKind], session: str,
               plane: Union[None, str, Plane] = None) -> Optional[int]:
        return self._by_purpose.get(Purpose.of(interface, session, plane))

    def purpose(self, vid: int) -> Optional[Purpose]:
        return self._active.get(vid)

    def is_active(self, vid: int) -> bool:
        return vid in self._active

    @property
    def active(self) -> dict[int, Purpose]:
        return dict(sorted(self._active.items()))

    def hold(self, vid: int) -> None:
        if vid not in self._active:
            raise NotFound(f"VID {vid} is not allocated")
        self._refs[vid] += 1

    def unhold(self, vid: int) -> None:
        if self._refs[vid] <= 0:
            raise ValidationError(f"VID {vid} has no references to drop")
        self._refs[vid] -= 1
        if not self._refs[vid]:
            del self._refs[vid]

    def references(self, vid: int) -> int:
        return self._refs[vid]

    def __deepcopy__(self, memo: dict) -> "VlanAllocator":
        # Contents are ints and frozen purposes; copying the containers suffices.
        clone = VlanAllocator.__new__(VlanAllocator)
        clone._free = list(self._free)
        clone._free_set = set(self._free_set)
        clone._active = dict(self._active)
        clone._by_purpose = dict(self._by_purpose)
        clone._refs = Counter(self._refs)
        return clone

    def fingerprint(self) -> str:
        return digest(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "active": [{"vid": v, **p.to_dict()} for v, p in sorted(self._active.items())],
            "refs": {str(v): n for v, n in sorted(self._refs.items())},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "VlanAllocator":
        alloc = cls()
        for entry in doc["active"]:
            vid = entry["vid"]
            purpose = Purpose.of(entry["interface"], entry["session"], entry["plane"])
            alloc._active[vid] = purpose
            alloc._by_purpose[purpose] = vid
            alloc._free_set.discard(vid)
        alloc._free = sorted(alloc._free_set)
        alloc._refs = Counter({int(v): n for v, n in doc["refs"].items()})
        return alloc
