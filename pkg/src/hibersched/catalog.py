"""VM-type catalog, market prices and slot billing."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError

DEFAULT_BOOT_TIME = 2


@dataclass(frozen=True)
class VmType:
    name: str
    vcpus: int
    memory: float
    od_price: float
    spot_price: float
    slowdown: float
    hibernation_capable: bool = True
    boot_time: int = DEFAULT_BOOT_TIME

    def __post_init__(self):
        if not self.name:
            raise ValidationError("vm type without a name")
        if not isinstance(self.vcpus, int) or self.vcpus < 1:
            raise ValidationError(f"{self.name}: vcpus must be an integer >= 1")
        if not self.memory > 0:
            raise ValidationError(f"{self.name}: memory must be > 0")
        if not self.slowdown > 0:
            raise ValidationError(f"{self.name}: slowdown must be > 0")
        if self.od_price < 0 or self.spot_price < 0:
            raise ValidationError(f"{self.name}: prices must be non-negative")
        if not isinstance(self.boot_time, int) or self.boot_time < 0:
            raise ValidationError(f"{self.name}: boot_time must be a non-negative integer")

    @property
    def spot_usable(self) -> bool:
        return self.hibernation_capable

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VmType":
        known = {f.name for f in fields(cls)}
        missing = {"name", "vcpus", "memory", "od_price", "spot_price", "slowdown"} - set(d)
        if missing:
            raise ParseError(f"vm type record {d.get('name', '?')!r} lacks {sorted(missing)}")
        extra = set(d) - known
        if extra:
            raise ParseError(f"vm type record {d.get('name', '?')!r}: unknown fields {sorted(extra)}")
        try:
            return cls(
                name=str(d["name"]),
                vcpus=_as_int(d["vcpus"]),
                memory=float(d["memory"]),
                od_price=float(d["od_price"]),
                spot_price=float(d["spot_price"]),
                slowdown=float(d["slowdown"]),
                hibernation_capable=bool(d.get("hibernation_capable", True)),
                boot_time=_as_int(d.get("boot_time", DEFAULT_BOOT_TIME)),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"vm type record {d.get('name', '?')!r}: {exc}") from exc


@dataclass(frozen=True)
class BillingConfig:
    slot_periods: int = 60
    storage_price: float = 0.10
    period_minutes: int = 1

    def __post_init__(self):
        if not isinstance(self.slot_periods, int) or self.slot_periods < 1:
            raise ValidationError("slot_periods must be an integer >= 1")
        if not isinstance(self.period_minutes, int) or self.period_minutes < 1:
            raise ValidationError("period_minutes must be an integer >= 1")
        if self.storage_price < 0:
            raise ValidationError("storage_price must be non-negative")

    def hours(self, hours: float) -> int:
        """Whole periods in ``hours`` (rounded to nearest)."""
        return int(math.floor(hours * 60.0 / self.period_minutes + 0.5))

    def to_hours(self, periods: float) -> float:
        return periods * self.period_minutes / 60.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Catalog:
    """The VM-type universe plus billing rules."""

    types: tuple[VmType, ...]
    billing: BillingConfig = BillingConfig()

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if not self.types:
            raise ValidationError("catalog has no VM types")
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate VM type names in catalog")

    def __iter__(self):
        return iter(self.types)

    def __getitem__(self, name: str) -> VmType:
        for t in self.types:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"billing": self.billing.to_dict(),
                "vm_types": [t.to_dict() for t in self.types]}


def _as_int(v) -> int:
    if isinstance(v, bool):
        raise ValueError(f"expected integer, got {v!r}")
    f = float(v)
    if f != int(f):
        raise ValueError(f"expected integer, got {v!r}")
    return int(f)


def number_of_slots(duration: int, billing: BillingConfig) -> int:
    """Slots billed for ``duration`` periods; any partial slot counts as one."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return -(-int(duration) // billing.slot_periods)


def parse_catalog(doc: dict) -> Catalog:
    if not isinstance(doc, dict) or "vm_types" not in doc:
        raise ParseError("catalog document needs a 'vm_types' list")
    b = doc.get("billing", {})
    try:
        billing = BillingConfig(
            slot_periods=_as_int(b.get("slot_periods", 60)),
            storage_price=float(b.get("storage_price", 0.10)),
            period_minutes=_as_int(b.get("period_minutes", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"billing: {exc}") from exc
    records = doc["vm_types"]
    if not isinstance(records, list):
        raise ParseError("'vm_types' must be a list")
    return Catalog(tuple(VmType.from_dict(r) for r in records), billing)


def load_catalog(path=None) -> Catalog:
    """Load a JSON catalog; ``None`` loads the bundled EC2 table."""
    try:
        if path is None:
            text = resources.files("hibersched.data").joinpath("ec2_catalog.json").read_text()
        else:
            text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_catalog(doc)


def default_catalog() -> Catalog:
    return load_catalog(None)
