"""Single-byte confidence codec and an in-process I2C-style device simulator.

The device exposes one read-only register holding the latest confidence
byte. Transactions are modelled as whole-byte reads and writes; bus timing
is not simulated.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from mlsds.findings import DatasheetError, RangeError

PAYLOAD_SCHEMA_ID = "mlsds-confidence-byte/1"
PAYLOAD_SCHEMAS = (PAYLOAD_SCHEMA_ID,)

BYTE_MAX = 255
# Worst-case |decode(encode(p)) - p| for the linear round-half-up mapping.
QUANTIZATION_BOUND = 0.5 / BYTE_MAX

DEFAULT_ADDRESS = 0x62
MIN_ADDRESS, MAX_ADDRESS = 0x08, 0x77
CONFIDENCE_REGISTER = 0x00


@dataclass(frozen=True)
class ConfidenceByte:
    raw: int

    def __post_init__(self):
        if isinstance(self.raw, bool) or not isinstance(self.raw, int) or not 0 <= self.raw <= BYTE_MAX:
            raise RangeError(f"byte must be an integer in [0, {BYTE_MAX}], got {self.raw!r}", "raw")

    def __int__(self) -> int:
        return self.raw


def encode_confidence(p: float) -> ConfidenceByte:
    """Map a probability to ``round(p * 255)`` with halves rounded up."""
    if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
        raise RangeError(f"confidence must be in [0, 1], got {p!r}", "confidence")
    return ConfidenceByte(int(math.floor(p * BYTE_MAX + 0.5)))


def decode_confidence(b: ConfidenceByte | int) -> float:
    raw = b.raw if isinstance(b, ConfidenceByte) else ConfidenceByte(b).raw
    return raw / BYTE_MAX


class BusError(DatasheetError):
    """A transaction the device refused (NACK)."""


class SimDevice:
    """Simulated sensor: one writer (the model loop), many readers (hosts).

    Reads and updates take the same lock, so a reader always sees some
    byte that was written in full.
    """

    def __init__(self, address: int = DEFAULT_ADDRESS, initial: ConfidenceByte | int = 0):
        if not MIN_ADDRESS <= address <= MAX_ADDRESS:
            raise RangeError(
                f"7-bit address must be in [0x{MIN_ADDRESS:02x}, 0x{MAX_ADDRESS:02x}], got 0x{address:02x}",
                "address",
            )
        self.address = address
        self._latest = initial if isinstance(initial, ConfidenceByte) else ConfidenceByte(initial)
        self._read_count = 0
        self._lock = threading.Lock()

    @property
    def latest(self) -> ConfidenceByte:
        with self._lock:
            return self._latest

    @property
    def read_count(self) -> int:
        with self._lock:
            return self._read_count

    def __repr__(self) -> str:
        return f"SimDevice(address=0x{self.address:02x}, latest={self._latest.raw}, read_count={self._read_count})"


def device_read(dev: SimDevice) -> ConfidenceByte:
    with dev._lock:
        dev._read_count += 1
        return dev._latest


def device_update(dev: SimDevice, p: float) -> SimDevice:
    value = encode_confidence(p)  # raises before touching state
    with dev._lock:
        dev._latest = value
    return dev


class LoopbackBus:
    """Host-side view of a bus with in-process devices attached."""

    def __init__(self):
        self._devices: dict[int, SimDevice] = {}

    def attach(self, dev: SimDevice) -> None:
        if dev.address in self._devices:
            raise BusError(f"address 0x{dev.address:02x} already in use", "address")
        self._devices[dev.address] = dev

    def scan(self) -> list[int]:
        return sorted(self._devices)

    def _target(self, address: int) -> SimDevice:
        try:
            return self._devices[address]
        except KeyError:
            raise BusError(f"no device acknowledged address 0x{address:02x}", "address") from None

    def read_byte(self, address: int, register: int = CONFIDENCE_REGISTER) -> int:
        dev = self._target(address)
        if register != CONFIDENCE_REGISTER:
            raise BusError(f"register 0x{register:02x} not implemented", "register")
        return device_read(dev).raw

    def write_byte(self, address: int, register: int, value: int) -> None:
        self._target(address)
        raise BusError(f"register 0x{register:02x} is read-only", "register")


class HostDriver:
    """Reads person-presence confidence from a device on the bus."""

    def __init__(self, bus: LoopbackBus, address: int = DEFAULT_ADDRESS):
        self.bus = bus
        self.address = address

    def read_confidence(self) -> float:
        return decode_confidence(self.bus.read_byte(self.address))

    def person_present(self, threshold: float) -> bool:
        return self.read_confidence() >= threshold
