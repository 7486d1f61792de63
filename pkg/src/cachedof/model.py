"""Combinatorial core of the cache-aided delivery scheme.

Network configuration, uncoded cache placement over transmitter subsets,
per-demand subfile splitting, and the circular-permutation schedule that
groups messages into transmission blocks.

Indexing follows the wireless convention: transmitters, receivers, and
files are numbered from 1, and index windows wrap modulo the respective
count (a window ``[i : i+w-1]`` over K transmitters is ``i, i+1, ..``
reduced into ``1..K``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

__all__ = [
    "ConfigurationError",
    "NetworkConfig",
    "SubfileId",
    "MessageId",
    "TransmissionBlock",
    "CachePlacement",
    "wrap_index",
    "index_window",
    "validate_demand",
    "circular_permutations",
    "place_content",
    "split_subfiles",
    "schedule_blocks",
    "schedule_to_json",
    "schedule_from_json",
    "placement_to_json",
]

SCHEDULE_FACTORIAL_GUARD = 8  # (k_t - 1)! blocks; refuse larger k_t unless forced


class ConfigurationError(ValueError):
    """Invalid network configuration or out-of-range request."""


def wrap_index(x: int, count: int) -> int:
    """Reduce a 1-based index into ``1..count`` (modulo wrap)."""
    return (x - 1) % count + 1


def index_window(start: int, length: int, count: int) -> tuple[int, ...]:
    """The ordered window ``start, start+1, ..`` of `length` indices mod `count`."""
    return tuple(wrap_index(start + off, count) for off in range(length))


@dataclass(frozen=True)
class NetworkConfig:
    """Network tuple: k_t transmitters, k_r receivers, n_files library files,
    and cooperation order tau (each subfile is cached at tau transmitters,
    i.e. the cache holds M = tau * n_files / k_t files)."""

    k_t: int
    k_r: int
    n_files: int
    tau: int

    def __post_init__(self) -> None:
        for name in ("k_t", "k_r", "n_files", "tau"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
        if self.tau > self.k_t:
            raise ConfigurationError(
                f"tau={self.tau} exceeds k_t={self.k_t} (cache cannot exceed the library)"
            )
        if self.n_files < self.k_r:
            raise ConfigurationError(
                f"n_files={self.n_files} < k_r={self.k_r}: every receiver must be able "
                "to request a distinct file"
            )

    @property
    def m_files(self) -> Fraction:
        """Cache size in files, M = tau * n_files / k_t."""
        return Fraction(self.tau * self.n_files, self.k_t)

    @property
    def gamma(self) -> int:
        """Number of alignment conditions, k_t * (k_r - tau)."""
        return self.k_t * (self.k_r - self.tau)

    def as_dict(self) -> dict:
        return {"k_t": self.k_t, "k_r": self.k_r, "n_files": self.n_files, "tau": self.tau}


@dataclass(frozen=True, order=True)
class SubfileId:
    """One of the C(k_t, tau) pieces of a file, identified by the sorted set
    of transmitters that cache it."""

    file: int
    storage_set: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.file < 1:
            raise ConfigurationError(f"file index must be >= 1, got {self.file}")
        if tuple(sorted(set(self.storage_set))) != self.storage_set:
            raise ConfigurationError(
                f"storage_set must be sorted and duplicate-free, got {self.storage_set}"
            )
        if not self.storage_set or any(i < 1 for i in self.storage_set):
            raise ConfigurationError(f"storage_set entries must be >= 1, got {self.storage_set}")


@dataclass(frozen=True, order=True)
class MessageId:
    """A smaller subfile to be delivered in one block: receiver index, the
    ordered cooperation window (master transmitter first), and the ordered
    window of transmitters that do not cache it."""

    receiver: int
    coop_window: tuple[int, ...]
    excluded_window: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.receiver < 1:
            raise ConfigurationError(f"receiver must be >= 1, got {self.receiver}")
        k_t = len(self.coop_window) + len(self.excluded_window)
        seen = set(self.coop_window) | set(self.excluded_window)
        if len(self.coop_window) < 1 or seen != set(range(1, k_t + 1)):
            raise ConfigurationError(
                "coop_window and excluded_window must partition 1..k_t, got "
                f"{self.coop_window} / {self.excluded_window}"
            )

    @property
    def master(self) -> int:
        """Transmitter responsible for delivering this message."""
        return self.coop_window[0]

    @property
    def storage_set(self) -> tuple[int, ...]:
        """Sorted cachers of the parent subfile (the coop window as a set)."""
        return tuple(sorted(self.coop_window))

    def as_dict(self) -> dict:
        return {
            "receiver": self.receiver,
            "master": self.master,
            "coop_window": list(self.coop_window),
            "excluded_window": list(self.excluded_window),
        }


@dataclass(frozen=True)
class TransmissionBlock:
    """One delivery block: a circular permutation of the transmitters plus the
    k_r * k_t messages sent simultaneously over its symbol extensions."""

    pi: tuple[int, ...]
    messages: tuple[MessageId, ...]

    def __post_init__(self) -> None:
        k_t = len(self.pi)
        if sorted(self.pi) != list(range(1, k_t + 1)) or self.pi[0] != 1:
            raise ConfigurationError(f"pi must be a permutation of 1..k_t anchored at 1, got {self.pi}")
        if not self.messages:
            raise ConfigurationError("block has no messages")
        k_r = len(self.messages) // k_t
        pairs = {(m.master, m.receiver) for m in self.messages}
        if len(self.messages) != k_r * k_t or len(pairs) != len(self.messages):
            raise ConfigurationError("block must carry exactly one message per (master, receiver) pair")

    @property
    def k_t(self) -> int:
        return len(self.pi)

    @property
    def k_r(self) -> int:
        return len(self.messages) // len(self.pi)

    @property
    def tau(self) -> int:
        return len(self.messages[0].coop_window)

    def coop_window_at(self, position: int) -> tuple[int, ...]:
        """Cooperation window of the transmitter at block position `position` (1-based)."""
        return tuple(self.pi[wrap_index(position + off, self.k_t) - 1] for off in range(self.tau))

    def message_for(self, receiver: int, position: int) -> MessageId:
        """The unique message intended to `receiver` mastered by the transmitter
        at block position `position`."""
        master = self.pi[wrap_index(position, self.k_t) - 1]
        for m in self.messages:
            if m.receiver == receiver and m.master == master:
                return m
        raise KeyError((receiver, position))


@dataclass(frozen=True)
class CachePlacement:
    """Cache contents per transmitter under the uncoded subset placement."""

    cfg: NetworkConfig
    caches: tuple[frozenset[SubfileId], ...]

    def cache_of(self, transmitter: int) -> frozenset[SubfileId]:
        return self.caches[transmitter - 1]

    def cachers_of(self, subfile: SubfileId) -> tuple[int, ...]:
        return subfile.storage_set

    def cache_fraction(self) -> Fraction:
        """Stored fraction of the library per transmitter; equals M / N = tau / k_t."""
        subfile_size = Fraction(1, math.comb(self.cfg.k_t, self.cfg.tau))
        return len(self.caches[0]) * subfile_size / self.cfg.n_files


def validate_demand(cfg: NetworkConfig, demand: Sequence[int]) -> tuple[int, ...]:
    """Check a demand vector (one file index per receiver; repeats allowed)."""
    d = tuple(int(x) for x in demand)
    if len(d) != cfg.k_r:
        raise ConfigurationError(f"demand must list {cfg.k_r} files, got {len(d)}")
    if any(not 1 <= x <= cfg.n_files for x in d):
        raise ConfigurationError(f"demand entries must lie in 1..{cfg.n_files}, got {d}")
    return d


def circular_permutations(k: int) -> list[tuple[int, ...]]:
    """All (k-1)! orderings of 1..k around a fixed circle, anchored at 1.

    Anchoring the smallest element first picks one representative per
    rotation class, so the result is duplicate-free and deterministic.
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    return [(1,) + rest for rest in permutations(range(2, k + 1))]


def place_content(cfg: NetworkConfig) -> CachePlacement:
    """Uncoded placement: file f is split into C(k_t, tau) subfiles, one per
    tau-subset of transmitters, and each subfile is cached by exactly the
    transmitters in its subset."""
    subsets = list(combinations(range(1, cfg.k_t + 1), cfg.tau))
    caches = []
    for i in range(1, cfg.k_t + 1):
        caches.append(frozenset(
            SubfileId(f, s)
            for f in range(1, cfg.n_files + 1)
            for s in subsets
            if i in s
        ))
    return CachePlacement(cfg=cfg, caches=tuple(caches))


def split_subfiles(cfg: NetworkConfig, demand: Sequence[int]) -> list[MessageId]:
    """Split every requested subfile into tau! * (k_t - tau)! messages.

    A message is keyed by an ordering of the subfile's cachers (master
    first, then the cooperating transmitters) and an ordering of the
    non-cachers; the demanded file is implied by the receiver index.
    Returns k_r * k_t! messages.
    """
    validate_demand(cfg, demand)
    others = set(range(1, cfg.k_t + 1))
    out = []
    for j in range(1, cfg.k_r + 1):
        for storage in combinations(range(1, cfg.k_t + 1), cfg.tau):
            rest = sorted(others - set(storage))
            for coop in permutations(storage):
                for excl in permutations(rest):
                    out.append(MessageId(receiver=j, coop_window=coop, excluded_window=excl))
    return out


def schedule_blocks(
    cfg: NetworkConfig,
    demand: Sequence[int],
    *,
    allow_large: bool = False,
) -> list[TransmissionBlock]:
    """Group the split messages into (k_t - 1)! transmission blocks.

    Block pi carries, for every block position i and receiver j, the message
    whose cooperation window is pi[i : i+tau-1] and whose excluded window is
    pi[i+tau : k_t+i-1]. The blocks partition the split_subfiles output.
    """
    validate_demand(cfg, demand)
    if cfg.k_t > SCHEDULE_FACTORIAL_GUARD and not allow_large:
        raise ConfigurationError(
            f"k_t={cfg.k_t} would enumerate {math.factorial(cfg.k_t - 1)} blocks; "
            "pass allow_large=True to override"
        )
    blocks = []
    for pi in circular_permutations(cfg.k_t):
        msgs = []
        for i in range(1, cfg.k_t + 1):
            coop = tuple(pi[wrap_index(i + off, cfg.k_t) - 1] for off in range(cfg.tau))
            excl = tuple(
                pi[wrap_index(i + cfg.tau + off, cfg.k_t) - 1]
                for off in range(cfg.k_t - cfg.tau)
            )
            for j in range(1, cfg.k_r + 1):
                msgs.append(MessageId(receiver=j, coop_window=coop, excluded_window=excl))
        blocks.append(TransmissionBlock(pi=pi, messages=tuple(msgs)))
    return blocks


def schedule_to_json(
    cfg: NetworkConfig,
    demand: Sequence[int],
    blocks: Iterable[TransmissionBlock],
) -> str:
    """Serialize a block schedule; block index maps to its message list."""
    doc = {
        "config": cfg.as_dict(),
        "demand": list(validate_demand(cfg, demand)),
        "blocks": [
            {"index": b_idx, "pi": list(b.pi), "messages": [m.as_dict() for m in b.messages]}
            for b_idx, b in enumerate(blocks)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def schedule_from_json(text: str) -> tuple[NetworkConfig, tuple[int, ...], list[TransmissionBlock]]:
    """Inverse of schedule_to_json."""
    doc = json.loads(text)
    cfg = NetworkConfig(**doc["config"])
    demand = validate_demand(cfg, doc["demand"])
    blocks = []
    for entry in sorted(doc["blocks"], key=lambda e: e["index"]):
        msgs = tuple(
            MessageId(
                receiver=m["receiver"],
                coop_window=tuple(m["coop_window"]),
                excluded_window=tuple(m["excluded_window"]),
            )
            for m in entry["messages"]
        )
        blocks.append(TransmissionBlock(pi=tuple(entry["pi"]), messages=msgs))
    return cfg, demand, blocks


def placement_to_json(placement: CachePlacement) -> str:
    """Serialize cache contents per transmitter."""
    doc = {
        "config": placement.cfg.as_dict(),
        "caches": [
            {
                "transmitter": i + 1,
                "subfiles": [
                    {"file": s.file, "storage_set": list(s.storage_set)}
                    for s in sorted(cache)
                ],
            }
            for i, cache in enumerate(placement.caches)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
