from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def seed_for_item(master: int, index: int) -> int:
    """Counter-based seed for task item ``index`` (trial, grid row, ...)."""

    return _splitmix64((master & MASK64) ^ (index & MASK64))
