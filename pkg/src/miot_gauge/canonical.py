"""Canonical serialization and exact number formatting.

Every document the engine emits (catalogs, assessments, score reports, plans,
history events) is JSON in one canonical form: keys sorted lexicographically,
two-space indent, UTF-8, LF line endings, trailing newline. Checksums are
SHA-256 over those bytes, hex lowercase. No canonical document ever contains
a JSON float; all scores travel as exact decimal strings plus rational pairs,
so identical inputs always produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from fractions import Fraction


def canonical_dumps(value) -> str:
    return json.dumps(value, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def canonical_bytes(value) -> bytes:
    return canonical_dumps(value).encode("utf-8")


def canonical_line(value) -> str:
    """Single-line canonical form, used for line-delimited event logs."""
    return json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def utc_now_iso() -> str:
    """Current UTC time, RFC-3339, second precision."""
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _round_half_up(numerator: int, denominator: int) -> int:
    # Ties round away from zero; callers pass non-negative values.
    q, r = divmod(numerator, denominator)
    if 2 * r >= denominator:
        q += 1
    return q


def fraction_to_decimal(value: Fraction, max_digits: int = 4) -> str:
    """Decimal string of ``value``, at most ``max_digits`` fractional digits.

    Exact whenever the expansion terminates within ``max_digits``; otherwise
    rounded half-up. Trailing zeros are trimmed ("0.75", "1", "0.8587").
    """
    sign = "-" if value < 0 else ""
    value = abs(value)
    scale = 10 ** max_digits
    q = _round_half_up(value.numerator * scale, value.denominator)
    digits = f"{q:0{max_digits + 1}d}"
    whole, frac = digits[:-max_digits], digits[-max_digits:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def fraction_to_percent(value: Fraction) -> str:
    """Percentage with exactly two decimals, half-up. Display only."""
    sign = "-" if value < 0 else ""
    value = abs(value) * 100
    q = _round_half_up(value.numerator * 100, value.denominator)
    return f"{sign}{q // 100}.{q % 100:02d}"


def parse_fraction(text) -> Fraction:
    """Parse a decimal or rational string ("0.8", "4/5", 1) exactly.

    Binary floats are rejected: 0.8 the float is not 0.8 the number, and
    canonical output must not depend on float round-tripping.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or isinstance(text, float):
        raise ValueError(f"refusing non-exact value {text!r}; pass a decimal string")
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def ratio_dict(value: Fraction) -> dict:
    return {"numerator": value.numerator, "denominator": value.denominator}


def fraction_from_ratio(obj: dict) -> Fraction:
    return Fraction(int(obj["numerator"]), int(obj["denominator"]))
