"""Expectation catalog: goals, sub-goals, and device expectations.

The catalog is pure data. It holds the twenty-five core NISTIR 8228
expectations plus three optional items drawn from the manufacturer-facing
NISTIR 8259 series, each cross-referenced to CSF subcategories and SP 800-53
controls. It is loaded from a JSON document, integrity-checked, and pinned by
a SHA-256 checksum of its canonical serialization so an assessment can always
name the exact catalog revision that scored it.

Catalog document layout::

    {
      "version": "1.0.0",
      "checksum": "<optional; sha-256 of canonical content>",
      "sub_goals": [{"id": "...", "goal": "DeviceSecurity", "title": "..."}, ...],
      "expectations": [
        {"id": 1, "text": "...", "goal": "DeviceSecurity",
         "sub_goal": "asset_management", "csf_refs": ["ID.AM-1"],
         "control_refs": ["CM-8"], "source": "IR8228", "implications": null},
        ...
      ]
    }

Reference tokens are opaque validated strings ("ID.AM-1(2)", "CM-8"); the
catalog does not model the CSF or control-catalog documents themselves.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

from .canonical import canonical_bytes, sha256_hex
from .errors import IntegrityError, NotFoundError, ParseError


class Goal(str, Enum):
    DEVICE_SECURITY = "DeviceSecurity"
    DATA_SECURITY = "DataSecurity"
    INDIVIDUAL_PRIVACY = "IndividualPrivacy"


GOAL_TITLES = {
    Goal.DEVICE_SECURITY: "Protect Device Security",
    Goal.DATA_SECURITY: "Protect Data Security",
    Goal.INDIVIDUAL_PRIVACY: "Protect Individuals' Privacy",
}


class Source(str, Enum):
    IR8228 = "IR8228"
    IR8259_OPTIONAL = "IR8259Optional"


EXPECTED_CORE_COUNT = 25
EXPECTED_OPTIONAL_COUNT = 3

# Matches both CSF subcategory tokens (ID.AM-1, PR.AC-1(7)) and SP 800-53
# control tokens (CM-8, IA-2(1)).
REF_TOKEN = re.compile(r"^[A-Z]{2}(\.[A-Z]{2})?-[0-9]+(\([0-9]+\))*$")

DEFAULT_CATALOG_RESOURCE = "default_catalog.json"


@dataclass(frozen=True)
class SubGoal:
    id: str
    goal: Goal
    title: str

    def to_dict(self) -> dict:
        return {"id": self.id, "goal": self.goal.value, "title": self.title}


@dataclass(frozen=True)
class Expectation:
    id: int
    text: str
    goal: Goal
    sub_goal: str
    csf_refs: tuple[str, ...]
    control_refs: tuple[str, ...]
    source: Source
    implications: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "goal": self.goal.value,
            "sub_goal": self.sub_goal,
            "csf_refs": list(self.csf_refs),
            "control_refs": list(self.control_refs),
            "source": self.source.value,
            "implications": self.implications,
        }


@dataclass(frozen=True)
class ExpectationCatalog:
    version: str
    sub_goals: tuple[SubGoal, ...]
    expectations: tuple[Expectation, ...]
    checksum: str

    @cached_property
    def _by_id(self) -> dict[int, Expectation]:
        return {exp.id: exp for exp in self.expectations}

    def expectation_by_id(self, expectation_id: int) -> Expectation:
        exp = self._by_id.get(expectation_id)
        if exp is None:
            raise NotFoundError(f"no expectation with id {expectation_id}")
        return exp

    def expectations_for_control(self, control: str) -> list[Expectation]:
        """All expectations listing ``control``, ordered by id."""
        return [e for e in self.expectations if control in e.control_refs]

    def sub_goal_by_id(self, sub_goal_id: str) -> SubGoal:
        for sg in self.sub_goals:
            if sg.id == sub_goal_id:
                return sg
        raise NotFoundError(f"no sub-goal with id {sub_goal_id}")

    def core_expectations(self) -> tuple[Expectation, ...]:
        return tuple(e for e in self.expectations if e.source is Source.IR8228)

    def optional_expectations(self) -> tuple[Expectation, ...]:
        return tuple(
            e for e in self.expectations if e.source is Source.IR8259_OPTIONAL
        )

    @cached_property
    def _scope_ids(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        core = tuple(sorted(e.id for e in self.core_expectations()))
        full = tuple(sorted(e.id for e in self.expectations))
        return core, full

    def in_scope_ids(self, include_optional: bool) -> tuple[int, ...]:
        return self._scope_ids[1] if include_optional else self._scope_ids[0]

    def ordered_sub_goals(self, ids: set[int] | None = None) -> list[SubGoal]:
        """Sub-goals in display order: by their first expectation ordinal.

        ``ids`` restricts the view to expectations in that id set.
        """
        first_seen: dict[str, int] = {}
        for exp in self.expectations:
            if ids is not None and exp.id not in ids:
                continue
            first_seen.setdefault(exp.sub_goal, exp.id)
        return sorted(
            (sg for sg in self.sub_goals if sg.id in first_seen),
            key=lambda sg: first_seen[sg.id],
        )

    def content_dict(self) -> dict:
        """Checksummed content: everything except the checksum itself."""
        return {
            "version": self.version,
            "sub_goals": [sg.to_dict() for sg in self.sub_goals],
            "expectations": [e.to_dict() for e in self.expectations],
        }

    def to_dict(self) -> dict:
        doc = self.content_dict()
        doc["checksum"] = self.checksum
        return doc

    def canonical_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())


def _require_fields(obj: dict, required: dict, optional: dict, where: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError(f"{where}: unknown field {key!r}")
    for key, types in required.items():
        if key not in obj:
            raise ParseError(f"{where}: missing field {key!r}")
        if not isinstance(obj[key], types):
            raise ParseError(f"{where}: field {key!r} has wrong type")
    for key, types in optional.items():
        if key in obj and obj[key] is not None and not isinstance(obj[key], types):
            raise ParseError(f"{where}: field {key!r} has wrong type")


def _parse_goal(token, where: str) -> Goal:
    try:
        return Goal(token)
    except ValueError:
        raise ParseError(f"{where}: unknown goal {token!r}") from None


def _check_refs(tokens, kind: str, where: str) -> tuple[str, ...]:
    out = []
    for token in tokens:
        if not isinstance(token, str) or not REF_TOKEN.match(token):
            raise IntegrityError(f"{where}: malformed {kind} token {token!r}")
        out.append(token)
    return tuple(out)


def catalog_from_dict(doc: dict) -> ExpectationCatalog:
    """Build and integrity-check a catalog from a parsed document."""
    _require_fields(
        doc,
        {"version": str, "sub_goals": list, "expectations": list},
        {"checksum": str},
        "catalog",
    )

    sub_goals = []
    seen_sub_goals: set[str] = set()
    for raw in doc["sub_goals"]:
        _require_fields(raw, {"id": str, "goal": str, "title": str}, {}, "sub_goal")
        if raw["id"] in seen_sub_goals:
            raise IntegrityError(f"duplicate sub-goal id {raw['id']!r}")
        seen_sub_goals.add(raw["id"])
        sub_goals.append(
            SubGoal(id=raw["id"], goal=_parse_goal(raw["goal"], f"sub_goal {raw['id']!r}"), title=raw["title"])
        )
    sub_goal_map = {sg.id: sg for sg in sub_goals}

    expectations = []
    seen_ids: set[int] = set()
    for raw in doc["expectations"]:
        _require_fields(
            raw,
            {
                "id": int,
                "text": str,
                "goal": str,
                "sub_goal": str,
                "csf_refs": list,
                "control_refs": list,
                "source": str,
            },
            {"implications": str},
            "expectation",
        )
        eid = raw["id"]
        where = f"expectation {eid}"
        if isinstance(eid, bool) or eid < 1:
            raise IntegrityError(f"{where}: id must be a positive integer")
        if eid in seen_ids:
            raise IntegrityError(f"duplicate expectation id {eid}")
        seen_ids.add(eid)
        if not raw["text"].strip():
            raise IntegrityError(f"{where}: text is empty")
        goal = _parse_goal(raw["goal"], where)
        try:
            source = Source(raw["source"])
        except ValueError:
            raise ParseError(f"{where}: unknown source {raw['source']!r}") from None
        sub_goal = sub_goal_map.get(raw["sub_goal"])
        if sub_goal is None:
            raise IntegrityError(f"{where}: dangling sub_goal {raw['sub_goal']!r}")
        if sub_goal.goal is not goal:
            raise IntegrityError(
                f"{where}: goal {goal.value} does not match sub-goal "
                f"{sub_goal.id!r} (goal {sub_goal.goal.value})"
            )
        csf_refs = _check_refs(raw["csf_refs"], "CSF", where)
        control_refs = _check_refs(raw["control_refs"], "control", where)
        if source is Source.IR8228 and not csf_refs:
            raise IntegrityError(f"{where}: IR8228 expectations need at least one csf_ref")
        expectations.append(
            Expectation(
                id=eid,
                text=raw["text"],
                goal=goal,
                sub_goal=sub_goal.id,
                csf_refs=csf_refs,
                control_refs=control_refs,
                source=source,
                implications=raw.get("implications"),
            )
        )

    # Normalize to canonical order so load -> serialize -> load is identity.
    sub_goals.sort(key=lambda sg: sg.id)
    expectations.sort(key=lambda e: e.id)

    for source, expected in (
        (Source.IR8228, EXPECTED_CORE_COUNT),
        (Source.IR8259_OPTIONAL, EXPECTED_OPTIONAL_COUNT),
    ):
        ids = sorted(e.id for e in expectations if e.source is source)
        if len(ids) != expected:
            raise IntegrityError(
                f"expected {expected} {source.value} expectations, found {len(ids)}"
            )
        if ids != list(range(ids[0], ids[0] + len(ids))):
            raise IntegrityError(f"{source.value} ordinals are not contiguous: {ids}")

    catalog = ExpectationCatalog(
        version=doc["version"],
        sub_goals=tuple(sub_goals),
        expectations=tuple(expectations),
        checksum="",
    )
    checksum = sha256_hex(canonical_bytes(catalog.content_dict()))
    declared = doc.get("checksum")
    if declared is not None and declared != checksum:
        raise IntegrityError(
            f"checksum mismatch: document declares {declared}, content is {checksum}"
        )
    return ExpectationCatalog(
        version=catalog.version,
        sub_goals=catalog.sub_goals,
        expectations=catalog.expectations,
        checksum=checksum,
    )


def load_catalog(source) -> ExpectationCatalog:
    """Load a catalog from a path, bytes, or file-like object."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed catalog document: {exc}") from exc
    return catalog_from_dict(doc)


@lru_cache(maxsize=1)
def default_catalog() -> ExpectationCatalog:
    """The catalog bundled with the package."""
    data = resources.files(__package__).joinpath("data", DEFAULT_CATALOG_RESOURCE)
    return load_catalog(data.read_bytes())
