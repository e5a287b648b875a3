import json

import pytest

from miot_gauge import Goal, Source, load_catalog
from miot_gauge.catalog import catalog_from_dict
from miot_gauge.errors import IntegrityError, NotFoundError, ParseError


def doc_copy(catalog):
    return json.loads(catalog.canonical_bytes().decode("utf-8"))


def without_checksum(doc):
    doc = dict(doc)
    doc.pop("checksum", None)
    return doc


class TestDefaultCatalog:
    def test_cardinality(self, catalog):
        assert len(catalog.core_expectations()) == 25
        assert len(catalog.optional_expectations()) == 3

    def test_ordinals_contiguous(self, catalog):
        assert [e.id for e in catalog.core_expectations()] == list(range(1, 26))
        assert [e.id for e in catalog.optional_expectations()] == [26, 27, 28]

    def test_three_goals_cover_catalog(self, catalog):
        assert {e.goal for e in catalog.expectations} == set(Goal)
        assert len(Goal) == 3

    def test_expectation_1(self, catalog):
        exp = catalog.expectation_by_id(1)
        assert exp.text == "The device has a built-in unique identifier."
        assert "ID.AM-1" in exp.csf_refs
        assert "CM-8" in exp.control_refs
        assert exp.sub_goal == "asset_management"

    def test_expectation_8(self, catalog):
        exp = catalog.expectation_by_id(8)
        assert exp.text == (
            "The device can uniquely identify each user, device, and process "
            "attempting to logically access it."
        )
        assert exp.csf_refs == ("PR.AC-1(7)",)

    def test_unknown_id(self, catalog):
        with pytest.raises(NotFoundError):
            catalog.expectation_by_id(999)

    def test_sub_goal_goal_consistency(self, catalog):
        for exp in catalog.expectations:
            assert catalog.sub_goal_by_id(exp.sub_goal).goal is exp.goal

    def test_core_items_have_csf_refs(self, catalog):
        for exp in catalog.core_expectations():
            assert exp.csf_refs

    def test_in_scope_ids(self, catalog):
        assert len(catalog.in_scope_ids(False)) == 25
        assert len(catalog.in_scope_ids(True)) == 28


class TestControlLookup:
    def test_cm8_includes_expectation_1(self, catalog):
        ids = [e.id for e in catalog.expectations_for_control("CM-8")]
        assert 1 in ids

    def test_unknown_control_empty(self, catalog):
        assert catalog.expectations_for_control("ZZ-99") == []

    def test_shared_control_ordered_by_id(self, catalog):
        # Derived from the bundled data: CM-8 is carried by the four asset
        # management rows.
        expected = sorted(
            e.id for e in catalog.expectations if "CM-8" in e.control_refs
        )
        assert len(expected) >= 2
        assert [e.id for e in catalog.expectations_for_control("CM-8")] == expected

    def test_membership_property(self, catalog):
        tokens = {t for e in catalog.expectations for t in e.control_refs}
        for token in tokens:
            hits = {e.id for e in catalog.expectations_for_control(token)}
            for exp in catalog.expectations:
                assert (exp.id in hits) == (token in exp.control_refs)


class TestLoadIntegrity:
    def test_round_trip(self, catalog):
        again = load_catalog(catalog.canonical_bytes())
        assert again == catalog
        assert again.checksum == catalog.checksum

    def test_pure_function_of_bytes(self, catalog):
        data = catalog.canonical_bytes()
        assert load_catalog(data) == load_catalog(data)

    def test_malformed_document(self):
        with pytest.raises(ParseError):
            load_catalog(b"{not json")

    def test_duplicate_id(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        clone = dict(doc["expectations"][6])
        assert clone["id"] == 7
        doc["expectations"].append(clone)
        with pytest.raises(IntegrityError, match="7"):
            catalog_from_dict(doc)

    def test_wrong_core_count(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"] = [
            e for e in doc["expectations"] if e["id"] != 25
        ]
        with pytest.raises(IntegrityError, match="expected 25"):
            catalog_from_dict(doc)

    def test_dangling_sub_goal(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][0]["sub_goal"] = "nonexistent"
        with pytest.raises(IntegrityError, match="nonexistent"):
            catalog_from_dict(doc)

    def test_goal_mismatch(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][0]["goal"] = "DataSecurity"
        with pytest.raises(IntegrityError, match="does not match"):
            catalog_from_dict(doc)

    def test_checksum_mismatch(self, catalog):
        doc = doc_copy(catalog)
        doc["checksum"] = "0" * 64
        with pytest.raises(IntegrityError, match="checksum"):
            catalog_from_dict(doc)

    def test_malformed_ref_token(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][0]["csf_refs"] = ["ID-AM-1"]
        with pytest.raises(IntegrityError, match="ID-AM-1"):
            catalog_from_dict(doc)

    def test_core_without_csf_ref(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][0]["csf_refs"] = []
        with pytest.raises(IntegrityError, match="csf_ref"):
            catalog_from_dict(doc)

    def test_empty_text(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][0]["text"] = "  "
        with pytest.raises(IntegrityError, match="text"):
            catalog_from_dict(doc)

    def test_non_contiguous_ordinals(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["expectations"][24]["id"] = 30
        with pytest.raises(IntegrityError, match="contiguous"):
            catalog_from_dict(doc)

    def test_unknown_field_rejected(self, catalog):
        doc = without_checksum(doc_copy(catalog))
        doc["surprise"] = True
        with pytest.raises(ParseError, match="surprise"):
            catalog_from_dict(doc)

    def test_optional_items_may_omit_csf_refs(self, catalog):
        # The bundled optional items carry none, and the catalog still loads.
        optional = catalog.optional_expectations()
        assert all(e.source is Source.IR8259_OPTIONAL for e in optional)
        assert all(not e.csf_refs for e in optional)
