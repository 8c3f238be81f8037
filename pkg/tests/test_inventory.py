import json

import pytest

from symptom_crosswalk.errors import FormatError, ValidationError
from symptom_crosswalk.inventory import (
    Administration,
    Cohort,
    Inventory,
    Item,
    LikertScale,
    ParticipantRecord,
    deduplicate,
    enforce_completeness,
    format_scores_csv,
    parse_inventory,
    parse_scores,
    serialize_inventory,
)

from conftest import SCALE, make_inventory, make_record


def write_inventory(tmp_path, doc, name="inv.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def inventory_doc(n_items=18, dup_id=None, n_labels=5):
    items = [{"item_id": f"q{k}", "text": f"symptom text {k}"} for k in range(1, n_items + 1)]
    if dup_id:
        items[2]["item_id"] = dup_id
        items[4]["item_id"] = dup_id
    return {
        "inventory_id": "demo",
        "name": "Demo Inventory",
        "reference_period": "past 7 days",
        "scale": {"labels": [f"level {i}" for i in range(n_labels)]},
        "items": items,
    }


class TestParseInventory:
    def test_file_order_preserved(self, tmp_path):
        path = write_inventory(tmp_path, inventory_doc(18))
        inv = parse_inventory(path)
        assert len(inv) == 18
        assert inv.item_ids == tuple(f"q{k}" for k in range(1, 19))

    def test_duplicate_item_id_rejected(self, tmp_path):
        path = write_inventory(tmp_path, inventory_doc(dup_id="q3"))
        with pytest.raises(ValidationError, match="q3"):
            parse_inventory(path)

    def test_wrong_scale_arity_rejected(self, tmp_path):
        path = write_inventory(tmp_path, inventory_doc(n_labels=4))
        with pytest.raises(ValidationError, match="5 labels"):
            parse_inventory(path)

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(FormatError):
            parse_inventory(path)

    def test_missing_field_rejected(self, tmp_path):
        doc = inventory_doc()
        del doc["reference_period"]
        with pytest.raises(FormatError, match="reference_period"):
            parse_inventory(write_inventory(tmp_path, doc))

    def test_serialize_round_trip(self, tmp_path):
        doc = inventory_doc(6)
        doc["items"][0]["group"] = "Somatic"
        inv = parse_inventory(write_inventory(tmp_path, doc))
        path2 = write_inventory(tmp_path, serialize_inventory(inv), name="again.json")
        assert parse_inventory(path2) == inv


def test_scale_must_have_five_labels():
    with pytest.raises(ValidationError):
        LikertScale(("a", "b", "c"))


def test_item_text_must_be_nonempty():
    with pytest.raises(ValidationError):
        Item(item_id="q1", text="   ", scale=SCALE)


def test_inventory_needs_two_items():
    with pytest.raises(ValidationError):
        Inventory("x", "X", "", (Item("q1", "text", SCALE),))


def write_scores(tmp_path, rows, name="scores.csv"):
    header = "participant_id,inventory_id,item_id,score,age,sex,timestamp"
    path = tmp_path / name
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return path


class TestParseScores:
    def test_groups_rows_per_participant(self, tmp_path):
        inv = make_inventory("inv_a", 3, prefix="a")
        rows = [f"p1,inv_a,a{k:02d},{k % 5},34,f," for k in (1, 2, 3)]
        cohort = parse_scores(write_scores(tmp_path, rows), [inv])
        assert len(cohort) == 1
        rec = cohort.records[0]
        assert rec.sex == "female"
        assert rec.age == 34.0
        assert rec.responses_for("inv_a") == {"a01": 1, "a02": 2, "a03": 3}

    def test_score_out_of_range_names_row(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        rows = ["p1,inv_a,a01,1,,,", "p1,inv_a,a02,7,,,"]
        with pytest.raises(FormatError, match="row 3"):
            parse_scores(write_scores(tmp_path, rows), [inv])

    def test_non_integer_score_rejected(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        rows = ["p1,inv_a,a01,1.5,,,"]
        with pytest.raises(FormatError, match="not an integer"):
            parse_scores(write_scores(tmp_path, rows), [inv])

    def test_unknown_inventory_rejected(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        rows = ["p1,other,a01,1,,,"]
        with pytest.raises(FormatError, match="other"):
            parse_scores(write_scores(tmp_path, rows), [inv])

    def test_unknown_item_rejected(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        rows = ["p1,inv_a,zz,1,,,"]
        with pytest.raises(FormatError, match="zz"):
            parse_scores(write_scores(tmp_path, rows), [inv])

    def test_bad_header_rejected(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        path = tmp_path / "bad.csv"
        path.write_text("pid,inv,item,score\n", encoding="utf-8")
        with pytest.raises(FormatError, match="header"):
            parse_scores(path, [inv])

    def test_csv_round_trip(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        rows = ["p1,inv_a,a01,1,40,m,2021-01-01", "p1,inv_a,a02,0,40,m,2021-01-01",
                "p2,inv_a,a01,4,,,", "p2,inv_a,a02,2,,,"]
        cohort = parse_scores(write_scores(tmp_path, rows), [inv])
        path2 = tmp_path / "again.csv"
        path2.write_text(format_scores_csv(cohort), encoding="utf-8")
        again = parse_scores(path2, [inv])
        assert [r.participant_id for r in again.records] == ["p1", "p2"]
        assert again.records[0].responses_for("inv_a") == {"a01": 1, "a02": 0}


class TestDeduplicate:
    def test_earliest_timestamp_kept(self):
        rec = ParticipantRecord(
            "p1",
            (
                Administration("bsi", {"q01": 3, "q02": 3}, timestamp="2021-06-01", file_order=0),
                Administration("bsi", {"q01": 1, "q02": 1}, timestamp="2021-01-15", file_order=1),
            ),
        )
        deduped = deduplicate(Cohort((rec,)))
        assert deduped.records[0].responses_for("bsi") == {"q01": 1, "q02": 1}

    def test_no_duplicates_is_identity(self):
        rec = make_record("p1", "inv", {"q01": 2, "q02": 0})
        cohort = Cohort((rec,))
        assert deduplicate(cohort) == cohort

    def test_file_order_breaks_timestampless_ties(self):
        # 4-row fixture: two untimestamped administrations of a 2-item inventory
        rec = ParticipantRecord(
            "p1",
            (
                Administration("inv", {"q01": 1, "q02": 2}, file_order=0),
                Administration("inv", {"q01": 3, "q02": 0}, file_order=1),
            ),
        )
        deduped = deduplicate(Cohort((rec,)))
        assert deduped.records[0].responses_for("inv") == {"q01": 1, "q02": 2}

    def test_parse_then_dedup_keeps_first_occurrence(self, tmp_path):
        inv = make_inventory("inv_a", 2, prefix="a")
        header = "participant_id,inventory_id,item_id,score,age,sex,timestamp"
        rows = ["p1,inv_a,a01,1,,,", "p1,inv_a,a02,2,,,",
                "p1,inv_a,a01,3,,,", "p1,inv_a,a02,0,,,"]
        path = tmp_path / "dups.csv"
        path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
        deduped = deduplicate(parse_scores(path, [inv]))
        assert deduped.records[0].responses_for("inv_a") == {"a01": 1, "a02": 2}

    def test_at_most_one_map_per_inventory_after_dedup(self):
        admins = tuple(
            Administration("inv", {"q01": s, "q02": s}, file_order=i)
            for i, s in enumerate((0, 1, 2))
        ) + (Administration("other", {"x1": 1}, file_order=3),)
        deduped = deduplicate(Cohort((ParticipantRecord("p1", admins),)))
        rec = deduped.records[0]
        assert len(rec.administrations_of("inv")) == 1
        assert len(rec.administrations_of("other")) == 1


class TestEnforceCompleteness:
    def test_incomplete_records_excluded(self):
        inv = make_inventory("inv_a", 3, prefix="a")
        full = {"a01": 1, "a02": 2, "a03": 3}
        records = [make_record(f"p{i}", "inv_a", full, order=i) for i in range(8)]
        records.append(make_record("p8", "inv_a", {"a01": 1, "a02": 2}, order=8))
        records.append(make_record("p9", "inv_a", {"a02": 2, "a03": 0}, order=9))
        kept, excluded = enforce_completeness(Cohort(tuple(records)), inv)
        assert len(kept) == 8
        assert excluded == 2

    def test_complete_cohort_unchanged(self):
        inv = make_inventory("inv_a", 2, prefix="a")
        cohort = Cohort(tuple(
            make_record(f"p{i}", "inv_a", {"a01": 0, "a02": 4}, order=i) for i in range(3)
        ))
        kept, excluded = enforce_completeness(cohort, inv)
        assert kept == cohort
        assert excluded == 0

    def test_filter_oracle_on_hand_built_cohort(self):
        """5-record fixture checked against an independent filter."""
        inv = make_inventory("inv_a", 2, prefix="a")
        other = {"x01": 1}
        records = (
            make_record("p1", "inv_a", {"a01": 1, "a02": 2}),
            make_record("p2", "inv_a", {"a01": 1}),                 # incomplete
            make_record("p3", "other", other),                      # missing inv_a entirely
            make_record("p4", "inv_a", {"a01": 0, "a02": 0}),
            make_record("p5", "inv_a", {"a02": 3}),                 # incomplete
        )
        cohort = Cohort(records)
        kept, excluded = enforce_completeness(cohort, inv)

        expected_ids = [
            r.participant_id
            for r in records
            if any(
                a.inventory_id == "inv_a" and set(a.scores) == {"a01", "a02"}
                for a in r.administrations
            )
        ]
        assert list(kept.participant_ids()) == expected_ids == ["p1", "p4"]
        assert excluded == 3
        # p3 keeps its other-inventory data in the original cohort
        assert cohort.record("p3").responses_for("other") == other


def test_record_rejects_out_of_range_scores():
    with pytest.raises(ValidationError):
        Administration("inv", {"q01": 5})
    with pytest.raises(ValidationError):
        Administration("inv", {"q01": -1})


def test_cohort_rejects_duplicate_participants():
    recs = (make_record("p1", "inv", {"q01": 1}), make_record("p1", "inv", {"q01": 2}))
    with pytest.raises(ValidationError):
        Cohort(recs)
