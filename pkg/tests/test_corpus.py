import pytest

from mtal.corpus import (
    ColumnSchema,
    CorpusFormatError,
    Sample,
    format_stats,
    load_split,
    parse_lines,
    split_stats,
    stats_as_dict,
)
from mtal.tasks import TaskTriple

FULL = ColumnSchema(
    id_column=0,
    text_column=1,
    offensive_column=2,
    hate_column=3,
    vulgar_column=4,
    violent_column=5,
)
TEST_ONLY_OFFENSIVE = ColumnSchema(id_column=0, text_column=1, offensive_column=2)


def write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


class TestLoadSplit:
    def test_three_line_file(self, tmp_path):
        path = write(
            tmp_path,
            "train.tsv",
            [
                "t1\tكلام عادي\tNOT_OFF\tNOT_HS\tNOT_VLG\tNOT_V",
                "t2\tكلام سيء\tOFF\tHS\tNOT_VLG\tNOT_V",
                "t3\tكلام عنيف\tOFF\tNOT_HS\tVLG\tV",
            ],
        )
        samples = load_split(path, FULL)
        assert [s.id for s in samples] == ["t1", "t2", "t3"]
        assert samples[0].labels == TaskTriple(False, False, False)
        assert samples[1].labels == TaskTriple(True, False, False)
        assert samples[2].labels == TaskTriple(True, True, True)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "empty.tsv", [])
        assert load_split(path, FULL) == []

    def test_order_preserving_and_idempotent(self, tmp_path):
        lines = [f"id{i}\tنص رقم {i}\tOFF\tNOT_HS\tNOT_VLG\tNOT_V" for i in range(20)]
        path = write(tmp_path, "train.tsv", lines)
        first = load_split(path, FULL)
        second = load_split(path, FULL)
        assert first == second
        assert [s.id for s in first] == [f"id{i}" for i in range(20)]

    def test_crlf_accepted(self, tmp_path):
        path = tmp_path / "crlf.tsv"
        path.write_bytes("t1\tنص\tOFF\tNOT_HS\tNOT_VLG\tNOT_V\r\n".encode("utf-8"))
        samples = load_split(path, FULL)
        assert samples[0].labels.offensive is True

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_split(tmp_path / "nope.tsv", FULL)

    def test_column_count_mismatch_names_line(self, tmp_path):
        path = write(
            tmp_path,
            "bad.tsv",
            [
                "t1\tنص\tOFF\tNOT_HS\tNOT_VLG\tNOT_V",
                "t2\tنص قصير\tOFF",
            ],
        )
        with pytest.raises(CorpusFormatError) as excinfo:
            load_split(path, FULL)
        assert excinfo.value.errors[0].line == 2
        assert "columns" in excinfo.value.errors[0].message

    def test_unrecognized_label_names_line_and_token(self, tmp_path):
        path = write(tmp_path, "bad.tsv", ["t1\tنص\tMAYBE\tNOT_HS\tNOT_VLG\tNOT_V"])
        with pytest.raises(CorpusFormatError) as excinfo:
            load_split(path, FULL)
        assert excinfo.value.errors[0].line == 1
        assert "MAYBE" in excinfo.value.errors[0].message

    def test_all_errors_collected(self, tmp_path):
        path = write(
            tmp_path,
            "bad.tsv",
            [
                "t1\tنص\tWHAT\tNOT_HS\tNOT_VLG\tNOT_V",
                "t2\tنص\tOFF\tNOT_HS\tNOT_VLG\tNOT_V",
                "t3\t\tOFF\tNOT_HS\tNOT_VLG\tNOT_V",
                "t4\tنص",
            ],
        )
        with pytest.raises(CorpusFormatError) as excinfo:
            load_split(path, FULL)
        assert [e.line for e in excinfo.value.errors] == [1, 3, 4]

    def test_hate_column_read_and_discarded(self, tmp_path):
        path = write(tmp_path, "t.tsv", ["t1\tنص\tOFF\tHS\tNOT_VLG\tNOT_V"])
        (sample,) = load_split(path, FULL)
        assert not hasattr(sample, "hate")
        assert sample.labels == TaskTriple(True, False, False)

    def test_test_split_offensive_only_schema(self, tmp_path):
        path = write(tmp_path, "test.tsv", ["t1\tنص\tOFF", "t2\tنص اخر\tNOT_OFF"])
        samples = load_split(path, TEST_ONLY_OFFENSIVE)
        assert samples[0].labels == TaskTriple(True, None, None)
        assert samples[1].labels == TaskTriple(False, None, None)

    def test_dash_placeholder_means_unlabeled(self, tmp_path):
        path = write(tmp_path, "test.tsv", ["t1\tنص\tOFF\tNOT_HS\t-\t-"])
        (sample,) = load_split(path, FULL)
        assert sample.labels == TaskTriple(True, None, None)

    def test_case_insensitive_tokens(self, tmp_path):
        path = write(tmp_path, "t.tsv", ["t1\tنص\toff\tNOT_HS\tnot_vlg\tnot_v"])
        (sample,) = load_split(path, FULL)
        assert sample.labels == TaskTriple(True, False, False)

    def test_custom_tokens(self, tmp_path):
        schema = ColumnSchema(
            id_column=0,
            text_column=1,
            offensive_column=2,
            offensive_tokens=("1", "0"),
        )
        path = write(tmp_path, "t.tsv", ["a\tنص\t1", "b\tنص\t0"])
        samples = load_split(path, schema)
        assert [s.labels.offensive for s in samples] == [True, False]

    def test_header_skipped(self, tmp_path):
        schema = ColumnSchema(id_column=0, text_column=1, offensive_column=2, has_header=True)
        path = write(tmp_path, "t.tsv", ["id\ttext\tlabel", "a\tنص\tOFF"])
        samples = load_split(path, schema)
        assert len(samples) == 1

    def test_blank_lines_skipped(self, tmp_path):
        path = write(tmp_path, "t.tsv", ["t1\tنص\tOFF", "", "t2\tاخر\tNOT_OFF"])
        assert len(load_split(path, TEST_ONLY_OFFENSIVE)) == 2


class TestSchemaValidation:
    def test_duplicate_columns_rejected(self):
        with pytest.raises(ValueError):
            ColumnSchema(id_column=0, text_column=0, offensive_column=1)

    def test_negative_column_rejected(self):
        with pytest.raises(ValueError):
            ColumnSchema(id_column=-1, text_column=0, offensive_column=1)

    def test_identical_tokens_rejected(self):
        with pytest.raises(ValueError):
            ColumnSchema(
                id_column=0, text_column=1, offensive_column=2, offensive_tokens=("X", "x")
            )

    def test_required_columns(self):
        assert FULL.required_columns == 6
        assert TEST_ONLY_OFFENSIVE.required_columns == 3


class TestSplitStats:
    def make(self, labels):
        return Sample(id="x", raw_text="نص", labels=labels)

    def test_empty_list(self):
        stats = split_stats([])
        assert stats.total == 0
        assert stats_as_dict(stats)["offensive.positive"] == 0

    def test_hand_count(self):
        samples = [
            self.make(TaskTriple(True, False, False)),
            self.make(TaskTriple(True, False, False)),
            self.make(TaskTriple(False, False, False)),
            self.make(TaskTriple(False, False, False)),
        ]
        stats = split_stats(samples)
        assert stats.tasks.offensive.positive == 2
        assert stats.tasks.offensive.negative == 2

    def test_counts_partition_total(self):
        samples = [
            self.make(TaskTriple(True, None, False)),
            self.make(TaskTriple(False, True, None)),
            self.make(TaskTriple(True, None, None)),
        ]
        stats = split_stats(samples)
        for task_stats in stats.tasks:
            assert task_stats.positive + task_stats.negative + task_stats.unlabeled == stats.total

    def test_format_stats_schema(self):
        stats = split_stats([self.make(TaskTriple(True, False, None))])
        text = format_stats(stats)
        assert "total=1\n" in text
        assert "offensive.positive=1\n" in text
        assert "vulgar.unlabeled=1\n" in text


class TestParseLines:
    def test_returns_errors_without_raising(self):
        samples, errors = parse_lines(["a\tنص\tOFF", "b\tنص\tBAD"], TEST_ONLY_OFFENSIVE)
        assert len(samples) == 1
        assert len(errors) == 1
        assert errors[0].line == 2
