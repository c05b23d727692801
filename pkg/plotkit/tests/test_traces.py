import pytest

from plotkit.traces import EXPECTED_HEADER, TraceFormatError, read_trace

GOOD = (
    EXPECTED_HEADER + "\n"
    "0,0,,,0.5,1.25,0\n"
    "1,0,warm,3,0.125,0.7071067811865476,0\n"
    "2,1,adaptive,0,1.3e-17,,0\n"
)


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="ascii")
    return p


class TestReadTrace:
    def test_parses_fields(self, tmp_path):
        recs = read_trace(write(tmp_path, GOOD))
        assert len(recs) == 3
        assert recs[0].iter == 0 and recs[0].epoch == 0 and recs[0].phase is None
        assert recs[1].phase == "warm" and recs[1].sample_index == 3
        assert recs[1].err_fro == 0.7071067811865476
        assert recs[2].err_fro is None and recs[2].loss == 1.3e-17

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_trace(tmp_path / "nope.csv")

    def test_bad_header(self, tmp_path):
        p = write(tmp_path, "iter,loss\n0,1.0\n")
        with pytest.raises(TraceFormatError):
            read_trace(p)

    def test_bad_field_count(self, tmp_path):
        p = write(tmp_path, EXPECTED_HEADER + "\n0,1,2\n")
        with pytest.raises(TraceFormatError):
            read_trace(p)

    def test_bad_value(self, tmp_path):
        p = write(tmp_path, EXPECTED_HEADER + "\nzero,,,,1.0,,0\n")
        with pytest.raises(TraceFormatError):
            read_trace(p)

    def test_empty_body(self, tmp_path):
        p = write(tmp_path, EXPECTED_HEADER + "\n")
        with pytest.raises(TraceFormatError):
            read_trace(p)
