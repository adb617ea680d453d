"""
Tests for output files, the run manifest, operation logs and the ordered
parallel map.
"""

import json
import logging

import numpy as np
import pytest
import yaml

from decoupler.artifacts import ArtifactWriter, RunManifest, file_digest, read_csv, read_metadata, write_csv
from decoupler.logging_config import ConsoleFormatter, JSONFormatter, LogContext, OperationLogger, current_context
from decoupler.parallel import ordered_map


def test_csv_metadata_block(tmp_path):
    """Test that metadata lines precede the header and floats keep 12 digits."""
    path = write_csv(
        tmp_path / "table.csv",
        [{"a": 1.0 / 3.0, "b": 2}, {"a": np.float64(0.5)}],
        {"command": "spectrum", "levels": (4, 3, 4), "scale": np.float64(0.25)},
    )
    lines = path.read_text().splitlines()

    assert lines[:3] == ["# command: spectrum", "# levels: [4, 3, 4]", "# scale: 0.25"]
    assert lines[3] == "a,b"
    assert lines[4].startswith("0.333333333333,")
    assert lines[5] == "0.5,nan"
    assert read_metadata(path)["levels"] == "[4, 3, 4]"
    assert len(read_csv(path)) == 2


def test_csv_column_order(tmp_path):
    """Test that an explicit column list fixes order and fills gaps."""
    path = write_csv(tmp_path / "t.csv", [{"b": 1}], columns=["a", "b"])

    assert path.read_text().splitlines() == ["a,b", "nan,1"]


def test_empty_table_with_columns(tmp_path):
    """Test that an empty table still gets its header."""
    path = write_csv(tmp_path / "empty.csv", [], {"note": "none"}, columns=["x", "y"])

    assert path.read_text().splitlines() == ["# note: none", "x,y"]


def test_writer_records_digests(tmp_path):
    """Test that every written file appears in the manifest with its digest."""
    manifest = RunManifest(command="decoupler idle-search", config={"coupler": {"alpha": 0.2347}}, version="1.0.0")
    writer = ArtifactWriter(tmp_path / "run", manifest)
    csv_path = writer.csv("idle_point.csv", [{"phi_ext_over_Phi0": 0.46}])
    text_path = writer.text("idle_point.txt", "phi_ext: 0.46\n")

    manifest_path = writer.finish()
    data = yaml.safe_load(manifest_path.read_text())

    assert data["status"] == "ok"
    assert data["files"] == {"idle_point.csv": file_digest(csv_path), "idle_point.txt": file_digest(text_path)}
    assert data["config"]["coupler"]["alpha"] == 0.2347
    assert data["wall_clock_s"] >= 0.0


def test_operation_logger_writes_json_lines(tmp_path):
    """Test that operation entries go to a JSON-lines file and the summary counts them."""
    op_logger = OperationLogger("idle_search", tmp_path)
    op_logger.info("grid", points=41)
    op_logger.warning("degenerate objective")
    op_logger.success("done", phi_ext=2.9)

    lines = (tmp_path / "idle_search.jsonl").read_text().splitlines()
    entries = [json.loads(line) for line in lines]
    summary = op_logger.get_summary()

    assert [e["message"] for e in entries] == ["grid", "degenerate objective", "done"]
    assert entries[0]["points"] == 41
    assert entries[2]["status"] == "success"
    assert summary["total_entries"] == 3
    assert summary["warnings"] == 1
    assert summary["log_file"].endswith("idle_search.jsonl")


def test_writer_adds_operation_logs(tmp_path):
    """Test that operation log files are recorded in the manifest."""
    writer = ArtifactWriter(tmp_path, RunManifest(command="c", config={}, version="1.0.0"))
    op_logger = OperationLogger("zz_map", tmp_path)
    op_logger.info("cell", index=0)

    writer.add_operation(op_logger.get_summary())

    assert "zz_map.jsonl" in writer.manifest.files
    assert writer.manifest.operations[0]["operation"] == "zz_map"


def _record(message, level=logging.INFO):
    return logging.getLogger("decoupler.test").makeRecord("decoupler.test", level, __file__, 1, message, None, None)


def test_json_formatter_includes_context():
    """Test that LogContext fields reach the JSON record, inner fields winning."""
    with LogContext(run_id="abc123", command="chain-scan"):
        with LogContext(pair=1, command="pair-scan"):
            record = _record("sweep point")
        outer = _record("done")

    data = json.loads(JSONFormatter().format(record))
    assert data["message"] == "sweep point"
    assert data["level"] == "INFO"
    assert data["context"] == {"run_id": "abc123", "command": "pair-scan", "pair": 1}
    assert outer.context == {"run_id": "abc123", "command": "chain-scan"}
    assert current_context() == {}


def test_console_formatter_prefixes_run_and_pair():
    """Test the short context prefix of console lines."""
    with LogContext(run_id="abc123", pair=2, phi_ext=3.0):
        record = _record("labeling failed", logging.WARNING)

    line = ConsoleFormatter().format(record)
    assert "[run_id=abc123 pair=2] decoupler.test: labeling failed" in line
    assert "phi_ext" not in line


def test_operation_log_carries_run_context(tmp_path):
    """Test that operation entries written inside a LogContext carry its fields."""
    op_logger = OperationLogger("chain_scan", tmp_path)
    with LogContext(run_id="abc123", pair=0):
        op_logger.info("pair scanned", flags=0)

    entry = json.loads((tmp_path / "chain_scan.jsonl").read_text().splitlines()[0])
    assert entry["run_id"] == "abc123"
    assert entry["pair"] == 0
    assert entry["flags"] == 0


@pytest.mark.parametrize("threads", [1, 4])
def test_ordered_map_keeps_order(threads):
    """Test that results come back in input order for any thread count."""
    assert ordered_map(lambda x: x * x, range(20), threads=threads) == [x * x for x in range(20)]


def test_ordered_map_propagates_errors():
    """Test that a failing item raises in the caller."""

    def fail_on_three(x):
        if x == 3:
            raise ValueError("item 3")
        return x

    with pytest.raises(ValueError, match="item 3"):
        ordered_map(fail_on_three, range(6), threads=2)
