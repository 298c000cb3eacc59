"""CLI: batch processing, table export, serve smoke test."""

import csv
import json
import signal
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from fixtures import GAZETTEER_TSV, paper_fixture, simple_pdf
from layerlab.cli import main
from layerlab.docmodel import deserialize


def write_batch_config(path: Path, input_dir: Path, output_dir: Path, predictors=()):
    config = {
        "input_dir": str(input_dir),
        "output_dir": str(output_dir),
        "predictors": list(predictors),
        "continue_on_error": True,
    }
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


@pytest.fixture()
def batch_dirs(tmp_path):
    input_dir = tmp_path / "in"
    output_dir = tmp_path / "out"
    input_dir.mkdir()
    return input_dir, output_dir


class TestProcessCommand:
    def test_happy_path_three_pdfs(self, batch_dirs, tmp_path):
        input_dir, output_dir = batch_dirs
        pdf, _ = paper_fixture()
        (input_dir / "a.pdf").write_bytes(pdf)
        (input_dir / "b.pdf").write_bytes(simple_pdf(["Second file here."]))
        (input_dir / "c.pdf").write_bytes(simple_pdf(["Third file here."]))
        config = write_batch_config(tmp_path / "batch.yaml", input_dir, output_dir)
        result = CliRunner().invoke(main, ["process", "--config", str(config)])
        assert result.exit_code == 0, result.output
        docs = list(output_dir.glob("*/document.json"))
        assert len(docs) == 3
        assert result.output.count("ok ") == 3

    def test_corrupt_pdf_continues_and_exits_2(self, batch_dirs, tmp_path):
        input_dir, output_dir = batch_dirs
        (input_dir / "a.pdf").write_bytes(simple_pdf(["Fine."]))
        (input_dir / "broken.pdf").write_bytes(b"not a pdf at all")
        (input_dir / "c.pdf").write_bytes(simple_pdf(["Also fine."]))
        config = write_batch_config(tmp_path / "batch.yaml", input_dir, output_dir)
        result = CliRunner().invoke(main, ["process", "--config", str(config)])
        assert result.exit_code == 2
        assert len(list(output_dir.glob("*/document.json"))) == 2
        error_file = output_dir / "broken.error.txt"
        assert error_file.exists()
        assert "NotAPdfError" in error_file.read_text()

    def test_rerun_byte_identical(self, batch_dirs, tmp_path):
        input_dir, output_dir = batch_dirs
        (input_dir / "a.pdf").write_bytes(paper_fixture()[0])
        config = write_batch_config(tmp_path / "batch.yaml", input_dir, output_dir)
        assert CliRunner().invoke(main, ["process", "--config", str(config)]).exit_code == 0
        [doc_path] = output_dir.glob("*/document.json")
        first = doc_path.read_bytes()
        assert CliRunner().invoke(main, ["process", "--config", str(config)]).exit_code == 0
        assert doc_path.read_bytes() == first

    def test_bad_predictor_config_exits_1(self, batch_dirs, tmp_path):
        input_dir, output_dir = batch_dirs
        (input_dir / "a.pdf").write_bytes(simple_pdf(["x"]))
        config = write_batch_config(
            tmp_path / "batch.yaml", input_dir, output_dir,
            predictors=[{"name": "chat", "config": {"model": "m"}}],
        )
        result = CliRunner().invoke(main, ["process", "--config", str(config)])
        assert result.exit_code == 1
        assert "config error" in result.output

    def test_missing_input_dir_exits_1(self, tmp_path):
        config = write_batch_config(tmp_path / "batch.yaml", tmp_path / "absent", tmp_path / "out")
        result = CliRunner().invoke(main, ["process", "--config", str(config)])
        assert result.exit_code == 1

    def test_region_sidecar_picked_up(self, batch_dirs, tmp_path):
        input_dir, output_dir = batch_dirs
        (input_dir / "a.pdf").write_bytes(paper_fixture()[0])
        (input_dir / "a.regions.json").write_text(
            json.dumps({"tables": [[0, 0.1, 0.85, 0.3, 0.1]]})
        )
        config = write_batch_config(tmp_path / "batch.yaml", input_dir, output_dir)
        assert CliRunner().invoke(main, ["process", "--config", str(config)]).exit_code == 0
        [doc_path] = output_dir.glob("*/document.json")
        doc = deserialize(doc_path.read_bytes())
        assert len(doc.layers["tables"].entities) == 2


class TestExportTables:
    def make_processed_doc(self, tmp_path):
        input_dir = tmp_path / "in"
        output_dir = tmp_path / "out"
        input_dir.mkdir()
        (input_dir / "a.pdf").write_bytes(paper_fixture()[0])
        config = write_batch_config(
            tmp_path / "batch.yaml", input_dir, output_dir,
            predictors=[{"name": "geometric_table", "config": {}}],
        )
        assert CliRunner().invoke(main, ["process", "--config", str(config)]).exit_code == 0
        [doc_path] = output_dir.glob("*/document.json")
        return doc_path

    def test_export_csv_round_trip(self, tmp_path):
        doc_path = self.make_processed_doc(tmp_path)
        out = tmp_path / "csv"
        result = CliRunner().invoke(
            main, ["export-tables", "--doc", str(doc_path), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        [csv_path] = out.glob("*.csv")
        doc = deserialize(doc_path.read_bytes())
        expected = doc.layers["image_geometric_table"].entities[0].metadata["table"]
        with csv_path.open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        header, data = rows[0], rows[1:]
        rebuilt = {name: [row[i] for row in data] for i, name in enumerate(header)}
        assert rebuilt == expected

    def test_export_format_exact(self, tmp_path):
        from layerlab.cli import _write_table_csv

        path = tmp_path / "t.csv"
        _write_table_csv(path, {"A": ["1", "2"], "B": ["x", "y"]})
        assert path.read_bytes() == b"A,B\r\n1,x\r\n2,y\r\n"

    def test_no_tables_exit_3(self, tmp_path):
        input_dir = tmp_path / "in"
        output_dir = tmp_path / "out"
        input_dir.mkdir()
        (input_dir / "a.pdf").write_bytes(simple_pdf(["no tables here"]))
        config = write_batch_config(tmp_path / "batch.yaml", input_dir, output_dir)
        CliRunner().invoke(main, ["process", "--config", str(config)])
        [doc_path] = output_dir.glob("*/document.json")
        result = CliRunner().invoke(
            main, ["export-tables", "--doc", str(doc_path), "--out", str(tmp_path / "csv")]
        )
        assert result.exit_code == 3


class TestServeCommand:
    def test_ephemeral_port_binds_and_serves(self, tmp_path):
        proc = subprocess.Popen(
            [sys.executable, "-m", "layerlab.cli", "serve", "--port", "0",
             "--data-dir", str(tmp_path / "data")],
            stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
        )
        try:
            line = proc.stdout.readline()
            assert "serving on http://" in line
            url = line.strip().split()[-1]
            deadline = time.time() + 10
            payload = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(url + "/predictors", timeout=1) as resp:
                        payload = json.loads(resp.read())
                    break
                except Exception:
                    time.sleep(0.1)
            assert payload is not None
            assert [d["name"] for d in payload] == [
                "gazetteer", "chat", "geometric_table", "remote_image"
            ]
            assert (tmp_path / "data").is_dir()
        finally:
            proc.send_signal(signal.SIGINT)
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()

    def test_port_in_use_exits_1(self, tmp_path):
        import socket

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        try:
            result = subprocess.run(
                [sys.executable, "-m", "layerlab.cli", "serve", "--port", str(port),
                 "--data-dir", str(tmp_path / "data")],
                capture_output=True, text=True, timeout=30,
            )
            assert result.returncode == 1
            assert "cannot bind" in result.stderr
        finally:
            sock.close()
