"""
Unit tests for classification reports
"""
import json
import os

import numpy as np
import pytest

from core.dynamics import TildeOrbit
from core.operator_file import read_operator_file
from core.report import REPORT_VERSION, ReportError, build_report, dumps_report, to_jsonable, write_report

from conftest import DATA_DIR


class TestToJsonable:
    def test_complex_and_arrays(self):
        value = to_jsonable({"z": 1 + 2j, "v": np.array([1.0, 2.0]), "n": np.int64(3), "flag": np.bool_(True)})
        assert value == {"z": [1.0, 2.0], "v": [1.0, 2.0], "n": 3, "flag": True}
        assert isinstance(value["flag"], bool)

    def test_complex_arrays(self):
        assert to_jsonable(np.array([1j, 2])) == [[0.0, 1.0], [2.0, 0.0]]

    def test_floats_use_17_significant_digits(self):
        """Test the float text and that every value reads back as the same double"""
        rng = np.random.default_rng(95)
        values = np.concatenate([rng.normal(size=200), rng.normal(size=50) * 1e-300, [1 / 3, 2 / np.sqrt(3), 5e-324]])
        text = dumps_report({"third": 1 / 3, "one": 1.0, "values": values})
        assert '"third": 0.33333333333333331' in text
        assert '"one": 1.0,' in text
        parsed = json.loads(text)
        assert isinstance(parsed["one"], float)
        assert [float(v).hex() for v in parsed["values"]] == [float(v).hex() for v in values]

    def test_non_finite_floats(self):
        parsed = json.loads(dumps_report({"v": [float("inf"), -float("inf")]}))
        assert parsed["v"] == [float("inf"), -float("inf")]

    def test_dataclass(self):
        value = to_jsonable(TildeOrbit(True, 1.0, False, 64))
        assert value == {"bounded_up_to_horizon": True, "sup_seen": 1.0, "converged_to_zero": False, "steps": 64}


class TestBuildReport:
    """Test report contents on the sample operators"""

    def test_flagship(self, fast_settings):
        report = build_report(read_operator_file(DATA_DIR / "abc_flagship.qqo"), settings=fast_settings)
        assert report["report"] == REPORT_VERSION
        assert report["operator"]["format"] == "qqo-abc/1"
        assert report["positivity"]["dstar1"]["worst"] == pytest.approx(1.0, abs=1e-12)
        assert report["positivity"]["triple_norm"]["value"] == pytest.approx(1.0, abs=1e-9)
        assert report["positivity"]["dstar3"]["value"] == pytest.approx(5 / 3)
        assert report["ks"]["violation_found"]
        assert report["ks"]["ks2"]["margin"] <= -1 / 3 + 1e-12
        family = report["family"]
        assert family["bb5"]["value"] == pytest.approx(1 / 3)
        assert family["e14"] == pytest.approx(1.0)
        assert family["not_ks"] == "proved_not_ks"
        assert family["bb3"]["value"] == pytest.approx(4 / 3)
        assert report["structure"]["flip_symmetric"]
        assert report["structure"]["haar_deviation"] == 0.0

    def test_boundary_abc_is_inconclusive(self, fast_settings):
        report = build_report(read_operator_file(DATA_DIR / "abc_boundary.qqo"), settings=fast_settings)
        assert report["family"]["not_ks"] == "inconclusive"
        assert report["family"]["regime"] == "vi"

    def test_v0(self, fast_settings):
        report = build_report(read_operator_file(DATA_DIR / "v0_diagonal.qqo"), settings=fast_settings)
        assert report["family"]["family"] == "diagonal"
        assert report["family"]["bb3"]["verdict"]
        assert not report["family"]["bb4"]["verdict"]
        assert report["dynamics"]["alpha"] == pytest.approx(4.0)
        assert report["dynamics"]["class"] == "bounded_majorant"
        points = sorted(tuple(np.round(p, 8)) for p in report["dynamics"]["fixed_points"])
        assert np.allclose(points, [[0, 0, 0], [1, 0, 0]], atol=1e-8)

    def test_positivity_violation(self, fast_settings):
        report = build_report(read_operator_file(DATA_DIR / "b111_1p5.qqo"), settings=fast_settings)
        assert not report["positivity"]["dstar1"]["verdict"]
        assert report["positivity"]["boundary_search"]["violation_found"]
        assert report["positivity"]["boundary_search"]["min_eigenvalue"] == pytest.approx(-0.5)
        assert not report["positivity"]["inconclusive"]
        assert not report["structure"]["convolution_candidate"]
        assert "family" not in report

    def test_zero_operator(self, fast_settings):
        report = build_report(read_operator_file(DATA_DIR / "zero.qqo"), settings=fast_settings)
        assert not report["ks"]["violation_found"]
        assert report["dynamics"]["class"] == "contraction"
        assert report["structure"]["convolution_candidate"]

    def test_serialization_is_deterministic(self, fast_settings):
        parsed = read_operator_file(DATA_DIR / "abc_flagship.qqo")
        first = dumps_report(build_report(parsed, settings=fast_settings))
        threaded = fast_settings.model_copy(update={"workers": 4})
        second = dumps_report(build_report(parsed, settings=threaded))
        assert first == second
        assert first.endswith("\n")
        assert json.loads(first)["operator"]["sha256"] == parsed.sha256


class TestWriteReport:
    def test_atomic_write(self, tmp_path):
        path = tmp_path / "reports" / "out.json"
        write_report(str(path), {"value": 1 + 1j})
        assert json.loads(path.read_text(encoding="utf-8")) == {"value": [1.0, 1.0]}
        assert not os.path.exists(str(path) + ".tmp")

    def test_write_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(ReportError):
            write_report(str(blocker / "out.json"), {})
