"""Round trips and parse failures for the delimited trajectory/estimate files."""

import hashlib

import numpy as np
import pytest

from pdmpest import (
    DensityEstimate,
    EstimateMeta,
    ParseError,
    Trajectory,
    default_partition,
    estimate_density_f,
    origin_state,
    read_estimate,
    read_trajectory,
    simulate_chain,
    source_square,
    write_estimate,
    write_trajectory,
)
from pdmpest.bench import BenchParams, build_bench_model

GOLDEN_SHA256 = "58e53c490aa8501098bcddddd85530121ff3903b989935b9b3e93264a8f30de5"
GOLDEN_BYTES = 17366


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, newline="\n")
    return path


def _tiny_traj(seed=None):
    return Trajectory(
        states=np.array([[0.25], [0.5], [0.75]]),
        sojourns=np.array([0.0, 0.125, 0.5]),
        forced=np.array([False, False, True]),
        seed=seed,
    )


class TestTrajectoryRoundTrip:
    def test_bench_fixture_round_trips_exactly(self, bench_traj, tmp_path):
        """Every coordinate, sojourn, flag, and the seed survive a write/read."""
        path = tmp_path / "traj.csv"
        write_trajectory(bench_traj, path)
        back = read_trajectory(path)
        assert np.array_equal(back.states, bench_traj.states)
        assert np.array_equal(back.sojourns, bench_traj.sojourns)
        assert np.array_equal(back.forced, bench_traj.forced)
        assert back.seed == 12345

    def test_forced_flags_and_seed_none(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trajectory(_tiny_traj(), path)
        text = path.read_text()
        assert not text.startswith("#")
        back = read_trajectory(path)
        assert back.seed is None
        assert back.forced.tolist() == [False, False, True]

    def test_seed_comment_written_and_parsed(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trajectory(_tiny_traj(seed=42), path)
        assert path.read_text().splitlines()[0] == "# seed=42"
        assert read_trajectory(path).seed == 42

    def test_exact_file_layout(self, tmp_path):
        """Pin the column order and the shortest-form float rendering."""
        path = tmp_path / "t.csv"
        write_trajectory(_tiny_traj(seed=7), path)
        assert path.read_text() == (
            "# seed=7\n"
            "i,z1,s,forced\n"
            "0,0.25,0,0\n"
            "1,0.5,0.125,0\n"
            "2,0.75,0.5,1\n"
        )

    def test_seventeen_digit_floats_survive(self, tmp_path):
        traj = Trajectory(
            states=np.array([[1.0 / 3.0], [np.pi]]),
            sojourns=np.array([0.0, np.e * 1e-7]),
            forced=np.array([False, False]),
        )
        path = tmp_path / "t.csv"
        write_trajectory(traj, path)
        back = read_trajectory(path)
        assert back.states[1, 0] == np.pi
        assert back.sojourns[1] == np.e * 1e-7

    def test_blank_lines_are_tolerated(self, tmp_path):
        path = _write(
            tmp_path,
            "t.csv",
            "i,z1,s,forced\n\n0,0.1,0,0\n\n1,0.2,0.3,0\n\n",
        )
        back = read_trajectory(path)
        assert back.n_transitions == 1

    def test_golden_checksum(self, bench_model, tmp_path):
        """A fixed short run must serialize to byte-identical output forever."""
        traj = simulate_chain(bench_model, origin_state(), 200, 0)
        path = tmp_path / "golden.csv"
        write_trajectory(traj, path)
        data = path.read_bytes()
        assert len(data) == GOLDEN_BYTES
        assert hashlib.sha256(data).hexdigest() == GOLDEN_SHA256


class TestTrajectoryParseErrors:
    def _expect(self, path, lineno, fragment):
        with pytest.raises(ParseError) as info:
            read_trajectory(path)
        err = info.value
        assert err.line == lineno
        assert str(err).startswith(f"{path}:{lineno}: ")
        assert fragment in str(err)
        return err

    def test_malformed_seed_comment(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "# seed=zebra\ni,z1,s,forced\n0,0.1,0,0\n")
        self._expect(path, 1, "malformed seed comment")

    def test_unexpected_header(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,x1,s,forced\n0,0.1,0,0\n")
        self._expect(path, 1, "unexpected header")

    def test_header_without_state_columns(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,s,forced\n")
        self._expect(path, 1, "unexpected header")

    def test_wrong_field_count(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0.2,0,0\n")
        self._expect(path, 2, "expected 4 fields, got 5")

    def test_non_numeric_token(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n0,oops,0,0\n")
        self._expect(path, 2, "oops")

    def test_out_of_order_index(self, tmp_path):
        path = _write(
            tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0,0\n2,0.2,0.5,0\n"
        )
        self._expect(path, 3, "record index 2 out of order, expected 1")

    def test_bad_forced_flag(self, tmp_path):
        path = _write(
            tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0,0\n1,0.2,0.5,2\n"
        )
        self._expect(path, 3, "forced flag must be 0 or 1")

    def test_non_finite_value(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n0,nan,0,0\n")
        self._expect(path, 2, "non-finite value")

    def test_record_zero_with_sojourn(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0.5,0\n")
        self._expect(path, 2, "record 0 must have s=0 and forced=0")

    def test_record_zero_with_forced_flag(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0,1\n")
        self._expect(path, 2, "record 0 must have s=0 and forced=0")

    def test_nonpositive_sojourn(self, tmp_path):
        path = _write(
            tmp_path, "bad.csv", "i,z1,s,forced\n0,0.1,0,0\n1,0.2,0,0\n"
        )
        self._expect(path, 3, "sojourn must be positive")

    def test_header_only_file(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "i,z1,s,forced\n")
        self._expect(path, 1, "no transition records")

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "")
        self._expect(path, 1, "no header line")

    def test_comments_only_file(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "# seed=3\n# other comment\n")
        self._expect(path, 1, "no header line")

    def test_error_carries_path_attribute(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "")
        err = self._expect(path, 1, "no header line")
        assert err.path == str(path)


def _meta(**overrides):
    fields = dict(
        n_transitions=4000,
        source_label="A",
        horizon_t=0.8,
        bandwidths=(("A", 0.3889), ("D-A", None)),
        seed=12345,
    )
    fields.update(overrides)
    return EstimateMeta(**fields)


class TestEstimateRoundTrip:
    def test_round_trip_without_truth(self, tmp_path):
        est = DensityEstimate(
            grid=np.array([0.1, 0.2, 0.3]),
            values=np.array([0.5, 1.5, 0.0]),
            meta=_meta(),
        )
        path = tmp_path / "est.csv"
        write_estimate(est, path)
        back, truth = read_estimate(path)
        assert truth is None
        assert np.array_equal(back.grid, est.grid)
        assert np.array_equal(back.values, est.values)
        assert back.meta == est.meta

    def test_round_trip_with_truth_column(self, tmp_path):
        est = DensityEstimate(
            grid=np.array([0.1, 0.2]),
            values=np.array([0.4, 0.6]),
            meta=_meta(seed=None),
        )
        truth = np.array([0.41, 0.59])
        path = tmp_path / "est.csv"
        write_estimate(est, path, truth=truth)
        text = path.read_text()
        assert "s,f_hat,f_true" in text
        assert "# seed=" not in text
        back, truth_back = read_estimate(path)
        assert np.array_equal(truth_back, truth)
        assert back.meta.seed is None

    def test_awkward_cell_labels_round_trip(self, tmp_path):
        """Labels holding commas or equals signs must not confuse the parser."""
        meta = _meta(bandwidths=(("A[0,1]", 0.25), ("w=3", None), ("D-A", 0.5)))
        est = DensityEstimate(
            grid=np.array([0.1]), values=np.array([1.0]), meta=meta
        )
        path = tmp_path / "est.csv"
        write_estimate(est, path)
        back, _ = read_estimate(path)
        assert back.meta.bandwidths == meta.bandwidths
        assert back.meta.bandwidth_of("w=3") is None
        assert back.meta.bandwidth_of("A[0,1]") == 0.25

    def test_truth_shape_mismatch_rejected(self, tmp_path):
        est = DensityEstimate(
            grid=np.array([0.1, 0.2]), values=np.array([0.0, 0.0]), meta=_meta()
        )
        with pytest.raises(ValueError, match="truth column"):
            write_estimate(est, tmp_path / "est.csv", truth=np.array([1.0]))

    def test_estimator_output_rewrite_is_byte_identical(
        self, bench_traj, bench_partition, std_config, tmp_path
    ):
        """write -> read -> write reproduces the file byte for byte."""
        params = BenchParams()
        est = estimate_density_f(
            bench_traj,
            source_square(params),
            bench_partition,
            std_config,
            t_star_floor=1.0 - params.epsilon * np.sqrt(2.0),
        )
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_estimate(est, first)
        back, _ = read_estimate(first)
        write_estimate(back, second)
        assert second.read_bytes() == first.read_bytes()


class TestEstimateParseErrors:
    def _expect(self, path, lineno, fragment):
        with pytest.raises(ParseError) as info:
            read_estimate(path)
        assert info.value.line == lineno
        assert fragment in str(info.value)

    META = "# n_transitions=10\n# source=A\n# horizon=0.8\n"

    def test_missing_metadata(self, tmp_path):
        path = _write(tmp_path, "bad.csv", "s,f_hat\n0.1,0.5\n")
        self._expect(path, 1, "missing metadata comments")

    def test_no_data_rows(self, tmp_path):
        path = _write(tmp_path, "bad.csv", self.META + "s,f_hat\n")
        self._expect(path, 1, "no data rows")

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "bad.csv", self.META)
        self._expect(path, 1, "no header line")

    def test_unexpected_header(self, tmp_path):
        path = _write(tmp_path, "bad.csv", self.META + "time,density\n0.1,0.5\n")
        self._expect(path, 4, "unexpected header")

    def test_bandwidth_comment_without_label(self, tmp_path):
        path = _write(
            tmp_path,
            "bad.csv",
            self.META + "# bandwidth =0.5\ns,f_hat\n0.1,0.5\n",
        )
        self._expect(path, 4, "malformed bandwidth comment")

    def test_bandwidth_comment_with_bad_value(self, tmp_path):
        path = _write(
            tmp_path,
            "bad.csv",
            self.META + "# bandwidth A=wide\ns,f_hat\n0.1,0.5\n",
        )
        self._expect(path, 4, "wide")

    def test_malformed_horizon(self, tmp_path):
        path = _write(
            tmp_path,
            "bad.csv",
            "# n_transitions=10\n# source=A\n# horizon=soon\ns,f_hat\n0.1,0.5\n",
        )
        self._expect(path, 3, "soon")

    def test_row_field_count(self, tmp_path):
        path = _write(
            tmp_path, "bad.csv", self.META + "s,f_hat\n0.1,0.5,0.6\n"
        )
        self._expect(path, 5, "expected 2 fields, got 3")

    def test_row_non_numeric(self, tmp_path):
        path = _write(tmp_path, "bad.csv", self.META + "s,f_hat\n0.1,high\n")
        self._expect(path, 5, "high")
