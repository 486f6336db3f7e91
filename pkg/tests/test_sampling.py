import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valleyscape import ConfigError, Domain, RunConfig
from valleyscape.sampling import (
    GAMMA,
    MASK64,
    RngStream,
    job_stream_id,
    mix64,
    parse_domain,
    substream,
    uniform_in_box,
)


def splitmix64_reference(state, count):
    """Textbook sequential SplitMix64 on Python ints."""
    out = []
    for _ in range(count):
        state = (state + GAMMA) & MASK64
        out.append(mix64(state))
    return out


class TestGenerator:
    def test_published_splitmix64_vector(self):
        # reference outputs of SplitMix64 seeded with 1234567
        assert splitmix64_reference(1234567, 3) == [
            6457827717110365317, 3203168211198807973, 9817491932198370423]

    @pytest.mark.parametrize("seed,sid", [(0, 0), (42, 0), (42, 7), (MASK64, MASK64)])
    def test_vectorized_matches_sequential(self, seed, sid):
        stream = RngStream(seed, sid)
        got = stream.next_uint64(50).tolist()
        state0 = mix64(seed ^ mix64(((sid + 1) * GAMMA) & MASK64))
        assert got == splitmix64_reference(state0, 50)

    def test_counter_based_chunks(self):
        whole = substream(9, 3).next_uint64(20)
        s = substream(9, 3)
        parts = np.concatenate([s.next_uint64(7), s.next_uint64(0), s.next_uint64(13)])
        assert np.array_equal(whole, parts)
        assert s.counter == 20

    def test_uniform_53_bit_construction(self):
        s = substream(5, 5)
        raw = s.clone().next_uint64(10)
        u = s.random(10)
        assert np.array_equal(u, (raw >> np.uint64(11)).astype(float) / 2.0 ** 53)
        assert np.all((u >= 0) & (u < 1))

    def test_clone_is_independent(self):
        a = substream(1, 1)
        a.random(3)
        b = a.clone()
        assert np.array_equal(a.random(5), b.random(5))

    def test_rejects_out_of_range_seed(self):
        with pytest.raises(ConfigError):
            RngStream(-1)
        with pytest.raises(ConfigError):
            RngStream(0, 1 << 64)


class TestSubstream:
    def test_pure(self):
        assert np.array_equal(substream(77, 4).random(100), substream(77, 4).random(100))

    def test_distinct_ids_differ(self):
        assert not np.array_equal(substream(77, 1).random(100), substream(77, 2).random(100))

    def test_independent_of_call_order(self):
        first = substream(3, 2).random(10)
        other = substream(3, 1)
        other.random(1000)
        assert np.array_equal(substream(3, 2).random(10), first)

    def test_job_stream_id_packs_indices(self):
        assert job_stream_id(0, 0) == 0
        assert job_stream_id(1, 2) == (1 << 16) | 2
        assert len({job_stream_id(i, j) for i in range(20) for j in range(5)}) == 100
        with pytest.raises(ConfigError):
            job_stream_id(1 << 16)


class TestUniformInBox:
    def test_empty(self):
        assert uniform_in_box(substream(0, 0), Domain([0, 0], [1, 1]), 0).shape == (0, 2)

    def test_containment(self):
        pts = uniform_in_box(substream(1, 0), Domain([5, 5], [6, 6]), 1000)
        assert np.all((pts >= 5) & (pts <= 6))

    def test_determinism(self):
        d = Domain([-1, -2], [1, 2])
        assert np.array_equal(uniform_in_box(substream(42, 0), d, 3),
                              uniform_in_box(substream(42, 0), d, 3))

    def test_consumes_count_times_d(self):
        s = substream(2, 0)
        uniform_in_box(s, Domain.cube(0, 1, 3), 7)
        assert s.counter == 21

    def test_degenerate_domain_rejected(self):
        with pytest.raises(ConfigError):
            Domain([5, 5], [5, 6])

    def test_moments(self):
        u = substream(2024, 0).random(100_000)
        assert 0.497 <= u.mean() <= 0.503
        assert abs(u.var() - 1 / 12) <= 0.002

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, MASK64), sid=st.integers(0, 1000),
           lo=st.floats(-1e3, 1e3), width=st.floats(1e-3, 1e3))
    def test_points_stay_in_box(self, seed, sid, lo, width):
        d = Domain([lo, lo], [lo + width, lo + width])
        pts = uniform_in_box(substream(seed, sid), d, 50)
        assert np.all(d.contains(pts))


class TestRunConfig:
    def test_defaults_valid(self):
        cfg = RunConfig()
        assert cfg.n_population == 100 and cfg.n_select == 10

    def test_text_round_trip(self):
        cfg = RunConfig(seed=7, n_population=50, n_select=5, domain=parse_domain("-1:2,-1:2"),
                        deltas=(1.0, 2.5), samples=1000, function="rosenbrock")
        again = RunConfig.from_text(cfg.to_text())
        assert again == cfg
        assert again.digest() == cfg.digest()

    def test_comments_and_override(self):
        base = RunConfig.from_text("# experiment\nseed = 3  # inline\nm=4\n\n")
        assert base.seed == 3 and base.n_select == 4
        cfg = RunConfig.from_mapping({"seed": "9"}, base)
        assert cfg.seed == 9 and cfg.n_select == 4

    @pytest.mark.parametrize("text", ["m=0", "m=200", "samples=0", "deltas=1,-1", "bogus=1",
                                      "seed=x", "noequals"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            RunConfig.from_text(text)

    def test_load(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("function=fz\ndomain=-5:5,-5:5\n")
        cfg = RunConfig.load(p)
        assert cfg.function == "fz"
        assert cfg.domain == Domain([-5, -5], [5, 5])
