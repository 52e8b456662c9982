import json

import numpy as np
import pytest

from orthobounds import (
    COMPLEX,
    REAL,
    CoefficientBox,
    SuiteConfig,
    check_condition,
    condition_slack_norm,
    counterpart_bounds,
    emit_tightness_table,
    extremal_instance,
    instance_scale,
    run_suite,
)
from orthobounds.generate import (
    Instance,
    PairInstance,
    certified_box_arrays,
    generate_certified_instance,
    generate_certified_pair,
    generate_midpoint_pair,
    generate_twosided_pair,
    generate_unconstrained_instance,
    rng_from_seed,
)
from orthobounds import serialize
from orthobounds.bounds import companion_abs_bound, companion_bound
from orthobounds.suite import tightness_rows


class TestRngStreams:
    def test_same_key_reproduces(self):
        a = rng_from_seed(42, 1, 2).standard_normal(5)
        b = rng_from_seed(42, 1, 2).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = rng_from_seed(42, 1, 2).standard_normal(5)
        b = rng_from_seed(42, 1, 3).standard_normal(5)
        assert not np.array_equal(a, b)


class TestGenerateCertifiedInstance:
    def test_every_draw_certifies(self):
        for i in range(200):
            field = COMPLEX if i % 2 else REAL
            rng = rng_from_seed(1000, i)
            inst = generate_certified_instance(rng, 6, 3, field)
            report = check_condition(*inst)
            assert report.holds, f"instance {i} has slack {report.slack_inner:.3e}"

    def test_boundary_slack_factor_gives_zero_norm_slack(self):
        rng = rng_from_seed(7, 0)
        from orthobounds.space import SpaceContext
        from orthobounds.generate import random_family, random_vector

        ctx = SpaceContext(REAL, 5)
        fam = random_family(rng, ctx, 2)
        x = random_vector(rng, ctx)
        mid, d = certified_box_arrays(rng, ctx, x, fam, (0, 1), slack_factor=1.0)
        box = CoefficientBox.centered((0, 1), mid, d)
        slack = condition_slack_norm(ctx, x, fam, (0, 1), box)
        scale = instance_scale(ctx, x, box)
        assert abs(slack) <= 1e-9 * scale

    def test_full_span_family_gives_zero_residual(self):
        for i in range(20):
            rng = rng_from_seed(8, i)
            inst = generate_certified_instance(rng, 4, 4, REAL)
            report = counterpart_bounds(*inst)
            scale = instance_scale(inst.ctx, inst.x, inst.box)
            assert abs(report.residual) <= 1e-10 * scale

    def test_unconstrained_mixes_signs(self):
        holds = 0
        for i in range(200):
            rng = rng_from_seed(9, i)
            inst = generate_unconstrained_instance(rng, 4, 2, REAL)
            if check_condition(*inst).holds:
                holds += 1
        assert 20 < holds < 180


class TestPairGenerators:
    def test_certified_pair_has_both_conditions(self):
        for i in range(50):
            rng = rng_from_seed(10, i)
            pair = generate_certified_pair(rng, 5, 2, COMPLEX if i % 2 else REAL)
            assert check_condition(
                pair.ctx, pair.x, pair.family, pair.indices, pair.box_x
            ).holds
            assert check_condition(
                pair.ctx, pair.y, pair.family, pair.indices, pair.box_y
            ).holds

    def test_midpoint_pair_certifies_companion(self):
        for i in range(50):
            rng = rng_from_seed(11, i)
            pair = generate_midpoint_pair(rng, 5, 2, COMPLEX if i % 2 else REAL)
            report = companion_bound(
                pair.ctx, pair.x, pair.y, pair.family, pair.indices, pair.box_x
            )
            assert report.certified

    def test_twosided_pair_certifies_both_midpoints(self):
        for i in range(50):
            rng = rng_from_seed(12, i)
            pair = generate_twosided_pair(rng, 5, 2, COMPLEX if i % 2 else REAL)
            report = companion_abs_bound(
                pair.ctx, pair.x, pair.y, pair.family, pair.indices, pair.box_x
            )
            assert report.certified


class TestSuite:
    def test_default_grid_small_count_passes(self):
        outcome = run_suite(SuiteConfig(instance_count=2))
        assert outcome.ok
        assert outcome.total_failed == 0
        for tally in outcome.checks.values():
            assert tally.failed == 0

    def test_reproducible_modulo_timestamp(self):
        cfg = SuiteConfig(instance_count=2, dims=(2, 4), family_sizes=(1, 2), fields=(REAL,))
        first = run_suite(cfg).to_dict()
        second = run_suite(cfg).to_dict()
        first.pop("generated_at")
        second.pop("generated_at")
        assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)

    def test_writes_outcome_json(self, tmp_path):
        path = tmp_path / "outcome.json"
        cfg = SuiteConfig(instance_count=1, dims=(2,), family_sizes=(1,), fields=(REAL,))
        outcome = run_suite(cfg, out_path=path)
        loaded = json.loads(path.read_text())
        assert loaded["ok"] == outcome.ok
        assert set(loaded["checks"]) == set(outcome.checks)

    def test_failures_are_recorded(self):
        # force failures with an absurd tolerance on the identity check by
        # running the real suite config but verifying the bookkeeping path
        # directly instead
        outcome = run_suite(SuiteConfig(instance_count=1, dims=(2,), family_sizes=(1,), fields=(REAL,)))
        inst = generate_certified_instance(rng_from_seed(1, 1), 2, 1, REAL)
        outcome.record("synthetic", False, -1.0, inst)
        assert not outcome.ok
        assert outcome.failures[-1]["check"] == "synthetic"
        assert outcome.failures[-1]["margin"] == -1.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SuiteConfig(instance_count=0)
        with pytest.raises(ValueError):
            SuiteConfig(tolerance=0.0)


class TestTightnessTable:
    def test_rows_for_worked_examples(self, tmp_path):
        ctx3 = None
        inst = extremal_instance(1.0).as_instance()
        from orthobounds.space import OrthonormalFamily, SpaceContext, as_vector

        ctx = SpaceContext(REAL, 3)
        fam = OrthonormalFamily.from_members(ctx, np.eye(3))
        x = as_vector(ctx, (0.5, 0.3, 0.2))
        y = as_vector(ctx, (0.2, 0.6, 0.1))
        box = CoefficientBox((0, 1), (0, 0), (1, 1))
        pair = PairInstance(ctx, x, y, fam, (0, 1), box, box)
        degenerate = Instance(
            ctx, fam.member(0), fam, (0,), CoefficientBox((0,), (1.0,), (1.0,))
        )
        rows = tightness_rows(
            [("extremal", inst), ("r3-gruss", pair), ("degenerate", degenerate)]
        )
        by_id = {row[0]: row for row in rows}
        assert by_id["extremal"][6] == pytest.approx(0.25, rel=1e-12)
        assert by_id["r3-gruss"][1] == pytest.approx(0.02, rel=1e-12)
        assert by_id["r3-gruss"][2] == pytest.approx(0.09527787310303887, rel=1e-12)
        assert by_id["r3-gruss"][3] == pytest.approx(0.5, rel=1e-14)
        assert by_id["degenerate"][1] == pytest.approx(0.0, abs=1e-15)
        assert by_id["degenerate"][3] == 0.0
        assert by_id["degenerate"][6] == 0.0

        out = tmp_path / "tightness.csv"
        emit_tightness_table(
            [("extremal", inst), ("r3-gruss", pair), ("degenerate", degenerate)], out
        )
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("instance-id,")
        assert len(lines) == 4

    def test_csv_floats_round_trip(self, tmp_path):
        value = 0.1 + 0.2  # 0.30000000000000004
        out = tmp_path / "roundtrip.csv"
        serialize.write_csv(out, ("v",), [(value,)])
        text = out.read_text().splitlines()[1]
        assert float(text) == value


class TestSerialization:
    def test_scalar_encoding(self):
        assert serialize.encode_scalar(1.5, REAL) == 1.5
        assert serialize.encode_scalar(1.5 + 0.5j, COMPLEX) == [1.5, 0.5]
        assert serialize.decode_scalar(1.5) == 1.5 + 0j
        assert serialize.decode_scalar([1.5, 0.5]) == 1.5 + 0.5j

    def test_instance_roundtrip_real(self):
        inst = generate_certified_instance(rng_from_seed(5, 0), 4, 2, REAL)
        payload = serialize.instance_to_dict(inst)
        clone = serialize.instance_from_dict(json.loads(json.dumps(payload)))
        np.testing.assert_array_equal(inst.x, clone.x)
        np.testing.assert_array_equal(inst.family.members, clone.family.members)
        assert inst.box.lower == clone.box.lower
        assert inst.box.upper == clone.box.upper
        assert counterpart_bounds(*inst).to_dict() == counterpart_bounds(*clone).to_dict()

    def test_pair_roundtrip_complex(self):
        pair = generate_certified_pair(rng_from_seed(5, 1), 4, 2, COMPLEX)
        payload = serialize.instance_to_dict(pair)
        clone = serialize.instance_from_dict(json.loads(json.dumps(payload)))
        assert isinstance(clone, PairInstance)
        np.testing.assert_array_equal(pair.y, clone.y)
        assert pair.box_y.upper == clone.box_y.upper

    def test_digest_is_stable_and_content_sensitive(self):
        inst = generate_certified_instance(rng_from_seed(5, 2), 3, 1, REAL)
        payload = serialize.instance_to_dict(inst)
        assert serialize.digest(payload) == serialize.digest(json.loads(json.dumps(payload)))
        mutated = dict(payload)
        mutated["indices"] = [0]
        mutated["x"] = [v + 1 for v in payload["x"]]
        assert serialize.digest(mutated) != serialize.digest(payload)

    def test_report_payload_has_fixed_field_names(self):
        inst = generate_certified_instance(rng_from_seed(5, 3), 3, 2, REAL)
        payload = serialize.instance_to_dict(inst)
        body = serialize.report_payload(counterpart_bounds(*inst), payload)
        assert {"residual", "refined", "coarse", "slack_inner", "slack_norm", "certified", "digest"} <= set(body)

    def test_l2_instance_roundtrip(self):
        from orthobounds import WeightedL2Context, periodic_trapezoid, sampled

        ctx = WeightedL2Context.uniform_density(periodic_trapezoid(16))
        f = sampled(ctx, np.sin(ctx.space.nodes))
        payload = serialize.l2_instance_to_dict(ctx, {"f": f})
        ctx2, funcs = serialize.l2_instance_from_dict(json.loads(json.dumps(payload)))
        assert ctx2.space.kind == "periodic-trapezoid"
        np.testing.assert_array_equal(funcs["f"], f)
