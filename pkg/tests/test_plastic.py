import numpy as np
import pytest

from hebbwalker import plastic
from hebbwalker.errors import ConfigError, InputError

BEETLE_SHAPES = plastic.shape_chain((27, 64, 32, 18))


def random_rules(shapes, rng, scale=1.0):
    genome = rng.normal(0.0, scale, plastic.rule_genome_size(shapes))
    return plastic.genome_to_rules(genome, shapes)


def scalar_hebbian_oracle(weights, rules, trace):
    """Independent per-synapse loop evaluation of the ABCD update."""
    out = []
    for k, w in enumerate(weights):
        pre, post = trace[k]
        new = w.copy()
        for j in range(w.shape[0]):
            for i in range(w.shape[1]):
                new[j, i] += rules.eta[k][j, i] * (
                    rules.a[k][j, i] * pre[i] * post[j]
                    + rules.b[k][j, i] * pre[i]
                    + rules.c[k][j, i] * post[j]
                    + rules.d[k][j, i]
                )
        out.append(new)
    return out


# ---------------------------------------------------------------------------
# init_weights


def test_init_weights_open_interval_and_count():
    weights = plastic.init_weights(BEETLE_SHAPES, 42)
    assert sum(w.size for w in weights) == 4352
    for w in weights:
        assert np.all(w > -0.01) and np.all(w < 0.01)


def test_init_weights_deterministic_per_seed():
    a = plastic.init_weights(BEETLE_SHAPES, 42)
    b = plastic.init_weights(BEETLE_SHAPES, 42)
    for wa, wb in zip(a, b):
        assert np.array_equal(wa, wb)


def test_init_weights_differs_across_seeds():
    a = plastic.init_weights(BEETLE_SHAPES, 42)
    b = plastic.init_weights(BEETLE_SHAPES, 43)
    assert any(not np.array_equal(wa, wb) for wa, wb in zip(a, b))


def test_incompatible_chain_rejected():
    with pytest.raises(ConfigError):
        plastic.validate_chain((plastic.LayerShape(3, 4), plastic.LayerShape(5, 2)))
    with pytest.raises(ConfigError):
        plastic.LayerShape(0, 4)


# ---------------------------------------------------------------------------
# forward


def test_forward_zero_weights_zero_action():
    weights = [np.zeros((4, 3)), np.zeros((2, 4))]
    action, trace = plastic.forward(weights, np.array([0.3, -0.7, 1.0]))
    assert np.array_equal(action, np.zeros(2))
    assert len(trace) == 2


def test_forward_scalar_tanh():
    weights = [np.array([[0.5]])]
    action, _ = plastic.forward(weights, np.array([1.0]))
    assert action[0] == pytest.approx(np.tanh(0.5), abs=1e-12)
    assert abs(action[0] - 0.46211715726000974) < 1e-12


def test_forward_length_mismatch():
    weights = plastic.init_weights(BEETLE_SHAPES, 0)
    with pytest.raises(InputError):
        plastic.forward(weights, np.zeros(26))


def test_forward_is_pure():
    rng = np.random.default_rng(5)
    weights = plastic.init_weights(BEETLE_SHAPES, 1)
    before = [w.copy() for w in weights]
    obs = rng.uniform(-1, 1, 27)
    a1, _ = plastic.forward(weights, obs)
    a2, _ = plastic.forward(weights, obs)
    assert np.array_equal(a1, a2)
    for w, b in zip(weights, before):
        assert np.array_equal(w, b)


def test_forward_action_bounded():
    rng = np.random.default_rng(9)
    weights = [rng.normal(0, 5, (64, 27)), rng.normal(0, 5, (18, 64))]
    action, _ = plastic.forward(weights, rng.uniform(-1, 1, 27))
    assert np.all(np.abs(action) <= 1.0)


# ---------------------------------------------------------------------------
# hebbian_step


def test_hebbian_direct_substitution():
    shapes = (plastic.LayerShape(1, 1),)
    rules = plastic.genome_to_rules(np.array([1.0, 0.0, 0.0, 0.0, 0.1]), shapes)
    new = plastic.hebbian_step([np.zeros((1, 1))], rules, [(np.ones(1), np.ones(1))])
    assert new[0][0, 0] == pytest.approx(0.1, abs=1e-15)


def test_hebbian_zero_learning_rate_is_identity():
    rng = np.random.default_rng(3)
    shapes = plastic.shape_chain((5, 4, 3))
    weights = plastic.init_weights(shapes, 7)
    genome = rng.normal(0, 1, plastic.rule_genome_size(shapes))
    rules = plastic.genome_to_rules(genome, shapes)
    for k in range(len(rules.eta)):
        rules.eta[k] = np.zeros_like(rules.eta[k])
    _, trace = plastic.forward(weights, rng.uniform(-1, 1, 5))
    new = plastic.hebbian_step(weights, rules, trace)
    for w, n in zip(weights, new):
        assert np.array_equal(w, n)


def test_hebbian_worked_example():
    # eta=0.5, A=2, B=1, C=-1, D=0.25, o_i=0.5, o_j=-0.5, w=1.0
    shapes = (plastic.LayerShape(1, 1),)
    rules = plastic.genome_to_rules(np.array([2.0, 1.0, -1.0, 0.25, 0.5]), shapes)
    new = plastic.hebbian_step(
        [np.array([[1.0]])], rules, [(np.array([0.5]), np.array([-0.5]))]
    )
    expected = 1.0 + 0.5 * (2.0 * 0.5 * -0.5 + 1.0 * 0.5 + -1.0 * -0.5 + 0.25)
    assert expected == 1.375
    assert new[0][0, 0] == pytest.approx(1.375, abs=1e-15)


def test_hebbian_matches_scalar_oracle():
    rng = np.random.default_rng(11)
    shapes = plastic.shape_chain((4, 3))
    for _ in range(50):
        weights = [rng.normal(0, 1, (3, 4))]
        rules = random_rules(shapes, rng)
        pre = rng.uniform(-1, 1, 4)
        post = rng.uniform(-1, 1, 3)
        got = plastic.hebbian_step(weights, rules, [(pre, post)])
        want = scalar_hebbian_oracle(weights, rules, [(pre, post)])
        np.testing.assert_allclose(got[0], want[0], atol=1e-12, rtol=0)


def test_hebbian_shape_mismatch_internal_error():
    from hebbwalker.errors import InternalError

    shapes = (plastic.LayerShape(2, 2),)
    rules = random_rules(shapes, np.random.default_rng(0))
    with pytest.raises(InternalError):
        plastic.hebbian_step([np.zeros((2, 2))], rules, [(np.zeros(3), np.zeros(2))])


# ---------------------------------------------------------------------------
# normalization


def test_normalize_max_examples():
    out = plastic.normalize_max([np.array([[0.5, -1.0, 0.25]])])
    np.testing.assert_array_equal(out[0], [[0.5, -1.0, 0.25]])
    out = plastic.normalize_max([np.array([[2.0, -4.0]])])
    np.testing.assert_array_equal(out[0], [[0.5, -1.0]])
    out = plastic.normalize_max([np.array([[0.0, 0.0]])])
    np.testing.assert_array_equal(out[0], [[0.0, 0.0]])


def test_normalize_max_exact_unit_max():
    rng = np.random.default_rng(2)
    for _ in range(100):
        w = rng.normal(0, rng.uniform(0.01, 100), (5, 7))
        out = plastic.normalize_max([w])[0]
        assert np.abs(out).max() == 1.0


def test_normalize_std_examples():
    out = plastic.normalize_std([np.array([[1.0, -1.0]])])
    np.testing.assert_allclose(out[0], [[1.0, -1.0]], atol=1e-12)
    out = plastic.normalize_std([np.array([[3.0, 3.0, 3.0]])])
    np.testing.assert_array_equal(out[0], [[0.0, 0.0, 0.0]])


def test_normalize_std_against_statistics_oracle():
    layer = np.array([[0.0, 1.0, 2.0, 3.0]])
    mean = 1.5
    sigma = np.sqrt(np.mean((layer - mean) ** 2))
    expected = (layer - mean) / sigma
    out = plastic.normalize_std([layer])[0]
    np.testing.assert_allclose(out, expected, atol=1e-12)
    np.testing.assert_allclose(
        out, [[-1.3416407865, -0.4472135955, 0.4472135955, 1.3416407865]], atol=1e-9
    )


def test_normalize_std_postconditions():
    rng = np.random.default_rng(4)
    for _ in range(100):
        w = rng.normal(rng.uniform(-5, 5), rng.uniform(0.01, 10), (6, 4))
        out = plastic.normalize_std([w])[0]
        assert abs(out.mean()) < 1e-9
        assert abs(out.std() - 1.0) < 1e-9


def test_normalize_std_needs_two_weights():
    with pytest.raises(InputError):
        plastic.normalize_std([np.array([[1.0]])])


# ---------------------------------------------------------------------------
# genome packing


def test_rule_genome_round_trip():
    rng = np.random.default_rng(8)
    genome = rng.normal(0, 1, plastic.rule_genome_size(BEETLE_SHAPES))
    rules = plastic.genome_to_rules(genome, BEETLE_SHAPES)
    back = plastic.rules_to_genome(rules)
    assert np.array_equal(genome, back)


def test_rule_genome_sizes():
    assert plastic.rule_genome_size(BEETLE_SHAPES) == 21760
    gecko = plastic.shape_chain((23, 64, 32, 16))
    assert plastic.rule_genome_size(gecko) == 5 * (23 * 64 + 64 * 32 + 32 * 16) == 20160


def test_rule_genome_length_mismatch():
    with pytest.raises(ConfigError):
        plastic.genome_to_rules(np.zeros(10), BEETLE_SHAPES)


# ---------------------------------------------------------------------------
# policy control cycle


def test_policy_cycle_stays_bounded_max_norm():
    rng = np.random.default_rng(6)
    shapes = plastic.shape_chain((9, 8, 4))
    genome = rng.normal(0, 0.5, plastic.rule_genome_size(shapes))
    policy = plastic.HebbianPolicy.from_genome(genome, shapes, "max")
    policy.reset(0)
    for _ in range(200):
        policy.act(rng.uniform(-1, 1, 9))
        for w in policy.weights:
            assert np.isfinite(w).all()
            assert np.abs(w).max() <= 1.0


def test_policy_cycle_matches_functional_ops_single_step():
    # the jitted in-place path must agree with the public ops
    rng = np.random.default_rng(12)
    shapes = plastic.shape_chain((7, 6, 3))
    genome = rng.normal(0, 1, plastic.rule_genome_size(shapes))
    for norm in ("max", "std"):
        policy = plastic.HebbianPolicy.from_genome(genome, shapes, norm)
        policy.reset(3)
        reference = [w.copy() for w in policy.weights]
        obs = rng.uniform(-1, 1, 7)
        action = policy.act(obs)
        ref_action, trace = plastic.forward(reference, obs)
        expected = plastic.NORMALIZERS[norm](
            plastic.hebbian_step(reference, policy.rules, trace)
        )
        np.testing.assert_allclose(action, ref_action, atol=1e-12, rtol=0)
        for got, want in zip(policy.weights, expected):
            np.testing.assert_allclose(got, want, atol=1e-12, rtol=0)


def test_policy_snapshot_length():
    rng = np.random.default_rng(1)
    genome = rng.normal(0, 0.01, 21760)
    policy = plastic.HebbianPolicy.from_genome(genome, BEETLE_SHAPES, "max")
    policy.reset(0)
    assert policy.plastic_snapshot().shape == (4352,)
    assert policy.genome_size == 21760
    assert policy.plastic_size == 4352
