import math

import numpy as np
import pytest

from fesl.core import InvalidInputError, StateError
from fesl.ensemble import (
    EnsembleState,
    Mode,
    binary_entropy,
    combine_learning_rate,
    combine_predict,
    default_share,
    select_learning_rate,
    select_predict,
    update_combine,
    update_select,
)

LN2 = math.log(2.0)


class TestRates:
    def test_combine_rate_values(self):
        assert combine_learning_rate(6) == pytest.approx(math.sqrt(8 * LN2 / 6),
                                                         rel=1e-12)
        assert combine_learning_rate(6) == pytest.approx(0.9614, abs=1e-4)
        assert combine_learning_rate(2) == pytest.approx(math.sqrt(4 * LN2), rel=1e-12)
        assert combine_learning_rate(2) == pytest.approx(1.6651, abs=1e-4)

    def test_combine_rate_decreases_to_zero(self):
        values = [combine_learning_rate(t) for t in (2, 10, 100, 10_000, 10**8)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-3

    def test_combine_rate_rejects_tiny_horizon(self):
        with pytest.raises(InvalidInputError):
            combine_learning_rate(1)

    def test_entropy_at_half_is_ln2(self):
        assert binary_entropy(0.5) == pytest.approx(LN2, rel=1e-15)

    def test_select_rate_at_three(self):
        # share 1/2, entropy ln 2: sqrt((8/3)(2 ln2 + 2 ln2)) = sqrt((32/3) ln2)
        assert select_learning_rate(3) == pytest.approx(
            math.sqrt(32.0 / 3.0 * LN2), rel=1e-12)
        assert select_learning_rate(3) == pytest.approx(2.719, abs=1e-3)

    def test_select_rate_decreases_to_zero(self):
        values = [select_learning_rate(t) for t in (3, 30, 3000, 10**7)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-2

    def test_select_rate_rejects_tiny_horizon(self):
        with pytest.raises(InvalidInputError):
            select_learning_rate(2)

    def test_default_share(self):
        assert default_share(301) == pytest.approx(1.0 / 300.0)


class TestCombinePredict:
    def test_even_split(self):
        st = EnsembleState.combine(eta=1.0)
        assert combine_predict(st, 0.0, 1.0) == 0.5

    def test_degenerate_weight(self):
        st = EnsembleState(alpha=(1.0, 0.0), eta=1.0)
        assert combine_predict(st, 3.25, -9.0) == 3.25

    def test_hand_value(self):
        st = EnsembleState(alpha=(0.25, 0.75), eta=1.0)
        assert combine_predict(st, 4.0, 0.0) == 1.0

    def test_stays_between_the_bases(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a1 = float(rng.random())
            st = EnsembleState(alpha=(a1, 1.0 - a1), eta=1.0)
            f1, f2 = rng.normal(size=2)
            p = combine_predict(st, f1, f2)
            assert min(f1, f2) - 1e-12 <= p <= max(f1, f2) + 1e-12

    def test_monotone_in_first_weight(self):
        f1, f2 = 2.0, -1.0
        outputs = [combine_predict(EnsembleState(alpha=(a, 1 - a), eta=1.0), f1, f2)
                   for a in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(x <= y for x, y in zip(outputs, outputs[1:]))

    def test_wrong_mode(self):
        st = EnsembleState.select(eta=1.0, share=0.1, seed=0)
        with pytest.raises(StateError):
            combine_predict(st, 0.0, 1.0)


class TestSelectPredict:
    def test_degenerate_distribution(self):
        st = EnsembleState(alpha=(1.0, 0.0), eta=1.0, share=0.0, mode=Mode.SELECT,
                           rng=np.random.default_rng(0))
        for _ in range(100):
            choice, pred = select_predict(st, 7.0, -7.0)
            assert choice == 1 and pred == 7.0

    def test_uniform_frequency(self):
        st = EnsembleState.select(eta=1.0, share=0.1, seed=123)
        draws = sum(select_predict(st, 1.0, 0.0)[0] == 1 for _ in range(100_000))
        assert abs(draws / 100_000 - 0.5) < 0.01

    def test_seeded_reproducibility(self):
        seqs = []
        for _ in range(2):
            st = EnsembleState.select(eta=1.0, share=0.1, seed=7)
            seqs.append([select_predict(st, 0.0, 1.0)[0] for _ in range(50)])
        assert seqs[0] == seqs[1]

    def test_scale_invariance_of_the_distribution(self):
        # shifting both losses scales both raw weights by the same factor;
        # the normalized sampling distribution must not move
        rng = np.random.default_rng(5)
        for _ in range(100):
            l1, l2 = rng.random(2)
            shift = float(rng.uniform(0.0, 20.0))
            base = EnsembleState.select(eta=0.8, share=0.1, seed=0,
                                        clip_losses=False)
            a = update_select(base, l1, l2)
            b = update_select(base, l1 + shift, l2 + shift)
            assert a.alpha == pytest.approx(b.alpha, rel=1e-12)

    def test_wrong_mode(self):
        st = EnsembleState.combine(eta=1.0)
        with pytest.raises(StateError):
            select_predict(st, 0.0, 1.0)


class TestUpdateCombine:
    def test_equal_losses_keep_weights(self):
        st = EnsembleState(alpha=(0.8, 0.2), eta=1.3)
        out = update_combine(st, 0.4, 0.4)
        assert out.alpha == pytest.approx((0.8, 0.2), rel=1e-15)

    def test_hand_value_rate_ln2(self):
        st = EnsembleState.combine(eta=LN2)
        out = update_combine(st, 0.0, 1.0)
        assert out.alpha[0] == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert out.alpha[1] == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_hand_value_rate_one(self):
        st = EnsembleState.combine(eta=1.0)
        out = update_combine(st, 0.0, 1.0)
        assert out.alpha[0] == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), rel=1e-12)

    def test_heavier_loss_means_smaller_weight(self):
        st = EnsembleState.combine(eta=0.7)
        out = update_combine(st, 0.2, 0.9)
        assert out.alpha[0] > out.alpha[1]

    def test_clipping_caps_the_effective_loss(self):
        clipped = update_combine(EnsembleState.combine(eta=1.0), 0.0, 50.0)
        capped = update_combine(EnsembleState.combine(eta=1.0), 0.0, 1.0)
        assert clipped.alpha == pytest.approx(capped.alpha, rel=1e-15)
        raw = update_combine(
            EnsembleState.combine(eta=1.0, clip_losses=False), 0.0, 50.0)
        assert raw.alpha[0] > clipped.alpha[0]

    def test_rejects_bad_losses(self):
        st = EnsembleState.combine(eta=1.0)
        with pytest.raises(InvalidInputError):
            update_combine(st, -0.1, 0.5)
        with pytest.raises(InvalidInputError):
            update_combine(st, math.nan, 0.5)

    def test_matches_closed_form_over_500_rounds(self):
        # weights after t rounds equal the softmax of -eta * cumulative loss
        rng = np.random.default_rng(42)
        eta = combine_learning_rate(500)
        st = EnsembleState.combine(eta=eta)
        cum = np.zeros(2)
        for _ in range(500):
            l1, l2 = rng.random(2)
            st = update_combine(st, l1, l2)
            cum += (l1, l2)
            shifted = np.exp(-eta * (cum - cum.min()))
            expected = shifted / shifted.sum()
            np.testing.assert_allclose(st.alpha, expected, atol=1e-10, rtol=0)


class TestUpdateSelect:
    def select_state(self, eta, share, alpha=(0.5, 0.5)):
        return EnsembleState(alpha=alpha, eta=eta, share=share, mode=Mode.SELECT,
                             rng=np.random.default_rng(0))

    def test_equal_losses_keep_uniform_weights(self):
        out = update_select(self.select_state(1.1, 0.2), 0.3, 0.3)
        assert out.alpha == pytest.approx((0.5, 0.5), rel=1e-14)

    def test_equal_losses_mix_nonuniform_weights_toward_uniform(self):
        # the exponential factor cancels, leaving alpha' = share/2 + (1-share)*alpha
        out = update_select(self.select_state(1.1, 0.2, alpha=(0.6, 0.4)), 0.3, 0.3)
        assert out.alpha == pytest.approx((0.58, 0.42), rel=1e-13)

    def test_zero_share_degenerates_to_combine(self):
        rng = np.random.default_rng(8)
        sel = self.select_state(0.9, 0.0)
        com = EnsembleState.combine(eta=0.9)
        for _ in range(100):
            l1, l2 = rng.random(2)
            sel = update_select(sel, l1, l2)
            com = update_combine(com, l1, l2)
            assert sel.alpha == pytest.approx(com.alpha, rel=1e-13)

    def test_hand_value(self):
        # losses (0,1), rate ln2, share 1/2: raw (7/16, 5/16) -> (7/12, 5/12)
        out = update_select(self.select_state(LN2, 0.5), 0.0, 1.0)
        assert out.alpha[0] == pytest.approx(7.0 / 12.0, rel=1e-12)
        assert out.alpha[1] == pytest.approx(5.0 / 12.0, rel=1e-12)

    def test_share_floor_and_normalization(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            share = float(rng.uniform(0.0, 0.9))
            eta = float(rng.uniform(0.1, 4.0))
            a1 = float(rng.uniform(0.0, 1.0))
            st = self.select_state(eta, share, alpha=(a1, 1.0 - a1))
            out = update_select(st, float(rng.random() * 2), float(rng.random() * 2))
            assert min(out.alpha) >= share / 2.0 - 1e-12
            assert out.alpha[0] + out.alpha[1] == pytest.approx(1.0, abs=1e-12)
            assert out.alpha[0] > 0 and out.alpha[1] > 0

    def test_wrong_mode(self):
        with pytest.raises(StateError):
            update_select(EnsembleState.combine(eta=1.0), 0.1, 0.2)
        with pytest.raises(StateError):
            update_combine(self.select_state(1.0, 0.1), 0.1, 0.2)
