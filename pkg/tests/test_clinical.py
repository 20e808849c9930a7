import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clinfusion import (
    BLOCK_NAMES,
    BLOCK_SIZES,
    TOTAL_DIM,
    ClinicalRecord,
    ClinicalVocabulary,
    decode,
    default_vocabulary,
    encode,
    mask_clinical,
    sample_drop_flags,
)
from clinfusion.errors import ConfigError, VocabularyError

VOCAB = default_vocabulary()


def records():
    kwargs = {
        block: st.none() | st.sampled_from(VOCAB.block(block))
        for block in BLOCK_NAMES
    }
    return st.fixed_dictionaries(kwargs).map(lambda kw: ClinicalRecord(**kw))


class TestVocabulary:
    def test_block_layout(self):
        assert BLOCK_SIZES == (4, 8, 5, 14, 5)
        assert sum(BLOCK_SIZES) == TOTAL_DIM == 36
        for name, size in zip(BLOCK_NAMES, BLOCK_SIZES):
            assert len(VOCAB.block(name)) == size

    def test_wrong_cardinality_rejected(self):
        bad = VOCAB.to_dict()
        bad["mass_margins"] = bad["mass_margins"][:4]
        with pytest.raises(VocabularyError, match="mass_margins"):
            ClinicalVocabulary.from_dict(bad)

    def test_duplicate_names_rejected(self):
        bad = VOCAB.to_dict()
        bad["breast_density"][1] = bad["breast_density"][0]
        with pytest.raises(VocabularyError, match="duplicate"):
            ClinicalVocabulary.from_dict(bad)

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "vocab.json"
        path.write_text(json.dumps(VOCAB.to_dict()))
        assert ClinicalVocabulary.from_json_file(path) == VOCAB

    def test_missing_block_rejected(self):
        bad = VOCAB.to_dict()
        del bad["calcification_type"]
        with pytest.raises(VocabularyError, match="calcification_type"):
            ClinicalVocabulary.from_dict(bad)


class TestEncode:
    def test_mass_record_zeroes_calcification_blocks(self):
        rec = ClinicalRecord(
            breast_density=VOCAB.breast_density[2],
            mass_shape=VOCAB.mass_shape[0],
            mass_margins=VOCAB.mass_margins[4],
        )
        vec = encode(rec, VOCAB)
        # calcification type + distribution = last 19 entries
        np.testing.assert_array_equal(vec.values[-19:], np.zeros(19))
        assert vec.presence == (True, True, True, False, False)

    def test_fully_absent_record(self):
        vec = encode(ClinicalRecord(), VOCAB)
        np.testing.assert_array_equal(vec.values, np.zeros(36))
        assert vec.presence == (False,) * 5

    def test_density_second_category(self):
        vec = encode(ClinicalRecord(breast_density=VOCAB.breast_density[1]), VOCAB)
        expected = np.zeros(36)
        expected[1] = 1.0
        np.testing.assert_array_equal(vec.values, expected)

    def test_unknown_category_cites_block_and_name(self):
        with pytest.raises(VocabularyError, match=r"no_such.*mass_shape|mass_shape.*no_such"):
            encode(ClinicalRecord(mass_shape="no_such"), VOCAB)

    @given(records())
    def test_round_trip(self, rec):
        assert decode(encode(rec, VOCAB), VOCAB) == rec

    @given(records())
    def test_l1_norm_counts_present_blocks(self, rec):
        vec = encode(rec, VOCAB)
        n_present = sum(rec.get(b) is not None for b in BLOCK_NAMES)
        assert vec.values.sum() == n_present
        assert sum(vec.presence) == n_present

    @given(records())
    def test_presence_iff_nonzero_block(self, rec):
        vec = encode(rec, VOCAB)
        offsets = np.cumsum((0,) + BLOCK_SIZES)
        for b in range(5):
            block = vec.values[offsets[b]:offsets[b + 1]]
            assert vec.presence[b] == bool(block.any())

    def test_assignment_order_irrelevant(self):
        kw = {
            "mass_margins": VOCAB.mass_margins[1],
            "breast_density": VOCAB.breast_density[3],
        }
        a = ClinicalRecord(**kw)
        b = ClinicalRecord(**dict(reversed(list(kw.items()))))
        np.testing.assert_array_equal(encode(a, VOCAB).values, encode(b, VOCAB).values)


class TestMask:
    def test_no_drop_is_identity(self):
        vec = encode(ClinicalRecord(breast_density=VOCAB.breast_density[0]), VOCAB)
        assert mask_clinical(vec, False) is vec

    def test_drop_zeroes_everything(self):
        vec = encode(
            ClinicalRecord(
                breast_density=VOCAB.breast_density[0],
                calcification_type=VOCAB.calcification_type[5],
            ),
            VOCAB,
        )
        masked = mask_clinical(vec, True)
        np.testing.assert_array_equal(masked.values, np.zeros(36))
        assert masked.presence == (False,) * 5

    def test_drop_is_idempotent(self):
        vec = encode(ClinicalRecord(mass_shape=VOCAB.mass_shape[2]), VOCAB)
        once = mask_clinical(vec, True)
        twice = mask_clinical(once, True)
        np.testing.assert_array_equal(once.values, twice.values)
        assert once.presence == twice.presence


class TestDropFlags:
    def test_p_zero_all_false(self):
        flags = sample_drop_flags(500, 0.0, np.random.default_rng(0))
        assert not flags.any()

    def test_p_one_all_true(self):
        flags = sample_drop_flags(500, 1.0, np.random.default_rng(0))
        assert flags.all()

    def test_fraction_within_binomial_band(self):
        # 99.9% binomial interval at p=0.3, n=10000 is ~[0.285, 0.315];
        # the asserted band is looser still.
        flags = sample_drop_flags(10000, 0.3, np.random.default_rng(42))
        assert 0.27 <= flags.mean() <= 0.33

    def test_seed_reproducibility(self):
        a = sample_drop_flags(100, 0.5, np.random.default_rng(7))
        b = sample_drop_flags(100, 0.5, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)

    def test_invalid_probability(self):
        with pytest.raises(ConfigError):
            sample_drop_flags(10, -0.1, np.random.default_rng(0))
        with pytest.raises(ConfigError):
            sample_drop_flags(10, 1.5, np.random.default_rng(0))


class TestDecodeValidation:
    def test_presence_contradiction_rejected(self):
        from clinfusion.clinical import ClinicalVector

        values = np.zeros(36)
        values[0] = 1.0
        with pytest.raises(VocabularyError, match="absent"):
            decode(ClinicalVector(values, (False,) * 5), VOCAB)

    def test_two_hot_block_rejected(self):
        from clinfusion.clinical import ClinicalVector

        values = np.zeros(36)
        values[0] = 1.0
        values[1] = 1.0
        with pytest.raises(VocabularyError, match="one-hot"):
            decode(ClinicalVector(values, (True, False, False, False, False)), VOCAB)
