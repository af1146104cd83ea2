import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moltext.corruption import (
    CorruptionConfig,
    CorruptionExample,
    StreamExhausted,
    corrupt,
    decorrupt,
    example_rng,
    iter_batches,
    mixed_batch,
    sentinel,
    sentinel_index,
    span_plan,
    write_examples,
)

# 50 tokens t0..t49, seed 1234, example (0, 0, 0): 8 noise tokens in 3 spans
GOLDEN_SPANS = [(6, 1), (29, 4), (46, 3)]
GOLDEN_TARGET = "<extra_id_0> t6 <extra_id_1> t29 t30 t31 t32 <extra_id_2> t46 t47 t48 <extra_id_3>"


def check_structure(tokens, ex):
    ins = [sentinel_index(t) for t in ex.input_tokens if sentinel_index(t) is not None]
    outs = [sentinel_index(t) for t in ex.target_tokens if sentinel_index(t) is not None]
    assert ins == list(range(len(ins)))
    assert outs == list(range(len(ins) + 1))
    # no two sentinels next to each other in the input: spans never touch
    flags = [sentinel_index(t) is not None for t in ex.input_tokens]
    assert not any(a and b for a, b in zip(flags, flags[1:]))
    kept = [t for t in ex.input_tokens if sentinel_index(t) is None]
    dropped = [t for t in ex.target_tokens if sentinel_index(t) is None]
    assert len(kept) + len(dropped) == len(tokens)


def test_sentinel_names():
    assert sentinel(0) == "<extra_id_0>"
    assert sentinel_index("<extra_id_12>") == 12
    assert sentinel_index("extra_id_1") is None


def test_construction_rule():
    ex = CorruptionExample(("a", sentinel(0), "d", "e"), (sentinel(0), "b", "c", sentinel(1)), "text")
    assert decorrupt(ex) == list("abcde")


def test_two_span_case():
    ex = CorruptionExample(
        ("thank", "you", sentinel(0), "me", "to", "your", "party", sentinel(1), "week"),
        (sentinel(0), "for", "inviting", sentinel(1), "last", sentinel(2)),
        "text",
    )
    assert " ".join(decorrupt(ex)) == "thank you for inviting me to your party last week"


def test_golden_fixture():
    tokens = [f"t{i}" for i in range(50)]
    config = CorruptionConfig(seed=1234)
    assert span_plan(50, config, example_rng(1234, 0, 0, 0)) == GOLDEN_SPANS
    ex = corrupt(tokens, config, example_rng(1234, 0, 0, 0))
    assert " ".join(ex.target_tokens) == GOLDEN_TARGET
    assert ex.input_tokens[6] == sentinel(0)
    assert len(ex.input_tokens) == 50 - 8 + 3


def test_tiny_rate_keeps_everything():
    ex = corrupt(["a", "b"], CorruptionConfig(corruption_rate=0.01), example_rng(0))
    assert ex.input_tokens == ("a", "b")
    assert ex.target_tokens == (sentinel(0),)


def test_decorrupt_errors():
    with pytest.raises(ValueError):
        decorrupt(CorruptionExample(("a", sentinel(0)), (sentinel(0), "b"), "text"))
    with pytest.raises(ValueError):
        decorrupt(CorruptionExample(("a", sentinel(1)), (sentinel(0), "b", sentinel(1)), "text"))
    with pytest.raises(ValueError):
        decorrupt(CorruptionExample(("a",), (sentinel(0), "b", sentinel(1)), "text"))
    with pytest.raises(ValueError):
        decorrupt(CorruptionExample(("a",), (), "text"))


def test_corrupt_errors():
    config = CorruptionConfig(max_seq_len=8, n_sentinels=2)
    with pytest.raises(ValueError):
        corrupt(["a"], config, example_rng(0))
    with pytest.raises(ValueError):
        corrupt(list("abcdefghi"), config, example_rng(0))
    with pytest.raises(ValueError):
        corrupt(["a", sentinel(3)], config, example_rng(0))
    with pytest.raises(ValueError):
        # 0.5 of 8 tokens in spans of 1 needs 4 sentinels plus the terminal one
        corrupt(list("abcdefgh"), CorruptionConfig(0.5, 1.0, n_sentinels=2, max_seq_len=8), example_rng(0))
    with pytest.raises(ValueError):
        CorruptionConfig(corruption_rate=1.5)


@settings(max_examples=200)
@given(
    st.lists(st.sampled_from(["a", "b", "C", "(", "=", "1"]), min_size=2, max_size=120),
    st.floats(0.05, 0.9),
    st.floats(0.5, 8.0),
    st.integers(0, 2**63 - 1),
)
def test_roundtrip_and_structure(tokens, rate, mean_span, seed):
    config = CorruptionConfig(rate, mean_span, n_sentinels=200, seed=seed)
    ex = corrupt(tokens, config, example_rng(seed))
    assert decorrupt(ex) == tokens
    check_structure(tokens, ex)


def test_rate_and_span_statistics():
    config = CorruptionConfig()
    tokens = [str(i) for i in range(512)]
    fractions, lengths = [], []
    for i in range(500):
        spans = span_plan(512, config, example_rng(0, 0, 0, i))
        fractions.append(sum(n for _, n in spans) / 512)
        lengths.extend(n for _, n in spans)
        if i < 20:
            assert decorrupt(corrupt(tokens, config, example_rng(0, 0, 0, i))) == tokens
    assert 0.14 <= np.mean(fractions) <= 0.16
    assert abs(np.mean(lengths) - 3.0) <= 0.3


def test_mixed_batch_split():
    text = iter(["the cat sat on the mat", "x", "a b c d e f"] * 10)
    smiles = iter(["CCO", "C", "c1ccccc1 benzene"] * 10)
    batch = mixed_batch(text, smiles, 4, CorruptionConfig(seed=3))
    assert [ex.source_modality for ex in batch] == ["text", "smiles", "text", "smiles"]
    # single-token lines are skipped; extra fields after the SMILES are ignored
    assert decorrupt(batch[1]) == ["C", "C", "O"]
    assert decorrupt(batch[3]) == ["c", "1", "c", "c", "c", "c", "c", "1"]
    with pytest.raises(ValueError):
        mixed_batch(text, smiles, 3, CorruptionConfig())


def test_mixed_batch_deterministic():
    lines = [" ".join(f"w{j}" for j in range(i % 17 + 3)) for i in range(40)]
    mols = ["CC(=O)Oc1ccccc1C(=O)O", "CCN(CC)CC", "OC1CCCCC1"] * 14

    def run():
        return mixed_batch(iter(lines), iter(mols), 8, CorruptionConfig(seed=9))

    assert run() == run()
    other = mixed_batch(iter(lines), iter(mols), 8, CorruptionConfig(seed=10))
    assert other != run()


def test_stream_exhaustion():
    with pytest.raises(StreamExhausted):
        mixed_batch(iter(["a b"]), iter(["CC"]), 4, CorruptionConfig())
    batches = list(iter_batches(iter(["a b"] * 5), iter(["CC"] * 5), 4, CorruptionConfig()))
    assert len(batches) == 2
    with pytest.raises(StreamExhausted):
        list(iter_batches(iter(["a b"] * 5), iter(["CC"] * 5), 4, CorruptionConfig(), num_batches=3))


def test_truncation_to_max_len():
    config = CorruptionConfig(max_seq_len=4)
    (ex, _) = mixed_batch(iter(["a b c d e f"]), iter(["CC"]), 2, config)
    assert decorrupt(ex) == ["a", "b", "c", "d"]


def test_write_examples():
    ex = CorruptionExample(("a", sentinel(0)), (sentinel(0), "b", sentinel(1)), "text")
    buf = io.StringIO()
    assert write_examples([ex, ex], buf) == 2
    assert buf.getvalue().splitlines()[0] == "text\ta <extra_id_0>\t<extra_id_0> b <extra_id_1>"
