import pathlib

import pytest

from hbpe import FirstStageVocab

DATA_DIR = pathlib.Path(__file__).parent / "data"
GPT2_VOCAB = DATA_DIR / "gpt2" / "encoder.json"
GPT2_MERGES = DATA_DIR / "gpt2" / "vocab.bpe"


def build_toy_vocab() -> FirstStageVocab:
    """A tiny vocabulary whose encode splits "This is a test!" into the four
    tokens "This is", " a", " test", "!"."""
    token_bytes = {i: bytes([i]) for i in range(256)}
    merges = []

    def add(left: int, right: int) -> int:
        new = 256 + len(merges)
        merges.append((left, right, new))
        token_bytes[new] = token_bytes[left] + token_bytes[right]
        return new

    t_is = add(ord("i"), ord("s"))          # "is"
    t_th = add(ord("T"), ord("h"))          # "Th"
    t_this = add(t_th, t_is)                # "This"
    t_sp_is = add(ord(" "), t_is)           # " is"
    add(t_this, t_sp_is)                    # "This is"
    add(ord(" "), ord("a"))                 # " a"
    t_te = add(ord("t"), ord("e"))          # "te"
    t_st = add(ord("s"), ord("t"))          # "st"
    t_test = add(t_te, t_st)                # "test"
    add(ord(" "), t_test)                   # " test"
    return FirstStageVocab(token_bytes, merges, pretokenize=None)


@pytest.fixture(scope="session")
def toy_vocab() -> FirstStageVocab:
    return build_toy_vocab()


@pytest.fixture(scope="session")
def gpt2_paths():
    if not (GPT2_VOCAB.exists() and GPT2_MERGES.exists()):
        pytest.skip("GPT-2 vocab/merges fixture files not present")
    return GPT2_VOCAB, GPT2_MERGES
