import pytest

import hbpe

CORPUS_LINE = (
    b"the cat sat on the mat and the dog dozed by the door. "
    b"a repetitive corpus compresses well and trains fast. "
)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Batch file + stage-2 artifact produced by the tokenizer toolkit on a
    ~100 KiB repetitive corpus, handed over purely as files."""
    corpus = CORPUS_LINE * (102400 // len(CORPUS_LINE) + 1)
    corpus = corpus[:102400]
    vocab = hbpe.train_bpe(corpus, 300, pretokenize="whitespace")
    table, patches = hbpe.train_hier_bpe(vocab, 6)
    d = tmp_path_factory.mktemp("artifacts")
    stage2 = d / "tok.stage2"
    batch = d / "corpus.hbpb"
    hbpe.save_stage2(table, patches, stage2)
    hbpe.emit_batches(corpus, vocab, patches, batch)
    return {"batch": batch, "stage2": stage2, "corpus": corpus}
