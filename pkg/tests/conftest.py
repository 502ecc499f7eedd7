import pytest

from stegopivot import count_frequencies, train_bpe, train_ngram

from toydata import make_corpus, make_synsets


@pytest.fixture(scope="session")
def toy():
    """One shared 10k-line toy world: corpus, tokenizer, counts, synonyms, LM."""
    words, corpus = make_corpus(10_000, seed=42)
    model = train_bpe(corpus, 0, word_level=True)
    freqs = count_frequencies(model, corpus)
    syndb = make_synsets(words, seed=7)
    provider = train_ngram(model, corpus, order=3)
    return {
        "words": words,
        "corpus": corpus,
        "model": model,
        "freqs": freqs,
        "syndb": syndb,
        "provider": provider,
        "embed_provider": provider.with_exclusions([model.unk_id]),
    }
