"""Random projective treebanks for experiments and overfitting checks."""

import numpy as np

from .treebank import Sentence, Token

DEFAULT_RELATIONS = ("nsubj", "dobj", "det", "nmod")


def random_projective_heads(rng, n: int) -> list:
    """Heads of a uniform-ish random projective tree over n tokens (0 = root)."""
    heads = [0] * (n + 1)  # 1-based

    def attach(lo, hi, head):
        # carve [lo, hi] into contiguous chunks, each hanging off `head`
        i = lo
        while i <= hi:
            j = int(rng.integers(i, hi + 1))
            sub = int(rng.integers(i, j + 1))
            heads[sub] = head
            attach(i, sub - 1, sub)
            attach(sub + 1, j, sub)
            i = j + 1

    root = int(rng.integers(1, n + 1))
    heads[root] = 0
    attach(1, root - 1, root)
    attach(root + 1, n, root)
    return heads[1:]


def random_sentence(
    rng,
    n_min: int = 3,
    n_max: int = 8,
    vocab_size: int = 30,
    n_pos: int = 5,
    relations=DEFAULT_RELATIONS,
    root_relation: str = "root",
) -> Sentence:
    n = int(rng.integers(n_min, n_max + 1))
    heads = random_projective_heads(rng, n)
    tokens = []
    for i in range(1, n + 1):
        form = f"w{int(rng.integers(0, vocab_size)):02d}"
        pos = f"P{int(rng.integers(0, n_pos))}"
        if heads[i - 1] == 0:
            deprel = root_relation
        else:
            deprel = relations[int(rng.integers(0, len(relations)))]
        tokens.append(Token(i, form, pos, heads[i - 1], deprel))
    return Sentence(tuple(tokens))


def toy_corpus(seed: int = 0, count: int = 50, **kwargs) -> list:
    rng = np.random.default_rng(seed)
    return [random_sentence(rng, **kwargs) for _ in range(count)]


# patterns: (POS sequence, head offsets (0 = root), relations)
_TEMPLATES = (
    (("D", "N", "V"), (2, 3, 0), ("det", "nsubj", "root")),
    (("N", "V", "N"), (2, 0, 2), ("nsubj", "root", "dobj")),
    (("D", "N", "V", "N"), (2, 3, 0, 3), ("det", "nsubj", "root", "dobj")),
    (("N", "V", "D", "N"), (2, 0, 4, 2), ("nsubj", "root", "det", "dobj")),
    (("D", "N", "V", "D", "N"), (2, 3, 0, 5, 3), ("det", "nsubj", "root", "det", "dobj")),
)

_LEXICON = {
    "N": tuple(f"n{i:02d}" for i in range(8)),
    "V": tuple(f"v{i:02d}" for i in range(5)),
    "D": tuple(f"d{i:02d}" for i in range(3)),
}


def grammar_sentence(rng) -> Sentence:
    """A sentence from a tiny fixed grammar: the POS pattern determines the tree."""
    pos_seq, heads, rels = _TEMPLATES[int(rng.integers(0, len(_TEMPLATES)))]
    tokens = []
    for i, (pos, head, rel) in enumerate(zip(pos_seq, heads, rels), start=1):
        form = _LEXICON[pos][int(rng.integers(0, len(_LEXICON[pos])))]
        tokens.append(Token(i, form, pos, head, rel))
    return Sentence(tuple(tokens))


def grammar_corpus(seed: int = 0, count: int = 50) -> list:
    rng = np.random.default_rng(seed)
    return [grammar_sentence(rng) for _ in range(count)]
