"""The full trainable parser model: embeddings, encoders, scorers, and IO.

A saved model is two files: ``<path>`` holds the binary parameter dump and
``<path>.meta.json`` holds the vocabulary plus the architecture fields needed
to rebuild the network before loading values into it.
"""

import dataclasses
import json
import os

import numpy as np

from .autodiff import ParameterStore
from .config import Config
from .errors import ConfigError, DataError
from .layers import BiLstm, LstmCell, Mlp, embedding_init, glorot
from .represent import PretrainedTable, Vocab

META_VERSION = 1

# architecture fields that must match between training and loading
ARCH_FIELDS = (
    "use_char",
    "use_pretrained",
    "word_dim",
    "pos_dim",
    "vprime_dim",
    "sent_hidden",
    "sent_layers",
    "char_dim",
    "char_hidden",
    "char_layers",
    "tree_hidden",
    "label_dim",
    "mlp_hidden",
    "pretrained_dim",
)


class ParserModel:
    """All trainable parameters plus hyperparameters and vocabularies."""

    def __init__(self, config: Config, vocab: Vocab, pretrained: PretrainedTable = None, seed: int = None):
        if config.use_pretrained:
            if pretrained is None:
                raise ConfigError("use_pretrained is set but no pretrained table was given")
            if config.pretrained_dim is not None and config.pretrained_dim != pretrained.dim:
                raise ConfigError(
                    f"pretrained table has dimension {pretrained.dim}, "
                    f"config expects {config.pretrained_dim}"
                )
            config = dataclasses.replace(config, pretrained_dim=pretrained.dim)
        self.config = config
        self.vocab = vocab
        self.pretrained = pretrained
        self.rel_names = vocab.rel_names
        self.store = ParameterStore()
        rng = np.random.default_rng(config.seed if seed is None else seed)
        store = self.store

        self.v_dim = 2 * config.sent_hidden  # contextual vector size
        self.n_relations = vocab.n_relations

        self.word_emb = store.add("word_emb", embedding_init(rng, len(vocab.words), config.word_dim))
        self.pos_emb = store.add("pos_emb", embedding_init(rng, len(vocab.pos), config.pos_dim))
        if config.use_char:
            self.char_emb = store.add("char_emb", embedding_init(rng, len(vocab.chars), config.char_dim))
        else:
            self.char_emb = None
        self.rel_emb = store.add("rel_emb", embedding_init(rng, max(self.n_relations, 1), config.label_dim))
        # label slot of the tree encoder before any child is attached
        self.null_label = store.add("null_label", embedding_init(rng, config.label_dim, 1))
        # window slots falling outside the pending list
        self.pad_left = store.add("pad_left", embedding_init(rng, self.v_dim, 1))
        self.pad_right = store.add("pad_right", embedding_init(rng, self.v_dim, 1))

        in_width = config.word_dim + config.pos_dim
        if config.use_char:
            in_width += 2 * config.char_hidden
        if config.use_pretrained:
            in_width += pretrained.dim
        self.w_v = store.add("w_v", glorot(rng, config.vprime_dim, in_width))
        self.b_v = store.add("b_v", np.zeros((config.vprime_dim, 1)))

        if config.use_char:
            self.char_net = BiLstm(store, "char", config.char_dim, config.char_hidden, config.char_layers, rng)
        else:
            self.char_net = None
        self.sent_net = BiLstm(store, "sent", config.vprime_dim, config.sent_hidden, config.sent_layers, rng)

        # child inputs to the tree LSTMs carry the child encoding plus the
        # embedding of its relation, so encodings must match the v dimension
        tree_in = self.v_dim + config.label_dim
        self.tree_left = LstmCell(store, "tree_left", tree_in, config.tree_hidden, rng)
        self.tree_right = LstmCell(store, "tree_right", tree_in, config.tree_hidden, rng)
        self.w_e = store.add("w_e", glorot(rng, self.v_dim, 2 * config.tree_hidden + config.label_dim))
        self.b_e = store.add("b_e", np.zeros((self.v_dim, 1)))

        window_width = 6 * self.v_dim
        self.mlp_u = Mlp(store, "mlp_u", (window_width, config.mlp_hidden, 2), rng)
        self.mlp_r = Mlp(store, "mlp_r", (window_width, config.mlp_hidden, 2 * max(self.n_relations, 1)), rng)

    # ---- persistence ----

    def save(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(self.store.to_bytes())
        meta = {
            "meta_version": META_VERSION,
            "arch": {name: getattr(self.config, name) for name in ARCH_FIELDS},
            "vocab": self.vocab.to_meta(),
        }
        with open(meta_path(path), "w", encoding="utf-8") as f:
            json.dump(meta, f, ensure_ascii=False, sort_keys=True, indent=0)
            f.write("\n")

    @classmethod
    def load(cls, path: str, config: Config = None, pretrained: PretrainedTable = None) -> "ParserModel":
        if not os.path.exists(path):
            raise DataError(f"model file not found: {path}")
        if not os.path.exists(meta_path(path)):
            raise DataError(f"model metadata not found: {meta_path(path)}")
        with open(meta_path(path), encoding="utf-8") as f:
            meta = json.load(f)
        if meta.get("meta_version") != META_VERSION:
            raise DataError(f"unsupported model metadata version {meta.get('meta_version')}")
        cfg = dataclasses.replace(config if config is not None else Config(), **meta["arch"])
        vocab = Vocab.from_meta(meta["vocab"])
        if cfg.use_pretrained and pretrained is None:
            raise ConfigError(
                "model was trained with pretrained embeddings; pass the embedding file"
            )
        model = cls(cfg, vocab, pretrained=pretrained, seed=0)
        with open(path, "rb") as f:
            model.store.load_bytes(f.read(), strict=True)
        return model


def meta_path(model_path: str) -> str:
    return model_path + ".meta.json"
