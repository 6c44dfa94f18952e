"""Run configuration: a flat dataclass loadable from key=value text files."""

import dataclasses
import typing
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError


@dataclass
class Config:
    # paths
    train: Optional[str] = None
    test: Optional[str] = None
    pretrained: Optional[str] = None
    model: Optional[str] = None
    # feature flags
    use_char: bool = False
    use_pretrained: bool = False
    word_dropout: bool = False
    dropout_alpha: float = 0.25
    explore: bool = True  # follow the model's own choice past the margin
    # dimensions
    word_dim: int = 100
    pos_dim: int = 25
    vprime_dim: int = 150
    sent_hidden: int = 125
    sent_layers: int = 2
    char_dim: int = 100
    char_hidden: int = 100
    char_layers: int = 2
    tree_hidden: int = 100
    label_dim: int = 25
    mlp_hidden: int = 100
    pretrained_dim: Optional[int] = None
    # optimizer
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    # training protocol
    seed: int = 1
    epochs: int = 15
    error_batch: int = 50  # update once accumulated errors exceed this
    min_word_freq: int = 1
    test_size: Optional[int] = None  # hold out the last N sentences of train
    # evaluation
    exclude_punct: bool = False
    punct_tags: str = "PUNCT,CH"

    def validate(self) -> None:
        dims = (
            "word_dim pos_dim vprime_dim sent_hidden sent_layers char_dim "
            "char_hidden char_layers tree_hidden label_dim mlp_hidden"
        ).split()
        for name in dims:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.error_batch < 1:
            raise ConfigError(f"error_batch must be >= 1, got {self.error_batch}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")

    def punct_tag_set(self) -> set:
        return {t for t in self.punct_tags.split(",") if t}


_FIELDS = {f.name: f for f in dataclasses.fields(Config)}
_HINTS = typing.get_type_hints(Config)


def _coerce(name: str, raw: str):
    hint = _HINTS[name]
    if typing.get_origin(hint) is typing.Union:  # Optional[...]
        if raw.lower() in ("", "none"):
            return None
        hint = next(a for a in typing.get_args(hint) if a is not type(None))
    if hint is bool:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected true/false, got {raw!r}")
    if hint is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from None
    if hint is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {raw!r}") from None
    return raw


def parse_config(text: str, base: Optional[Config] = None) -> Config:
    """Parse `key = value` lines; `#` starts a comment, blank lines are skipped."""
    cfg = dataclasses.replace(base) if base is not None else Config()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, value))
    return cfg


def load_config(path: str, base: Optional[Config] = None) -> Config:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return parse_config(text, base)


def format_config(cfg: Config) -> str:
    lines = []
    for f in dataclasses.fields(Config):
        value = getattr(cfg, f.name)
        lines.append(f"{f.name} = {'' if value is None else value}")
    return "\n".join(lines) + "\n"
