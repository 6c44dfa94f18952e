"""Command-line entry point: train, parse, eval, and trace subcommands.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
The EFDP_SEED environment variable overrides the configured seed.
"""

import argparse
import logging
import os
import sys

from . import evaluate, treebank
from .config import Config, load_config
from .easyfirst import Arc, arcs_to_rows, parse
from .errors import ConfigError, DataError
from .model import ParserModel
from .oracle import train
from .represent import build_vocab, load_pretrained

log = logging.getLogger("efdp")


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_argparser():
    top = _ArgumentParser(prog="efdp", description="easy-first dependency parser")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--model", help="model file path")
        p.add_argument("--pretrained", help="pretrained embedding text file")

    p_train = sub.add_parser("train", help="train a parser on a CoNLL-X treebank")
    common(p_train)
    p_train.add_argument("--train", help="training treebank")
    p_train.add_argument("--test", help="held-out treebank scored each epoch")
    p_train.add_argument("--test-size", type=int, dest="test_size",
                         help="hold out the last N training sentences instead")
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--use-char", action="store_true", default=None)
    p_train.add_argument("--use-pretrained", action="store_true", default=None)
    p_train.add_argument("--word-dropout", action="store_true", default=None)

    p_parse = sub.add_parser("parse", help="parse a CoNLL-X file with a trained model")
    common(p_parse)
    p_parse.add_argument("--input", required=True)
    p_parse.add_argument("--output", required=True, help="output path, or - for stdout")

    p_eval = sub.add_parser("eval", help="score predictions against gold")
    p_eval.add_argument("gold")
    p_eval.add_argument("predicted")
    p_eval.add_argument("--exclude-punct", action="store_true")
    p_eval.add_argument("--punct-tags", default=None, help="comma-separated POS tags")

    p_trace = sub.add_parser("trace", help="print the action trace for one sentence")
    common(p_trace)
    p_trace.add_argument("--input", required=True)
    p_trace.add_argument("--index", type=int, default=0, help="sentence index in the file")
    return top


def _resolve_config(args) -> Config:
    cfg = Config()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    for key in ("train", "test", "test_size", "pretrained", "model", "epochs", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    for key in ("use_char", "use_pretrained", "word_dropout"):
        if getattr(args, key, None):
            setattr(cfg, key, True)
    if os.environ.get("EFDP_SEED"):
        try:
            cfg.seed = int(os.environ["EFDP_SEED"])
        except ValueError:
            raise ConfigError(f"EFDP_SEED must be an integer, got {os.environ['EFDP_SEED']!r}") from None
    cfg.validate()
    return cfg


def _require(cfg, name):
    value = getattr(cfg, name)
    if not value:
        raise ConfigError(f"missing required setting: {name}")
    return value


def _read_treebank(path, validate=True):
    if not os.path.exists(path):
        raise ConfigError(f"file not found: {path}")
    return treebank.read_conll(path, validate=validate)


def _load_table(cfg):
    if not cfg.use_pretrained:
        return None
    path = _require(cfg, "pretrained")
    if not os.path.exists(path):
        raise ConfigError(f"pretrained embedding file not found: {path}")
    return load_pretrained(path)


def cmd_train(cfg: Config) -> int:
    corpus = _read_treebank(_require(cfg, "train"))
    dev = None
    if cfg.test:
        dev = _read_treebank(cfg.test)
    elif cfg.test_size:
        split = treebank.split_train_test(corpus, cfg.test_size)
        corpus, dev = split.train, split.test
    table = _load_table(cfg)
    projective, dropped = treebank.filter_projective(corpus)
    if dropped:
        log.info("excluded %d non-projective sentences from training", dropped)
    if not projective:
        raise DataError("no projective sentences left to train on")
    vocab = build_vocab(projective, cfg.min_word_freq)
    model = ParserModel(cfg, vocab, pretrained=table)
    train(projective, model, cfg.epochs, dev=dev)
    model_path = _require(cfg, "model")
    model.save(model_path)
    log.info("model written to %s", model_path)
    return 0


def _predict_rows(model, sentences):
    rows = []
    for sentence in sentences:
        arcs = parse(sentence, model)
        rows.append(arcs_to_rows(arcs, len(sentence)))
    return rows


def cmd_parse(cfg: Config, input_path: str, output_path: str) -> int:
    table = _load_table(cfg)
    model = ParserModel.load(_require(cfg, "model"), cfg, pretrained=table)
    sentences = _read_treebank(input_path, validate=False)
    text = treebank.write_conll(sentences, _predict_rows(model, sentences))
    if output_path == "-":
        sys.stdout.write(text)
    else:
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(text)
    return 0


def cmd_eval(gold_path: str, predicted_path: str, exclude_punct: bool, punct_tags=None, out=None) -> int:
    out = out or sys.stdout
    gold = _read_treebank(gold_path)
    predicted = _read_treebank(predicted_path)
    rows = [[Arc(t.head, t.index, t.deprel) for t in sentence] for sentence in predicted]
    tags = frozenset({"PUNCT", "CH"})
    if punct_tags is not None:
        tags = frozenset(t for t in punct_tags.split(",") if t)
    result = evaluate.score(gold, rows, exclude_punct=exclude_punct, punct_tags=tags)
    out.write(f"UAS {result.uas:.2f} LAS {result.las:.2f}\n")
    return 0


def cmd_trace(cfg: Config, input_path: str, index: int, out=None, scorer=None) -> int:
    out = out or sys.stdout
    table = _load_table(cfg)
    model = ParserModel.load(_require(cfg, "model"), cfg, pretrained=table)
    sentences = _read_treebank(input_path, validate=False)
    if not 0 <= index < len(sentences):
        raise DataError(f"sentence index {index} out of range ({len(sentences)} sentences)")
    sentence = sentences[index]
    arcs = parse(sentence, model, scorer=scorer, trace=lambda line: out.write(line + "\n"))
    out.write(treebank.write_conll([sentence], [arcs_to_rows(arcs, len(sentence))]))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = _build_argparser()
    try:
        args = parser.parse_args(argv)
        if args.command == "train":
            return cmd_train(_resolve_config(args))
        if args.command == "parse":
            return cmd_parse(_resolve_config(args), args.input, args.output)
        if args.command == "eval":
            return cmd_eval(args.gold, args.predicted, args.exclude_punct, args.punct_tags)
        if args.command == "trace":
            return cmd_trace(_resolve_config(args), args.input, args.index)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
