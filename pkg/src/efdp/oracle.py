"""Dynamic-oracle validity rules, margin loss, and the training loop.

An action proposing arc (head, modifier, relation) is valid when the modifier
is *complete* (none of its gold children is still waiting in the pending
list) and either the arc matches the gold tree exactly, or the modifier's
gold head has already been removed from the pending list by an earlier
mistake, in which case any head is acceptable as long as the relation matches
gold. Tokens whose gold head is the artificial root are never treated as
orphaned; the surviving item is attached to the root at the end regardless.

Training follows the parser's own trajectory: when the best-scoring action
overall beats the best valid action by more than the margin, the model's
(invalid) choice is applied so later steps see error states; otherwise the
best valid action is applied, and a margin-violation term
1 - score(best valid) + score(best invalid) is accumulated when positive.
Once more than ``error_batch`` terms have accumulated, the summed loss is
backpropagated once and the parameters take an Adam step.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tape, constant
from .easyfirst import LEFT, ActionScorer, apply_action, init_pending, parse
from .evaluate import score as eval_score
from .represent import encode_sentence

log = logging.getLogger(__name__)


class OracleState:
    """Gold arcs plus enough bookkeeping to judge actions mid-parse."""

    def __init__(self, sentence, rel_index):
        self.gold_head = {}
        self.gold_rel = {}
        self.remaining = {t.index: 0 for t in sentence}
        self.live = {t.index for t in sentence}
        for t in sentence:
            self.gold_head[t.index] = t.head
            self.gold_rel[t.index] = rel_index.get(t.deprel, -1)
            if t.head != 0:
                self.remaining[t.head] += 1

    def on_attach(self, dep_pos: int) -> None:
        """Record that the token at dep_pos left the pending list."""
        self.live.discard(dep_pos)
        head = self.gold_head[dep_pos]
        if head != 0:
            self.remaining[head] -= 1

    def complete(self, pos: int) -> bool:
        return self.remaining[pos] == 0

    def orphaned(self, pos: int) -> bool:
        head = self.gold_head[pos]
        return head != 0 and head not in self.live


def is_valid(action, state: OracleState, pending) -> bool:
    idx = action.position - 1
    left_item, right_item = pending[idx], pending[idx + 1]
    if action.direction == LEFT:
        head, dep = right_item, left_item
    else:
        head, dep = left_item, right_item
    m = dep.head_index
    if not state.complete(m):
        return False
    if action.relation != state.gold_rel[m]:
        return False
    return state.gold_head[m] == head.head_index or state.orphaned(m)


def hinge_margin(actions, valid_mask):
    """(best valid, best invalid, margin loss value); ties break canonically."""
    best_valid = best_invalid = None
    for action, ok in zip(actions, valid_mask):
        if ok:
            if best_valid is None or action.score > best_valid.score:
                best_valid = action
        elif best_invalid is None or action.score > best_invalid.score:
            best_invalid = action
    if best_valid is None:
        raise RuntimeError("no valid action available; the oracle is inconsistent")
    loss = 0.0
    if best_invalid is not None:
        loss = max(0.0, 1.0 - best_valid.score + best_invalid.score)
    return best_valid, best_invalid, loss


def hinge_loss(tape, actions, valid_mask, score_tensor):
    """Margin-1 hinge over best valid vs best invalid, as a graph node.

    Returns None when the margin is already satisfied (or nothing is
    invalid), so zero-loss steps add nothing to the graph. ``score_tensor``
    maps an action to its scalar score node.
    """
    best_valid, best_invalid, loss = hinge_margin(actions, valid_mask)
    if best_invalid is None or loss <= 0.0:
        return None
    one = constant([[1.0]])
    return tape.add(tape.sub(one, score_tensor(best_valid)), score_tensor(best_invalid))


@dataclass
class TrainBatch:
    """Loss terms accumulated since the last update."""

    losses: list = field(default_factory=list)
    errors: int = 0

    def reset(self):
        self.losses = []
        self.errors = 0


class Trainer:
    """Single-threaded trainer with deferred updates.

    One tape accumulates the graphs of every sentence in the current error
    window; backward runs once per update. An update can fire mid-sentence,
    after which the sentence continues on a fresh tape: already-built
    encodings stay as constants, while new scores are recomputed so their
    loss terms carry gradients.
    """

    def __init__(self, model, lr=None, error_batch=None, explore=None, seed=None, scorer_factory=None):
        cfg = model.config
        self.model = model
        self.lr = cfg.lr if lr is None else lr
        self.error_batch = cfg.error_batch if error_batch is None else error_batch
        self.explore = cfg.explore if explore is None else explore
        self.rng = np.random.default_rng(cfg.seed if seed is None else seed)
        self.scorer_factory = scorer_factory or (lambda tape, model, sentence: ActionScorer(tape, model))
        self.tape = Tape()
        self.batch = TrainBatch()
        self.updates = 0
        self.epoch_loss = 0.0

    def _update(self) -> None:
        if self.batch.losses:
            total = self.batch.losses[0]
            for term in self.batch.losses[1:]:
                total = self.tape.add(total, term)
            self.tape.backward(total)
            cfg = self.model.config
            self.model.store.adam_step(self.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
            self.updates += 1
        self.tape = Tape()
        self.batch.reset()

    def flush(self) -> None:
        """Trailing update for whatever is left in the window."""
        if self.batch.losses:
            self._update()

    def train_sentence(self, sentence) -> float:
        """Run one training parse; returns the sentence's summed loss value."""
        if len(sentence) < 2:
            return 0.0
        model = self.model
        tape = self.tape
        vectors = encode_sentence(tape, model, sentence, train=True, rng=self.rng)
        pending = init_pending(tape, model, vectors, sentence)
        scorer = self.scorer_factory(tape, model, sentence)
        state = OracleState(sentence, model.vocab.rels)
        arcs = []
        sentence_loss = 0.0
        while len(pending) > 1:
            actions = scorer.scores(pending)
            valid_mask = [is_valid(a, state, pending) for a in actions]
            best_valid, best_invalid, loss = hinge_margin(actions, valid_mask)
            if (
                self.explore
                and best_invalid is not None
                and best_invalid.score > 1.0 + best_valid.score
            ):
                choice = best_invalid  # follow the model into the error state
            else:
                choice = best_valid
                if loss > 0.0:
                    term = hinge_loss(tape, actions, valid_mask, lambda a: scorer.score_tensor(pending, a))
                    self.batch.losses.append(term)
                    self.batch.errors += 1
                    sentence_loss += loss
            dep_pos = _dep_position(pending, choice)
            apply_action(tape, model, pending, choice, arcs)
            state.on_attach(dep_pos)
            if self.batch.errors > self.error_batch:
                self._update()
                tape = self.tape
                scorer = self.scorer_factory(tape, model, sentence)
        self.epoch_loss += sentence_loss
        return sentence_loss


def _dep_position(pending, action):
    idx = action.position - 1
    return pending[idx].head_index if action.direction == LEFT else pending[idx + 1].head_index


def train_step(sentence, model, trainer: Trainer) -> float:
    return trainer.train_sentence(sentence)


def train(corpus, model, epochs, dev=None, seed=None, early_stop=None, log_fn=None):
    """Train for ``epochs`` passes with per-epoch shuffling and dev scoring.

    Keeps the parameters from the epoch with the best dev UAS (when dev is
    given). ``early_stop`` is an optional (uas, las) pair; training ends as
    soon as the dev score reaches it. Returns the per-epoch metric records.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    trainer = Trainer(model, seed=seed)
    order_rng = np.random.default_rng((model.config.seed if seed is None else seed) + 1)
    metrics = []
    best = None
    best_snapshot = None
    emit = log_fn if log_fn is not None else lambda line: log.info("%s", line)
    for epoch in range(1, epochs + 1):
        started = time.time()
        trainer.epoch_loss = 0.0
        updates_before = trainer.updates
        order = order_rng.permutation(len(corpus))
        for i in order:
            trainer.train_sentence(corpus[int(i)])
        trainer.flush()
        record = {
            "epoch": epoch,
            "sentences": len(corpus),
            "loss": trainer.epoch_loss,
            "updates": trainer.updates - updates_before,
            "seconds": time.time() - started,
        }
        if dev:
            predicted = [parse(s, model) for s in dev]
            result = eval_score(dev, predicted)
            record["dev_uas"] = result.uas
            record["dev_las"] = result.las
            if best is None or result.uas > best:
                best = result.uas
                best_snapshot = model.store.snapshot()
        metrics.append(record)
        emit(
            "epoch {epoch} sentences {sentences} loss {loss:.4f} updates {updates}".format(**record)
            + (
                " dev_uas {dev_uas:.2f} dev_las {dev_las:.2f}".format(**record)
                if dev
                else ""
            )
        )
        if dev and early_stop is not None:
            target_uas, target_las = early_stop
            if record["dev_uas"] >= target_uas and record["dev_las"] >= target_las:
                break
    if best_snapshot is not None:
        model.store.restore(best_snapshot)
    return metrics
