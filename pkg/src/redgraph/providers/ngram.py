"""Add-one smoothed n-gram language model used by the perplexity filter.

Fitted on the clean corpus at harness setup; order 2 (bigram) is the
default, order 1 gives a plain unigram model. Tokens are casefolded
whitespace words; unseen tokens map to a reserved unknown symbol that is
always part of the vocabulary.
"""

from __future__ import annotations

import math
from collections import Counter

from ..errors import ProviderError
from ..textutil import tokenize

UNKNOWN = "<unk>"
START = "<s>"


class NgramLanguageModel:
    def __init__(self, order: int = 2, vocabulary=None):
        if order not in (1, 2):
            raise ProviderError("order must be 1 (unigram) or 2 (bigram)")
        self.order = order
        self._vocab: set[str] = {UNKNOWN}
        if vocabulary:
            self._vocab.update(self._norm(tok) for tok in vocabulary)
        self._unigrams: Counter = Counter()
        self._bigrams: Counter = Counter()
        self._context: Counter = Counter()
        self._total = 0

    @staticmethod
    def _norm(token: str) -> str:
        return token.casefold()

    @property
    def vocab_size(self) -> int:
        return len(self._vocab)

    def fit(self, texts) -> "NgramLanguageModel":
        for text in texts:
            tokens = [self._norm(t) for t in tokenize(text)]
            self._vocab.update(tokens)
            self._total += len(tokens)
            self._unigrams.update(tokens)
            previous = START
            for token in tokens:
                self._bigrams[(previous, token)] += 1
                self._context[previous] += 1
                previous = token
        return self

    @classmethod
    def fit_corpus(cls, corpus, order: int = 2) -> "NgramLanguageModel":
        return cls(order=order).fit(chunk.text for chunk in corpus.chunks)

    def _lookup(self, token: str) -> str:
        return token if token in self._vocab else UNKNOWN

    def token_prob(self, previous: str, token: str) -> float:
        token = self._lookup(self._norm(token))
        if self.order == 1:
            return (self._unigrams[token] + 1) / (self._total + self.vocab_size)
        previous = previous if previous == START else self._lookup(self._norm(previous))
        return (self._bigrams[(previous, token)] + 1) / (
            self._context[previous] + self.vocab_size
        )

    def perplexity(self, text: str) -> float:
        tokens = tokenize(text)
        if not tokens:
            raise ProviderError("perplexity of empty text is undefined")
        log_sum = 0.0
        previous = START
        for token in tokens:
            log_sum += math.log(self.token_prob(previous, token))
            previous = token
        return math.exp(-log_sum / len(tokens))
