"""Shared corpus builders for the test suite."""
import random

_SUBJECTS = ["The farmer", "A teacher", "The old king", "My friend",
             "The young soldier", "A foreign merchant", "The busy doctor",
             "Her brother", "The tired worker", "A famous writer"]
_VERBS = ["watched", "followed", "painted", "visited", "described",
          "discovered", "protected", "remembered", "attacked", "supported"]
_OBJECTS = ["the castle", "a small village", "the river", "an old map",
            "the wooden bridge", "a golden crown", "the northern border",
            "a strange letter", "the empty market", "a broken wall"]
_TAILS = ["yesterday", "during the storm", "near the coast", "last summer",
          "in the morning", "before the battle", "with great care",
          "after the harvest", "at the old station", "without a word"]
_DECORATIONS = [
    "{s} {v} {o} {t}.",
    "{s} {v} {o}, {t}.",
    "\"{s} {v} {o},\" he said.",
    "{s} (quietly) {v} {o} {t}!",
    "Why had {s2} {v} {o} {t}?",
    "{s} {v} {o}; nobody knew why.",
    "{s} didn't stop: {s2} {v} {o} {t}.",
    "In 1907, {s} {v} {o} {t}.",
    "{s} {v} {o} - {t}, twice.",
    "{s} {v} {o} {t}, didn't he?",
]


def make_mixed_corpus(n: int, seed: int = 13) -> list[str]:
    """Single-spaced sentences with varied punctuation and casing."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        template = rng.choice(_DECORATIONS)
        s = rng.choice(_SUBJECTS)
        out.append(template.format(
            s=s, s2=s.lower(), v=rng.choice(_VERBS),
            o=rng.choice(_OBJECTS), t=rng.choice(_TAILS)))
    return out


def brute_force_best(text, oracle, lexicon, constrain_upos=True):
    """Exhaustively scores every inflection combination of the eligible
    tokens; the greedy attack is checked against this on additive losses."""
    import itertools

    from morpheus.oracle import OracleRequest, objective
    from morpheus.tags import ELIGIBLE_UPOS
    from morpheus.textproc import detokenize, tag_pos, tokenize, with_surface

    tagged = tag_pos(tokenize(text), lexicon)
    options = []
    for i, tok in enumerate(tagged.tokens):
        if tok.upos not in ELIGIBLE_UPOS:
            continue
        cands = lexicon.get_inflections(tok.surface, tok.upos,
                                        constrain=constrain_upos)
        surfaces = sorted({c.surface for c in cands})
        if len(surfaces) > 1:
            options.append((i, surfaces))
    variants = []
    for combo in itertools.product(*(s for _, s in options)):
        sent = tagged
        for (pos, _), surface in zip(options, combo):
            sent = with_surface(sent, pos, surface)
        variants.append(detokenize(sent))
    response = oracle.score_batch(
        OracleRequest(context=_generic_context(), candidates=variants))
    objs = [objective(s, response.lower_is_worse) for s in response.scores]
    best = max(range(len(variants)), key=lambda i: objs[i])
    return objs[best], variants[best]


def _generic_context():
    from morpheus.oracle import Task, TaskContext
    return TaskContext(task=Task.GENERIC)


class RecordingOracle:
    """Delegates scoring while keeping every candidate batch for assertions."""

    def __init__(self, inner):
        self.inner = inner
        self.batches = []

    def score_batch(self, request):
        self.batches.append(list(request.candidates))
        return self.inner.score_batch(request)
