#!/usr/bin/env python3
"""Generate the bundled mini-corpus and its evaluation fixtures.

Writes, under data/mini/:
  corpus.conllu.gz   ~100k tokens of synthetic dependency parses
  wordsim.tsv        word-pair similarity fixture
  phrases.tsv        AN / NN / VO phrase-pair fixture (5-column format)

Sentences are drawn from a small topical grammar: content words come mostly
from one topic per sentence, so words sharing a topic share contexts. Fixture
ratings are high for same-topic pairs and low otherwise. Output is fully
determined by --seed; gzip timestamps are zeroed.
"""

import argparse
import gzip
import io
import random
from pathlib import Path

# 44 base dependency labels, including punct.
LABELS = [
    "nsubj", "dobj", "amod", "det", "prep", "pobj", "nmod", "punct", "advmod",
    "aux", "auxpass", "nsubjpass", "cc", "conj", "poss", "possessive", "neg",
    "mark", "advcl", "ccomp", "xcomp", "acomp", "attr", "prt", "dep", "num",
    "appos", "relcl", "csubj", "iobj", "expl", "predet", "preconj", "quantmod",
    "npadvmod", "tmod", "mwe", "parataxis", "discourse", "cop", "pcomp",
    "agent", "infmod", "partmod",
]
assert len(LABELS) == 44 and len(set(LABELS)) == 44

TOPICS = {
    "kitchen": dict(
        nouns="tea coffee cup kettle bread butter knife plate soup kitchen oven sugar milk spoon table".split(),
        verbs="pour drink bake cook boil stir serve taste".split(),
        adjs="hot sweet fresh warm bitter tasty crisp empty".split(),
    ),
    "school": dict(
        nouns="student teacher book lesson exam class school pupil essay library pencil test course paper question".split(),
        verbs="read write teach study learn mark explain answer".split(),
        adjs="difficult clever easy final academic young careful short".split(),
    ),
    "finance": dict(
        nouns="bank money loan price market stock profit tax account budget interest cost share fund payment".split(),
        verbs="pay buy sell lend invest save borrow spend".split(),
        adjs="high low financial rich cheap annual total public".split(),
    ),
    "travel": dict(
        nouns="car train road ticket journey station airport bus route map driver passenger trip hotel flight".split(),
        verbs="drive ride book park travel board miss reach".split(),
        adjs="long fast slow crowded late early busy remote".split(),
    ),
    "health": dict(
        nouns="doctor patient hospital pain medicine nurse disease treatment health injury clinic drug wound fever heart".split(),
        verbs="treat cure heal examine prescribe suffer recover nurse_".split(),
        adjs="sick healthy serious medical painful chronic mild weak".split(),
    ),
    "nature": dict(
        nouns="tree river forest mountain rain flower garden field bird lake sky grass leaf stone wind".split(),
        verbs="grow climb plant water cross pick watch walk".split(),
        adjs="green wild dark tall quiet wet cold beautiful".split(),
    ),
}
# "nurse" is both noun and verb in English; keep the word forms distinct.
TOPICS["health"]["verbs"][-1] = "visit"

DETS = "the a this that every some".split()
PREPS = "in on with near under for from".split()
ADVS = "quickly often slowly never always really".split()
AUXS = "will can should must".split()
PRONS = "he she they we it".split()
MISC = {
    "cc": ["and", "but", "or"], "poss": ["his", "her", "their", "our"], "possessive": ["'s"],
    "neg": ["not"], "mark": ["because", "while", "if"], "prt": ["up", "out", "off"],
    "num": ["two", "three", "ten", "five"], "expl": ["there"], "predet": ["all", "both"],
    "preconj": ["either", "both"], "quantmod": ["about", "nearly"], "tmod": ["today", "yesterday", "tomorrow"],
    "npadvmod": ["yesterday", "later"], "mwe": ["rather", "than"], "discourse": ["well", "oh", "yes"],
    "cop": ["is", "was"], "auxpass": ["was", "been"], "agent": ["by"], "dep": ["etc", "so"],
    "attr": ["what", "who"], "pcomp": ["after", "before"],
}


def rare_words(rng, n):
    syll = "ba be bi bo bu da de di do du ka ke ki ko ku la le li lo lu ma me mi mo mu ra re ri ro ru sa se si so su ta te ti to tu".split()
    out = set()
    while len(out) < n:
        out.add("".join(rng.choice(syll) for _ in range(rng.randint(2, 4))))
    return sorted(out)


class Sentence:
    def __init__(self):
        self.tokens = []  # [form, head_token_or_None, label]

    def add(self, form, head, label):
        tok = [form, head, label]
        self.tokens.append(tok)
        return tok

    def conllu(self, sid):
        index = {id(t): i + 1 for i, t in enumerate(self.tokens)}
        lines = [f"# sent_id = {sid}"]
        for i, (form, head, label) in enumerate(self.tokens, start=1):
            h = 0 if head is None else index[id(head)]
            lines.append(f"{i}\t{form}\t_\t_\t_\t_\t{h}\t{label}\t_\t_")
        return "\n".join(lines) + "\n\n"


class Generator:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.rare = rare_words(self.rng, 1500)
        self.topics = list(TOPICS)

    def word(self, topic, kind):
        rng = self.rng
        if kind == "nouns" and rng.random() < 0.08:
            return rng.choice(self.rare)
        if rng.random() < 0.1:
            topic = rng.choice(self.topics)
        return rng.choice(TOPICS[topic][kind])

    def noun_phrase(self, s, topic, head, label):
        rng = self.rng
        noun = s.add(self.word(topic, "nouns"), head, label)
        s.add(rng.choice(DETS), noun, "det")
        if rng.random() < 0.6:
            s.add(self.word(topic, "adjs"), noun, "amod")
        if rng.random() < 0.35:
            s.add(self.word(topic, "nouns"), noun, "nmod")
        return noun

    def sentence(self):
        rng = self.rng
        topic = rng.choice(self.topics)
        s = Sentence()
        verb = s.add(self.word(topic, "verbs"), None, "root")
        if rng.random() < 0.7:
            self.noun_phrase(s, topic, verb, "nsubj")
        else:
            s.add(rng.choice(PRONS), verb, "nsubj")
        if rng.random() < 0.3:
            s.add(rng.choice(AUXS), verb, "aux")
        obj = self.noun_phrase(s, topic, verb, "dobj")
        if rng.random() < 0.5:
            prep = s.add(rng.choice(PREPS), obj if rng.random() < 0.5 else verb, "prep")
            self.noun_phrase(s, topic, prep, "pobj")
        if rng.random() < 0.3:
            s.add(rng.choice(ADVS), verb, "advmod")
        for _ in range(rng.choice([0, 0, 1, 1, 2])):
            self.extra(s, topic, verb, obj)
        s.add(".", verb, "punct")
        return s

    def extra(self, s, topic, verb, obj):
        rng = self.rng
        label = rng.choice(LABELS[8:])
        if label in MISC:
            s.add(rng.choice(MISC[label]), obj if label in ("poss", "predet", "num", "possessive") else verb, label)
        elif label in ("conj", "appos", "iobj", "nsubjpass", "csubj"):
            self.noun_phrase(s, topic, obj if label in ("conj", "appos") else verb, label)
        elif label in ("advcl", "ccomp", "xcomp", "parataxis", "relcl", "infmod", "partmod"):
            clause = s.add(self.word(topic, "verbs"), obj if label in ("relcl", "infmod", "partmod") else verb, label)
            if rng.random() < 0.5:
                self.noun_phrase(s, topic, clause, "dobj")
        elif label == "acomp":
            s.add(self.word(topic, "adjs"), verb, label)
        elif label == "aux":
            s.add(rng.choice(AUXS), verb, label)
        else:
            s.add(rng.choice(ADVS), verb, label)


def ratings(rng, same):
    base = rng.uniform(5.0, 7.0) if same else rng.uniform(1.0, 3.5)
    return round(min(7.0, max(1.0, base + rng.gauss(0, 0.4))), 2)


def wordsim_fixture(rng):
    rows = []
    for _ in range(60):
        t1 = rng.choice(list(TOPICS))
        same = rng.random() < 0.5
        t2 = t1 if same else rng.choice([t for t in TOPICS if t != t1])
        kind = rng.choice(["nouns", "verbs", "adjs"])
        a, b = rng.choice(TOPICS[t1][kind]), rng.choice(TOPICS[t2][kind])
        if a != b:
            rows.append(f"{a}\t{b}\t{ratings(rng, same)}")
    return "# word1\tword2\trating\n" + "\n".join(rows) + "\n"


def phrase_fixture(rng):
    kinds = {"AN": ("nouns", "adjs"), "NN": ("nouns", "nouns"), "VO": ("verbs", "nouns")}
    rows = []
    for pt, (root_kind, dep_kind) in kinds.items():
        n = 0
        while n < 60:
            t1 = rng.choice(list(TOPICS))
            same = rng.random() < 0.5
            t2 = t1 if same else rng.choice([t for t in TOPICS if t != t1])
            r1, d1 = rng.choice(TOPICS[t1][root_kind]), rng.choice(TOPICS[t1][dep_kind])
            r2, d2 = rng.choice(TOPICS[t2][root_kind]), rng.choice(TOPICS[t2][dep_kind])
            if (r1, d1) == (r2, d2) or r1 == d1 or r2 == d2:
                continue
            rows.append(f"{pt}\t{r1}\t{d1}\t{r2}/{d2}\t{ratings(rng, same)}")
            n += 1
    return "phrase_type\troot\tdependent\troot2/dependent2\trating\n" + "\n".join(rows) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "mini")
    ap.add_argument("--tokens", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    gen = Generator(args.seed)
    text = io.StringIO()
    tokens = 0
    sid = 0
    seen = set()
    while tokens < args.tokens:
        s = gen.sentence()
        sid += 1
        tokens += len(s.tokens)
        seen.update(t[2] for t in s.tokens if t[2] != "root")
        text.write(s.conllu(sid))
    missing = set(LABELS) - seen
    assert not missing, f"labels never generated: {missing}"
    with open(args.out / "corpus.conllu.gz", "wb") as raw:
        with gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
            gz.write(text.getvalue().encode())

    fixtures = random.Random(args.seed + 1)
    (args.out / "wordsim.tsv").write_text(wordsim_fixture(fixtures))
    (args.out / "phrases.tsv").write_text(phrase_fixture(fixtures))
    print(f"{sid} sentences, {tokens} tokens, {len(seen)} labels")


if __name__ == "__main__":
    main()
