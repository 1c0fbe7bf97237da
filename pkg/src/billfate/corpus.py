"""Bill records: data model, corpus file I/O, statistics and a synthetic generator.

Corpus files are UTF-8 JSON lines, one bill per line::

    {"id": "b1", "title": "...", "text": "...", "sponsor": "...",
     "sponsor_kind": "legislator", "label": "L3", "year": 2012, "month": 5,
     "enacted": false}

``enacted`` is ``true``, ``false`` or ``null`` (outcome unknown).
"""

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import tokenize
from .errors import CorpusParseError, DataError
from .rng import make_rng

CATEGORIES = tuple(f"L{i}" for i in range(1, 9))
SPONSOR_KINDS = ("legislator", "executive")
OUTCOMES = ("enacted", "not_enacted", "unknown")
FILE_FIELDS = ("id", "title", "text", "sponsor", "sponsor_kind", "label", "year", "month", "enacted")

TOP_SPONSOR = "Aden Duale"


@dataclass(frozen=True)
class BillRecord:
    id: str
    title: str
    body: str
    sponsor_name: str
    sponsor_kind: str
    category: str
    year: int
    month: int
    outcome: str = "unknown"

    def __post_init__(self):
        problems = record_problems(self)
        if problems:
            raise DataError(f"invalid bill {self.id!r}: " + "; ".join(problems))

    @property
    def label(self):
        """1 if enacted, 0 if not, None if unknown."""
        return {"enacted": 1, "not_enacted": 0}.get(self.outcome)


def record_problems(rec):
    out = []
    if not isinstance(rec.id, str) or not rec.id:
        out.append("id must be a non-empty string")
    for name in ("title", "body", "sponsor_name"):
        if not isinstance(getattr(rec, name), str):
            out.append(f"{name} must be a string")
    if isinstance(rec.title, str) and not rec.title.strip():
        out.append("title is empty")
    for name in ("id", "title", "body", "sponsor_name"):
        value = getattr(rec, name)
        if isinstance(value, str):
            try:
                value.encode("utf-8")
            except UnicodeEncodeError:
                out.append(f"{name} is not valid unicode (lone surrogate)")
    if rec.sponsor_kind not in SPONSOR_KINDS:
        out.append(f"unknown sponsor_kind {rec.sponsor_kind!r}")
    if rec.category not in CATEGORIES:
        out.append(f"unknown category label {rec.category!r}")
    if not _is_int(rec.year) or not 1900 <= rec.year <= 2100:
        out.append("year out of range")
    if not _is_int(rec.month) or not 1 <= rec.month <= 12:
        out.append("month out of range")
    if rec.outcome not in OUTCOMES:
        out.append(f"unknown outcome {rec.outcome!r}")
    return out


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


# -- file format ------------------------------------------------------------

def record_to_dict(rec):
    enacted = {"enacted": True, "not_enacted": False, "unknown": None}[rec.outcome]
    values = (rec.id, rec.title, rec.body, rec.sponsor_name, rec.sponsor_kind,
              rec.category, rec.year, rec.month, enacted)
    return dict(zip(FILE_FIELDS, values))


def serialize_record(rec):
    return json.dumps(record_to_dict(rec), ensure_ascii=False)


def serialize_corpus(records):
    return "".join(serialize_record(r) + "\n" for r in records)


def write_corpus(records, path):
    Path(path).write_text(serialize_corpus(records), encoding="utf-8")


def _record_from_obj(obj):
    """Build a record from one decoded line; returns (record, problems)."""
    if not isinstance(obj, dict):
        return None, ["line is not an object"]
    missing = [f for f in FILE_FIELDS if f not in obj]
    extra = sorted(set(obj) - set(FILE_FIELDS))
    if missing:
        return None, ["missing field(s) " + ", ".join(missing)]
    if extra:
        return None, ["unexpected field(s) " + ", ".join(extra)]
    enacted = obj["enacted"]
    if enacted is True:
        outcome = "enacted"
    elif enacted is False:
        outcome = "not_enacted"
    elif enacted is None:
        outcome = "unknown"
    else:
        return None, ["enacted must be true, false or null"]
    rec = object.__new__(BillRecord)
    for attr, key in (("id", "id"), ("title", "title"), ("body", "text"),
                      ("sponsor_name", "sponsor"), ("sponsor_kind", "sponsor_kind"),
                      ("category", "label"), ("year", "year"), ("month", "month")):
        object.__setattr__(rec, attr, obj[key])
    object.__setattr__(rec, "outcome", outcome)
    problems = record_problems(rec)
    return (None if problems else rec), problems


def parse_lines(lines, source="<corpus>"):
    records, problems, seen = [], [], {}
    for no, line in enumerate(lines, start=1):
        if not line.strip():
            problems.append((no, "blank line"))
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append((no, f"malformed line ({exc.msg})"))
            continue
        rec, errs = _record_from_obj(obj)
        problems.extend((no, e) for e in errs)
        if rec is None:
            continue
        if rec.id in seen:
            problems.append((no, f"duplicate id {rec.id!r} (first at line {seen[rec.id]})"))
            continue
        seen[rec.id] = no
        records.append(rec)
    if problems:
        raise CorpusParseError(source, problems)
    return records


def parse_corpus(path):
    """Read a JSON-lines corpus file; fails on the first pass with every bad line listed."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return parse_lines(lines, source=path)


# -- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    total: int
    enacted: int
    not_enacted: int
    unknown: int
    per_category: dict  # label -> (count, enacted_count)
    per_year: dict      # year -> count
    top_sponsor: tuple  # (name, share)

    def category_percentages(self):
        """Share of bills per label plus enacted / not-enacted split within the label, in percent."""
        out = {}
        for label, (count, enacted) in self.per_category.items():
            if count:
                out[label] = (100.0 * count / self.total, 100.0 * enacted / count,
                              100.0 * (count - enacted) / count)
            else:
                out[label] = (0.0, 0.0, 0.0)
        return out

    def to_dict(self):
        return {
            "total": self.total,
            "enacted": self.enacted,
            "not_enacted": self.not_enacted,
            "unknown": self.unknown,
            "per_category": {k: {"count": c, "enacted": e} for k, (c, e) in self.per_category.items()},
            "per_year": {str(y): n for y, n in self.per_year.items()},
            "top_sponsor": {"name": self.top_sponsor[0], "share": self.top_sponsor[1]},
        }


def corpus_stats(records):
    if not records:
        raise DataError("corpus_stats needs at least one record")
    outcomes = Counter(r.outcome for r in records)
    per_category = {}
    for label in CATEGORIES:
        in_label = [r for r in records if r.category == label]
        per_category[label] = (len(in_label), sum(r.outcome == "enacted" for r in in_label))
    per_year = dict(sorted(Counter(r.year for r in records).items()))
    sponsors = Counter(r.sponsor_name for r in records)
    name, count = min(sponsors.items(), key=lambda kv: (-kv[1], kv[0]))
    return CorpusStats(
        total=len(records),
        enacted=outcomes["enacted"],
        not_enacted=outcomes["not_enacted"],
        unknown=outcomes["unknown"],
        per_category=per_category,
        per_year=per_year,
        top_sponsor=(name, count / len(records)),
    )


# -- synthetic generator --------------------------------------------------------

# Bill counts per year 2009-2019 with the peak of 88 bills in 2012; sums to 460.
KENYA_YEAR_COUNTS = {2009: 20, 2010: 28, 2011: 45, 2012: 88, 2013: 52, 2014: 50,
                     2015: 45, 2016: 40, 2017: 35, 2018: 30, 2019: 27}

DEFAULT_RULE = {
    "month": 0.35, "year": -0.1, "election_year": -0.4,
    "L1": 1.2, "L2": 0.6, "L3": 0.0, "L4": -0.3,
    "L5": -0.6, "L6": 0.9, "L7": -0.9, "L8": 0.3,
}
RULE_FEATURES = ("month", "year", "year_difference", "election_year",
                 "text_length", "title_length") + CATEGORIES

_TITLE_WORDS = (
    "finance", "appropriations", "public", "health", "education", "land", "water",
    "energy", "county", "governments", "elections", "security", "roads", "mining",
    "tax", "procedures", "statute", "law", "miscellaneous", "amendments", "national",
    "assembly", "senate", "police", "service", "agriculture", "fisheries", "trade",
    "insurance", "banking", "pensions", "wildlife", "forests", "tourism", "housing",
)
_SYLLABLES = ("ka", "ri", "mu", "to", "ne", "sa", "ba", "li", "wa", "zu", "go", "pe",
              "di", "mo", "ya", "chi", "ku", "fe", "ho", "ja")


@dataclass
class SynthSpec:
    """Parameters of the synthetic corpus.

    Labels come from a linear rule ``score = sum(rule[f] * value_f)`` over raw
    engineered values (see ``RULE_FEATURES``; category keys are one-hot
    indicators). Records whose score lies within ``margin`` pilot standard
    deviations of the threshold are never generated, so the noise-free labels
    are linearly separable with a gap.
    """

    total: int = 460
    minority: float = 65 / 460
    category_probs: tuple = (0.18, 0.16, 0.14, 0.12, 0.12, 0.10, 0.10, 0.08)
    year_range: tuple = (2009, 2019)
    year_counts: dict = None
    top_sponsor: str = TOP_SPONSOR
    top_sponsor_share: float = 0.24
    n_other_sponsors: int = 40
    executive_share: float = 0.3
    rule: dict = field(default_factory=lambda: dict(DEFAULT_RULE))
    noise: float = 0.0
    noise_mode: str = "swap"
    margin: float = 0.25
    election_years: tuple = (2013, 2017)
    reference_year: int = 2019
    title_words: tuple = (2, 8)
    body_words: tuple = (20, 160)
    vocab_size: int = 1500

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("year_counts") is not None:
            d["year_counts"] = {int(k): int(v) for k, v in d["year_counts"].items()}
        for key in ("category_probs", "year_range", "election_years", "title_words", "body_words"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DataError(f"unknown synth setting(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for key in ("category_probs", "year_range", "election_years", "title_words", "body_words"):
            out[key] = list(out[key])
        if out["year_counts"] is not None:
            out["year_counts"] = {str(k): v for k, v in sorted(out["year_counts"].items())}
        out["rule"] = dict(out["rule"])
        return out

    def validate(self):
        if self.total < 10:
            raise DataError("synthetic corpus needs total >= 10")
        if not 0.0 < self.minority < 1.0:
            raise DataError("minority ratio must lie in (0, 1)")
        if not 0.0 <= self.noise < 0.5:
            raise DataError("noise must lie in [0, 0.5)")
        if self.noise_mode not in ("swap", "bernoulli"):
            raise DataError("noise_mode must be 'swap' or 'bernoulli'")
        if len(self.category_probs) != 8 or min(self.category_probs) < 0:
            raise DataError("category_probs needs 8 non-negative weights")
        if self.year_counts is not None and sum(self.year_counts.values()) != self.total:
            raise DataError("year_counts must sum to total")
        bad = set(self.rule) - set(RULE_FEATURES)
        if bad:
            raise DataError(f"rule uses unknown feature(s): {', '.join(sorted(bad))}")
        if not 0.0 <= self.top_sponsor_share <= 1.0:
            raise DataError("top_sponsor_share must lie in [0, 1]")


def kenya_shaped_spec(**overrides):
    """460 bills, 65 enacted, 2009-2019 with 88 bills in 2012, 24% from the top sponsor."""
    return SynthSpec(year_counts=dict(KENYA_YEAR_COUNTS), **overrides)


def synthetic_vocabulary(spec):
    """Every token the generator can emit (for building a matching embedding table)."""
    body = _body_vocab(spec.vocab_size)
    years = [str(y) for y in _year_values(spec)]
    return sorted(set(body) | set(_TITLE_WORDS) | {"the", "bill"} | set(years))


def _body_vocab(size):
    words, n = [], len(_SYLLABLES)
    i = 0
    while len(words) < size:
        k, w = i, ""
        while True:
            w += _SYLLABLES[k % n]
            k //= n
            if k == 0:
                break
        if len(w) >= 4:
            words.append(w)
        i += 1
    return words


def _year_values(spec):
    if spec.year_counts is not None:
        return sorted(spec.year_counts)
    lo, hi = spec.year_range
    return list(range(lo, hi + 1))


def _rule_scores(spec, year, month, cat_idx, title_len, body_len):
    r = spec.rule
    score = (r.get("month", 0.0) * month
             + r.get("year", 0.0) * year
             + r.get("year_difference", 0.0) * (spec.reference_year - year)
             + r.get("election_year", 0.0) * np.isin(year, spec.election_years)
             + r.get("text_length", 0.0) * body_len
             + r.get("title_length", 0.0) * title_len)
    cat_w = np.array([r.get(c, 0.0) for c in CATEGORIES])
    return score + cat_w[cat_idx]


def rule_score(spec, record):
    """Score of an existing record under ``spec.rule`` (uses the tokenizer for lengths)."""
    return float(_rule_scores(
        spec, np.array(record.year), np.array(record.month),
        np.array(CATEGORIES.index(record.category)),
        np.array(len(tokenize(record.title))), np.array(len(tokenize(record.body)))))


def rule_threshold(spec, seed):
    """Pilot-sample threshold and half-gap used by the generator for ``seed``."""
    rng = make_rng(seed)
    return _pilot(spec, rng)


def _draw_free(spec, rng, n):
    probs = np.asarray(spec.category_probs, float)
    month = rng.integers(1, 13, size=n)
    cat = rng.choice(8, size=n, p=probs / probs.sum())
    title_len = rng.integers(spec.title_words[0], spec.title_words[1] + 1, size=n) + 3
    body_len = rng.integers(spec.body_words[0], spec.body_words[1] + 1, size=n)
    return month, cat, title_len, body_len


def _pilot(spec, rng):
    n = 4096
    years = np.asarray(_year_values(spec))
    if spec.year_counts is not None:
        w = np.array([spec.year_counts[y] for y in years], float)
        year = rng.choice(years, size=n, p=w / w.sum())
    else:
        year = rng.choice(years, size=n)
    month, cat, tl, bl = _draw_free(spec, rng, n)
    s = _rule_scores(spec, year, month, cat, tl, bl)
    return float(np.quantile(s, 1.0 - spec.minority)), spec.margin * float(np.std(s))


def generate_synthetic_corpus(spec, seed):
    """Deterministic synthetic corpus for ``(spec, seed)``.

    Candidate bills are drawn from the prior and accepted while their year
    (when ``year_counts`` is set) and their rule class still have room, so
    the year histogram and the number of rule-positive bills come out exact.
    Candidates scoring within the margin of the threshold are discarded.
    The top sponsor is then assigned to exactly ``round(total * share)``
    bills. Label noise is applied last, see ``_noise_flips``.
    """
    spec.validate()
    rng = make_rng(seed)
    thr, gap = _pilot(spec, rng)
    n = spec.total
    n_pos = int(round(n * spec.minority))
    room = {True: n_pos, False: n - n_pos}

    years_all = np.asarray(_year_values(spec))
    if spec.year_counts is not None:
        year_room = np.array([spec.year_counts[y] for y in years_all])
    else:
        year_room = None

    chosen = []  # (year, month, cat, title_len, body_len, positive)
    batch = 256
    for _ in range(2000):
        if len(chosen) == n:
            break
        if year_room is not None:
            year = rng.choice(years_all, size=batch, p=year_room / year_room.sum())
        else:
            year = rng.choice(years_all, size=batch)
        month, cat, tl, bl = _draw_free(spec, rng, batch)
        s = _rule_scores(spec, year, month, cat, tl, bl)
        for j in range(batch):
            if s[j] >= thr + gap:
                pos = True
            elif s[j] <= thr - gap:
                pos = False
            else:
                continue
            if room[pos] == 0:
                continue
            if year_room is not None:
                k = int(np.searchsorted(years_all, year[j]))
                if year_room[k] == 0:
                    continue
                year_room[k] -= 1
            room[pos] -= 1
            chosen.append((int(year[j]), int(month[j]), int(cat[j]), int(tl[j]), int(bl[j]), pos))
            if len(chosen) == n:
                break
    else:
        raise DataError("generator could not fill every year/class slot; relax the rule or margin")

    n_top = int(round(n * spec.top_sponsor_share))
    is_top = np.zeros(n, bool)
    is_top[rng.permutation(n)[:n_top]] = True
    others = [f"Member {i:02d}" for i in range(1, spec.n_other_sponsors + 1)]
    executive = rng.random(n) < spec.executive_share
    other_pick = rng.integers(0, len(others), size=n)
    flips = _noise_flips(spec, rng, np.array([c[5] for c in chosen]))

    vocab = np.asarray(_body_vocab(spec.vocab_size))
    zipf = 1.0 / np.arange(1, len(vocab) + 1)
    zipf /= zipf.sum()
    # same draws as rng.choice(vocab, p=zipf), without rebuilding the CDF per bill
    cdf = zipf.cumsum()
    cdf /= cdf[-1]

    out = []
    for i, (year, month, cat, tl, bl, pos) in enumerate(chosen):
        words = rng.choice(_TITLE_WORDS, size=tl - 3)
        title = "The " + " ".join(w.capitalize() for w in words) + f" Bill, {year}"
        body = " ".join(vocab[cdf.searchsorted(rng.random(bl), side="right")]) + "."
        if is_top[i]:
            sponsor, kind = spec.top_sponsor, "legislator"
        else:
            sponsor = others[other_pick[i]]
            kind = "executive" if executive[i] else "legislator"
        enacted = pos != bool(flips[i])
        out.append(BillRecord(
            id=f"bill-{i:04d}", title=title, body=body, sponsor_name=sponsor, sponsor_kind=kind,
            category=CATEGORIES[cat], year=year, month=month,
            outcome="enacted" if enacted else "not_enacted"))
    return out


def _noise_flips(spec, rng, positive):
    """Which labels to flip.

    ``swap`` flips ``round(noise * n_pos)`` rule-positive labels and the same
    number of rule-negative ones, so the class counts stay exact and each
    rule-positive bill is mislabelled with probability ``noise``.
    ``bernoulli`` flips every label independently with probability ``noise``;
    class counts then drift.
    """
    n = len(positive)
    if spec.noise_mode == "bernoulli":
        return rng.random(n) < spec.noise
    flips = np.zeros(n, bool)
    k = int(round(spec.noise * positive.sum()))
    for side in (True, False):
        idx = np.flatnonzero(positive == side)
        flips[rng.permutation(idx)[:k]] = True
    return flips
