"""Deterministic rule-table lemmatizer for English technical text.

An irregular-form dictionary is consulted first, then suffix rules for
-s/-es/-ies/-ing/-ed.  Rules are re-applied until the output stops
changing, so ``lemmatize(lemmatize(w)) == lemmatize(w)`` always holds.
"""

from __future__ import annotations

import re

RULESET_ID = "rules-v1"

IRREGULAR = {
    "analyses": "analysis",
    "axes": "axis",
    "bases": "basis",
    "children": "child",
    "criteria": "criterion",
    "crises": "crisis",
    "diagnoses": "diagnosis",
    "feet": "foot",
    "geese": "goose",
    "hypotheses": "hypothesis",
    "indices": "index",
    "lives": "life",
    "matrices": "matrix",
    "men": "man",
    "mice": "mouse",
    "leaves": "leaf",
    "parentheses": "parenthesis",
    "people": "person",
    "phenomena": "phenomenon",
    "syntheses": "synthesis",
    "teeth": "tooth",
    "theses": "thesis",
    "used": "use",
    "using": "use",
    "uses": "use",
    "vertices": "vertex",
    "women": "woman",
    "wives": "wife",
    "knives": "knife",
    "halves": "half",
    "selves": "self",
    "went": "go",
    "gone": "go",
    "made": "make",
    "done": "do",
    "given": "give",
    "taken": "take",
    "shown": "show",
    "seen": "see",
    "known": "know",
    "written": "write",
    "built": "build",
    "found": "find",
    "held": "hold",
    "spoken": "speak",
    "chosen": "choose",
    "drawn": "draw",
    "grown": "grow",
    "brought": "bring",
    "thought": "think",
    "taught": "teach",
    "caught": "catch",
    "bought": "buy",
    "sought": "seek",
}

# Words whose final "s" (or -ing/-ed) is not inflectional.
INVARIANT = frozenset(
    """
    news series species means physics mathematics linguistics statistics
    economics genetics electronics dynamics mechanics semantics
    pragmatics phonetics optics kinetics aerodynamics thermodynamics
    robotics informatics ethics politics logistics analytics graphics
    status corpus focus bus virus census campus consensus stimulus
    nucleus radius modulus locus bonus apparatus plus minus thus
    gas bias atlas canvas alias lens chaos pancreas
    always perhaps whereas various previous numerous
    during morning evening ceiling string thing nothing something
    anything everything king ring spring bring swing sing
    need seed feed speed bleed breed embed shed bed red
    hundred kindred sacred naked wicked
    """.split()
)

_VOWELS = set("aeiou")
_ALPHA = re.compile(r"^[a-z]+$")


def _has_vowel(s: str) -> bool:
    return any(ch in "aeiouy" for ch in s)


def _is_cvc(s: str) -> bool:
    if len(s) != 3:
        return False
    c1, v, c2 = s
    return c1 not in _VOWELS and v in _VOWELS and c2 not in _VOWELS and c2 not in "wxy"


def _restore(stem: str) -> str:
    # Porter step 1b style repair after removing -ing/-ed.
    if stem.endswith(("at", "bl", "iz", "yz")):
        return stem + "e"
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "lsz":
        return stem[:-1]
    if _is_cvc(stem):
        return stem + "e"
    if len(stem) >= 3 and stem[-1] == "v":
        return stem + "e"
    if len(stem) >= 3 and stem[-1] == "c" and stem[-2] in "aeioun":
        return stem + "e"
    if len(stem) >= 4 and stem[-1] == "s" and not stem.endswith(("ss", "us", "is", "as")):
        return stem + "e"
    if len(stem) >= 4 and stem.endswith(("ang", "eng")):
        return stem + "e"
    if len(stem) >= 4 and stem.endswith("ur") and stem[-3] not in _VOWELS:
        return stem + "e"
    return stem


def _strip_plural(w: str) -> str:
    if len(w) < 4 or not w.endswith("s"):
        return w
    if w.endswith(("ss", "us", "is", "ous")):
        return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith(("sses", "xes", "ches", "shes", "zzes")):
        return w[:-2]
    return w[:-1]


def _strip_verbal(w: str) -> str:
    if w.endswith("ing") and len(w) > 5:
        stem = w[:-3]
        if _has_vowel(stem) and len(stem) >= 3:
            return _restore(stem)
        return w
    if w.endswith("ied") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("eed"):
        return w
    if w.endswith("ed") and len(w) > 4:
        stem = w[:-2]
        if _has_vowel(stem) and len(stem) >= 3:
            return _restore(stem)
    return w


def _lemma_once(w: str) -> str:
    if w in IRREGULAR:
        return IRREGULAR[w]
    if w in INVARIANT or not _ALPHA.match(w):
        return w
    out = _strip_plural(w)
    if out == w:
        out = _strip_verbal(w)
    return out


def lemmatize(word: str) -> str:
    """Return the lemma of a lowercased word.

    Hyphenated compounds are lemmatized on their final segment only
    ("edge-detections" -> "edge-detection").  Tokens with digits or other
    symbols in the last segment are returned unchanged.
    """
    head, sep, tail = word.rpartition("-")
    cur = tail
    for _ in range(8):
        nxt = _lemma_once(cur)
        if nxt == cur:
            break
        cur = nxt
    return head + sep + cur
