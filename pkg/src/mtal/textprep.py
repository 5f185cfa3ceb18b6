"""Normalization pipeline for Arabic social-media text.

Cleaning runs in a fixed order: URLs and @-mentions go first, whitespace
runs collapse, digits (ASCII and Arabic-Indic) are dropped, hashtag marks
and underscores become spaces, character runs of three or more collapse
to one, Arabic diacritics (U+064B..U+0652) and tatweel (U+0640) are
removed, and finally the emoji policy is applied while tokenizing on
whitespace. The character rules repeat in that order until the text is
stable, which makes the whole pipeline idempotent: normalizing its own
output changes nothing.

Emojis are detected by Unicode pictographic property ranges, not a hand
list. Under the "weighted" policy each emoji token carries a weight from
a user-editable lexicon (falling back to a default); all other tokens
weigh 1.0.
"""

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple


class Token(NamedTuple):
    text: str
    weight: float


# A normalized tweet: tokens with per-token weights.
CleanText = list[Token]

EMOJI_MODES = ("strip", "keep", "weighted")

_URL_RE = re.compile(r"https?://\S+|\bwww\.\S+|\bt\.co/\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_WHITESPACE_RE = re.compile(r"\s+")
_DIGITS_RE = re.compile(r"[0-9٠-٩]+")
_WORD_JOINERS_RE = re.compile(r"[#_]")
_REPEATS_RE = re.compile(r"(.)\1{2,}", re.DOTALL)
_DIACRITICS_TATWEEL_RE = re.compile(r"[ً-ْـ]")

# Extended_Pictographic ranges from the Unicode emoji data files.
_PICTOGRAPHIC_RANGES = (
    (0x00A9, 0x00A9), (0x00AE, 0x00AE), (0x203C, 0x203C), (0x2049, 0x2049),
    (0x2122, 0x2122), (0x2139, 0x2139), (0x2194, 0x2199), (0x21A9, 0x21AA),
    (0x231A, 0x231B), (0x2328, 0x2328), (0x2388, 0x2388), (0x23CF, 0x23CF),
    (0x23E9, 0x23F3), (0x23F8, 0x23FA), (0x24C2, 0x24C2), (0x25AA, 0x25AB),
    (0x25B6, 0x25B6), (0x25C0, 0x25C0), (0x25FB, 0x25FE), (0x2600, 0x2605),
    (0x2607, 0x2612), (0x2614, 0x2685), (0x2690, 0x2705), (0x2708, 0x2712),
    (0x2714, 0x2714), (0x2716, 0x2716), (0x271D, 0x271D), (0x2721, 0x2721),
    (0x2728, 0x2728), (0x2733, 0x2734), (0x2744, 0x2744), (0x2747, 0x2747),
    (0x274C, 0x274C), (0x274E, 0x274E), (0x2753, 0x2755), (0x2757, 0x2757),
    (0x2763, 0x2767), (0x2795, 0x2797), (0x27A1, 0x27A1), (0x27B0, 0x27B0),
    (0x27BF, 0x27BF), (0x2934, 0x2935), (0x2B05, 0x2B07), (0x2B1B, 0x2B1C),
    (0x2B50, 0x2B50), (0x2B55, 0x2B55), (0x3030, 0x3030), (0x303D, 0x303D),
    (0x3297, 0x3297), (0x3299, 0x3299), (0x1F000, 0x1F0FF), (0x1F10D, 0x1F10F),
    (0x1F12F, 0x1F12F), (0x1F16C, 0x1F171), (0x1F17E, 0x1F17F), (0x1F18E, 0x1F18E),
    (0x1F191, 0x1F19A), (0x1F1AD, 0x1F1E5), (0x1F201, 0x1F20F), (0x1F21A, 0x1F21A),
    (0x1F22F, 0x1F22F), (0x1F232, 0x1F23A), (0x1F23C, 0x1F23F), (0x1F249, 0x1F3FA),
    (0x1F400, 0x1F53D), (0x1F546, 0x1F64F), (0x1F680, 0x1F6FF), (0x1F774, 0x1F77F),
    (0x1F7D5, 0x1F7FF), (0x1F80C, 0x1F80F), (0x1F848, 0x1F84F), (0x1F85A, 0x1F85F),
    (0x1F888, 0x1F88F), (0x1F8AE, 0x1F8FF), (0x1F90C, 0x1F93A), (0x1F93C, 0x1F945),
    (0x1F947, 0x1FAFF), (0x1FC00, 0x1FFFD),
)
_RANGE_STARTS = tuple(lo for lo, _ in _PICTOGRAPHIC_RANGES)

# Flag halves pair up into one emoji sequence.
_REGIONAL_LO, _REGIONAL_HI = 0x1F1E6, 0x1F1FF
# Continuation characters: variation selector 16, combining keycap, skin tones.
_EMOJI_CONTINUATIONS = frozenset({0xFE0F, 0x20E3} | set(range(0x1F3FB, 0x1F400)))
_ZWJ = 0x200D

_LEXICON_PACKAGE_FILE = "data/emoji_lexicon.tsv"


def _is_emoji_base(codepoint: int) -> bool:
    if _REGIONAL_LO <= codepoint <= _REGIONAL_HI:
        return True
    i = bisect_right(_RANGE_STARTS, codepoint) - 1
    return i >= 0 and codepoint <= _PICTOGRAPHIC_RANGES[i][1]


def _is_emoji_sequence(text: str) -> bool:
    """True when text is entirely emoji material with at least one base."""
    if not text:
        return False
    has_base = False
    for ch in text:
        cp = ord(ch)
        if _is_emoji_base(cp):
            has_base = True
        elif cp not in _EMOJI_CONTINUATIONS and cp != _ZWJ:
            return False
    return has_base


def _strip_vs16(sequence: str) -> str:
    return sequence.replace("️", "")


@dataclass(frozen=True)
class EmojiPolicy:
    """How emojis survive normalization.

    strip drops them, keep retains them at weight 1.0, weighted retains
    them at their lexicon weight (default_weight when absent). Lexicon
    keys are normalized by removing variation selector 16 so "❤" and
    "❤️" share an entry.
    """

    mode: str = "keep"
    lexicon: dict = field(default_factory=dict)
    default_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in EMOJI_MODES:
            raise ValueError(f"emoji mode must be one of {EMOJI_MODES}, got {self.mode!r}")
        if self.default_weight <= 0:
            raise ValueError(f"default_weight must be positive, got {self.default_weight}")
        normalized = {}
        for key, weight in self.lexicon.items():
            if not _is_emoji_sequence(key):
                raise ValueError(f"lexicon key {key!r} is not an emoji sequence")
            if weight <= 0:
                raise ValueError(f"lexicon weight for {key!r} must be positive, got {weight}")
            normalized[_strip_vs16(key)] = float(weight)
        object.__setattr__(self, "lexicon", normalized)

    def emoji_weight(self, sequence: str) -> float:
        return self.lexicon.get(_strip_vs16(sequence), self.default_weight)


def _split_emoji_runs(chunk: str) -> list[tuple[str, bool]]:
    """Split a whitespace-free chunk into (piece, is_emoji) parts, cutting
    out one emoji sequence at a time (base + continuations, flag pairs,
    ZWJ-joined families)."""
    pieces: list[tuple[str, bool]] = []
    text_start = 0
    i = 0
    n = len(chunk)
    while i < n:
        cp = ord(chunk[i])
        if not _is_emoji_base(cp):
            i += 1
            continue
        if text_start < i:
            pieces.append((chunk[text_start:i], False))
        j = i + 1
        if _REGIONAL_LO <= cp <= _REGIONAL_HI and j < n and _REGIONAL_LO <= ord(chunk[j]) <= _REGIONAL_HI:
            j += 1
        while j < n:
            nxt = ord(chunk[j])
            if nxt in _EMOJI_CONTINUATIONS:
                j += 1
            elif nxt == _ZWJ and j + 1 < n and _is_emoji_base(ord(chunk[j + 1])):
                j += 2
            else:
                break
        pieces.append((chunk[i:j], True))
        i = j
        text_start = j
    if text_start < n:
        pieces.append((chunk[text_start:], False))
    return pieces


def _cleaning_pass(text: str) -> str:
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _WHITESPACE_RE.sub(" ", text)
    text = _DIGITS_RE.sub("", text)
    text = _WORD_JOINERS_RE.sub(" ", text)
    text = _REPEATS_RE.sub(r"\1", text)
    text = _DIACRITICS_TATWEEL_RE.sub("", text)
    return text


# One pass is almost always enough; pathological inputs (e.g. diacritics
# interleaved inside a character run, or a run collapse exposing a URL
# pattern) need another round, so the pass repeats until stable.
_MAX_CLEANING_PASSES = 10


def normalize(raw: str, policy: EmojiPolicy = EmojiPolicy()) -> CleanText:
    """Run the full cleaning pipeline over one raw tweet."""
    text = raw
    for _ in range(_MAX_CLEANING_PASSES):
        cleaned = _cleaning_pass(text)
        if cleaned == text:
            break
        text = cleaned

    tokens: CleanText = []
    for chunk in text.split():
        for piece, is_emoji in _split_emoji_runs(chunk):
            if not is_emoji:
                tokens.append(Token(piece, 1.0))
            elif policy.mode == "keep":
                tokens.append(Token(piece, 1.0))
            elif policy.mode == "weighted":
                tokens.append(Token(piece, policy.emoji_weight(piece)))
            # strip: drop the emoji token
    return tokens


def render_plain(tokens: CleanText) -> str:
    """Join token texts with single spaces (weights dropped)."""
    return " ".join(token.text for token in tokens)


def render_weighted(tokens: CleanText) -> str:
    """Join tokens with single spaces, tagging non-unit weights as token|weight."""
    return " ".join(
        token.text if token.weight == 1.0 else f"{token.text}|{token.weight!r}"
        for token in tokens
    )


def is_idempotent_check(raw: str, policy: EmojiPolicy = EmojiPolicy()) -> bool:
    """True when normalizing the rendered normalization reproduces it."""
    once = normalize(raw, policy)
    return normalize(render_plain(once), policy) == once


def load_emoji_lexicon(path) -> dict:
    """Parse a lexicon file: UTF-8, one 'emoji<TAB>weight' entry per line,
    blank lines and lines starting with # ignored."""
    lexicon: dict = {}
    content = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(content.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'emoji<TAB>weight', got {line!r}")
        emoji, weight_text = parts[0].strip(), parts[1].strip()
        try:
            weight = float(weight_text)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: weight {weight_text!r} is not a number") from None
        if weight <= 0:
            raise ValueError(f"{path}:{lineno}: weight must be positive, got {weight}")
        lexicon[emoji] = weight
    return lexicon


def default_emoji_lexicon() -> dict:
    """The packaged seed lexicon (a starting point, not ground truth)."""
    ref = resources.files("mtal").joinpath(_LEXICON_PACKAGE_FILE)
    with resources.as_file(ref) as path:
        return load_emoji_lexicon(path)
