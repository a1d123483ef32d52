"""Doorstep keyword authentication.

The platform draws two distinct words per engagement from a wordlist of
human-speakable words (the shipped asset is Polish). The requester asks the
volunteer at the door for the volunteer's word; the requester's own word lets
the volunteer check back. Words are deliberately not secrets after the visit;
the guessing bound comes from the wordlist size, which is why the list must
hold at least 100 entries and attempts lock out after 5 consecutive failures.
"""

from __future__ import annotations

import random
import unicodedata
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum

from .domain import ChallengeKeyPair, Engagement, EngagementEvent, EngagementState, transition
from .errors import AlreadyIssued, LockedOut, MalformedWord, TooFewWords, WrongState

MIN_WORDS = 100
MIN_WORD_LEN = 3
MAX_WORD_LEN = 12
MAX_AUTH_FAILURES = 5


class SpeakerRole(Enum):
    VOLUNTEER = "volunteer"
    REQUESTER = "requester"


def normalize_word(raw: str) -> str:
    """Trim, lowercase, then composition-normalize (NFC). Idempotent."""
    return unicodedata.normalize("NFC", raw.strip().lower())


def _check_word(word: str, line_no: int) -> None:
    if any(not ch.isalpha() for ch in word):
        raise MalformedWord(line_no, word, "contains a non-letter character")
    if not MIN_WORD_LEN <= len(word) <= MAX_WORD_LEN:
        raise MalformedWord(line_no, word, f"length must be {MIN_WORD_LEN}-{MAX_WORD_LEN}")


@dataclass(frozen=True)
class Wordlist:
    """An ordered set of normalized candidate keywords."""

    words: tuple[str, ...]
    source_name: str

    def __post_init__(self):
        if len(self.words) < MIN_WORDS:
            raise TooFewWords(
                f"wordlist {self.source_name!r} has {len(self.words)} words, need {MIN_WORDS}"
            )
        for word in self.words:
            _check_word(word, 0)
        if len(set(self.words)) != len(self.words):
            raise TooFewWords(f"wordlist {self.source_name!r} contains duplicates")


def load_wordlist(text: str, source_name: str = "wordlist") -> Wordlist:
    """Parse a one-word-per-line file into a Wordlist.

    Lines starting with "#" are comments; blank lines are skipped. Words are
    trimmed, lowercased, NFC-normalized and deduplicated keeping first
    occurrence. A word with digits, punctuation or inner whitespace aborts
    with its line number.
    """
    seen: dict[str, None] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        word = normalize_word(stripped)
        _check_word(word, line_no)
        seen.setdefault(word, None)
    if len(seen) < MIN_WORDS:
        raise TooFewWords(f"{len(seen)} usable words in {source_name!r}, need {MIN_WORDS}")
    return Wordlist(words=tuple(seen), source_name=source_name)


def issue_keywords(
    engagement: Engagement,
    wordlist: Wordlist,
    at: datetime,
    rng_seed: int | None = None,
) -> tuple[ChallengeKeyPair, Engagement]:
    """Sample two distinct words uniformly and move to KeysIssued.

    A seed makes the draw reproducible for tests; without one the draw comes
    from OS entropy.
    """
    if engagement.key_pair is not None:
        raise AlreadyIssued(f"engagement {engagement.id} already has keywords")
    if engagement.state is not EngagementState.ACCEPTED:
        raise WrongState(
            f"keywords can only be issued in accepted state, not {engagement.state.value}"
        )
    rng = random.Random(rng_seed) if rng_seed is not None else random.SystemRandom()
    volunteer_word, requester_word = rng.sample(wordlist.words, 2)
    pair = ChallengeKeyPair(
        engagement_id=engagement.id,
        volunteer_word=volunteer_word,
        requester_word=requester_word,
        issued_at=at,
    )
    return pair, transition(engagement, EngagementEvent.ISSUE_KEYS, at, key_pair=pair)


def verify_keyword(
    engagement: Engagement,
    speaker_role: SpeakerRole,
    spoken: str,
    at: datetime,
) -> tuple[bool, Engagement]:
    """Check a spoken word against the role's keyword.

    A volunteer-side match fires VerifyArrival (state -> Authenticated); a
    requester-side match is recorded without advancing the state. Any match
    resets the consecutive-failure counter; a mismatch increments it, and
    after 5 consecutive failures the engagement is locked for review and
    further attempts raise LockedOut. The stored pair is never mutated.
    """
    if engagement.state is not EngagementState.KEYS_ISSUED:
        raise WrongState(
            f"verification requires keys_issued state, not {engagement.state.value}"
        )
    if engagement.locked:
        raise LockedOut(f"engagement {engagement.id} is locked after too many failures")

    assert engagement.key_pair is not None  # guaranteed by the state invariant
    expected = (
        engagement.key_pair.volunteer_word
        if speaker_role is SpeakerRole.VOLUNTEER
        else engagement.key_pair.requester_word
    )
    if normalize_word(spoken) != expected:
        return False, replace(engagement, auth_failures=engagement.auth_failures + 1)

    if speaker_role is SpeakerRole.VOLUNTEER:
        return True, transition(
            engagement, EngagementEvent.VERIFY_ARRIVAL, at, auth_failures=0
        )
    return True, replace(engagement, requester_verified=True, auth_failures=0)
