"""Bundled word lists for the deterministic providers.

These are intentionally small, fixed lists: they make sentiment scoring,
pronoun detection, and pronoun weakening reproducible without any model.
"""

from __future__ import annotations

POSITIVE_WORDS = frozenset(
    """
    good great excellent wonderful kind warm generous honest gentle loyal
    faithful devoted trusted trust friend friendly ally admired brave
    cheerful helpful noble fair glad happy strong true safe bright reliable
    respected beloved praised celebrated gracious
    """.split()
)

NEGATIVE_WORDS = frozenset(
    """
    bad terrible awful cruel bitter hostile angry broken dangerous false
    treacherous enemy enemies liar betray betrayed wicked vile rotten
    suspicious threat feared hated corrupt dishonest ruthless grim harsh
    shameful despised reviled toxic sinister
    """.split()
)

# Pronouns the coreference heuristic links to the nearest preceding entity.
THIRD_PERSON_PRONOUNS = frozenset(
    "he she it they him her them his hers its their".split()
)

# Primary and alternate vague replacements used when weakening a pronoun.
VAGUE_REPLACEMENTS = {
    "he": "the man",
    "she": "the woman",
    "it": "the thing",
    "they": "the group",
    "him": "the man",
    "her": "the woman",
    "them": "the group",
    "his": "the man's",
    "hers": "the woman's",
    "its": "the thing's",
    "their": "the group's",
}

VAGUE_REPLACEMENTS_ALT = {
    "he": "someone",
    "she": "someone",
    "it": "something",
    "they": "some of them",
    "him": "someone",
    "her": "someone",
    "them": "some of them",
    "his": "someone's",
    "hers": "someone's",
    "its": "something's",
    "their": "someone's",
}
