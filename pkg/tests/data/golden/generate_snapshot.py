"""Regenerate snapshot.jsonl, the synthetic forum corpus used by the tests.

The corpus plants three word groups with staggered day schedules: acute
symptoms early, testing and care mid-course, recovery late. Day coverage,
marker shapes (plain, ranges, day zero, titles, dates in four forms), and
the discard and filter cases are all chosen to exercise every annotation
path. Output is deterministic; rerunning must reproduce the file byte for
byte.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

ACUTE = [
    "fever", "chills", "cough", "aches", "headache", "throat", "congestion",
    "nausea", "sweats", "temperature", "pain", "painful", "sick", "worse",
    "bad", "flu", "sore", "tired", "fatigue", "anxiety", "hit", "shit",
    "suddenly", "weird",
]
CARE = [
    "test", "swab", "results", "clinic", "quarantine", "isolation",
    "pharmacy", "appointment", "oximeter", "monitor", "doctor", "nurse",
    "hospital", "infection", "pneumonia", "positive", "negative", "attack",
    "develop", "start", "time",
]
RECOVERY = [
    "recovery", "better", "improving", "energy", "walking", "appetite",
    "taste", "smell", "exercise", "stamina", "hope", "glad", "lucky",
    "safe", "finally", "pretty", "food", "intense", "loss", "lost",
]
COMMON = [
    "covid", "symptoms", "husband", "week", "night", "morning", "home",
    "work", "sleep", "feeling",
]
GLUE = ["i", "my", "the", "and", "so", "was", "with", "but", "this", "a"]

BASE_UTC = 1583000000
FLAIR_ME = "Tested Positive - Me"
FLAIR_PLAIN = "Tested Positive"


def _mixture(day: int | None) -> tuple[int, int, int]:
    """Content words drawn from (acute, care, recovery) pools for a day."""
    if day is None or day > 14:
        return (5, 5, 5)
    if day <= 4:
        return (14, 1, 0)
    if day <= 9:
        return (1, 14, 1)
    return (0, 1, 14)


def _segment_text(rng: random.Random, day: int | None) -> str:
    n_acute, n_care, n_recovery = _mixture(day)
    words = (
        [rng.choice(ACUTE) for _ in range(n_acute)]
        + [rng.choice(CARE) for _ in range(n_care)]
        + [rng.choice(RECOVERY) for _ in range(n_recovery)]
        + [rng.choice(COMMON) for _ in range(rng.randint(0, 1))]
    )
    rng.shuffle(words)
    out = []
    for word in words:
        if rng.random() < 0.45:
            out.append(rng.choice(GLUE))
        out.append(word)
    sentence = " ".join(out)
    return sentence[0].upper() + sentence[1:] + "."


def _journal_body(rng: random.Random, entries: list[tuple[str, int | None]], prefix: str = "") -> str:
    parts = [prefix] if prefix else []
    for marker, day in entries:
        text = _segment_text(rng, day) if day is not None else ""
        parts.append(f"{marker}: {text}" if text else f"{marker}:")
    return "\n\n".join(parts)


def build_posts() -> list[dict]:
    rng = random.Random(42)
    posts: list[dict] = []

    def add(post_id: str, author: str, flair: str, title: str, body: str) -> None:
        # Field names mirror the forum API records a snapshot would hold.
        posts.append({
            "id": post_id,
            "author": author,
            "link_flair_text": flair,
            "title": title,
            "selftext": body,
            "created_utc": BASE_UTC + len(posts) * 3600,
        })

    intro = "Tested positive yesterday and decided to keep a journal for anyone curious."
    add("p01", "userA", FLAIR_ME, "My course so far",
        _journal_body(rng, [(f"Day {d}", d) for d in range(1, 6)], prefix=intro))
    add("p02", "userB", FLAIR_ME, "First three entries",
        _journal_body(rng, [(f"day {d} -", d) for d in range(1, 4)]))
    add("p03", "userC", FLAIR_ME, "Journal",
        _journal_body(rng, [(f"DAY {d}", d) for d in range(2, 7)]))
    add("p04", "userD", FLAIR_ME, "Tracking everything",
        _journal_body(rng, [(f"Day #{d}", d) for d in range(3, 8)]))
    add("p05", "userE", FLAIR_ME, "Progress notes",
        _journal_body(rng, [(f"Day {d}", d) for d in range(4, 9)]))
    # Day 5 marker with an empty tail: the mention counts, no segment results.
    add("p06", "userF", FLAIR_ME, "Diary",
        "Day 5:\n\n" + _journal_body(rng, [(f"Day {d}", d) for d in range(6, 10)]))
    add("p07", "userG", FLAIR_ME, "Second week approaching",
        _journal_body(rng, [(f"Day {d}", d) for d in range(6, 11)]))
    add("p08", "userH", FLAIR_ME, "Notes from quarantine",
        _journal_body(rng, [(f"Day {d}", d) for d in range(7, 12)]))
    add("p09", "userI", FLAIR_ME, "Still at it",
        _journal_body(rng, [(f"Day {d}", d) for d in range(8, 13)]))
    add("p10", "userJ", FLAIR_ME, "Update thread",
        _journal_body(rng, [(f"Day {d}", d) for d in range(9, 14)]))
    add("p11", "userK", FLAIR_ME, "Countdown to clear",
        _journal_body(rng, [(f"Day {d}", d) for d in range(10, 15)]))
    add("p12", "userL", FLAIR_ME, "Almost done",
        _journal_body(rng, [("Day 11", 11), ("days 12-13", 13), ("Day 14", 14)]))
    add("p13", "userM", FLAIR_ME, "From exposure onward",
        _journal_body(rng, [("Day 0", 1), ("Day 1", 1), ("Day 2", 2)]))
    add("p14", "userN", FLAIR_ME, "The long tail",
        _journal_body(rng, [("Day 13", 13), ("Day 14", 14), ("Day 15", 15), ("Day 16", 16)]))
    add("p15", "userO", FLAIR_ME, "Day 7 check in",
        _segment_text(rng, 7) + " " + _segment_text(rng, 7))
    add("p16", "userP", FLAIR_ME, "Day 12 update",
        _segment_text(rng, 12) + " " + _segment_text(rng, 12))

    add("p17", "userQ", FLAIR_PLAIN, "March diary",
        _journal_body(rng, [("March 5", 1), ("March 6", 2), ("March 7", 3)]))
    add("p18", "userR", FLAIR_PLAIN, "Dates and notes",
        _journal_body(rng, [("3/10", 1), ("3/12", 3), ("3/15", 6)]))
    add("p19", "userS", FLAIR_PLAIN, "April log",
        _journal_body(rng, [("April 2nd", 1), ("April 5th", 4), ("April 9th", 8)]))
    add("p20", "userT", FLAIR_PLAIN, "Slow recovery log",
        _journal_body(rng, [("7 March", 1), ("10 March", 4), ("14 March", 8), ("18 March", 12)]))
    add("p21", "userU", FLAIR_PLAIN, "Leap month",
        _journal_body(rng, [("Feb 20", 1), ("Feb 24", 5), ("Feb 28", 9), ("March 3", 13)]))
    add("p22", "userV", FLAIR_PLAIN, "Two rough days",
        _journal_body(rng, [("May 1", 1), ("May 2", 2)],
                      prefix="Writing this from bed, apologies for typos."))
    add("p23", "userW", FLAIR_PLAIN, "Full dates",
        _journal_body(rng, [("March 20, 2020", 1), ("3/22/2020", 3)]))

    add("p24", "userX", FLAIR_ME, "Just got my result",
        "Just tested positive and honestly freaking out. Any advice is appreciated.")
    add("p25", "userY", FLAIR_PLAIN, "Isolation question",
        "Question about isolation rules for housemates. How strict were you all?")
    add("p26", "userZ", FLAIR_ME, "Lingering congestion",
        "Does anyone else still have lingering congestion after recovery? It has been weeks.")
    add("p27", "userAA", FLAIR_PLAIN, "Thank you all",
        "Sending love to everyone fighting this thing right now. This community helps a lot.")

    add("p28", "userBB", "Caregiver", "Caring for my mom",
        _journal_body(rng, [("Day 1", 1), ("Day 2", 2)]))
    add("p29", "userCC", FLAIR_ME, "Deleted my journal", "[removed]")
    add("p30", "userDD", "", "No flair set", "Day 1 was rough but it got better from there.")
    return posts


def main() -> None:
    out = Path(__file__).with_name("snapshot.jsonl")
    posts = build_posts()
    with out.open("w", encoding="utf-8") as handle:
        for post in posts:
            handle.write(json.dumps(post, sort_keys=True) + "\n")
    print(f"wrote {len(posts)} posts to {out}")


if __name__ == "__main__":
    main()
