#!/usr/bin/env python3
"""Regenerates posts_100.csv, bias.csv and posts_100_expected.json.

Each post is drawn with a known outlet, so the expected per-leaning daily
tallies come from the generator's own bookkeeping, not from parsing the CSV.
"""
import csv
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).resolve().parent
FIRST = datetime(2018, 1, 1, tzinfo=timezone.utc)
DAYS = 40
LEANINGS = ["left", "left_leaning", "center", "right_leaning", "right"]

# domain -> (leaning, url spellings that must resolve to it)
OUTLETS = {
    "motherjones.com": ("left", ["https://www.motherjones.com/politics/2018/01/a", "MOTHERJONES.COM"]),
    "democracynow.org": ("left", ["http://democracynow.org/2018/1/2/b?utm=x"]),
    "cnn.com": ("left_leaning", ["https://edition.cnn.com/2018/01/03/c.html", "https://user:pw@www.cnn.com:443/d#top"]),
    "nytimes.com": ("left_leaning", ["nytimes.com", "https://mobile.nytimes.com/e"]),
    "reuters.com": ("center", ["https://www.reuters.com/article/f", "http://uk.reuters.com/g"]),
    "bbc.co.uk": ("center", ["https://www.bbc.co.uk/news/h", "http://news.bbc.co.uk"]),
    "foxnews.com": ("right_leaning", ["https://www.foxnews.com/politics/i", "foxnews.com/j"]),
    "washingtonexaminer.com": ("right_leaning", ["http://www.washingtonexaminer.com/k"]),
    "breitbart.com": ("right", ["https://www.breitbart.com/big-government/l", "BREITBART.com/m?n=1"]),
    "dailycaller.com": ("right", ["https://dailycaller.com/2018/01/05/o"]),
}
UNLABELED = ["https://example.org/p", "https://t.co/abc", "http://www.someblog.net/q", "youtube.com/watch?v=r"]


def stamp(rng, instant):
    """Spells a UTC instant in one of several accepted forms."""
    form = rng.randrange(4)
    if form == 0:
        return instant.strftime("%Y-%m-%dT%H:%M:%SZ")
    if form == 1:
        return instant.strftime("%Y-%m-%d %H:%M:%S.") + f"{rng.randrange(1000):03d}Z"
    offset = timedelta(hours=rng.choice([-8, -5, 1, 5, 9]), minutes=rng.choice([0, 30]))
    local = instant.astimezone(timezone(offset))
    sign = "+" if offset >= timedelta(0) else "-"
    mins = abs(int(offset.total_seconds())) // 60
    return local.strftime("%Y-%m-%dT%H:%M:%S") + f"{sign}{mins // 60:02d}:{mins % 60:02d}"


def main():
    rng = random.Random(2018)
    counts = {l: [0] * DAYS for l in LEANINGS}
    likes = {l: [0] * DAYS for l in LEANINGS}
    per_leaning = {l: 0 for l in LEANINGS}
    rows = []
    domains = sorted(OUTLETS)
    for i in range(100):
        instant = FIRST + timedelta(seconds=rng.randrange(DAYS * 86400))
        day = (instant - FIRST).days
        n_likes = rng.choice([0, 0, 1, 3, 7, 12, 40, 150])
        if rng.random() < 0.12:
            url = rng.choice(UNLABELED)
        else:
            domain = rng.choice(domains)
            leaning, spellings = OUTLETS[domain]
            url = rng.choice(spellings)
            counts[leaning][day] += 1
            likes[leaning][day] += n_likes
            per_leaning[leaning] += 1
        sentiment = f"{rng.uniform(-1, 1):.3f}"
        rows.append([f"p{i:03d}", stamp(rng, instant), "twitter", url, n_likes, sentiment])

    with open(HERE / "posts_100.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["post_id", "timestamp", "platform", "url_or_domain", "likes", "sentiment"])
        w.writerows(rows)
    with open(HERE / "bias.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["domain", "leaning"])
        for d in domains:
            w.writerow([d, OUTLETS[d][0]])
    expected = {
        "window": {"first": "2018-01-01", "last": (FIRST + timedelta(days=DAYS - 1)).strftime("%Y-%m-%d")},
        "total_posts": 100,
        "labeled_posts": sum(per_leaning.values()),
        "per_leaning_counts": per_leaning,
        "post_count": counts,
        "likes_sum": likes,
    }
    (HERE / "posts_100_expected.json").write_text(json.dumps(expected, indent=1) + "\n")


if __name__ == "__main__":
    main()
