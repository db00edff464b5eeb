#!/usr/bin/env python3
"""Regenerates the committed fixtures. Output is deterministic.

    python3 fixtures/generate.py

Writes mini_climate_en.jsonl, perennial_labels.csv, wikitext_30.jsonl and
wikitext_30.manifest.json next to this script.
"""

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).resolve().parent

RELIABLE = ["nature.com", "bbc.co.uk", "reuters.com", "nytimes.com"]
UNRELIABLE = ["dailymail.co.uk", "breitbart.com", "infowars.com", "rt.com"]
NEUTRAL = ["example.org", "blogspot.com", "203.0.113.7"]

REGISTERED = ["Alice", "Bob", "Carol", "Dmitri", "Eve", "ClimateBot"]
ANONYMOUS = ["192.0.2.1", "192.0.2.77", "198.51.100.4", "2001:db8::5"]

EPOCH = datetime(2015, 3, 1, tzinfo=timezone.utc)
RETRIEVED = datetime(2021, 9, 1, tzinfo=timezone.utc)


def ts(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def url_for(rng, domain):
    host = domain
    if not domain[0].isdigit():
        host = rng.choice(["", "www.", "news."]) + domain
        if rng.random() < 0.2:
            host = host.upper()
    return "https://%s/%s/%d" % (host, rng.choice(["article", "story", "doc"]), rng.randrange(1000))


def mini(rng):
    # article 1005 carries the fixed user sequence A A A B B C A A C
    plan = [(1001, "Global warming", 20), (1002, "Sea level rise", 22), (1003, "Carbon tax", 23),
            (1004, "Ocean acidification", 24), (1005, "Ice core", 9), (1006, "Paris Agreement", 22)]
    fixed = ["Alice", "Alice", "Alice", "192.0.2.1", "192.0.2.1", "Carol", "Alice", "Alice", "Carol"]
    lines = []
    rev_id = 50000
    for page_id, title, n in plan:
        t = EPOCH + timedelta(days=rng.randrange(200), seconds=rng.randrange(86400))
        urls = []
        parent = None
        for k in range(n):
            if page_id == 1005:
                user = fixed[k]
            elif rng.random() < 0.35:
                user = rng.choice(ANONYMOUS)
            else:
                user = rng.choice(REGISTERED)
            registered = user in REGISTERED
            r = rng.random()
            if r < 0.45 or not urls:
                pool = rng.choice([RELIABLE, UNRELIABLE, NEUTRAL])
                urls.append(url_for(rng, rng.choice(pool)))
            elif r < 0.75:
                # unreliable citations are removed far more often
                victims = [u for u in urls if any(d in u.lower() for d in UNRELIABLE)]
                if victims and rng.random() < 0.8:
                    urls.remove(rng.choice(victims))
                else:
                    urls.pop(rng.randrange(len(urls)))
            # otherwise a non-citation edit
            rev_id += rng.randrange(1, 40)
            lines.append({"lang": "en", "topic": "climate", "page_id": page_id, "title": title,
                          "rev_id": rev_id, "parent_id": parent, "timestamp": ts(t), "user": user,
                          "registered": registered, "urls": list(urls)})
            parent = rev_id
            # one same-second pair per article exercises zero gaps
            t += timedelta(seconds=0 if k == 3 else rng.randrange(60, 40 * 86400))
        lines.append({"meta": {"lang": "en", "topic": "climate", "page_id": page_id, "title": title,
                               "retrieved_at": ts(RETRIEVED)}})
    return lines


# Each snippet: (wikitext, canonical URLs it cites). Expected URLs are
# written out by hand, not computed.
SNIPPETS = [
    ("<ref>{{cite web|url=https://www.Nature.com/articles/x1|title=A}}</ref>",
     ["https://nature.com/articles/x1"]),
    ("<ref>{{cite journal|doi=10.1038/nclimate2|title=B|isbn=978-3-16-148410-0}}</ref>",
     ["https://doi.org/10.1038/nclimate2"]),
    ("See [https://news.bbc.co.uk/2/hi/science.stm BBC report].",
     ["https://news.bbc.co.uk/2/hi/science.stm"]),
    ("Bare link http://reuters.com:80/world#top in prose.",
     ["http://reuters.com/world"]),
    ("<ref>{{cite news|url=https://www.dailymail.co.uk/sci/a.html|archive-url=https://web.archive.org/web/2019/x|title=C}}</ref>",
     ["https://dailymail.co.uk/sci/a.html"]),
    ("<!-- https://hidden.example.com/comment --> commented out",
     []),
    ("<nowiki>https://literal.example.net/x</nowiki> not a link",
     []),
    ("{{cite book|title=D|isbn=0-306-40615-2|issn=2049-3630}}",
     []),
    ("[ftp://files.example.org/data.zip mirror]",
     []),
    ("<ref>{{cite web|url=https://EXAMPLE.org/%7Euser/page|title={{lang|fr|Titre}}}}</ref>",
     ["https://example.org/~user/page"]),
    ("[//www.rt.com/news/1 protocol-relative]",
     ["https://rt.com/news/1"]),
    ("<ref>https://203.0.113.7:8080/report.pdf.</ref>",
     ["https://203.0.113.7:8080/report.pdf"]),
]

# Which snippets are present at each of the 30 revisions.
WIKITEXT_STATES = [
    [0], [0], [0, 1], [0, 1, 2], [0, 1, 2], [0, 1, 2, 3], [0, 2, 3], [0, 2, 3, 4], [0, 2, 3, 4, 5],
    [0, 2, 3, 4, 5, 6], [0, 2, 3, 5, 6], [0, 2, 3, 5, 6, 7], [0, 2, 3, 5, 6, 7, 8], [0, 2, 3, 7, 8, 9],
    [0, 2, 3, 7, 8, 9], [2, 3, 7, 8, 9], [2, 3, 7, 8, 9, 10], [2, 3, 8, 9, 10], [2, 3, 8, 9, 10, 11],
    [0, 2, 3, 8, 9, 10, 11], [0, 2, 3, 9, 10, 11], [0, 1, 2, 3, 9, 10, 11], [0, 1, 2, 9, 10, 11],
    [0, 1, 2, 4, 9, 10, 11], [0, 1, 2, 9, 10, 11], [0, 1, 9, 10, 11], [], [0, 1, 9, 10, 11],
    [0, 1, 3, 9, 10, 11], [0, 1, 3, 9, 10, 11, 5, 6],
]


def wikitext(rng):
    assert len(WIKITEXT_STATES) == 30
    lines, manifest = [], []
    t = EPOCH
    users = ["Alice", "Bob", "192.0.2.1", "Carol"]
    for k, state in enumerate(WIKITEXT_STATES):
        body = "'''Ice core''' records.\n\n" + "\n\n".join(SNIPPETS[i][0] for i in state) + "\n"
        expected = sorted({u for i in state for u in SNIPPETS[i][1]})
        user = users[k % len(users)]
        lines.append({"lang": "en", "topic": "climate", "page_id": 2001, "title": "Ice core",
                      "rev_id": 70000 + k, "parent_id": 70000 + k - 1 if k else None, "timestamp": ts(t),
                      "user": user, "registered": user != "192.0.2.1", "wikitext": body})
        manifest.append({"rev_id": 70000 + k, "urls": expected})
        t += timedelta(hours=rng.randrange(1, 200))
    lines.append({"meta": {"lang": "en", "topic": "climate", "page_id": 2001, "title": "Ice core",
                           "retrieved_at": ts(RETRIEVED)}})
    return lines, manifest


def write_jsonl(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(json.dumps(line, ensure_ascii=False, separators=(",", ":")) + "\n")


def main():
    write_jsonl(HERE / "mini_climate_en.jsonl", mini(random.Random(20210901)))
    with open(HERE / "perennial_labels.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("# snapshot: 2021-09-01\ndomain,category\n")
        for d in RELIABLE:
            f.write("%s,generally reliable\n" % d)
        for d, c in zip(UNRELIABLE, ["deprecated", "generally unreliable", "blacklisted", "deprecated"]):
            f.write("%s,%s\n" % (d, c))
        f.write("example.org,no consensus\n")
    lines, manifest = wikitext(random.Random(7))
    write_jsonl(HERE / "wikitext_30.jsonl", lines)
    with open(HERE / "wikitext_30.manifest.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
