#!/usr/bin/env python3
"""Regenerates the bundled fixture: dump.ndjson, replay_scores.ndjson, expected_distribution.json."""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20221)

FILLER = ("the people here always talk about weather food prices trains news work school housing "
          "weekend park family friends market coffee rain sunny late early office").split()
TOXIC = ("idiot stupid moron trash pathetic disgusting clown loser shut garbage").split()
PLANTED = {
    "singapore": ["foreigners", "ministers", "cpf"],
    "nyc": ["subway", "landlord", "mayor"],
}

records, scores = [], []
expected = {}
clock = [1600000000]


def tick():
    clock[0] += rng.randint(5, 120)
    return clock[0]


def sentence(words, n):
    return " ".join(rng.choice(words) for _ in range(n))


def emit(community, cid, link, parent, body, score, author=None, scored=True):
    records.append({
        "id": cid, "link_id": link, "parent_id": parent, "author": author or f"user{rng.randint(1, 400)}",
        "body": body, "created_utc": tick(), "subreddit": community,
    })
    if scored:
        scores.append({"id": cid, "score": score})


def label(score):
    if score is None:
        return "other"
    if score >= 0.8:
        return "toxic"
    if score <= 0.2:
        return "nontoxic"
    return "ambiguous"


def count(community, score):
    expected.setdefault(community, {"toxic": 0, "nontoxic": 0, "ambiguous": 0, "other": 0})[label(score)] += 1


counter = [0]


def new_id(prefix):
    counter[0] += 1
    return f"{prefix}{counter[0]:04d}"


for community, planted in PLANTED.items():
    pre = community[:2]
    for t in range(28):
        link = f"t3_{pre}{t:03d}"
        trigger = t % 2 == 0
        top = new_id(pre)
        if trigger:
            body = sentence(FILLER, rng.randint(4, 8)) + " " + rng.choice(planted) + " " + sentence(FILLER, 2)
        else:
            body = sentence(FILLER, rng.randint(5, 9))
        top_score = round(rng.uniform(0.01, 0.15), 3)
        emit(community, top, link, link, body, top_score)
        count(community, top_score)

        n_toxic = rng.randint(2, 3) if trigger else rng.randint(0, 1)
        replies = []
        for _ in range(n_toxic):
            replies.append((sentence(TOXIC, 2) + " " + sentence(FILLER, 3), round(rng.uniform(0.82, 0.99), 3)))
        for _ in range(rng.randint(1, 3)):
            replies.append((sentence(FILLER, rng.randint(4, 7)), round(rng.uniform(0.02, 0.18), 3)))
        if rng.random() < 0.4:
            replies.append((sentence(FILLER, 3) + " " + rng.choice(TOXIC), round(rng.uniform(0.3, 0.7), 3)))
        rng.shuffle(replies)
        for body, s in replies:
            rid = new_id(pre)
            emit(community, rid, link, "t1_" + top, body, s)
            count(community, s)
            if rng.random() < 0.3:
                gid = new_id(pre)
                gs = round(rng.uniform(0.02, 0.18), 3)
                emit(community, gid, link, "t1_" + rid, sentence(FILLER, 5), gs)
                count(community, gs)

    # Comments that are kept but have no usable score.
    link = f"t3_{pre}900"
    unscored_top = new_id(pre)
    emit(community, unscored_top, link, link, sentence(FILLER, 6), None, scored=False)
    count(community, None)
    null_reply = new_id(pre)
    emit(community, null_reply, link, "t1_" + unscored_top, sentence(FILLER, 6), None)
    count(community, None)
    # Orphan: parent never appears in the dump.
    orphan = new_id(pre)
    emit(community, orphan, link, "t1_" + pre + "missing", sentence(FILLER, 6), 0.05)
    count(community, 0.05)
    for oc in range(2):
        cid = new_id(pre)
        s = round(rng.uniform(0.85, 0.95), 3)
        emit(community, cid, link, "t1_" + orphan, sentence(TOXIC, 3), s)
        count(community, s)

    # Removed by cleaning.
    emit(community, new_id(pre), link, link, "[deleted]", 0.1)
    emit(community, new_id(pre), link, link, "[removed]", 0.1)
    emit(community, new_id(pre), link, link, "Please follow the rules.", 0.01, author="AutoModerator")
    emit(community, new_id(pre), link, link, "beep boop summary", 0.01, author="SummaryBot")
    emit(community, new_id(pre), link, link, "https://example.com/some/article", 0.01)
    emit(community, new_id(pre), link, link, "![img](https://i.example.com/x.png)", 0.01)
    emit(community, new_id(pre), link, link, "123 456 !!!", 0.01)

lines = [json.dumps(r, sort_keys=True) for r in records]
lines.insert(10, "{not json at all")
lines.insert(50, json.dumps({"id": "bad1", "body": "missing fields"}))
(HERE / "dump.ndjson").write_text("\n".join(lines) + "\n")
(HERE / "replay_scores.ndjson").write_text("\n".join(json.dumps(s, sort_keys=True) for s in scores) + "\n")
overall = {k: sum(c[k] for c in expected.values()) for k in ("toxic", "nontoxic", "ambiguous", "other")}
(HERE / "expected_distribution.json").write_text(
    json.dumps({"overall": overall, "communities": expected}, indent=2, sort_keys=True) + "\n")
print(json.dumps({"overall": overall, "records": len(records)}))
