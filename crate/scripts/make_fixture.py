#!/usr/bin/env python3
"""Writes the bundled 20-document synthetic news corpus (fixtures/toy20.jsonl).

Each document mixes 1-4 "key" sentences about an event with generic filler sentences.
The reference summary restates the key sentences without their parenthetical asides and
relative clauses, so extractive and compressive oracles have something to find.
Output is deterministic.
"""
import json
import random
import sys

PEOPLE = ["the mayor", "police chief ana ruiz", "the governor", "senator john hale",
          "fire captain lee", "the health minister", "coach mike dunn", "judge carla ortiz"]
EVENTS = [("storm", "flooded", "homes"), ("fire", "destroyed", "buildings"),
          ("strike", "closed", "schools"), ("crash", "injured", "passengers"),
          ("outbreak", "sickened", "residents"), ("earthquake", "damaged", "bridges"),
          ("protest", "blocked", "roads"), ("flood", "swept", "cars")]
PLACES = ["boston", "denver", "miami", "austin", "portland", "detroit", "phoenix", "seattle"]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
ASIDES = ["( local time )", "( officials confirmed )", "( according to reports )", "( about 40 miles away )"]
RELATIVES = [", who took office last year ,", ", which began overnight ,", ", where crews worked ,",
             ", when sirens sounded ,"]
FILLER = [
    "the weather was mild and shops opened as usual",
    "many people walked their dogs in the park",
    "a local bakery sold fresh bread early",
    "traffic moved slowly near the old market",
    "children played football after lunch",
    "the library hosted a quiet reading hour",
    "a small cafe added new chairs outside",
    "neighbors chatted on the corner for a while",
    "the bus route ran on its normal timetable",
    "music drifted from an open window downtown",
    "a farmer brought apples to the square",
    "the museum kept its usual opening hours",
]


def key_sentence(rng, event, place, k):
    noun, verb, obj = event
    person = rng.choice(PEOPLE)
    n = rng.randint(2, 90)
    day = rng.choice(DAYS)
    templates = [
        (f"the {noun} {verb} {n} {obj} in {place} on {day}", f"{noun} {verb} {n} {obj} in {place}"),
        (f"{person} said the {noun} was the worst in years", f"{person} said {noun} was worst in years"),
        (f"rescue teams reached {n} {obj} after the {noun}", f"rescue teams reached {n} {obj}"),
        (f"officials warned the {noun} could return by {day}", f"officials warned {noun} could return"),
        (f"damage from the {noun} reached {n} million dollars", f"{noun} damage reached {n} million dollars"),
    ]
    full, short = templates[k % len(templates)]
    words = full.split()
    r = rng.random()
    if r < 0.35:
        pos = rng.randint(2, len(words) - 1)
        words[pos:pos] = rng.choice(ASIDES).split()
    elif r < 0.7:
        pos = rng.randint(2, len(words) - 1)
        words[pos:pos] = rng.choice(RELATIVES).split()
    return words, short.split()


def make_doc(rng, i):
    n_key = 1 + i % 4
    n_filler = rng.randint(3, 5)
    event = EVENTS[i % len(EVENTS)]
    place = PLACES[(i * 3) % len(PLACES)]
    kinds = ["key"] * n_key + ["filler"] * n_filler
    rng.shuffle(kinds)
    fillers = rng.sample(FILLER, n_filler)
    sentences, summary = [], []
    k = rng.randint(0, 4)
    for kind in kinds:
        if kind == "key":
            full, short = key_sentence(rng, event, place, k)
            k += 1
            sentences.append(full)
            summary.append(short)
        else:
            sentences.append(fillers.pop().split())
    if rng.random() < 0.4:
        sentences[0] = ["(", "CNN", ")"] + sentences[0]
    for s in sentences:
        s.append(".")
    for s in summary:
        s.append(".")
    return {"id": f"toy-{i:02d}", "sentences": sentences, "summary": summary}


def main():
    rng = random.Random(20190604)
    out = sys.argv[1] if len(sys.argv) > 1 else "fixtures/toy20.jsonl"
    with open(out, "w", encoding="utf-8") as f:
        for i in range(20):
            f.write(json.dumps(make_doc(rng, i), separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
