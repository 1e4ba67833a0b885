#!/usr/bin/env python3
"""Generate the bundled demo word vectors (data/demo/vectors.txt).

Each word is a blend of a few topic directions plus its own random
direction, scaled to a fixed norm. Topics give related words a higher
cosine similarity, which is all the template selector and the dialog
scorer need from a real embedding model. Output is deterministic.
"""

import argparse

import numpy as np

DIM = 32
NORM = 2.0
OWN = 1.0  # weight of the per-word direction
TOPIC = 0.8  # weight of a word's own topic

# topic -> words whose main topic it is
TOPICS = {
    "animals": "elephant elephants giraffe lion panda zoo animal animals safari savanna trunk".split(),
    "food": "eat ramen sushi curry food delicious cook restaurant dinner lunch noodles ice_cream".split(),
    "travel": "go trip travel visit kyoto hokkaido hotel beach mountain".split(),
    "tech": "internet online web smartphone computer app incredible".split(),
    "tv": "seen see watch watched show program drama episode channel tv".split(),
    "business": ("nvidia softbank arm agreement buy sell deal acquisition oracle tiktok "
                 "trillion yen announced cnet japan according chip company").split(),
    "money": "cheap expensive price 40b money cost".split(),
    "talk": ("yes oh really actually sometime wonder well incredible must "
             "have too after what's about time lot months").split(),
    "sports": "baseball game team ichiro bat pitcher stadium soccer goal".split(),
    "weather": "weather rain sunny typhoon forecast cloudy snow".split(),
    "feeling": "like love favorite enjoy fun happy want nice".split(),
}

# extra topic weights for words that bridge two topics
BLEND = {
    "like": {"animals": 1.6, "feeling": 1.0},
    "seen": {"tech": 1.6, "tv": 1.0},
    "eat": {"food": 1.6},
    "go": {"travel": 1.6},
    "watch": {"sports": 0.8},
    "fun": {"sports": 0.6},
}


def build(seed):
    rng = np.random.default_rng(seed)
    centers = {}
    for name in TOPICS:
        v = rng.standard_normal(DIM)
        centers[name] = v / np.linalg.norm(v)

    words = []
    for name, members in TOPICS.items():
        for w in members:
            if w not in words:
                words.append(w)

    vectors = {}
    for w in words:
        own = rng.standard_normal(DIM)
        v = OWN * own / np.linalg.norm(own)
        weights = {name: TOPIC for name, members in TOPICS.items() if w in members}
        for name, extra in BLEND.get(w, {}).items():
            weights[name] = extra
        for name, weight in weights.items():
            v = v + weight * centers[name]
        vectors[w] = NORM * v / np.linalg.norm(v)
    return words, vectors


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20211)
    parser.add_argument("-o", "--out", default="data/demo/vectors.txt")
    args = parser.parse_args()
    words, vectors = build(args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(f"{len(words)} {DIM}\n")
        for w in words:
            f.write(w + " " + " ".join(f"{x:.6f}" for x in vectors[w]) + "\n")


if __name__ == "__main__":
    main()
