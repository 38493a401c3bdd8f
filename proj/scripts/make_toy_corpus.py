#!/usr/bin/env python3
"""Writes the bundled toy corpus (train/valid/test JSONL) deterministically.

Each document belongs to one topic. Its title and abstract embed two to four
of the topic's keyphrases inside template sentences; some documents also
carry one keyphrase that never appears in the text. Several phrases of a
topic share a first word, so a decoder without exclusion tends to repeat.
"""

import argparse
import json
import pathlib
import random

TOPICS = {
    "robotics": {
        "present": ["graph slam", "loop closure", "pose graph optimization", "visual odometry",
                    "occupancy grid", "lidar odometry", "graph based mapping", "loop detection"],
        "absent": ["mobile robots", "simultaneous localization"],
    },
    "language": {
        "present": ["neural machine translation", "language model", "neural network", "attention mechanism",
                    "beam search", "language generation", "word embedding", "neural decoder"],
        "absent": ["natural language processing", "sequence learning"],
    },
    "databases": {
        "present": ["query optimization", "index structure", "query processing", "transaction processing",
                    "join algorithm", "index selection", "column store", "query planner"],
        "absent": ["relational databases", "data management"],
    },
    "networks": {
        "present": ["congestion control", "packet scheduling", "network coding", "packet loss",
                    "routing protocol", "network topology", "traffic engineering", "routing table"],
        "absent": ["computer networks", "internet architecture"],
    },
    "vision": {
        "present": ["image segmentation", "object detection", "image retrieval", "feature matching",
                    "object tracking", "convolutional network", "image denoising", "feature extraction"],
        "absent": ["computer vision", "pattern recognition"],
    },
    "security": {
        "present": ["intrusion detection", "access control", "malware analysis", "side channel attack",
                    "access policy", "intrusion prevention", "key exchange", "malware detection"],
        "absent": ["information security", "threat model"],
    },
    "learning": {
        "present": ["reinforcement learning", "policy gradient", "reward shaping", "value function",
                    "policy search", "transfer learning", "reward model", "value iteration"],
        "absent": ["machine learning", "sequential decision making"],
    },
    "systems": {
        "present": ["distributed storage", "cache coherence", "load balancing", "fault tolerance",
                    "distributed consensus", "cache replacement", "load prediction", "virtual machine"],
        "absent": ["operating systems", "cloud computing"],
    },
}

TITLE_TEMPLATES = [
    "{a} with {b}",
    "towards {a} for {b}",
    "{a} and {b} revisited",
    "efficient {a} using {b}",
]

SENTENCE_TEMPLATES = [
    "we study {k} in realistic settings .",
    "our method combines {k} with a simple baseline .",
    "experiments show that {k} improves accuracy .",
    "the proposed {k} scales to large inputs .",
    "we analyse the cost of {k} on several benchmarks .",
    "results confirm the benefit of {k} over prior work .",
]

FILLER = [
    "the approach is evaluated on public data .",
    "code and data are released .",
    "we discuss limitations and future work .",
    "a theoretical analysis supports the design .",
    "the system runs on commodity hardware .",
]


def make_document(rng, topic):
    spec = TOPICS[topic]
    k = rng.randint(2, 4)
    present = rng.sample(spec["present"], k)
    title = rng.choice(TITLE_TEMPLATES).format(a=present[0], b=present[1])
    sentences = [rng.choice(SENTENCE_TEMPLATES).format(k=p) for p in present[1:]]
    sentences.append(rng.choice(FILLER))
    rng.shuffle(sentences)
    keyphrases = list(present)
    if rng.random() < 0.5:
        keyphrases.append(rng.choice(spec["absent"]))
    rng.shuffle(keyphrases)
    return {"title": title, "abstract": " ".join(sentences), "keyphrases": "; ".join(keyphrases)}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "toy"))
    parser.add_argument("--seed", type=int, default=20200711)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    topics = sorted(TOPICS)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for split, n in (("train", 64), ("valid", 16), ("test", 16)):
        with open(out / f"{split}.jsonl", "w", encoding="utf-8") as f:
            for i in range(n):
                doc = make_document(rng, topics[i % len(topics)])
                f.write(json.dumps(doc, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
