"""Writes the 60-post end-to-end fixture under tests/fixtures/e2e/.

Comments are negative binomial with log mean a + b * memorability (b > 0),
so the pipeline must find a positive memorability-comments correlation.
The feature container is written here with struct/numpy, independently of
the C++ writer. expected.json holds scipy's Spearman results on the same
data as an oracle for the pipeline output.

    python3 tests/oracle/make_e2e_fixture.py
"""
import hashlib
import json
import pathlib
import struct

import numpy as np
from scipy import stats

OUT = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "e2e"
SEED = 20240419
N = 60
A, B, ALPHA = 2.0, 3.0, 0.25
SUBREDDITS = ["pics", "pic", "images"]
RUNS = [("t1", "2024-04-19T12:00:00Z"), ("t2", "2024-04-26T12:00:00Z"), ("t3", "2024-05-21T12:00:00Z")]
STAGES = [("1", 3), ("2", 8), ("3-early", 12), ("3-middle", 24), ("3-late", 36), ("4", 3)]
LENGTHS = [48, 64, 80, 96, 112, 128]
VOCAB = ["stone", "rock", "ground", "tower", "dragon", "sculpture", "water", "watermelon", "fruit", "sky"]
EXTRA_NOUNS = ["view", "photo", "color", "cat", "dog"]
MOODS = ["I love this", "great shot", "this is awful", "nice", "so sad", "beautiful", "meh", "terrible angle",
         "wow amazing", "not bad at all"]


def nb_draw(rng, mu, alpha):
    # Gamma-Poisson mixture: variance mu + alpha mu^2.
    return rng.poisson(rng.gamma(1.0 / alpha, alpha * mu))


def comment_text(rng, labels):
    nouns = list(rng.choice(labels + EXTRA_NOUNS + VOCAB, size=2, replace=False))
    mood = MOODS[rng.integers(len(MOODS))]
    return f"{mood}, the {nouns[0]} and that {nouns[1]}!"


def main():
    rng = np.random.default_rng(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "features").mkdir(exist_ok=True)

    mem = rng.uniform(0.45, 0.95, N)
    posts, images = [], []
    for i in range(N):
        comments = 0
        while comments < 5:
            comments = int(nb_draw(rng, np.exp(A + B * mem[i]), ALPHA))
        score = 0
        while score < 5:
            score = int(nb_draw(rng, 300.0, 0.8))
        run, fetched = RUNS[i % 3]
        day = int(fetched[8:10]) - 1 - int(rng.integers(0, 3))
        hour = int(rng.integers(0, 24))
        created = f"{fetched[:8]}{day:02d}T{hour:02d}:{int(rng.integers(0, 60)):02d}:00Z"
        image_hash = hashlib.sha256(f"e2e-image-{i}".encode()).hexdigest()
        labels = list(rng.choice(VOCAB, size=int(rng.integers(1, 4)), replace=False))
        bodies = [comment_text(rng, labels) for _ in range(5)]
        scores = sorted((int(s) for s in rng.integers(1, 500, 5)), reverse=True)
        width, height = int(rng.integers(400, 4000)), int(rng.integers(300, 3000))
        posts.append({
            "post_id": f"e2e{i:03d}",
            "subreddit": SUBREDDITS[(i // 3) % 3],
            "caption": "Caption " + " ".join(rng.choice(VOCAB, size=int(rng.integers(1, 6)))),
            "created_at": created,
            "fetched_at": fetched,
            "score": score,
            "num_comments": comments,
            "image_ref": image_hash + ".jpg",
            "image_width": width,
            "image_height": height,
            "file_size": int(rng.integers(20_000, 3_000_000)),
            "top_comments": [{"body": b, "comment_score": s} for b, s in zip(bodies, scores)],
            "image_count": 1,
            "image_url": f"https://i.redd.it/{image_hash[:12]}.jpg",
            "collection_run": run,
        })
        images.append({
            "image_hash": image_hash,
            "memorability": float(mem[i]),
            "label_status": "ok",
            "labels": [{"label": l, "confidence": round(float(rng.uniform(0.3, 0.99)), 4)} for l in labels],
        })

    with open(OUT / "corpus.ndjson", "w") as f:
        for p in posts:
            f.write(json.dumps(p) + "\n")

    layers = []
    for net in ("memorability", "imagenet_baseline"):
        for (stage, block), length in zip(STAGES, LENGTHS):
            category = rng.normal(size=(N, length))
            if net == "memorability":
                x = category + 0.8 * rng.normal(size=(N, length)) + np.outer(mem, rng.normal(size=length))
            else:
                x = category + 0.5 * rng.normal(size=(N, length))
            name = f"{net}_stage{stage}.f32"
            with open(OUT / "features" / name, "wb") as f:
                f.write(struct.pack(f"<{N * length}f", *x.astype(np.float32).ravel()))
            layers.append({"network": net, "stage": stage, "block_index": block, "flattened_length": length,
                           "file": name})
    manifest = {
        "format_version": 1,
        "models": {"memorability": "synthetic", "imagenet_baseline": "synthetic"},
        "hook_point": "block_output",
        "layers": layers,
        "images": images,
    }
    with open(OUT / "features" / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")

    config = {
        "corpus_path": "corpus.ndjson",
        "feature_dir": "features",
        "embedding_path": "../embeddings/toy_10word_100d.txt",
        "embedding_dimension": 100,
        "timezone": "UTC",
        "outlier_removal": True,
        "dedupe_comment_tokens": False,
        "output_dir": "results",
    }
    with open(OUT / "config.json", "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")

    # Oracle: type-7 quartiles, 1.5 IQR fences on score and comments.
    c = np.array([p["num_comments"] for p in posts], dtype=float)
    s = np.array([p["score"] for p in posts], dtype=float)

    def inside(v):
        q1, q3 = np.percentile(v, [25, 75])
        iqr = q3 - q1
        return (v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)

    keep = inside(c) & inside(s)
    expected = {}
    for label, mask in (("all", np.ones(N, bool)), ("outliers_removed", keep)):
        for y, v in (("num_comments", c), ("post_score", s)):
            r = stats.spearmanr(mem[mask], v[mask])
            expected[f"{label}/{y}"] = {"n": int(mask.sum()), "rho": float(r.statistic), "p_value": float(r.pvalue)}
    expected["planted"] = {"a": A, "b": B, "alpha": ALPHA, "seed": SEED}
    with open(OUT / "expected.json", "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
