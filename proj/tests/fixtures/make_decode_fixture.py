"""Regenerates decode.jsonl, decode_sources.txt and decode_expected.jsonl.

The expected picks come from a plain re-statement of the two-stage rule
written here without reference to the C++ code:
  score_s = fwd + lambda_s * bwd   (stable sort, descending)
  keep s iff hamming(s, kept) > t for every kept signature, up to k
  sentence = argmax fwd + lambda_y * bwd   (first on ties)
"""

import json
import random
from pathlib import Path

BITS = 16
LAMBDA_S = 1000.0
LAMBDA_Y = 0.3
T = 2
K = 3
HERE = Path(__file__).resolve().parent


def hamming(a, b):
    return sum(x != y for x, y in zip(a, b))


def flip(sig, positions):
    s = list(sig)
    for p in positions:
        s[p] = "1" if s[p] == "0" else "0"
    return "".join(s)


def build(rng):
    sources = ["how do i get to the station", "the soup is cold", "she missed the bus"]
    records, expected = [], []
    for source in sources:
        sigs = []
        while len(sigs) < 8:
            s = "".join(rng.choice("01") for _ in range(BITS))
            if s not in sigs:
                sigs.append(s)
        # Near neighbours of strong candidates so the filter has work to do.
        # Their backward scores trail the base by a hair, so under the large
        # lambda_s they rank right behind it.
        cands = []
        for s in sigs:
            cands.append({"payload": s,
                          "logprob": round(-rng.uniform(0.05, 0.9), 4),
                          "backward": round(-rng.uniform(0.5, 3.0), 4)})
        for base in list(cands[:4]):
            for n in (1, 2, 3):
                v = flip(base["payload"], rng.sample(range(BITS), n))
                if v not in sigs:
                    sigs.append(v)
                    cands.append({"payload": v,
                                  "logprob": round(-rng.uniform(0.05, 0.9), 4),
                                  "backward": round(base["backward"] - 0.0004 * n, 4)})
        rng.shuffle(cands)
        records.append({"op": "fwd_sig", "source": source, "candidates": cands})

        sent_lists = {}
        for i, s in enumerate(sigs):
            sents = []
            for j in range(6):
                text = f"{source.split()[1]} reply {i}-{j}"
                sents.append({"payload": text,
                              "logprob": round(-rng.uniform(0.1, 2.0), 4)})
                records.append({"op": "bwd", "source": source, "sentence": text,
                                "logprob": round(-rng.uniform(0.5, 4.0), 4)})
            sent_lists[s] = sents
            records.append({"op": "fwd_sent", "source": source, "signature": s,
                            "candidates": sents})

        # Oracle.
        bwd_sent = {r["sentence"]: r["logprob"] for r in records
                    if r["op"] == "bwd" and r["source"] == source}
        forward = sorted(cands, key=lambda c: -c["logprob"])
        ranked = sorted(forward, key=lambda c: -(c["logprob"] + LAMBDA_S * c["backward"]))
        kept = []
        for c in ranked:
            if len(kept) == K:
                break
            if all(hamming(c["payload"], o["payload"]) > T for o in kept):
                kept.append(c)
        picks = []
        for c in kept:
            best = max(sent_lists[c["payload"]],
                       key=lambda y: y["logprob"] + LAMBDA_Y * bwd_sent[y["payload"]])
            picks.append({"signature": c["payload"], "sentence": best["payload"]})
        expected.append({"source": source, "picks": picks})
    return sources, records, expected


def main():
    sources, records, expected = build(random.Random(20201))
    (HERE / "decode_sources.txt").write_text("".join(s + "\n" for s in sources))
    (HERE / "decode.jsonl").write_text("".join(json.dumps(r) + "\n" for r in records))
    (HERE / "decode_expected.jsonl").write_text(
        "".join(json.dumps(e) + "\n" for e in expected))


if __name__ == "__main__":
    main()
