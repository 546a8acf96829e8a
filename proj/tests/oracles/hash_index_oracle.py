#!/usr/bin/env python3
"""Standalone oracle for the hash-based selection rule and request
fingerprints.

Both rules hash a canonical byte string with SHA-256:
  selection: utf8(decimal seed) 0x1F utf8(record_id), index =
             big-endian integer of the digest mod pool size
  fingerprint: model 0x1F temperature 0x1F top_p 0x1F max_tokens 0x1F
             prompt, reals as shortest round-trip decimals

Run it to regenerate fixtures/hash/hash_oracle_cases.json.
"""

import hashlib
import json
import os
import sys

INDEX_CASES = [
    (42, "qasper:test:7", 5),
    (42, "qasper:test:7", 3),
    (0, "squad2:test:56ddde6b9a695914005b9628", 7),
    (7, "pubmedqa:test:pm1", 4),
    (18446744073709551615, "bioasq:test:bq6", 11),
    (1, "a", 2),
    (123456789, "qasper:test:1f2e3d", 97),
]

FINGERPRINT_CASES = [
    ("gpt-3.5-turbo-0613", 0.0, 1.0, 256, "Question: q\n\nAnswer:"),
    ("mock-model", 0.0, 1.0, 256, ""),
    ("mock-model", 0.5, 0.9, 128, "prompt with\nnewline"),
    ("m", 0.1, 1.0, 1, "x"),
]


def shortest_real(x):
    # repr() of a Python float is the shortest round-trip decimal, but
    # integral values print as "1.0"; the wire rule wants "1".
    if x == int(x):
        return str(int(x))
    return repr(x)


def selection_digest(seed, record_id):
    return hashlib.sha256(
        str(seed).encode("utf-8") + b"\x1f" + record_id.encode("utf-8")
    ).digest()


def fingerprint(model, temperature, top_p, max_tokens, prompt):
    sep = b"\x1f"
    data = (model.encode("utf-8") + sep +
            shortest_real(temperature).encode("utf-8") + sep +
            shortest_real(top_p).encode("utf-8") + sep +
            str(max_tokens).encode("utf-8") + sep +
            prompt.encode("utf-8"))
    return hashlib.sha256(data).hexdigest()


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "..", "fixtures", "hash",
        "hash_oracle_cases.json")
    index_cases = []
    for seed, record_id, pool_size in INDEX_CASES:
        digest = selection_digest(seed, record_id)
        index_cases.append({
            "seed": seed,
            "record_id": record_id,
            "pool_size": pool_size,
            "digest_hex": digest.hex(),
            "index": int.from_bytes(digest, "big") % pool_size,
        })
    fp_cases = []
    for model, temperature, top_p, max_tokens, prompt in FINGERPRINT_CASES:
        fp_cases.append({
            "model": model,
            "temperature": temperature,
            "top_p": top_p,
            "max_new_tokens": max_tokens,
            "prompt": prompt,
            "fingerprint": fingerprint(model, temperature, top_p,
                                       max_tokens, prompt),
        })
    with open(out_path, "w", encoding="utf-8") as f:
        json.dump({"index_cases": index_cases,
                   "fingerprint_cases": fp_cases}, f, indent=1)
        f.write("\n")
    print(f"wrote {len(index_cases)} index + {len(fp_cases)} fingerprint "
          f"cases to {out_path}")


if __name__ == "__main__":
    main()
