"""Deterministic sub-seed derivation.

All randomness in a run flows from one master seed; each consumer
(init, sampling, collocation, batching, ...) gets a named sub-seed so
that streams never alias and runs are bit-reproducible.
"""

import hashlib


def subseed(root: int, *labels) -> int:
    """Derive a 63-bit sub-seed from a master seed and a label path."""
    tag = str(int(root)) + "|" + "|".join(str(l) for l in labels)
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
