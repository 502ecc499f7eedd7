"""Pure-Python (numpy) kernel implementations."""

import numpy as np

BACKEND = "fallback"


def add_k_fill(out, ids, counts, total, k):
    """out[j] = (count_j + k) / (total + k*m), counts given sparsely."""
    m = out.shape[0]
    denom = total + k * m
    out.fill(k / denom)
    if ids.shape[0]:
        out[ids] += counts / denom


def renormalize_excluding(probs, excluded_ids):
    """Zero the excluded entries and rescale the rest to sum to one."""
    if excluded_ids.shape[0]:
        probs[excluded_ids] = 0.0
    s = probs.sum()
    if s <= 0.0:
        raise ValueError("all probability mass excluded")
    probs /= s


def argmax_subset(probs, candidate_ids):
    """Candidate id with the highest probability; earliest candidate on ties."""
    sub = probs[candidate_ids]
    return int(candidate_ids[int(np.argmax(sub))])
