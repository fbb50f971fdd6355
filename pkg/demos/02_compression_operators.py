"""The two sparsifiers, their characterization constants, and error feedback.

Top-k is deterministic and biased: it contracts the sup norm by a factor
(1 - alpha) that depends on how dominant the kept entries are.
Sparsified-k is random and unbiased: kept coordinates are rescaled by
1/p_j so the expectation is exact, at the price of per-coordinate
variance (1/p_j - 1) v_j^2.
"""
import numpy as np

import fedq

v = np.array([3.0, -5.0, 2.0, 0.4, -0.1, 0.0])
print("input vector:", v)

# --- top-k ---
for k in (1, 2, 5):
    kept = fedq.top_k(v, k)
    alpha = fedq.contraction_alpha(v, k)
    err = np.max(np.abs(kept.densify() - v))
    print(f"top_{k}: kept {[int(i) for i in kept.indices]}, alpha={alpha:.3f}, "
          f"sup error {err:.3f} = (1-alpha)*||v||_inf = {(1 - alpha) * np.max(np.abs(v)):.3f}")

# --- sparsified-k ---
k = 2
p = fedq.selection_probabilities(v, k)
q2, q_inf = fedq.unbiased_constants(p)
print(f"\nsparsified_{k}: selection probabilities {np.round(p, 3)} (sum {p.sum():.3f} <= {k})")
print(f"constants: q2={q2:.1f}, q_inf={q_inf:.1f}")
gen = fedq.RngStream(0).generator()
acc = np.zeros(v.size)
n = 20_000
for _ in range(n):
    acc += fedq.sparsified_k(v, k, gen).densify()
print("Monte-Carlo mean over 2e4 draws:", np.round(acc / n, 3), "(unbiased)")

# --- error feedback ---
print("\nerror feedback with top-1: transmitted + memory always telescopes")
spec = fedq.CompressorSpec("top_k", k=1)
state = fedq.EfState.zeros(3)
total = np.zeros(3)
sent = np.zeros(3)
for delta in (np.array([0.6, -0.2, 0.1]), np.array([0.1, -0.5, 0.2]), np.array([0.0, 0.1, 0.4])):
    total += delta
    h, state = fedq.ef_compress(state, delta, spec)
    sent += h.densify()
    print(f"  delta {delta} -> sent {h.densify()}, memory {state.e}")
print("  sum of deltas:", total, "= sent + memory:", sent + state.e)
