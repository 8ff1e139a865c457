"""Score regression as a distribution over integer levels.

A real score y in [1, K] becomes a sparse distribution with mass on the
two neighbouring levels whose expectation is exactly y.  The model's
softmax output is trained toward it with KL divergence, and predictions
decode back to a real score as the expected level.  Native score ranges
that are not [1, K] (the [0, 5] similarity benchmarks) ride an affine
map in and out.
"""

import numpy as np

from pairsim.objectives import ScoreSpec, decode_score, kl_loss, sparse_target

K = 5
spec = ScoreSpec(K=K, raw_min=0.0, raw_max=5.0)

print(f"native range [0, 5] mapped onto levels 1..{K}:")
for raw in (0.0, 2.5, 3.7, 5.0):
    y = spec.map_raw(raw)
    p = sparse_target(y, K)
    print(f"  raw {raw:3.1f} -> y {y:4.2f} -> target {np.round(p, 3)}"
          f"   (expectation {float(np.arange(1, K + 1) @ p):.2f})")

print("\nKL against a few candidate predictions for raw score 3.7:")
target = sparse_target(spec.map_raw(3.7), K)
for name, logits in [
        ("uniform", np.zeros(K)),
        ("right place", np.log(np.maximum(target, 1e-12))),
        ("wrong place", np.array([8.0, 0, 0, 0, 0]))]:
    print(f"  {name:12s} loss = {float(kl_loss(target, logits)):8.4f}"
          f"   decodes to {decode_score(logits, spec):.2f}")

print("\ndecoding is the expected level, so it moves smoothly with the logits:")
logits = np.zeros(K)
for bump in (0.0, 0.5, 1.0, 2.0, 4.0):
    z = logits.copy()
    z[K - 1] += bump
    print(f"  top-level logit +{bump:3.1f} -> raw score "
          f"{decode_score(z, spec):.3f}")
