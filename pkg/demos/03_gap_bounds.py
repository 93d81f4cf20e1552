"""How far can the cheap methods be from the exact ones?

The cost spread across hidden states bounds the loss of the frozen-belief
method against full information; the spread over reachable beliefs bounds its
distance from the belief-state DP.
"""

import pathlib

from lsimdp import gap_report, load_model, reachable_beliefs, verify_theorem5, verify_theorem6
from lsimdp.builders import random_family

model = load_model(pathlib.Path(__file__).with_name("sec6.json"))
graph = reachable_beliefs(model, max_depth=8)
print(gap_report(model, graph))
print("frozen belief vs full information:", verify_theorem5(model))
print("belief DP vs frozen belief:       ", verify_theorem6(model, graph=graph))

print("\nrandom factored models (slack = bound - gap):")
for i, m in enumerate(random_family(seed=1, count=8)):
    r = verify_theorem5(m)
    print(f"  {i}: |X|=({m.n_obs},{m.n_unobs}) |A|={m.n_actions} beta={m.discount}  "
          f"gap {r.gap:.4f}  bound {r.bound:.4f}  slack {r.bound - r.gap:.4f}")
