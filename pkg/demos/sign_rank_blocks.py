"""
Block structure and the spectral sign-rank bound
================================================

Order the hypercube vertices by a superincreasing weight vector and the sign
matrix of a shallow threshold circuit becomes block-constant along both axes,
capping its exact rank.  A genuinely high-sign-rank pattern like the
inner-product matrix shows the opposite: full rank and a large spectral bound.
"""
import random

from relucirc import (
    SignMatrix,
    VertexOrdering,
    exact_rank,
    forster_lower_bound,
    inner_product_matrix,
    random_cone_circuit,
    sign_rank_is_one,
    verify_block_bound,
)

# --- a cone-respecting circuit has few blocks --------------------------------
# Bottom weights are superincreasing, so sorting vertices by their dot
# products makes each bottom gate's sign flip at most once per axis sweep.
rng = random.Random(21)
m = 4
circuit = random_cone_circuit(m, widths=[3, 2], bound=2, rng=rng)
sigma = VertexOrdering.standard(m)
report = verify_block_bound(circuit, m, 2, sigma, sigma)
print(f"cone circuit on 2*{m} inputs, widths {report['widths']}:")
print(f"  row blocks: {report['rowBlocks']}, col blocks: {report['colBlocks']}"
      f" (bound {report['bound']})")
print(f"  exact rank of the 16x16 value matrix: {report['exactRank']}")
assert report["exactRank"] <= min(report["rowBlocks"], report["colBlocks"])

# --- the inner-product matrix is as far from blocky as it gets ---------------
for m in (3, 5):
    ip = inner_product_matrix(m)
    side = 1 << m
    print(f"\ninner-product matrix, {side}x{side}:")
    print(f"  exact rank: {exact_rank(ip)} (full)")
    print(f"  spectral sign-rank bound: {forster_lower_bound(ip):.4f}"
          f" = sqrt({side})")

# --- rank-one sign patterns are exactly the outer products -------------------
rank_one = SignMatrix(((1, -1), (-1, 1)))
mixed = SignMatrix(((1, -1), (1, 1)))
print(f"\nsign_rank_is_one(((1,-1),(-1,1))) = {sign_rank_is_one(rank_one)}")
print(f"sign_rank_is_one(((1,-1),( 1,1))) = {sign_rank_is_one(mixed)}")
