"""Scratch validation of the reference-trace numbers (not part of the package)."""
import numpy as np
import importlib, sys
sys.path.insert(0, "src")

# import submodules directly; package __init__ pulls modules not written yet
import scma_sim.codebook as cb
import scma_sim.factor_graph as fgm
import scma_sim.channel as ch
import scma_sim.mpa as mpa

cbs = cb.load_codebook_set(open("src/scma_sim/data/table2.cbk").read())
print("J K M:", cbs.user_count, cbs.resource_count, cbs.modulation_order)
print("degrees:", cbs.resource_degrees())
fg = fgm.from_codebook_set(cbs)
print("F:\n", fg.f_matrix)
print("M1:", fg.resource_neighbors[0], "N1:", fg.user_neighbors[0])

symbols = (2, 2, 1, 1, 3, 4)
cws = [cb.encode(cbs, j + 1, s) for j, s in enumerate(symbols)]
powers = np.ones(6)
r = cb.superpose(cws, powers)
r_printed = np.array([-0.4022 - 2.4156j, 2.2948 + 0.8454j, -0.8454 + 1.5701j, 0.0941 + 0j])
print("r:", np.round(r, 5))
print("max |r - r_printed|:", np.abs(r - r_printed).max())

n = np.array([0.0018 - 1.2008j, 1.2143 + 0.4227j, 0.3323 + 0.4232j, 0.1488 - 0.6993j])
y = ch.receive_downlink(cws, powers, np.ones(4), n)
y_printed = np.array([-0.4004 - 3.6164j, 3.5091 + 1.2681j, -0.5132 + 1.9933j, 0.2428 - 0.6993j])
print("y:", np.round(y, 5))
print("max |y - y_printed|:", np.abs(y - y_printed).max())

n0 = 0.5012
state = mpa.initialize(fg, 4)
unnorm, terms = mpa.edge_message_terms(state, fg, cbs, y, 1.0, powers, n0, 1, 1)
print("unnorm U_1->1:", unnorm)   # expect ~ [6.2e-4, 0.0022, 6.2471e-4, 1.33e-5]
print("term (1,(2,3)):", terms[(1, (2, 3))])  # expect ~8.5e-6
print("U_1->1 normalized:", unnorm / unnorm.sum())  # expect [0.1764 0.6415 0.1784 0.0038]

mpa.resource_update(state, fg, cbs, y, 1.0, powers, n0)

U_printed = {  # (resource, user): message, from the first-iteration U table
    (1, 1): [0.1764, 0.6415, 0.1784, 0.0038],
    (1, 3): [0.9962, 0.0038, 0.0000, 0.0000],
    (1, 5): [0.0042, 0.0000, 0.9958, 0.0000],
    (2, 2): [0.0000, 0.9986, 0.0000, 0.0014],
    (2, 3): [0.7860, 0.0000, 0.2042, 0.0098],
    (2, 6): [0.0000, 0.0000, 0.0079, 0.9921],
    (3, 1): [0.0328, 0.6324, 0.0002, 0.3347],
    (3, 4): [0.2660, 0.4763, 0.2362, 0.0215],
    (3, 6): [0.0168, 0.6641, 0.0000, 0.3191],
    (4, 2): [0.1512, 0.3453, 0.2673, 0.2362],
    (4, 4): [0.3688, 0.0387, 0.3406, 0.2519],
    (4, 5): [0.2511, 0.3669, 0.3087, 0.0733],
}
worst = 0.0
for (k, j), expect in U_printed.items():
    got = state.u[k - 1, j - 1]
    worst = max(worst, np.abs(got - np.array(expect)).max())
print("worst U deviation:", worst)

mpa.user_update(state, fg)
V_printed = {
    (1, 1): [0.0328, 0.6324, 0.0002, 0.3347],
    (3, 1): [0.1764, 0.6415, 0.1784, 0.0038],
    (1, 3): [0.7860, 0.0000, 0.2042, 0.0098],
    (1, 5): [0.2511, 0.3669, 0.3087, 0.0733],
    (2, 2): [0.1512, 0.3453, 0.2673, 0.2362],
    (2, 3): [0.9962, 0.0038, 0.0000, 0.0000],
    (2, 6): [0.0168, 0.6641, 0.0000, 0.3191],
    (3, 4): [0.3688, 0.0387, 0.3406, 0.2519],
    (3, 6): [0.0000, 0.0000, 0.0079, 0.9921],
    (4, 2): [0.0000, 0.9986, 0.0000, 0.0014],
    (4, 4): [0.2660, 0.4763, 0.2362, 0.0215],
    (4, 5): [0.0042, 0.0000, 0.9958, 0.0000],
}
worst = 0.0
for (k, j), expect in V_printed.items():
    got = state.v[k - 1, j - 1]
    worst = max(worst, np.abs(got - np.array(expect)).max())
print("worst V deviation:", worst)

post = mpa.compute_posterior(state, fg)
post_unnorm_printed = np.array([
    [0.0058, 0.0000, 0.7830, 0.0981, 0.0010, 0.0000],
    [0.4056, 0.3448, 0.0000, 0.0184, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.0000, 0.0804, 0.3074, 0.0000],
    [0.0013, 0.0003, 0.0000, 0.0054, 0.0000, 0.3166],
]).T  # -> (J, M)
norm_printed = post_unnorm_printed / post_unnorm_printed.sum(axis=1, keepdims=True)
print("worst posterior deviation (normalized):", np.abs(post - norm_printed).max())
print("decisions:", mpa.decide(post))

res = mpa.detect(y, 1.0, powers, cbs, fg, n0, mpa.DetectorConfig(max_iterations=1))
print("detect k=1:", res.symbols, res.iterations, res.converged)

# zero-noise, more iterations
res2 = mpa.detect(r, 1.0, powers, cbs, fg, n0, mpa.DetectorConfig(max_iterations=5))
print("detect zero-noise:", res2.symbols, "mass:",
      [round(res2.posterior[j, symbols[j] - 1], 5) for j in range(6)])

# batch equivalence
rng = np.random.default_rng(0)
B = 8
ys = np.array([r + ch.sample_awgn(n0, 4, rng) for _ in range(B)])
gains = np.ones((B, 4, 6), dtype=complex)
bres = mpa.detect_batch(ys, gains, powers, cbs, fg, n0, mpa.DetectorConfig(max_iterations=7))
for i in range(B):
    sres = mpa.detect(ys[i], 1.0, powers, cbs, fg, n0, mpa.DetectorConfig(max_iterations=7))
    dp = np.abs(sres.posterior - bres.posterior[i]).max()
    assert (sres.symbols == bres.symbols[i]).all(), (i, sres.symbols, bres.symbols[i])
    assert sres.iterations == bres.iterations[i], (i, sres.iterations, bres.iterations[i])
    assert dp < 1e-12, (i, dp)
print("batch equivalence OK")

# Table I ratio property
cbs1 = cb.load_codebook_set(open("src/scma_sim/data/table1.cbk").read())
ratios = []
for b1, b2 in zip(cbs1.codebooks, cbs.codebooks):
    nz = np.abs(b1.entries) > 0
    ratios.append((b2.entries[nz] / b1.entries[nz]).real)
ratios = np.concatenate(ratios)
print("ratio min/max:", ratios.min(), ratios.max())
