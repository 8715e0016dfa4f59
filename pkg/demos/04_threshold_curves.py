# %% [markdown]
# # Choosing tau: detection-rate curves and delays
#
# For each threshold we count how many infected traces fire at all, how many
# clean traces raise a false alarm, and how long detection takes after the
# infection begins.

# %%
from ransomgate.boost import train_adaboost
from ransomgate.evaluate import choose_tau, delay_histogram, threshold_curves
from ransomgate.gate import DecisionGate, build_training_set
from ransomgate.simulator import SimConfig, generate_corpus

cfg = SimConfig(seed=11)
positives = generate_corpus("h1a", 20, 1, cfg, seed=11)
negatives = generate_corpus("h0", 18, 1, cfg, seed=12)

data = build_training_set(positives[:4], DecisionGate(8, 4, 0.02), rng_seed=11)
model = train_adaboost(data, rng_seed=11)

taus = [i / 20 for i in range(21)]
curves = threshold_curves(model, positives, negatives, taus)
for tau, p, n in zip(curves.taus, curves.positive_rate, curves.negative_rate):
    print(f"tau={tau:.2f}  infected fired {p:.2f}  clean fired {n:.2f}")

# %% [markdown]
# Raising tau can only remove detections or push them later, so both curves
# are non-increasing. `choose_tau` picks the threshold with the best detection
# rate among those with no false alarms.

# %%
tau = choose_tau(curves)
hist = delay_histogram(curves.positive_reports[tau])
print("chosen tau:", tau)
print("delay histogram (samples -> traces):", hist.counts, "misses:", hist.misses)
print("most common delay:", hist.mode, "samples =", hist.mode * cfg.sample_interval, "s")

# %%
curves.to_csv("curves.csv")
hist.to_csv("delays.csv")
