# %% [markdown]
# # Simulating machines and training a gate detector
#
# The simulator time-shares a handful of process profiles (idle baseline,
# installers, a compression job, short background tasks and an optional
# ransomware process) and integrates their rates into counters.

# %%
import numpy as np

from ransomgate.boost import train_adaboost
from ransomgate.evaluate import detect_online
from ransomgate.gate import DecisionGate, build_training_set
from ransomgate.simulator import SimConfig, generate_corpus, make_schedule

cfg = SimConfig(duration_min=10.0, buffer_min=2.0)
sched = make_schedule("h1a", cfg, rng_seed=1)
for ev in sched.events:
    if ev.kind != "background":
        print(f"{ev.kind:13s} {ev.profile.name:16s} starts at sample {ev.start}")

# %% [markdown]
# A corpus is just many schedules. Each trace gets its own derived seed, so
# the same corpus seed always yields the same files.

# %%
positives = generate_corpus("h1a", 12, 1, cfg, seed=7)
negatives = generate_corpus("h0", 8, 1, cfg, seed=8)
print(len(positives), "infected traces,", len(negatives), "clean traces,",
      positives[0].samples.shape, "samples x features each")

# %% [markdown]
# The decision gate picks the states used for training: `beta` infected
# states starting `alpha` states after the infection, the same count of
# random clean states, and a window after every application start labeled
# clean so the model learns that installs are not attacks.

# %%
gate = DecisionGate(alpha=8, beta=4, delta=0.02)
data = build_training_set(positives[:4], gate, rng_seed=0)
print(f"{len(data)} training states, {int(data.labels.sum())} infected")

model = train_adaboost(data)
names = model.feature_names
for s in model.stumps:
    j = s.feature_index
    pair = f"{names[j]} / {names[(j + 1) % len(names)]}"
    print(f"stump on {pair}: {s.polarity} {s.threshold:.4g}, weight {s.weight:.2f}")

# %% [markdown]
# Detection streams each held-out trace through the frozen transform and
# fires at the first state whose score exceeds tau.

# %%
delays = []
for t in positives[4:]:
    r = detect_online(model, t, tau=0.75)
    delays.append(r.delay_samples)
false_alarms = sum(detect_online(model, t, tau=0.75).fired for t in negatives)
print("delays (samples):", delays)
print("false alarms on clean traces:", false_alarms)
print("median delay in seconds:", np.median([d for d in delays if d is not None]) * cfg.sample_interval)
