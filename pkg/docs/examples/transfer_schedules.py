# %%
import matplotlib.pyplot as plt

import falqon

# %% generate a small ensemble and solve the baselines
graphs = falqon.experiment.generate_ensemble([6, 8, 10], 4, master_seed=2025)
items = {key: (g, falqon.graph.brute_force_max_cut(g)) for key, g in graphs.items()}

# %% scan dt on every graph
cfg = falqon.experiment.ExperimentConfig(sizes=(6, 8, 10), train_sizes=(6,))
results = falqon.experiment.scan_ensemble(list(items.values()), cfg, jobs=4)
summary = falqon.experiment.summarize_scans(results)
fit = falqon.experiment.fit_summary(summary)
print(fit)

# %% transfer the schedules of n=6 to all graphs of n=10
schedules = falqon.experiment.schedules_from_results(results, train_sizes=[6])
targets = [v for (n, _), v in items.items() if n == 10]
records = falqon.experiment.transfer_ensemble(schedules, targets)
cells = falqon.experiment.aggregate_matrix(records)
comparison = falqon.experiment.native_vs_transfer(cells, summary)

# %% plot
f, axes = plt.subplots(1, 2, figsize=(10, 4))
falqon.plot.dt_scaling(summary, fit=fit, ax=axes[0])
falqon.plot.native_vs_transfer(comparison, ax=axes[1])
f.tight_layout()
