# %%
import matplotlib.pyplot as plt
import numpy as np

import falqon

# %% a single 3-regular graph of 10 vertices
g = falqon.graph.generate_regular(10, 3, seed=1)
d = falqon.graph.build_cost_diagonal(g)
baseline = falqon.graph.brute_force_max_cut(g)

# %% final ratios of both orders for a range of dt
df = falqon.experiment.compare_orders(d, baseline, np.arange(0.05, 1.0, 0.05))
ax = df.pivot(index="dt", columns="order", values="final_ratio").plot()
ax.set_ylabel("approximation ratio")

# %% the trajectory of the second-order run at dt = 0.2
schedule, trajectory = falqon.engine.run_feedback(d, 0.2, 16, order=2)
f, ax = plt.subplots()
df = trajectory.to_dataframe(schedule.betas, baseline.ground_energy)
falqon.plot.trajectory(df, ax=ax)
