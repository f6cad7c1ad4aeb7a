"""Filter and predict the hidden state along one trajectory, both methods.

Runs the optimal filter (transition matrix known) and the nonparametric
filter (transition matrix unknown) over the same data, prints their error
rates on the evaluation window, writes the plot-ready trace CSV, and - if
matplotlib is importable - renders the six-panel comparison figure.
"""
import numpy as np

from hmmar import emit_trace, example_config, run_filters, simulate

config = example_config()
traj = simulate(config.model, config.n_total, config.burn_in, rng_seed=0)
lo, hi = config.eval_window

records = run_filters(traj, config.model, tau=config.tau, l=config.l, eval_start=lo)

def error(decision):
    return np.mean([decision(rec) != traj.s[rec.n - 1] for rec in records])

print(f"evaluation window n in [{lo}, {hi}], {len(records)} decisions")
print(f"optimal        filtering error {error(lambda r: r.optimal_output.filtered_state):.3f}"
      f"   prediction error {error(lambda r: r.optimal_output.predicted_state):.3f}")
print(f"nonparametric  filtering error {error(lambda r: r.nonparam_output.filtered_state):.3f}"
      f"   prediction error {error(lambda r: r.nonparam_output.predicted_state):.3f}")

emit_trace(traj, records, "trace_demo.csv", n_states=config.model.M)
print("\nwrote trace_demo.csv (n, truth, observation, decisions, posteriors)")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping the figure")
else:
    ns = np.array([rec.n for rec in records])
    panels = [
        ("hidden state s_n", traj.s[lo - 1:hi], "step"),
        ("observed x_n", traj.x[lo - 1:hi], "line"),
        ("optimal filtering", [r.optimal_output.filtered_state for r in records], "step"),
        ("nonparametric filtering", [r.nonparam_output.filtered_state for r in records], "step"),
        ("optimal prediction", [r.optimal_output.predicted_state for r in records], "step"),
        ("nonparametric prediction", [r.nonparam_output.predicted_state for r in records], "step"),
    ]
    fig, axes = plt.subplots(len(panels), 1, figsize=(9, 11), sharex=True)
    for ax, (title, ys, kind) in zip(axes, panels):
        if kind == "step":
            ax.step(ns, ys, where="mid", lw=1)
        else:
            ax.plot(ns, ys, lw=1)
        ax.set_ylabel(title, fontsize=8)
    axes[-1].set_xlabel("n")
    fig.tight_layout()
    fig.savefig("filter_comparison.png", dpi=120)
    print("wrote filter_comparison.png")
