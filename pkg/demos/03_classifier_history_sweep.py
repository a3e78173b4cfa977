"""Classifier accuracy as a function of wrench-history length.

Generates the 80-trial collision dataset with 10 s windows, then trains one
classifier per window duration from 10 s down to 0.05 s (a single sample at
the 29 Hz sensor rate) and reports held-out accuracy for each. Expect this
to take several minutes; the result lands in history_sweep.csv.
"""

from pressfit import classifier as clf
from pressfit.policy import Policy


def main():
    policy = Policy.load("taught_policy.json")

    print("collecting 80 collision trials (10 s windows)...")
    dataset = clf.generate_dataset(policy, trials=80, seed=7, window_seconds=10.0)

    rows = clf.history_length_sweep(dataset, train_config=clf.TrainConfig(seed=3))
    for r in rows:
        print(f"  {r['duration_s']:>6} s  ({r['history_length']:>3} samples)  "
              f"accuracy {r['accuracy']:.3f}")

    with open("history_sweep.csv", "w") as f:
        f.write(clf.sweep_report_csv(rows))
    print("wrote history_sweep.csv")


if __name__ == "__main__":
    main()
