"""Full generalization study: start, goal and grasp variation batteries.

Each battery runs every preset for 20 jittered trials in both modes and
prints a success table. The start variations only move the approach pose,
so both modes pass; the 4 mm goal-estimate errors and every off-center grasp
jam the carton, which the baseline cannot escape. Budget 10 to 15 minutes.
"""

from pressfit import classifier as clf
from pressfit import harness
from pressfit.policy import Policy


def main():
    policy = Policy.load("taught_policy.json")

    print("training the runtime contact-side classifier...")
    dataset = clf.generate_dataset(policy, trials=80, seed=7, window_seconds=0.5)
    model, accuracy = clf.train_classifier(dataset, 0.1, clf.TrainConfig(seed=3))
    print(f"held-out accuracy: {accuracy:.2f}\n")

    for spec_fn in (
        harness.start_battery_spec,
        harness.goal_battery_spec,
        harness.grasp_battery_spec,
    ):
        spec = spec_fn(master_seed=0)
        result = harness.run_experiment(spec, policy, classify=model.predict)
        print(result.report_text())
        with open(f"{spec.name}.csv", "w") as f:
            f.write(result.to_csv())

    print("per-trial rows written to <battery>.csv")


if __name__ == "__main__":
    main()
