"""Collision detection and recovery on a misgrasped carton.

The carton is held 3.5 mm off center, so the nominal press path jams it
against a flank of the slot. The baseline controller pushes forever; the
monitored mode detects the stagnating attractor, asks the contact-side
classifier which side the collision acts on, and feeds a correction away
from that side back into the policy.

Trains a small classifier from simulated collision windows first (about a
minute); run 01_teach_and_press.py before this to produce taught_policy.json.
"""

from pressfit import classifier as clf
from pressfit import runtime as rt, sim
from pressfit.policy import Policy


def main():
    policy = Policy.load("taught_policy.json")

    print("collecting labeled collision windows...")
    dataset = clf.generate_dataset(policy, trials=24, seed=7, window_seconds=0.5)
    model, accuracy = clf.train_classifier(dataset, 0.1, clf.TrainConfig(seed=3))
    print(f"contact-side classifier held-out accuracy: {accuracy:.2f}")

    world, start, goal = sim.spawn_scenario("grasp_1")

    res = rt.run_episode(policy, world, start, goal, mode=rt.Mode.ILOSA, seed=2)
    print(f"baseline:  success={res.record.success} after {res.record.ticks} ticks")

    res = rt.run_episode(
        policy, world, start, goal, mode=rt.Mode.ACCIFR,
        classify=model.predict, seed=2,
    )
    print(f"monitored: success={res.record.success} after {res.record.ticks} ticks")
    for c in res.record.collisions:
        print(f"  collision at t={c.time:.2f}s on the {c.side.value} side, "
              f"recovered={c.recovered}")


if __name__ == "__main__":
    main()
