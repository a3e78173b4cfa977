"""Teach a press-fit skill from one demonstration plus a few corrections.

The demonstration is a straight-line approach into the slot. On its own it
stalls just short of the goal: the recorded attractor distances taper to zero
at the final sample, so the press never builds force. Three scripted
corrections along the press axis, given while the policy runs, fix that.
"""

import numpy as np

from pressfit import harness, runtime as rt, sim
from pressfit.policy import record_demonstration, train
from pressfit.types import Pose, pose_distance


def main():
    # 1. record a kinesthetic demonstration (here: synthesized straight line)
    line = np.linspace(sim.TRAINING_START, sim.TRAINING_GOAL, 30)
    demo = record_demonstration([(0.1 * i, Pose(p)) for i, p in enumerate(line)])
    policy = train(demo, seed=0, frame_goal=sim.TRAINING_GOAL)

    world, start, goal = sim.spawn_scenario("training")

    # 2. the raw policy alone: converges toward the goal but does not press
    res = rt.run_episode(policy, world, start, goal, mode=rt.Mode.ILOSA, seed=0)
    end = res.traces[-1]
    print("raw demonstration policy:")
    print(f"  success={res.record.success}  "
          f"final distance {pose_distance(end.ee_pose, goal) * 1000:.1f} mm  "
          f"press force {end.wrench.force[0]:.2f} N")

    # 3. teach: replay the bundled correction script during one more episode
    teacher = harness.scripted_teacher(harness.load_correction_rules())
    res = rt.run_episode(
        policy, world, start, goal, cfg=rt.MonitorConfig(max_ticks=1500),
        mode=rt.Mode.ILOSA, teacher=teacher, seed=0,
    )
    taught = res.policy
    print(f"teaching episode: success={res.record.success} in {res.record.ticks} ticks")

    # 4. the taught policy drives all the way into the slot
    res = rt.run_episode(taught, world, start, goal, mode=rt.Mode.ILOSA, seed=1)
    end = res.traces[-1]
    print("taught policy:")
    print(f"  success={res.record.success}  "
          f"final distance {pose_distance(end.ee_pose, goal) * 1000:.1f} mm  "
          f"press force {end.wrench.force[0]:.2f} N")

    taught.save("taught_policy.json")
    print("saved to taught_policy.json")


if __name__ == "__main__":
    main()
