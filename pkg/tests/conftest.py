import numpy as np
import pytest

from pressfit import harness
from pressfit.classifier import WrenchWindow
from pressfit.types import ContactSide


@pytest.fixture(scope="session")
def reference_policy():
    """Policy taught once per test session: demonstration fit plus scripted
    press corrections on the nominal scenario."""
    return harness.train_reference_policy(seed=0)


@pytest.fixture(scope="session")
def torque_sign_classifier():
    """Physics-truth stand-in for the learned model: the sign of the mean
    sensed z torque separates the contact sides (negative means the contact
    acts on the positive-y side of the gripper)."""

    def classify(window: WrenchWindow):
        tz = float(window.data[5].mean())
        side = ContactSide.LEFT if tz > 0 else ContactSide.RIGHT
        return side, 1.0

    return classify
