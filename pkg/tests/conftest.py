import numpy as np
import pytest

from calibkit.head import PredictionSet


@pytest.fixture
def four_sample_preds() -> PredictionSet:
    """The hand-binned example: 0.95 correct, 0.95 wrong, 0.65 correct, 0.65 correct."""
    return PredictionSet(
        predicted=np.zeros(4, dtype=np.int64),
        confidence=np.array([0.95, 0.95, 0.65, 0.65]),
        correct=np.array([True, False, True, True]),
    )


def random_prediction_set(rng: np.random.Generator, n: int, c: int) -> PredictionSet:
    """Random softmax-derived predictions with uniform random labels."""
    from calibkit.head import ProbabilityMatrix, predict, softmax_values
    from calibkit.tensorio import LabelVector

    logits = rng.normal(0.0, 3.0, size=(n, c))
    probs = ProbabilityMatrix(values=softmax_values(logits))
    labels = LabelVector(labels=rng.integers(0, c, size=n), num_classes=c)
    return predict(probs, labels)
