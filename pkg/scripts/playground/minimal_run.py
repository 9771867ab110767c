import numpy as np

from scalardl import theory
from scalardl.objectives import NoiseModel, Quadratic, ScaledSqNorm
from scalardl.scalarization import CompositeObjective
from scalardl.trainer import TrainConfig, run


def minimal_run(lam: float):
    comp = CompositeObjective([Quadratic([0.0]), Quadratic([2.0])], [ScaledSqNorm(0.5)], lam)
    print(f"Running {comp}")
    trace = run(comp, TrainConfig(rounds=100, lr=0.2), np.zeros(1), NoiseModel(sigma_c=0.05))
    star = theory.minimizer(comp)
    print(f"final theta {trace.final_theta[0]:.4f}, minimizer {star[0]:.4f}, max drift {trace.max_drift:.3g}")


if __name__ == "__main__":
    for lam in (0.0, 0.5, 0.87):
        minimal_run(lam)
