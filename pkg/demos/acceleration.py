"""Plain versus accelerated entropic mirror descent on a quadratic over the 20-simplex.

Run:  python3 demos/acceleration.py
"""

import numpy as np

from mdsearch.simplex import AmdSchedule, amd_minimize, md_minimize


def main():
    B = np.random.default_rng(0).standard_normal((20, 20))
    A = B.T @ B / 20
    x0 = np.full(20, 1 / 20)

    def f(x):
        return x @ A @ x

    def grad(x):
        return 2 * A @ x

    s = 1 / (2 * np.abs(A).max())
    amd = amd_minimize(grad, x0, AmdSchedule(3.0, 1.0, s), 1.0, 200)["x"]
    runs = {f"MD step {st:g}": md_minimize(grad, x0, st, 200) for st in (0.01, 0.1, 1.0)}
    runs[f"AMD s={s:.3f}"] = amd
    f_best = min(f(xs[-1]) for xs in runs.values())
    print(f"{'method':<16}" + "".join(f"{'iter ' + str(k):>12}" for k in (10, 50, 100, 200)))
    for name, xs in runs.items():
        print(f"{name:<16}" + "".join(f"{f(xs[k]) - f_best:12.2e}" for k in (10, 50, 100, 200)))
    print("\nentries are f(x_k) minus the best final value of any method")


if __name__ == "__main__":
    main()
