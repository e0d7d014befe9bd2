"""Mirror steps on the simplex under different geometries.

Run:  python3 demos/mirror_steps.py
"""

import numpy as np

from mdsearch import BregmanSpec, generic_md_step, md_step_kl, prox_perturbed_kl, mds_run, amds_run


def main():
    q = np.full(4, 0.25)
    j = np.array([0.0, 1.0, 2.0, 3.0])
    print("start         ", q)
    print("KL step       ", np.round(md_step_kl(q, j, 2.0), 4))
    print("Euclidean step", np.round(generic_md_step(BregmanSpec.euclidean(), q, j, 2.0), 4))
    print("alpha=0.5 step", np.round(generic_md_step(BregmanSpec.alpha_family(0.5), q, j, 2.0), 4))
    print("perturbed prox", np.round(prox_perturbed_kl(q, j, 0.5, 1.0), 4))
    print()
    # The KL step reweights multiplicatively and never zeroes an entry; the
    # Euclidean and perturbed geometries can put mass exactly at zero.

    mds = mds_run(j, q, 10.0, 30, return_path=True)
    amds = amds_run(j, q, q, s=0.1, n_updates=30, return_path=True)
    print("update  MDS q[0]  AMDS q[0]")
    for k in (1, 5, 10, 20, 30):
        print(f"{k:6d}  {mds[k, 0]:.4f}    {amds[k - 1, 0]:.4f}")


if __name__ == "__main__":
    main()
