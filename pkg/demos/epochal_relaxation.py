"""Epochal relaxation at the three time scales.

Runs the AP scheme for tau = 1, eps and eps^2 and prints the quantities that
separate the scales: the velocity gap |u_L - eps u_H|, both temperatures and the
light entropy against its centered Maxwellian.  Tables are written under
``demos/out/<scale>/``.

    python3 demos/epochal_relaxation.py [--eps 0.01] [--nv 64] [--t-final 6]
"""
import argparse
import warnings
from pathlib import Path

from dispkin import SimConfig, read_csv, run_epochal


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--nv", type=int, default=64)
    p.add_argument("--t-final", type=float, default=6.0)
    p.add_argument("--out", default=str(Path(__file__).parent / "out"))
    args = p.parse_args()
    warnings.simplefilter("ignore", RuntimeWarning)
    for scale in ("one", "eps", "eps2"):
        cfg = SimConfig(eps=args.eps, tau_scale=scale, nv=args.nv, n_rho=32, dealias=False,
                        t_final=args.t_final)
        files = run_epochal(cfg, Path(args.out) / scale)
        _, mom = read_csv(files["moments"])
        _, ent = read_csv(files["entropy"])
        print(f"tau = {scale}")
        print("      t   |u_L - eps u_H|      T_L      T_H     H(f_L)")
        stride = max(1, len(mom) // 6)
        for m, e in list(zip(mom, ent))[::stride]:
            t, uLx, uLy, TL, eux, euy, TH = (float(m[i]) for i in (0, 2, 3, 4, 8, 9, 10))
            gap = ((uLx - eux) ** 2 + (uLy - euy) ** 2) ** 0.5
            print(f"  {t:5.2f}  {gap:15.4e}  {TL:7.4f}  {TH:7.4f}  {float(e[1]):9.3e}")


if __name__ == "__main__":
    main()
