"""Reverse-validation scores over the default grid next to the true rejection F1.

Uses the two-cluster benchmark: a source cluster at the origin and a target made
of the same cluster plus a far one at (100, 100).

    python3 scripts/reverse_validation.py --seed 0
"""

import argparse

import numpy as np

from openset_ot import metrics
from openset_ot.model_selection import Grid, reverse_validate
from openset_ot.ot_core import Dataset
from openset_ot.rejection import RejectionConfig, reject


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--maximize", action="store_true")
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    sd = np.sqrt(0.1)
    src = Dataset(rng.normal(0, sd, (args.n, 2)))
    tgt = Dataset(np.vstack([rng.normal(0, sd, (args.n, 2)), rng.normal(100, sd, (args.n, 2))]))
    truth = np.r_[np.zeros(args.n, bool), np.ones(args.n, bool)]

    rep = reverse_validate(src, tgt, Grid(), maximize=args.maximize)
    print(f"{'eta':>7} {'alpha':>6} {'fwd rej':>8} {'bwd rej':>8} {'score':>7} {'F1':>7}")
    for s in rep.scores:
        f1 = metrics.rejection_f1(reject(src, tgt, RejectionConfig(eta=s.eta, alpha=s.alpha)).rejected, truth)
        bwd = "-" if s.backward_rejected is None else s.backward_rejected
        mark = " <- chosen" if (s.eta, s.alpha) == rep.chosen else ""
        print(f"{s.eta:>7g} {s.alpha:>6g} {s.forward_rejected:>8} {bwd!s:>8} {s.score:>7.3f} {f1:>7.4f}{mark}")


if __name__ == "__main__":
    main()
