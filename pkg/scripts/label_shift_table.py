"""Label-shift F1 and proportion error with unbalanced source, reversed target.

    python3 scripts/label_shift_table.py --trials 3 --max-iter 1000
"""

import argparse

import numpy as np

from openset_ot import datagen, metrics
from openset_ot.label_shift import LabelShiftConfig, fit


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--eta", type=float, default=0.001)
    p.add_argument("--n-per-class", type=int, default=1000)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--update", choices=["dual", "literal"], default="dual")
    args = p.parse_args()

    classes = tuple(range(1, args.classes + 1))
    src_p = datagen.unbalanced_schedule(args.classes, "forward")
    tgt_p = datagen.unbalanced_schedule(args.classes, "reverse")
    cfg = LabelShiftConfig(eta=args.eta, max_iter=args.max_iter, update=args.update)
    print(f"source proportions {np.round(src_p, 3).tolist()}, target {np.round(tgt_p, 3).tolist()}")
    print(f"{'noise':>6} {'F1':>18} {'L1(nu)':>18} {'converged':>10}")
    for noise in (0.5, 0.75):
        f1, err, conv = [], [], 0
        for seed in range(args.trials):
            task = datagen.open_set_task(classes, n_classes=args.classes, n_per_class=args.n_per_class,
                                         noise=noise, seed=seed, source_proportions=src_p, target_proportions=tgt_p)
            res = fit(task.source, task.target, cfg=cfg)
            f1.append(metrics.f1_macro(res.predicted_labels, task.target.labels, classes))
            err.append(np.abs(res.nu - tgt_p).sum())
            conv += res.converged
        print(f"{noise:>6} {np.mean(f1):8.4f} ± {np.std(f1):.4f} {np.mean(err):8.4f} ± {np.std(err):.4f} "
              f"{conv:>4}/{args.trials}")


if __name__ == "__main__":
    main()
