#!/usr/bin/env python3
"""Encoder-head scoring demo: a benign source (same distribution as the
target) against a label-flipped source, repeated over seeds."""

import argparse
import sys

from crosslearn import rng
from crosslearn.data import Dataset
from crosslearn.enchead import EncoderConfig, cls_enc_head
from crosslearn.synth import sample_dataset, spec_pair


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--epochs", type=int, default=100)
    args = ap.parse_args()

    for flipped in (False, True):
        verdicts = []
        for seed in range(args.runs):
            t_spec, s_spec = spec_pair("lda", 1.0, seed=100 + seed)
            tt = sample_dataset(t_spec, 150, seed=rng.derive(seed, 1))
            te = sample_dataset(t_spec, 50, seed=rng.derive(seed, 2))
            st = sample_dataset(s_spec, 150, seed=rng.derive(seed, 3))
            se = sample_dataset(s_spec, 50, seed=rng.derive(seed, 4))
            if flipped:
                st = Dataset(st.features, 1 - st.labels, st.task)
                se = Dataset(se.features, 1 - se.labels, se.task)
            res = cls_enc_head(EncoderConfig(epochs=args.epochs, seed=seed),
                               tt, te, st, se)
            verdicts.append(res.zone.value)
            print(f"source={'flipped' if flipped else 'benign ':7s} seed={seed} "
                  f"score={res.cls_enc_head:.3f} e0={res.e0:.3f} "
                  f"se={res.se_e0:.3f} zone={res.zone.value}")
        counts = {z: verdicts.count(z) for z in ("PT", "AZ", "NT")}
        print(f"-> {'flipped' if flipped else 'benign'} verdicts: {counts}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
