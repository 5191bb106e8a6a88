"""Command-line interface.

Exit codes: 0 on success, 1 on usage or input errors, 2 on numeric
failures. All randomness is controlled by --seed flags.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .data import TaskKind, infer_multiclass, load_csv, save_csv
from .enchead import EncoderConfig, cls_enc_head
from .errors import CrossLearnError, NumericError, ValidationError
from .harness import (SweepConfig, ZoneSweepConfig, render_table, run_sweep,
                      run_zone_experiment)
from .models import ModelSpec, default_models, parse_model_ids
from .oracles import oracle_score
from .score import cls_single, cls_weighted_asymmetric, evaluate_panel
from .synth import SETTINGS, sample_dataset, spec_pair
from .zones import EstimatorConfig, baseline_error, classify, thresholds


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _task_from_flag(value: str, path: str | None = None) -> TaskKind:
    if value == "binary":
        return TaskKind.binary()
    if value == "regression":
        return TaskKind.regression()
    if path is None:
        raise ValidationError("multiclass needs a CSV to infer the class count")
    return infer_multiclass(path)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValidationError("grid must look like start:stop:step") from None
    if step <= 0 or stop < start:
        raise ValidationError("grid needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return tuple(float(np.round(start + step * i, 10)) for i in range(count))


def _add_seed(p):
    p.add_argument("--seed", type=int, default=0)


def _cmd_gen(args) -> int:
    t_spec, s_spec = spec_pair(args.setting, args.similarity, args.seed, args.p)
    target = sample_dataset(t_spec, args.n, args.seed * 2 + 1)
    source = sample_dataset(s_spec, args.n, args.seed * 2 + 2)
    save_csv(target, args.target_out)
    save_csv(source, args.source_out)
    if args.specs_out:
        with open(args.specs_out, "w", encoding="utf-8") as fh:
            json.dump({"target": t_spec.to_dict(), "source": s_spec.to_dict()},
                      fh, indent=2, sort_keys=True)
    print(f"wrote {args.target_out} and {args.source_out} (n={args.n})")
    return 0


def _load_pair(args):
    task = _task_from_flag(args.task, args.target)
    return load_csv(args.target, task), load_csv(args.source, task)


def _score_estimate(args, target, source):
    models = (parse_model_ids(args.models) if args.models
              else default_models(target.task))
    if args.scheme == "single":
        if len(models) != 1:
            raise ValidationError("single scheme needs exactly one model")
        return cls_single(models[0], target, source)
    panel = evaluate_panel(models, target, source, folds_k=args.folds,
                           lam=args.lam, seed=args.seed)
    return panel.weighted if args.scheme == "avg" else panel.ensemble


def _cmd_score(args) -> int:
    target, source = _load_pair(args)
    est = _score_estimate(args, target, source)
    out = est.to_dict()
    if args.w != 0.5:
        out["score"] = cls_weighted_asymmetric(args.w, est.e_t, est.e_s)
        out["w"] = args.w
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_zone(args) -> int:
    target, source = _load_pair(args)
    est = _score_estimate(args, target, source)
    score = (cls_weighted_asymmetric(args.w, est.e_t, est.e_s)
             if args.w != 0.5 else est.score)
    models = (parse_model_ids(args.models) if args.models
              else default_models(target.task))
    scheme = {"single": "single", "avg": "weighted-avg",
              "ensemble": "ensemble"}[args.scheme]
    cfg = EstimatorConfig(models=tuple(models), scheme=scheme, lam=args.lam,
                          folds_k=args.folds)
    e0, se = baseline_error(cfg, target, seed=args.seed)
    th = thresholds(e0, se, args.gamma1, args.gamma2)
    verdict = classify(score, th)
    print(json.dumps({"score": score, "zone": verdict.value,
                      **th.to_dict(), "estimate": est.to_dict()},
                     indent=2, sort_keys=True))
    return 0


def _cmd_oracle(args) -> int:
    t_spec, s_spec = spec_pair(args.setting, args.similarity, args.seed, args.p)
    est = oracle_score(t_spec, s_spec, args.mc_samples, seed=args.seed)
    print(json.dumps(est.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_sweep(args) -> int:
    config = SweepConfig(
        setting=args.setting,
        grid=_parse_grid(args.grid) if args.grid else (),
        replicates=args.replicates, n=args.n, folds_k=args.folds,
        lam=args.lam, mc_samples=args.mc_samples,
        models=tuple(parse_model_ids(args.models)) if args.models else (),
        metrics=tuple(args.metrics.split(",")) if args.metrics else
                ("kl", "w2", "otdd"),
        base_seed=args.seed, workers=args.workers)
    report = run_sweep(config)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    print(f"wrote {args.out}")
    return 0


def _cmd_zones_sweep(args) -> int:
    config = ZoneSweepConfig(
        setting=args.setting,
        grid=_parse_grid(args.grid) if args.grid else (),
        replicates=args.replicates, n=args.n, folds_k=args.folds,
        lam=args.lam, methods=tuple(args.methods.split(",")),
        transfer_model=ModelSpec(args.transfer_model), rounds=args.rounds,
        gamma1=args.gamma1, gamma2=args.gamma2,
        base_seed=args.seed, workers=args.workers)
    report = run_zone_experiment(config)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    print(f"wrote {args.out}")
    return 0


def _cmd_enchead(args) -> int:
    task = _task_from_flag(args.task, args.target_train)
    splits = [load_csv(p, task) for p in (args.target_train, args.target_test,
                                          args.source_train, args.source_test)]
    widths = tuple(int(v) for v in args.widths.split(","))
    config = EncoderConfig(hidden=widths, epochs=args.epochs, step=args.step,
                           batch=args.batch, seed=args.seed)
    result = cls_enc_head(config, *splits, gamma1=args.gamma1,
                          gamma2=args.gamma2)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    with open(args.csv, "r", encoding="utf-8") as fh:
        sys.stdout.write(render_table(fh.read(), decimals=args.decimals))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crosslearn",
                description="Cross-learning scores, transferable zones and "
                            "synthetic benchmark sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[], help="emit target/source CSVs for a setting")
    g.add_argument("--setting", choices=SETTINGS, required=True)
    g.add_argument("--similarity", type=float, required=True)
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--p", type=int, default=10)
    g.add_argument("--target-out", required=True)
    g.add_argument("--source-out", required=True)
    g.add_argument("--specs-out")
    _add_seed(g)
    g.set_defaults(func=_cmd_gen)

    def add_score_args(q):
        q.add_argument("target")
        q.add_argument("source")
        q.add_argument("--task", choices=("binary", "multiclass", "regression"),
                       required=True)
        q.add_argument("--models", help="comma-separated model ids")
        q.add_argument("--scheme", choices=("single", "avg", "ensemble"),
                       default="ensemble")
        q.add_argument("--lambda", dest="lam", type=float, default=500.0)
        q.add_argument("--folds", type=int, default=5)
        q.add_argument("--w", type=float, default=0.5)
        _add_seed(q)

    s = sub.add_parser("score", help="cross-learning score between two CSVs")
    add_score_args(s)
    s.set_defaults(func=_cmd_score)

    z = sub.add_parser("zone", help="score plus thresholds and verdict")
    add_score_args(z)
    z.add_argument("--gamma1", type=float, default=1.0)
    z.add_argument("--gamma2", type=float, default=5.0)
    z.set_defaults(func=_cmd_zone)

    o = sub.add_parser("oracle", help="oracle score for a synthetic setting")
    o.add_argument("--setting", choices=SETTINGS, required=True)
    o.add_argument("--similarity", type=float, required=True)
    o.add_argument("--p", type=int, default=10)
    o.add_argument("--mc-samples", type=int, default=200_000)
    _add_seed(o)
    o.set_defaults(func=_cmd_oracle)

    w = sub.add_parser("sweep", help="similarity sweep for one setting")
    w.add_argument("--setting", choices=SETTINGS, required=True)
    w.add_argument("--grid", help="start:stop:step (default per setting); use --grid=-1:1:0.1 for negative starts")
    w.add_argument("--replicates", type=int, default=50)
    w.add_argument("--n", type=int, default=200)
    w.add_argument("--folds", type=int, default=5)
    w.add_argument("--lambda", dest="lam", type=float, default=500.0)
    w.add_argument("--mc-samples", type=int, default=200_000)
    w.add_argument("--models")
    w.add_argument("--metrics", help="comma-separated subset of kl,w2,otdd")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", required=True)
    w.add_argument("--json")
    _add_seed(w)
    w.set_defaults(func=_cmd_sweep)

    zs = sub.add_parser("zones-sweep", help="zone predictions vs transfer outcomes")
    zs.add_argument("--setting", choices=SETTINGS, required=True)
    zs.add_argument("--grid")
    zs.add_argument("--replicates", type=int, default=20)
    zs.add_argument("--n", type=int, default=200)
    zs.add_argument("--folds", type=int, default=5)
    zs.add_argument("--lambda", dest="lam", type=float, default=500.0)
    zs.add_argument("--methods", default="naive,tradaboost")
    zs.add_argument("--transfer-model", default="logreg")
    zs.add_argument("--rounds", type=int, default=20)
    zs.add_argument("--gamma1", type=float, default=1.0)
    zs.add_argument("--gamma2", type=float, default=5.0)
    zs.add_argument("--workers", type=int, default=1)
    zs.add_argument("--out", required=True)
    zs.add_argument("--json")
    _add_seed(zs)
    zs.set_defaults(func=_cmd_zones_sweep)

    e = sub.add_parser("enchead", help="encoder-head score on four CSV splits")
    e.add_argument("--target-train", required=True)
    e.add_argument("--target-test", required=True)
    e.add_argument("--source-train", required=True)
    e.add_argument("--source-test", required=True)
    e.add_argument("--task", choices=("binary", "multiclass"), default="binary")
    e.add_argument("--widths", default="32,16")
    e.add_argument("--epochs", type=int, default=100)
    e.add_argument("--step", type=float, default=0.01)
    e.add_argument("--batch", type=int, default=32)
    e.add_argument("--gamma1", type=float, default=1.0)
    e.add_argument("--gamma2", type=float, default=5.0)
    _add_seed(e)
    e.set_defaults(func=_cmd_enchead)

    r = sub.add_parser("report", help="render a report CSV as aligned text")
    r.add_argument("csv")
    r.add_argument("--decimals", type=int, default=4)
    r.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except CrossLearnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
