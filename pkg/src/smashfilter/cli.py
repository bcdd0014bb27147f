"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 I/O or format error, 3 numeric error.
Every command that writes ``-o PATH`` also writes ``PATH.manifest``.
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import codecs
from .dataset import ClipSpec, load_corpus
from .errors import FormatError, NumericError, SmashError
from .experiment import ExperimentConfig, cr_sweep, leave_one_out, localization_errors
from .inference import SvmParams, classify, feature_names, feature_vector, peak_psr_scores, train_svm
from .localization import CDF_THRESHOLDS, center_error, locate_video
from .mach import build_filter, build_type2_bank, normalize_filter
from .sensing import (
    compress,
    compressed_temporal_derivative,
    jl_report,
    make_matrix,
    measurements_for_ratio,
)
from .stsf import FilterBank, oracle_bank, oracle_response, response_bank, smashed_response
from .synthetic import SuiteConfig, clip_spec, make_suite
from .view import AffineView, compensate, flip_horizontal, flip_view


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --- helpers ------------------------------------------------------------


def emit(args, data, manifest=None):
    """Write ``data`` to ``args.output`` (plus manifest) or to stdout."""
    if getattr(args, "output", None):
        codecs.atomic_write(args.output, data)
        entries = {"command": args.command_name}
        for k, v in sorted(vars(args).items()):
            if k in ("func", "command_name", "output") or v is None:
                continue
            entries[f"arg_{k}"] = " ".join(map(str, v)) if isinstance(v, list) else v
        entries.update(manifest or {})
        codecs.atomic_write(str(args.output) + ".manifest", codecs.manifest_bytes(entries))
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def load_input(path):
    """Video (RVF1 or PGM directory) or compressed stream (CMP1)."""
    p = Path(path)
    if p.is_dir():
        return codecs.read_pgm_sequence(p)
    return codecs.read_any(p, expect=(b"RVF1", b"CMP1"))


def load_bank(args):
    if getattr(args, "bank", None):
        return codecs.read_any(args.bank, expect=(b"BNK1",))
    return FilterBank([codecs.read_any(args.filter, expect=(b"MCH1",))])


def bank_responses_for(inp, bank):
    if isinstance(inp, np.ndarray):
        return oracle_bank(inp, bank)
    z = inp if inp.derivative_order == 1 else compressed_temporal_derivative(inp)
    return response_bank(z, bank)


def filter_params(args):
    return {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma}


def add_filter_params(p):
    d = ExperimentConfig()
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--beta", type=float, default=d.beta)
    p.add_argument("--gamma", type=float, default=d.gamma)


# --- commands -----------------------------------------------------------


def cmd_matrix_gen(args):
    m = make_matrix(args.dist, args.seed, args.K, args.D)
    emit(args, codecs.encode_matrix(m, args.materialize), {"K": m.K, "D": m.D})


def cmd_sense(args):
    v = load_input(args.video)
    if not isinstance(v, np.ndarray):
        raise FormatError(f"{args.video}: sense needs a raw video, not a compressed stream")
    if args.matrix:
        m = codecs.read_any(args.matrix, expect=(b"PHI1",))
    else:
        D = v.shape[0] * v.shape[1]
        m = make_matrix(args.dist, args.seed, measurements_for_ratio(D, args.cr), D)
    z = compress(v, m, args.noise, args.noise_seed)
    if args.derivative:
        z = compressed_temporal_derivative(z)
    emit(args, codecs.encode_compressed(z), {"K": m.K, "D": m.D, "seed": m.seed, "distribution": m.distribution})


def cmd_filter_build(args):
    examples = [load_input(p) for p in args.examples]
    if any(not isinstance(e, np.ndarray) for e in examples):
        raise FormatError("training examples must be raw videos")
    if args.views:
        if len(args.views) != len(examples):
            raise UsageError(f"{len(examples)} examples but {len(args.views)} --views")
        views = [AffineView.parse(s) for s in args.views]
        f = build_type2_bank(examples, views, args.alpha, args.beta, args.gamma, args.label, not args.raw)[0]
    else:
        f = build_filter(examples, args.alpha, args.beta, args.gamma, args.label, normalize=not args.raw)
    emit(args, codecs.encode_filter(f), {**filter_params(args), "label": args.label})


def cmd_filter_compensate(args):
    f = codecs.read_any(args.filter, expect=(b"MCH1",))
    view = AffineView.parse(args.view)
    emit(args, codecs.encode_filter(compensate(f, view)), {"view": view.format()})


def cmd_filter_flip(args):
    f = codecs.read_any(args.filter, expect=(b"MCH1",))
    emit(args, codecs.encode_filter(flip_horizontal(f)))


def cmd_filter_bank(args):
    filters = [codecs.read_any(p, expect=(b"MCH1",)) for p in args.filters]
    if args.with_flips:
        filters += [flip_horizontal(f) for f in filters]
    emit(args, codecs.encode_bank(FilterBank(filters)), {"count": len(filters)})


def cmd_respond(args):
    inp = load_input(args.input)
    f = codecs.read_any(args.filter, expect=(b"MCH1",))
    if args.mode == "oracle":
        if not isinstance(inp, np.ndarray):
            raise FormatError("oracle responses need a raw video")
        r = oracle_response(inp, f)
    else:
        if isinstance(inp, np.ndarray):
            raise FormatError("smashed responses need a compressed stream (CMP1)")
        z = inp if inp.derivative_order == 1 else compressed_temporal_derivative(inp)
        r = smashed_response(z, f)
    emit(args, codecs.encode_volume(r.data), {"provenance": r.provenance})


def cmd_features(args):
    inp = load_input(args.input)
    bank = load_bank(args)
    fv = feature_vector(bank_responses_for(inp, bank))
    name = args.name or Path(args.input).stem
    header = ["video", "label"] + feature_names(len(bank))
    emit(args, codecs.csv_bytes(header, [[name, args.label or ""] + list(fv)]))


def _read_features(paths):
    X, y = [], []
    for p in paths:
        _, rows = codecs.read_csv(p)
        for r in rows:
            y.append(r[1])
            X.append([float(x) for x in r[2:]])
    return np.array(X), y


def cmd_train(args):
    X, y = _read_features(args.features)
    bank = codecs.read_any(args.bank, expect=(b"BNK1",))
    model = train_svm(X, y, SvmParams(args.reg, args.epochs, args.seed), classes=bank.actions)
    emit(args, codecs.encode_model(model), {"classes": ";".join(bank.actions), "svm_reg": args.reg})


def _recognize(inp, bank, args):
    responses = bank_responses_for(inp, bank)
    if args.mode == "peak-psr":
        scores = peak_psr_scores(responses, bank.filter_to_action, len(bank.actions))
        return int(np.argmax(scores)), scores, responses
    model = codecs.decode_model(Path(args.model).read_bytes(), args.model, bank.actions)
    idx, scores = classify(feature_vector(responses), model)
    return idx, scores, responses


def cmd_recognize(args):
    inp = load_input(args.input)
    bank = codecs.read_any(args.bank, expect=(b"BNK1",))
    if args.mode == "svm" and not args.model:
        raise UsageError("--model is required in svm mode")
    idx, scores, _ = _recognize(inp, bank, args)
    header = ["label"] + [f"score_{a}" for a in bank.actions]
    emit(args, codecs.csv_bytes(header, [[bank.actions[idx]] + list(scores)]), {"mode": args.mode})


def cmd_localize(args):
    inp = load_input(args.input)
    bank = codecs.read_any(args.bank, expect=(b"BNK1",))
    if args.label:
        if args.label not in bank.actions:
            raise UsageError(f"label {args.label!r} not in bank actions {bank.actions}")
        a = bank.actions.index(args.label)
        responses = bank_responses_for(inp, bank)
    else:
        if args.mode == "svm" and not args.model:
            raise UsageError("give --label, or --model / --mode peak-psr to classify first")
        a, _, responses = _recognize(inp, bank, args)
    # among the classified action's filters, use the one with the highest peak
    cands = [i for i, k in enumerate(bank.filter_to_action) if k == a]
    best = max(cands, key=lambda i: responses[i].data.max())
    boxes = locate_video(responses[best], bank.filters[best].dims, args.lam, args.box)
    emit(args, codecs.boxes_csv(boxes), {"lambda": args.lam, "box": args.box, "label": bank.actions[a]})


def _suite(args):
    if args.data:
        samples = load_corpus(args.data)
        clip = ClipSpec(args.clip_rows, args.clip_cols, args.clip_frames)
    else:
        sc = SuiteConfig()
        samples = make_suite(sc, seed=args.suite_seed)
        clip = clip_spec(sc)
    return samples, clip


def _config(args, cr=None):
    return ExperimentConfig(
        compression_ratio=args.cr if cr is None else cr,
        distribution=args.dist,
        seed=args.seed,
        noise_sigma=args.noise,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        lam=args.lam,
        mode=args.mode,
        svm=SvmParams(args.reg, args.epochs, args.svm_seed),
    )


def cmd_eval_loo(args):
    samples, clip = _suite(args)
    cfg = _config(args)
    modes = ("svm", "peak-psr") if args.mode == "both" else (args.mode,)
    res = leave_one_out(samples, clip, cfg, modes)
    rows = []
    for m, r in res.items():
        for s, p, t in zip(samples, r.predictions, r.runtimes):
            rows.append([m, s.instance, s.label, p, t])
    summary = {f"accuracy_{m}": r.accuracy for m, r in res.items()}
    summary.update({f"mean_runtime_s_{m}": r.mean_runtime for m, r in res.items()})
    summary["K"] = next(iter(res.values())).K or samples[0].video.shape[0] * samples[0].video.shape[1]
    if args.localize:
        d = localization_errors(samples, clip, cfg)
        summary.update({f"loc_cdf_{k}": float(np.mean(d <= k)) for k in CDF_THRESHOLDS})
    for k, v in summary.items():
        print(f"{k}={codecs.fmt(v)}", file=sys.stderr)
    emit(args, codecs.csv_bytes(["mode", "video", "label", "predicted", "runtime_s"], rows), {**cfg.manifest(), **summary})


def cmd_eval_cr_sweep(args):
    samples, clip = _suite(args)
    ratios = [float(x) if "." in x else int(x) for x in args.crs.split(",")]
    cfg = _config(args, cr=ratios[0])
    if cfg.mode == "both":
        raise UsageError("cr-sweep takes a single --mode")
    rows = cr_sweep(samples, clip, cfg, ratios)
    header = ["cr", "K", "accuracy", "mean_runtime_s"]
    emit(args, codecs.csv_bytes(header, [[r[h] for h in header] for r in rows]), cfg.manifest())


def cmd_jl_check(args):
    r = jl_report(args.dist, args.seed, args.K, args.D, args.trials, args.vector_seed, args.pairs)
    header = ["K", "D", "trials", "mean_abs_error", "max_abs_error", "predicted_scale"]
    row = [r.K, r.D, r.trial_count, r.mean_abs_error, r.max_abs_error, r.predicted_scale]
    emit(args, codecs.csv_bytes(header, [row]))


def cmd_overlay(args):
    v = load_input(args.video)
    if not isinstance(v, np.ndarray):
        raise FormatError("overlay needs a raw video")
    boxes = codecs.read_boxes(args.boxes) if args.boxes else []
    # response frame n spans raw frames n..n+N; draw it on frame n + offset
    boxes = [replace(b, frame_index=b.frame_index + args.frame_offset) for b in boxes]
    images = codecs.render_overlay(v, boxes)
    out = Path(args.output)
    width = max(4, len(str(len(images) - 1)))
    for t, img in enumerate(images):
        codecs.atomic_write(out / f"{t:0{width}d}.ppm", img)


def cmd_synth(args):
    sc = SuiteConfig()
    samples = make_suite(sc, seed=args.suite_seed)
    out = Path(args.output)
    for s in samples:
        d = out / s.label / f"{s.label}_{s.instance:02d}"
        if args.pgm:
            lo, hi = s.video.min(), s.video.max()
            codecs.write_pgm_sequence(d, (s.video - lo) / (hi - lo))
        else:
            codecs.write_volume(d / "video.rvf", s.video)
        rows = [[t, c[0], c[1]] for t, c in enumerate(s.centers)]
        codecs.atomic_write(d / "centers.csv", codecs.csv_bytes(["frame", "row", "col"], rows))


# --- parser -------------------------------------------------------------


def build_parser():
    p = Parser(prog="smashfilter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def command(parent, name, func, full_name, **kw):
        c = parent.add_parser(name, **kw)
        c.set_defaults(func=func, command_name=full_name)
        return c

    def out(c, required=False):
        c.add_argument("-o", "--output", required=required)

    mat = sub.add_parser("matrix").add_subparsers(dest="sub", required=True, parser_class=Parser)
    c = command(mat, "gen", cmd_matrix_gen, "matrix gen", help="generate a measurement matrix file")
    c.add_argument("--dist", choices=("gaussian", "bernoulli"), default="gaussian")
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--D", type=int, required=True)
    c.add_argument("--materialize", action="store_true")
    out(c, True)

    c = command(sub, "sense", cmd_sense, "sense", help="compress a video")
    c.add_argument("--video", required=True)
    c.add_argument("--matrix")
    c.add_argument("--cr", type=float, default=100.0)
    c.add_argument("--dist", choices=("gaussian", "bernoulli"), default="gaussian")
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--noise", type=float, default=0.0)
    c.add_argument("--noise-seed", type=int)
    c.add_argument("--derivative", action="store_true", help="difference the measurements in time")
    out(c, True)

    flt = sub.add_parser("filter").add_subparsers(dest="sub", required=True, parser_class=Parser)
    c = command(flt, "build", cmd_filter_build, "filter build", help="synthesize a MACH filter")
    c.add_argument("--examples", nargs="+", required=True)
    c.add_argument("--label", required=True)
    c.add_argument("--views", nargs="+", help="per-example view to the canonical frame (type-2 filter)")
    c.add_argument("--raw", action="store_true", help="skip zero-mean/unit-energy normalization")
    add_filter_params(c)
    out(c, True)
    c = command(flt, "compensate", cmd_filter_compensate, "filter compensate")
    c.add_argument("--filter", required=True)
    c.add_argument("--view", required=True, help="a11,a12,a21,a22,b1,b2")
    out(c, True)
    c = command(flt, "flip", cmd_filter_flip, "filter flip")
    c.add_argument("--filter", required=True)
    out(c, True)
    c = command(flt, "bank", cmd_filter_bank, "filter bank", help="bundle filters into a bank")
    c.add_argument("filters", nargs="+")
    c.add_argument("--with-flips", action="store_true")
    out(c, True)

    c = command(sub, "respond", cmd_respond, "respond", help="response volume for one filter")
    c.add_argument("--mode", choices=("oracle", "smashed"), default="smashed")
    c.add_argument("--input", required=True)
    c.add_argument("--filter", required=True)
    out(c, True)

    c = command(sub, "features", cmd_features, "features", help="feature vector CSV")
    c.add_argument("--input", required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--bank")
    g.add_argument("--filter")
    c.add_argument("--label")
    c.add_argument("--name")
    out(c)

    c = command(sub, "train", cmd_train, "train", help="train the linear SVM")
    c.add_argument("--features", nargs="+", required=True)
    c.add_argument("--bank", required=True)
    c.add_argument("--reg", type=float, default=SvmParams.reg)
    c.add_argument("--epochs", type=int, default=SvmParams.epochs)
    c.add_argument("--seed", type=int, default=SvmParams.seed)
    out(c, True)

    for name, func in (("recognize", cmd_recognize), ("localize", cmd_localize)):
        c = command(sub, name, func, name)
        c.add_argument("--input", required=True)
        c.add_argument("--bank", required=True)
        c.add_argument("--model")
        c.add_argument("--mode", choices=("svm", "peak-psr"), default="svm")
        if name == "localize":
            c.add_argument("--label")
            c.add_argument("--lambda", dest="lam", type=float, default=0.7)
            c.add_argument("--box", choices=("mass", "fixed"), default="mass")
        out(c)

    ev = sub.add_parser("eval").add_subparsers(dest="sub", required=True, parser_class=Parser)
    for name, func in (("loo", cmd_eval_loo), ("cr-sweep", cmd_eval_cr_sweep)):
        c = command(ev, name, func, f"eval {name}")
        c.add_argument("--data", help="corpus root ACTION/VIDEO/*.pgm (default: synthetic suite)")
        c.add_argument("--suite-seed", type=int, default=0)
        c.add_argument("--clip-rows", type=int, default=32)
        c.add_argument("--clip-cols", type=int, default=32)
        c.add_argument("--clip-frames", type=int, default=9)
        if name == "loo":
            c.add_argument("--cr", type=float, default=100.0)
            c.add_argument("--localize", action="store_true")
        else:
            c.add_argument("--crs", default="1,100,200,300,500")
        c.add_argument("--mode", choices=("svm", "peak-psr", "both"), default="svm")
        c.add_argument("--dist", choices=("gaussian", "bernoulli"), default="gaussian")
        c.add_argument("--seed", type=int, default=1)
        c.add_argument("--noise", type=float, default=0.0)
        c.add_argument("--lambda", dest="lam", type=float, default=0.7)
        c.add_argument("--reg", type=float, default=SvmParams.reg)
        c.add_argument("--epochs", type=int, default=SvmParams.epochs)
        c.add_argument("--svm-seed", type=int, default=SvmParams.seed)
        add_filter_params(c)
        out(c)

    c = command(sub, "jl-check", cmd_jl_check, "jl-check", help="empirical inner-product preservation")
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--D", type=int, required=True)
    c.add_argument("--trials", type=int, default=1000)
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--vector-seed", type=int, default=0)
    c.add_argument("--dist", choices=("gaussian", "bernoulli"), default="gaussian")
    c.add_argument("--pairs", choices=("orthogonal", "random", "self"), default="orthogonal")
    out(c)

    c = command(sub, "overlay", cmd_overlay, "overlay", help="render boxes onto frames as PPM")
    c.add_argument("--video", required=True)
    c.add_argument("--boxes")
    c.add_argument("--frame-offset", type=int, default=0)
    out(c, True)

    c = command(sub, "synth", cmd_synth, "synth", help="write the synthetic action suite")
    c.add_argument("--suite-seed", type=int, default=0)
    c.add_argument("--pgm", action="store_true", help="PGM frame directories instead of RVF1")
    out(c, True)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except SmashError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
