"""Command-line entry point: ``radiomarker <command> [options]``.

Commands
--------
extract   features for every case of a manifest CSV
analyze   correlation matrix, cluster order, subgroup summaries
evaluate  nested leave-one-out evaluation and a deployable model
synth     synthetic phantoms (with manifest) or a synthetic feature table
report    pretty-print an evaluation report

Options can also come from ``--config FILE`` holding ``key=value``
lines; values there override the command line. ``RADIOMARKER_THREADS``
sets the default worker count. Exit status is 0 on success, 1 on a
runtime failure and 2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import default_threads, feature_type_weights, nested_loocv, select_and_fit
from .features.extract import (FEATURE_TYPES, FILTER_MARGIN, canonical_columns,
                                count_by_image_family, extract_case)
from .filters import derive_all
from .svm import HyperGrid
from .synth import gen_phantom, gen_tabular, phantom_cohort
from .table import (UNKNOWN_LABEL, DegenerateTableError, FeatureTable, correlation_report,
                    prune_degenerate, read_table_csv, write_table_csv)
from .volume_io import crop, load_mask, load_volume, save_mask, save_volume

log = logging.getLogger("radiomarker")

FAMILY_LABELS = {"original": "Original", "exponential": "Exponential", "gradient": "Gradient",
                 "lbp3d": "LBP3D", "logarithm": "Logarithm", "square": "Square",
                 "squareroot": "Square-root", "wavelet": "Wavelet"}


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radiomarker", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; its values override flags")
    common.add_argument("--threads", type=int, help="worker processes (default: $RADIOMARKER_THREADS "
                                                    "or the CPU count)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", parents=[common], help="extract features from a manifest")
    e.add_argument("--manifest", help="CSV with case_id,volume_path,mask_path[,label]")
    e.add_argument("--out", help="feature table CSV to write")
    e.add_argument("--bin-width", type=float, default=25.0)
    e.add_argument("--dump-derived", metavar="DIR", help="also save every filtered image")

    a = sub.add_parser("analyze", parents=[common], help="correlation analyses of a feature table")
    a.add_argument("--table")
    a.add_argument("--out-dir")

    v = sub.add_parser("evaluate", parents=[common], help="nested LOOCV of the classifier pipeline")
    v.add_argument("--table")
    v.add_argument("--out-dir")
    v.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    v.add_argument("--feature-type", help=f"restrict to one of {', '.join(FEATURE_TYPES)}")
    grid = HyperGrid()
    v.add_argument("--C-values", dest="C_values", default=",".join(map(repr, grid.C_values)))
    v.add_argument("--gamma-values", default=",".join(map(repr, grid.gamma_values)))
    v.add_argument("--pca-k", default=",".join(map(str, grid.pca_k)))
    v.add_argument("--smote-k", default=",".join(map(str, grid.smote_k)))
    v.add_argument("--no-final", action="store_true", help="skip the refit-on-all-cases model")

    s = sub.add_parser("synth", parents=[common], help="write synthetic phantoms or a table")
    s.add_argument("kind", choices=("phantoms", "table"))
    s.add_argument("--out", help="table CSV (kind=table) or output directory (kind=phantoms)")
    s.add_argument("--n-cases", type=int, default=42)
    s.add_argument("--class-fractions", default="28,14")
    s.add_argument("--n-features", type=int, default=200)
    s.add_argument("--n-informative", type=int, default=5)
    s.add_argument("--effect-size", type=float, default=1.5)
    s.add_argument("--dims", default="48,48,48")
    s.add_argument("--semi-axes", default="14,11,9", help="lesion ellipsoid semi-axes (mm)")
    s.add_argument("--radius", default="1,2", help="smoothing radius of class 0,1 (voxels)")
    s.add_argument("--offset", default="40,40", help="intensity offset of class 0,1 (HU)")

    r = sub.add_parser("report", parents=[common], help="pretty-print a report JSON")
    r.add_argument("report")
    return p


def apply_config(args: argparse.Namespace, path: str) -> None:
    """Override parsed options with ``key=value`` lines (``#`` starts a comment)."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise UsageError(f"{path}:{n}: expected key=value")
        if key in ("config", "command") or not hasattr(args, key):
            raise UsageError(f"{path}:{n}: unknown key {key!r} for {args.command}")
        current = getattr(args, key)
        value = value.strip()
        try:
            if isinstance(current, bool):
                value = value.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int) or key in ("threads", "seed", "n_cases"):
                value = int(value)
            elif isinstance(current, float):
                value = float(value)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from None
        setattr(args, key, value)


def _require(args, *names) -> None:
    missing = [n for n in names if not getattr(args, n, None)]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-")
                                                                    for m in missing))


class _SidecarLog:
    """Timestamped run log kept apart from the deterministic outputs."""

    def __init__(self, path: Path):
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fh = open(path, "a", encoding="utf-8")

    def __call__(self, msg: str) -> None:
        stamp = _dt.datetime.now().isoformat(timespec="seconds")
        self.fh.write(f"{stamp} {msg}\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()


# ---------------------------------------------------------------- extract


def read_manifest(path) -> list[dict]:
    p = Path(path)
    try:
        with open(p, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.DictReader(fh)]
    except OSError as exc:
        raise UsageError(f"cannot read manifest {p}: {exc}") from None
    need = {"case_id", "volume_path", "mask_path"}
    if rows and not need <= set(rows[0]):
        raise UsageError(f"manifest {p} needs columns {sorted(need)}")
    if not rows:
        raise UsageError(f"manifest {p} lists no cases")
    base = p.parent
    out = []
    for r in rows:
        lab = (r.get("label") or "").strip()
        out.append({"case_id": r["case_id"].strip(),
                    "volume": str(base / r["volume_path"].strip()),
                    "mask": str(base / r["mask_path"].strip()),
                    "label": int(lab) if lab else UNKNOWN_LABEL})
    ids = [r["case_id"] for r in out]
    if len(set(ids)) != len(ids):
        raise UsageError("manifest has duplicate case ids")
    return out


def _extract_one(job):
    row, bin_width, dump = job
    try:
        v = load_volume(row["volume"])
        m = load_mask(row["mask"], v)
        fv = extract_case(v, m, bin_width, row["case_id"])
        if dump:
            d = Path(dump)
            d.mkdir(parents=True, exist_ok=True)
            cid = row["case_id"]
            cv, cm = crop(v, m, FILTER_MARGIN)
            save_volume(cv, d / f"{cid}_original", "f64")
            save_mask(cm, d / f"{cid}_mask", cv.spacing)
            for img in derive_all(cv, cm):
                save_volume(img.volume, d / f"{cid}_{img.image_type}", "f64")
        return row["case_id"], fv.values, None
    except Exception as exc:   # reported per case, the run continues
        return row["case_id"], None, f"{type(exc).__name__}: {exc}"


def _map(fn, jobs, threads):
    if threads <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, jobs))


def cmd_extract(args, note) -> int:
    _require(args, "manifest", "out")
    if not args.bin_width > 0:
        raise UsageError("bin width must be positive")
    rows = read_manifest(args.manifest)
    results = _map(_extract_one, [(r, args.bin_width, args.dump_derived) for r in rows],
                   args.threads)
    ok_ids, labels, values, failed = [], [], [], []
    for row, (cid, vals, err) in zip(rows, results):
        if err is None:
            ok_ids.append(cid)
            labels.append(row["label"])
            values.append(vals)
            note(f"extracted {cid}")
        else:
            failed.append(cid)
            note(f"FAILED {cid}: {err}")
            print(f"error: case {cid}: {err}", file=sys.stderr)
    cols = canonical_columns()
    table = FeatureTable(ok_ids, labels, cols, np.array(values).reshape(len(ok_ids), len(cols)))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_table_csv(table, args.out)
    counts = count_by_image_family(cols)
    print(" ".join(f"{FAMILY_LABELS.get(k, k)}={v}" for k, v in counts.items()) + f" Total={len(cols)}")
    print(f"{len(ok_ids)} case(s) written to {args.out}" + (f", {len(failed)} failed" if failed else ""))
    return 1 if failed else 0


# ---------------------------------------------------------------- analyze


def cmd_analyze(args, note) -> int:
    _require(args, "table", "out_dir")
    t = read_table_csv(args.table)
    pruned, removed = prune_degenerate(t)
    rep = correlation_report(pruned)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    order = rep.cluster_order
    names = [pruned.names[i] for i in order]
    with open(out / "correlation_matrix.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", *names])
        for i in order:
            w.writerow([pruned.names[i], *(repr(float(x)) for x in rep.matrix[i, order])])
    with open(out / "histogram.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["abs_r_low", "abs_r_high", "count"])
        e = rep.histogram_edges
        for k, c in enumerate(rep.histogram_counts):
            w.writerow([repr(float(e[k])), repr(float(e[k + 1])), int(c)])
    with open(out / "pruned_columns.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "reason"])
        w.writerows(removed)
    summary = rep.summary()
    summary["cluster_order"] = names
    summary["n_removed"] = len(removed)
    with open(out / "correlation_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    note(f"analyzed {t.n_features} columns, kept {pruned.n_features}")
    print(f"{pruned.n_features} of {t.n_features} columns kept; "
          f"fraction |r| <= 0.5: {rep.fraction_le_half:.4f}")
    return 0


# ---------------------------------------------------------------- evaluate


def grid_from_args(args) -> HyperGrid:
    try:
        return HyperGrid(args.kernel, _floats(args.C_values), _floats(args.gamma_values),
                         _ints(args.pca_k), _ints(args.smote_k))
    except ValueError as exc:
        raise UsageError(f"invalid grid: {exc}") from None


def cmd_evaluate(args, note) -> int:
    _require(args, "table", "out_dir")
    grid = grid_from_args(args)
    t = read_table_csv(args.table)
    try:
        t.require_labels()
        if args.feature_type:
            t = t.feature_type(args.feature_type)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tag = args.kernel + (f"_{args.feature_type}" if args.feature_type else "")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    note(f"evaluate {tag}: {t.n_cases} cases, {t.n_features} columns, grid size {grid.size}")
    rep = nested_loocv(t, grid, args.seed, threads=args.threads, subset=args.feature_type)
    rep.write_json(out / f"report_{tag}.json")
    rep.write_roc_csv(out / f"roc_{tag}.csv")
    rep.write_hyper_csv(out / f"hyper_{tag}.csv")
    rep.write_confusion_csv(out / f"confusion_{tag}.csv")
    if args.kernel == "linear":
        with open(out / f"weights_{tag}.json", "w", encoding="utf-8") as fh:
            json.dump(feature_type_weights(rep.outer_models), fh, indent=1)
            fh.write("\n")
    if not args.no_final:
        select_and_fit(t, grid, args.seed, threads=args.threads).save(out / f"model_{tag}.json")
    note(f"evaluate {tag}: auc {rep.auc:.4f}")
    print(format_report(rep.to_dict()))
    return 0


# ---------------------------------------------------------------- synth / report


def cmd_synth(args, note) -> int:
    _require(args, "out")
    try:
        fractions = _floats(args.class_fractions)
        if args.kind == "table":
            t = gen_tabular(args.seed, args.n_cases, args.n_features, args.n_informative,
                            args.effect_size, fractions)
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            write_table_csv(t, args.out)
            print(f"table with {t.n_cases} cases x {t.n_features} features written to {args.out}")
            return 0
        cohort = phantom_cohort(args.n_cases, args.seed, fractions, dims=_ints(args.dims),
                                semi_axes=_floats(args.semi_axes), radius=_ints(args.radius),
                                offset=_floats(args.offset))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case_id", "volume_path", "mask_path", "label"])
        for cid, spec in cohort:
            v, m = gen_phantom(spec)
            save_volume(v, out / f"{cid}_image", "f32")
            save_mask(m, out / f"{cid}_mask", v.spacing)
            w.writerow([cid, f"{cid}_image.hdr", f"{cid}_mask.hdr", spec.class_label])
    note(f"wrote {len(cohort)} phantoms")
    print(f"{len(cohort)} phantoms and manifest.csv written to {out}")
    return 0


def _pct(x) -> str:
    return "n/a" if x is None else f"{100 * x:.1f}%"


def format_report(d: dict) -> str:
    c = d["confusion"]
    lines = [
        f"kernel {d['kernel']}" + (f", subset {d['subset']}" if d.get("subset") else "")
        + f", {d['n_cases']} cases, {d['n_columns']} columns",
        f"AUC {d['auc']:.3f} +/- {d['auc_se']:.3f}",
        f"TP {c['TP']}  FP {c['FP']}  FN {c['FN']}  TN {c['TN']}",
        f"ACC {_pct(c['acc'])}  PPV {_pct(c['ppv'])}  NPV {_pct(c['npv'])}  "
        f"sensitivity {_pct(c['sensitivity'])}  specificity {_pct(c['specificity'])}",
        f"SVM fits {d['solver']['n_fits']}, unconverged {d['solver']['n_degraded']}, "
        f"max KKT violation {d['solver']['max_kkt_violation']:.2e}",
    ]
    return "\n".join(lines)


def cmd_report(args, note) -> int:
    try:
        with open(args.report, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read report {args.report}: {exc}") from None
    print(format_report(d))
    return 0


COMMANDS = {"extract": cmd_extract, "analyze": cmd_analyze, "evaluate": cmd_evaluate,
            "synth": cmd_synth, "report": cmd_report}


def _sidecar_path(args) -> Path | None:
    for attr in ("out_dir", "out"):
        target = getattr(args, attr, None)
        if target:
            p = Path(target)
            if attr == "out_dir" or (args.command == "synth" and args.kind == "phantoms"):
                return p / "run.log"
            return p.with_name(p.name + ".log")
    return None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sidecar = None
    try:
        if args.config:
            apply_config(args, args.config)
        if args.threads is None:
            try:
                args.threads = default_threads()
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        if args.threads < 1:
            raise UsageError("threads must be positive")
        path = _sidecar_path(args)
        sidecar = _SidecarLog(path) if path else None
        note = sidecar if sidecar else (lambda msg: None)
        note(f"radiomarker {__version__} {args.command} start")
        code = COMMANDS[args.command](args, note)
        note(f"{args.command} finished with exit code {code}")
        return code
    except UsageError as exc:
        print(f"radiomarker: error: {exc}", file=sys.stderr)
        return 2
    except DegenerateTableError as exc:
        print(f"radiomarker: degenerate table: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"radiomarker: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        if sidecar:
            sidecar.close()


if __name__ == "__main__":
    sys.exit(main())
