#!/usr/bin/env python3
"""Recompute the totals in report.txt from the CSV files of one run.

    python3 tools/recompute_report.py OUT_DIR

Exits 1 and lists every mismatch if a reported value does not follow from the
CSVs. Uses only the standard library.
"""
import argparse
import csv
import math
import pathlib
import sys

SCHEMA = "# mgsse-csv v1"


def read_csv(path):
    with open(path, newline="") as f:
        first = f.readline().rstrip("\n")
        if not first.startswith(SCHEMA):
            raise SystemExit(f"{path}: missing schema line '{SCHEMA}'")
        rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))]
    return rows[0], rows[1:]


def read_report(path):
    out = {}
    for line in pathlib.Path(path).read_text().splitlines():
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out


def close(a, b, rel=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-300)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", type=pathlib.Path)
    args = ap.parse_args()
    d = args.out_dir
    rep = read_report(d / "report.txt")
    problems = []

    def expect(name, got, want):
        ok = close(float(got), float(want)) if isinstance(want, float) else str(got) == str(want)
        if not ok:
            problems.append(f"{name}: report says {got}, CSVs give {want}")

    head, states = read_csv(d / "states.csv")
    t_col = head.index("t")
    omega_cols = [i for i, h in enumerate(head) if h.startswith("omega_")]
    omega0 = 2.0 * math.pi * 60.0
    expect("steps", rep["steps"], len(states))

    start = float(rep["attack_start_s"])
    settle = float(rep["settle_time_s"])
    after = settled = 0.0
    for row in states:
        t = float(row[t_col])
        dev = max(abs(float(row[i]) - omega0) / (2.0 * math.pi) for i in omega_cols)
        if t >= start - 1e-9:
            after = max(after, dev)
        if t > settle + 1e-9:
            settled = max(settled, dev)
    expect("max_speed_dev_hz_after_attack_start", float(rep["max_speed_dev_hz_after_attack_start"]), after)
    expect("max_speed_dev_hz_settled", float(rep["max_speed_dev_hz_settled"]), settled)
    finals = [float(states[-1][i]) / (2.0 * math.pi) for i in omega_cols]
    for a, b in zip(rep["final_speed_hz"].split(), finals):
        expect("final_speed_hz", float(a), b)

    head_true, true_rows = read_csv(d / "attacks_true.csv")
    expect("attacks_true rows", len(true_rows), len(states))

    if rep.get("scenario") == "3":
        tol = float(rep["exact_tol"])
        eh, err_rows = read_csv(d / "errors.csv")
        src, mx, ex = eh.index("source"), eh.index("max_abs_err"), eh.index("exact")
        est = [r for r in err_rows if r[src] != "warmup"]
        exact = [r for r in est if float(r[mx]) <= tol]
        attacked = [r for r in est if float(r[t_col]) >= start - 1e-9]
        expect("estimated_steps", rep["estimated_steps"], len(est))
        expect("exact_steps", rep["exact_steps"], len(exact))
        expect("attacked_steps", rep["attacked_steps"], len(attacked))
        expect("exact_attacked_steps", rep["exact_attacked_steps"], sum(1 for r in attacked if float(r[mx]) <= tol))
        expect("fallback_steps", rep["fallback_steps"], sum(1 for r in err_rows if r[src] == "fallback"))
        expect("max_abs_estimation_error", float(rep["max_abs_estimation_error"]), max((float(r[mx]) for r in est), default=0.0))
        for r in err_rows:
            if (r[ex] == "1") != (float(r[mx]) <= tol):
                problems.append(f"errors.csv row k={r[0]}: exact flag disagrees with max_abs_err")
                break

        ah, est_rows = read_csv(d / "attacks_est.csv")
        off_true, off_est = 2, 3
        for re_, rt in zip(est_rows, true_rows):
            if re_[2] == "warmup":
                continue
            m = max(abs(float(a) - float(b)) for a, b in zip(re_[off_est:], rt[off_true:]))
            if not close(m, float(err_rows[int(re_[0])][mx]), 1e-9) and not (m == 0.0 and float(err_rows[int(re_[0])][mx]) == 0.0):
                problems.append(f"attacks_est.csv row k={re_[0]}: error {m} differs from errors.csv")
                break

        failed = rep.get("failed_window_end_steps", "").split()
        expect("windows_failed", rep["windows_failed"], len(failed))
        for k in failed:
            if err_rows[int(k)][src] != "fallback":
                problems.append(f"failed window ending at {k} is not marked fallback")
        K, stride = int(rep["window"]), int(rep["stride"])
        attempted = sum(1 for k in range(len(states)) if k >= K - 1 and (k - (K - 1)) % stride == 0)
        expect("windows attempted", int(rep["windows_decoded"]) + int(rep["windows_failed"]), attempted)

    if problems:
        print("\n".join(problems))
        return 1
    print(f"report consistent with CSVs in {d}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
