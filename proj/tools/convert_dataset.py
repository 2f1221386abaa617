#!/usr/bin/env python3
"""Convert a raw regression table into the CSV layout ttkm reads.

The output has a header row, input columns x1..xD (or the original names with
--keep-names) and the target column last, named "y" unless --target-name is given.

Examples:
  # whitespace-separated file without header, target in the last column
  convert_dataset.py yacht_hydrodynamics.data yacht.csv --sep whitespace --no-header --target -1

  # spreadsheet export with a header, target by name, two columns dropped
  convert_dataset.py Concrete_Data.csv concrete.csv --target "Concrete compressive strength" --drop 0

  # robot inverse dynamics: 18 inputs followed by 6 torques, keep torque 1
  convert_dataset.py robot_train.csv train_tau1.csv --no-header --target 18 --drop 19,20,21,22,23
"""

import argparse
import sys

import pandas as pd

SEPARATORS = {"comma": ",", "semicolon": ";", "tab": "\t", "whitespace": r"\s+"}


def column_ref(frame, ref):
    """Accepts a column name or an integer position (negative counts from the end)."""
    if ref in frame.columns:
        return ref
    try:
        pos = int(ref)
    except ValueError:
        sys.exit(f"unknown column {ref!r}")
    return frame.columns[pos]


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("source")
    parser.add_argument("dest")
    parser.add_argument("--sep", choices=sorted(SEPARATORS), default="comma")
    parser.add_argument("--no-header", action="store_true", help="the source has no header row")
    parser.add_argument("--target", default="-1", help="target column name or position (default: last)")
    parser.add_argument("--target-name", default="y")
    parser.add_argument("--drop", default="", help="comma-separated columns to discard")
    parser.add_argument("--keep-names", action="store_true", help="keep source column names for the inputs")
    args = parser.parse_args()

    frame = pd.read_csv(args.source, sep=SEPARATORS[args.sep], header=None if args.no_header else 0,
                        engine="python" if args.sep == "whitespace" else "c")
    target = column_ref(frame, args.target)
    dropped = [column_ref(frame, ref.strip()) for ref in args.drop.split(",") if ref.strip()]
    inputs = frame.drop(columns=[target, *dropped])

    table = inputs.apply(pd.to_numeric, errors="coerce")
    table[args.target_name] = pd.to_numeric(frame[target], errors="coerce")
    bad = table.isna().any(axis=1)
    if bad.any():
        print(f"dropping {int(bad.sum())} rows with missing or non-numeric values", file=sys.stderr)
        table = table[~bad]
    if not args.keep_names:
        table.columns = [f"x{d + 1}" for d in range(inputs.shape[1])] + [args.target_name]
    table.to_csv(args.dest, index=False, float_format="%.17g")
    print(f"wrote {len(table)} rows, {inputs.shape[1]} inputs to {args.dest}")


if __name__ == "__main__":
    main()
