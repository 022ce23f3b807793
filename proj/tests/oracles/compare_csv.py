"""Compare two CSV trees cell by cell; numeric cells within a tolerance.

usage: compare_csv.py DIR_A DIR_B FILE... [--tol 1e-6]
"""
import csv
import os
import sys


def cells_equal(a, b, tol):
    if a == b:
        return True
    try:
        return abs(float(a) - float(b)) <= tol
    except ValueError:
        return False


def main():
    args = sys.argv[1:]
    tol = 1e-6
    if "--tol" in args:
        i = args.index("--tol")
        tol = float(args[i + 1])
        del args[i : i + 2]
    a_dir, b_dir, files = args[0], args[1], args[2:]
    bad = 0
    for name in files:
        a = list(csv.reader(open(os.path.join(a_dir, name))))
        b = list(csv.reader(open(os.path.join(b_dir, name))))
        if len(a) != len(b):
            print(f"{name}: {len(a)} rows vs {len(b)} rows")
            bad += 1
            continue
        for r, (ra, rb) in enumerate(zip(a, b)):
            if len(ra) != len(rb) or not all(cells_equal(x, y, tol) for x, y in zip(ra, rb)):
                print(f"{name}:{r + 1}: {ra} != {rb}")
                bad += 1
        print(f"{name}: {'ok' if not bad else 'mismatch'}")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
