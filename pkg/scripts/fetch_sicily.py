#!/usr/bin/env python3
"""Fetch the Sicily smoking-ban interrupted-time-series dataset.

The monthly counts of hospital admissions for acute coronary events (ACEs)
in Sicily, 2002-2006, were published as supplementary material to:

    Lopez Bernal J, Cummins S, Gasparrini A. "Interrupted time series
    regression for the evaluation of public health interventions: a
    tutorial." International Journal of Epidemiology 46(1), 2017.

The authors distribute the table (sicily.csv) in their public code-and-data
repository. This script downloads it, converts the raw admission counts to
age-standardized rates per 100,000 person-years (column `rate` =
aces / stdpop * 1e5), and writes data/sicily.csv with columns:

    time  - month index, 1 (Jan 2002) .. 59 (Nov 2006)
    rate  - age-standardized ACE rate per 100,000

The national smoking ban took effect in January 2005, i.e. at time = 37;
analyses should therefore use a threshold of 37 on the `time` column (the
">= threshold" convention assigns Jan 2005 to the post-ban regime).

If the download fails (no network access, moved repository), fetch the file
manually from the repository below or from the journal's supplementary
material, and run this script with the local path as its argument.
"""

import csv
import io
import os
import sys
import urllib.request

SOURCE_URL = ("https://raw.githubusercontent.com/gasparrini/"
              "2017_lopezbernal_IJE_codedata/master/sicily.csv")
OUT_PATH = os.path.join(os.path.dirname(__file__), "..", "data", "sicily.csv")


def convert(raw_text: str, out_path: str) -> int:
    reader = csv.DictReader(io.StringIO(raw_text))
    rows = []
    for row in reader:
        time = int(row["time"])
        rate = float(row["aces"]) / float(row["stdpop"]) * 1e5
        rows.append((time, rate))
    if not rows:
        raise SystemExit("source file contained no rows")
    rows.sort()
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "rate"])
        writer.writerows(rows)
    return len(rows)


def main() -> int:
    if len(sys.argv) > 1:
        with open(sys.argv[1], "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        print(f"downloading {SOURCE_URL}")
        try:
            with urllib.request.urlopen(SOURCE_URL, timeout=30) as resp:
                text = resp.read().decode("utf-8")
        except OSError as exc:
            print(f"download failed: {exc}", file=sys.stderr)
            print("fetch sicily.csv manually and rerun: "
                  f"{sys.argv[0]} /path/to/sicily.csv", file=sys.stderr)
            return 1
    n = convert(text, os.path.abspath(OUT_PATH))
    print(f"wrote {n} rows to {os.path.abspath(OUT_PATH)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
