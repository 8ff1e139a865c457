#!/usr/bin/env python3
"""Convert the Microsoft Research Paraphrase Corpus to 3-column TSV.

The native files (msr_paraphrase_train.txt / msr_paraphrase_test.txt)
are tab-separated with a header row and five columns: Quality, #1 ID,
#2 ID, #1 String, #2 String.  Quality (0/1) becomes the paraphrase
label.

Usage: convert_mrpc.py msr_paraphrase_train.txt > mrpc-train.tsv
"""

import argparse
import sys


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="native MRPC file")
    args = parser.parse_args()

    kept = skipped = 0
    with open(args.source, encoding="utf-8-sig") as handle:
        handle.readline()  # header
        for lineno, line in enumerate(handle, start=2):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 5 or fields[0] not in ("0", "1"):
                print(f"line {lineno}: malformed, skipped", file=sys.stderr)
                skipped += 1
                continue
            print(f"{fields[3]}\t{fields[4]}\t{fields[0]}")
            kept += 1
    print(f"{kept} pairs written, {skipped} skipped", file=sys.stderr)


if __name__ == "__main__":
    main()
