#!/usr/bin/env python3
"""Convert the SemEval SICK release (SICK.txt) to 3-column TSV.

SICK.txt is tab-separated with a header row naming at least: pair_ID,
sentence_A, sentence_B, entailment_label, relatedness_score, ...,
SemEval_set.  One invocation extracts one split of one task:

    convert_sick.py SICK.txt --task sts --split TRAIN        > sick-r-train.tsv
    convert_sick.py SICK.txt --task entailment --split TEST  > sick-e-test.tsv

Relatedness scores stay in their native [1, 5] range (use score_k = 5,
raw_min = 1, raw_max = 5); entailment labels become lowercase
entailment / contradiction / neutral.
"""

import argparse
import sys


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="SICK.txt from the SemEval release")
    parser.add_argument("--task", choices=("sts", "entailment"), required=True)
    parser.add_argument("--split", choices=("TRAIN", "TRIAL", "TEST"),
                        required=True)
    args = parser.parse_args()

    with open(args.source, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n").split("\t")
        col = {name: i for i, name in enumerate(header)}
        for need in ("sentence_A", "sentence_B", "relatedness_score",
                     "entailment_label", "SemEval_set"):
            if need not in col:
                sys.exit(f"missing column {need!r} in {args.source}")
        kept = 0
        for line in handle:
            fields = line.rstrip("\n").split("\t")
            if fields[col["SemEval_set"]] != args.split:
                continue
            s1 = fields[col["sentence_A"]]
            s2 = fields[col["sentence_B"]]
            if args.task == "sts":
                gold = fields[col["relatedness_score"]]
            else:
                gold = fields[col["entailment_label"]].lower()
            print(f"{s1}\t{s2}\t{gold}")
            kept += 1
    print(f"{kept} pairs written for split {args.split}", file=sys.stderr)


if __name__ == "__main__":
    main()
