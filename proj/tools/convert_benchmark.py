#!/usr/bin/env python3
"""Convert survey exports with per-country selections into benchmark JSONL.

Input: JSON lines where each row carries a question, an ordered option list,
and a mapping from country to a probability list aligned with the options:

    {"question": "...", "options": ["Agree", "Disagree"],
     "selections": {"Vietnam": [0.62, 0.38], "Germany": [0.4, 0.6]}}

Output: one benchmark case per (question, country) in the format the
`evaluate` subcommand consumes. Option ids are assigned positionally A..Z.

    python3 tools/convert_benchmark.py export.jsonl > bench.jsonl
"""

import json
import string
import sys


def convert(stream, out):
    case_counter = 0
    for line_number, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        row = json.loads(line)
        options = row["options"]
        if len(options) > len(string.ascii_uppercase):
            print(f"line {line_number}: more than 26 options, skipped", file=sys.stderr)
            continue
        ids = string.ascii_uppercase[: len(options)]
        for country, probs in sorted(row["selections"].items()):
            if len(probs) != len(options):
                print(
                    f"line {line_number}: {country} has {len(probs)} probabilities "
                    f"for {len(options)} options, skipped",
                    file=sys.stderr,
                )
                continue
            case_counter += 1
            case = {
                "case_id": row.get("id", f"case-{case_counter}"),
                "question": row["question"],
                "options": [
                    {"id": ids[i], "text": str(text)} for i, text in enumerate(options)
                ],
                "country": country,
                "gold": {ids[i]: float(p) for i, p in enumerate(probs)},
            }
            out.write(json.dumps(case, ensure_ascii=False) + "\n")


def main():
    if len(sys.argv) > 2 or (len(sys.argv) == 2 and sys.argv[1] in ("-h", "--help")):
        print(__doc__, file=sys.stderr)
        return 2
    if len(sys.argv) == 2:
        with open(sys.argv[1], encoding="utf-8") as stream:
            convert(stream, sys.stdout)
    else:
        convert(sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
