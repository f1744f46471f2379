"""Regenerates tests/data/flat_corpus.json (small transport instances)."""
import json
import random
import sys

random.seed(20261016)


def atom(scale):
    return [round(random.gauss(0, scale), 6) for _ in range(4)]


def main(out):
    inst = []
    for a in range(1, 5):
        for b in range(1, 5):
            for scale in (0.3, 0.8, 2.0):
                inst.append({"name": f"random_{a}x{b}_s{scale}", "T": 1.0, "steps": 3,
                             "mu": [atom(scale) for _ in range(a)],
                             "nu": [atom(scale) for _ in range(b)]})
    base = [0.0, 0.5, -0.25, 1.0]
    zero = [0, 0, 0, 0]
    inst += [
        {"name": "identical_2x2", "mu": [base, [1, 1, 1, 1]], "nu": [[1, 1, 1, 1], base]},
        {"name": "repeated_atoms_4x2", "mu": [base, base, zero, zero], "nu": [base, zero]},
        {"name": "all_capped_3x4", "mu": [[10, 0, 0, 0], [-10, 0, 0, 0], [0, 10, 0, 0]],
         "nu": [[0, 0, 10, 0], [0, 0, -10, 0], [0, 0, 0, 10], [0, 0, 0, -10]]},
        {"name": "ties_4x4", "mu": [[k] * 4 for k in (0, 1, 2, 3)],
         "nu": [[k + 0.5] * 4 for k in (0, 1, 2, 3)]},
        {"name": "single_far_1x1", "mu": [zero], "nu": [[0, 0, 0, 5]]},
        {"name": "half_capped_2x3", "mu": [zero, [0, 0, 0, 1.9]],
         "nu": [[0, 0, 0, 2.1], [0, 0, 0, -2.1], [0, 0, 0, 0.1]]},
    ]
    for i in inst[48:]:
        i["T"], i["steps"] = 1.0, 3
    with open(out, "w") as f:
        json.dump({"instances": inst}, f, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/flat_corpus.json")
