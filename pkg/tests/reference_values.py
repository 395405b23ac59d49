"""Published accuracies (percent) used to replay the split-selection logic.

Keys are ``(left states, right states)``; values are ``(glottal, speech)``.
Splits not listed at the top level take the reported per-source averages.
"""

TOP_LEVEL = {
    "best": {"glottal": (("M-J", "I-J", "I-A"), 80.38), "speech": (("M-J", "I-J", "I-A"), 83.59)},
    "worst": {"glottal": (("M-J", "M-A", "I-S"), 57.16), "speech": (("N", "I-J", "M-A"), 60.60)},
    "largest_gap": {"glottal": (("I-J", "I-A", "M-S"), 65.63), "speech": (("I-J", "I-A", "M-S"), 72.32)},
    "smallest_gap": {"glottal": (("M-A", "M-S", "I-S"), 73.42), "speech": (("M-A", "M-S", "I-S"), 73.87)},
}
TOP_LEVEL_MEAN = {"speech": 67.90, "glottal": 64.99}

SECOND_LEVEL = {
    (("M-J",), ("I-J", "I-A")): (73.61, 77.26),
    (("I-J",), ("M-J", "I-A")): (64.58, 68.19),
    (("I-A",), ("M-J", "I-J")): (69.92, 75.52),
    (("N", "M-A"), ("M-S", "I-S")): (67.12, 69.04),
    (("N", "M-S"), ("M-A", "I-S")): (63.25, 65.63),
    (("N", "I-S"), ("M-A", "M-S")): (61.13, 64.71),
}

BOTTOM_LEVEL = {
    (("I-J",), ("I-A",)): (65.82, 68.95),
    (("N",), ("M-A",)): (62.17, 64.19),
    (("M-S",), ("I-S",)): (71.03, 75.13),
}

# pair -> (glottal, speech, printed difference)
PAIRWISE = {
    ("N", "M-J"): (74.15, 76.37, 2.21),
    ("N", "I-J"): (88.93, 94.14, 5.21),
    ("N", "M-A"): (62.17, 64.19, 2.02),
    ("N", "I-A"): (88.93, 94.4, 5.47),
    ("N", "M-S"): (68.03, 68.88, 0.85),
    ("N", "I-S"): (77.28, 79.49, 2.21),
    ("M-J", "I-J"): (66.47, 74.28, 7.81),
    ("M-J", "M-A"): (72.92, 74.48, 1.56),
    ("M-J", "I-A"): (71.61, 81.64, 10.03),
    ("M-J", "M-S"): (78.71, 80.21, 1.5),
    ("M-J", "I-S"): (78.32, 81.32, 2.99),
    ("I-J", "M-A"): (84.11, 88.74, 4.62),
    ("I-J", "I-A"): (65.82, 68.95, 3.13),
    ("I-J", "M-S"): (90.1, 94.53, 4.43),
    ("I-J", "I-S"): (79.95, 89.58, 9.64),
    ("M-A", "I-A"): (84.38, 87.5, 3.13),
    ("M-A", "M-S"): (62.11, 68.62, 6.51),
    ("M-A", "I-S"): (71.61, 77.93, 6.32),
    ("I-A", "M-S"): (92.45, 94.73, 2.28),
    ("I-A", "I-S"): (84.51, 91.21, 6.71),
    ("M-S", "I-S"): (71.03, 75.13, 4.1),
}

EXPECTED_TREE = {
    "top": (("M-J", "I-J", "I-A"), ("N", "M-A", "M-S", "I-S")),
    "second": [(("M-J",), ("I-J", "I-A")), (("N", "M-A"), ("M-S", "I-S"))],
    "bottom": [(("I-J",), ("I-A",)), (("N",), ("M-A",)), (("M-S",), ("I-S",))],
}
EXPECTED_MAX_DIFFERENCE = ("M-J vs I-A", 10.03)
EXPECTED_MIN_DIFFERENCE = ("N vs M-S", 0.85)
