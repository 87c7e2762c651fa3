"""Published frequency tables for the two-mode system, transcribed as integers.

A row is ``(moment, net, cancels, moment_degeneracy)``:

* ``moment``: the moment in parseable form (``b1^dag2 b1`` and so on);
* ``net``: integer multiples of the real basic frequencies in the real part
  of the row frequency, per mode ``(c1, c2)`` for the single-EP tables and
  one integer (units of the shared frequency) for the doubly degenerate one;
* ``cancels``: whether the printed combination shows an explicit canceling
  term such as ``W1 - W1``;
* ``moment_degeneracy``: number of operator orderings.

The imaginary part of every row is the order times the common damping, so it
is not stored.  Cells group the rows sharing one ``QDP x QEP`` entry.
"""

# Single exceptional point (pair 1 coalescing, g != 0): rows involving mode 1.
# {order: [(cell, [rows])]}
TABLE_SINGLE_EP = {
    1: [
        ("1x2", [("b1", (1, 0), False, 1), ("b1^dag", (-1, 0), False, 1)]),
    ],
    2: [
        ("2x2", [("b1 b2", (1, 1), False, 2), ("b1^dag b2", (-1, 1), False, 2)]),
        ("2x2", [("b1 b2^dag", (1, -1), False, 2), ("b1^dag b2^dag", (-1, -1), False, 2)]),
        (
            "1x4",
            [("b1^dag b1", (0, 0), True, 2), ("b1^2", (2, 0), False, 1), ("b1^dag2", (-2, 0), False, 1)],
        ),
    ],
    3: [
        ("6x2", [("b1 b2 b2^dag", (1, 0), False, 6), ("b1^dag b2^dag b2", (-1, 0), False, 6)]),
        ("3x2", [("b1 b2^2", (1, 2), False, 3), ("b1^dag b2^2", (-1, 2), False, 3)]),
        ("3x2", [("b1 b2^dag2", (1, -2), False, 3), ("b1^dag b2^dag2", (-1, -2), False, 3)]),
        (
            "3x4",
            [
                ("b1^dag b1 b2", (0, 1), True, 6),
                ("b1^2 b2", (2, 1), False, 3),
                ("b1^dag2 b2", (-2, 1), False, 3),
            ],
        ),
        (
            "3x4",
            [
                ("b1^dag b1 b2^dag", (0, -1), True, 6),
                ("b1^2 b2^dag", (2, -1), False, 3),
                ("b1^dag2 b2^dag", (-2, -1), False, 3),
            ],
        ),
        (
            "1x8",
            [
                ("b1^2 b1^dag", (1, 0), True, 3),
                ("b1^dag2 b1", (-1, 0), True, 3),
                ("b1^3", (3, 0), False, 1),
                ("b1^dag3", (-3, 0), False, 1),
            ],
        ),
    ],
    4: [
        ("12x2", [("b1 b2^dag b2^2", (1, 1), False, 12), ("b1^dag b2^dag b2^2", (-1, 1), False, 12)]),
        ("12x2", [("b1 b2^dag2 b2", (1, -1), False, 12), ("b1^dag b2^dag2 b2", (-1, -1), False, 12)]),
        ("4x2", [("b1 b2^3", (1, 3), False, 4), ("b1^dag b2^3", (-1, 3), False, 4)]),
        ("4x2", [("b1 b2^dag3", (1, -3), False, 4), ("b1^dag b2^dag3", (-1, -3), False, 4)]),
        (
            "12x4",
            [
                ("b1^dag b1 b2^dag b2", (0, 0), True, 24),
                ("b1^2 b2^dag b2", (2, 0), False, 12),
                ("b1^dag2 b2^dag b2", (-2, 0), False, 12),
            ],
        ),
        (
            "6x4",
            [
                ("b1^dag b1 b2^2", (0, 2), True, 12),
                ("b1^2 b2^2", (2, 2), False, 6),
                ("b1^dag2 b2^2", (-2, 2), False, 6),
            ],
        ),
        (
            "6x4",
            [
                ("b1^dag b1 b2^dag2", (0, -2), True, 12),
                ("b1^2 b2^dag2", (2, -2), False, 6),
                ("b1^dag2 b2^dag2", (-2, -2), False, 6),
            ],
        ),
        (
            "4x8",
            [
                ("b1^dag b1^2 b2", (1, 1), True, 12),
                ("b1^dag2 b1 b2", (-1, 1), True, 12),
                ("b1^3 b2", (3, 1), False, 4),
                ("b1^dag3 b2", (-3, 1), False, 4),
            ],
        ),
        (
            "4x8",
            [
                ("b1^dag b1^2 b2^dag", (1, -1), True, 12),
                ("b1^dag2 b1 b2^dag", (-1, -1), True, 12),
                ("b1^3 b2^dag", (3, -1), False, 4),
                ("b1^dag3 b2^dag", (-3, -1), False, 4),
            ],
        ),
        (
            "1x16",
            [
                ("b1^dag2 b1^2", (0, 0), True, 6),
                ("b1^dag b1^3", (2, 0), True, 4),
                ("b1^dag3 b1", (-2, 0), True, 4),
                ("b1^4", (4, 0), False, 1),
                ("b1^dag4", (-4, 0), False, 1),
            ],
        ),
    ],
}

# Rows of the same system without a coalescing factor (mode 2 only).
# {order: [(moment, net, cancels, qdp_degeneracy)]}; the printed QDP degeneracy
# equals the moment degeneracy.
TABLE_NO_EP = {
    1: [("b2", (0, 1), False, 1), ("b2^dag", (0, -1), False, 1)],
    2: [("b2^dag b2", (0, 0), False, 2), ("b2^2", (0, 2), False, 1), ("b2^dag2", (0, -2), False, 1)],
    3: [
        ("b2^dag2 b2", (0, 1), False, 3),
        ("b2^dag b2^2", (0, -1), False, 3),
        ("b2^3", (0, 3), False, 1),
        ("b2^dag3", (0, -3), False, 1),
    ],
    4: [
        ("b2^dag2 b2^2", (0, 0), False, 6),
        ("b2^dag b2^3", (0, 2), False, 4),
        ("b2^dag3 b2", (0, -2), False, 4),
        ("b2^4", (0, 4), False, 1),
        ("b2^dag4", (0, -4), False, 1),
    ],
}

# Printed values that contradict the sign convention used everywhere else in
# the tables (annihilation contributes +W, creation -W).  {(table, moment):
# consistent net}.  The third-order mode-2 rows have their two real parts
# swapped in print.
ERRATA = {
    ("no_ep", "b2^dag2 b2"): (0, -1),
    ("no_ep", "b2^dag b2^2"): (0, 1),
}

# Doubly degenerate exceptional point (g = 0, both pairs coalescing).
# {order: (merged cell, [(cell, [rows])])}
TABLE_DOUBLE_EP = {
    1: (
        "2x2",
        [
            ("1x2", [("b1", 1, False, 1), ("b1^dag", -1, False, 1)]),
            ("1x2", [("b2", 1, False, 1), ("b2^dag", -1, False, 1)]),
        ],
    ),
    2: (
        "4x4",
        [
            (
                "2x4",
                [
                    ("b1 b2", 2, False, 2),
                    ("b1^dag b2^dag", -2, False, 2),
                    ("b1^dag b2", 0, True, 2),
                    ("b1 b2^dag", 0, True, 2),
                ],
            ),
            ("1x4", [("b1^2", 2, False, 1), ("b1^dag2", -2, False, 1), ("b1^dag b1", 0, True, 2)]),
            ("1x4", [("b2^2", 2, False, 1), ("b2^dag2", -2, False, 1), ("b2^dag b2", 0, True, 2)]),
        ],
    ),
    3: (
        "8x8",
        [
            (
                "3x8",
                [
                    ("b1^2 b2", 3, False, 3),
                    ("b1^dag2 b2^dag", -3, False, 3),
                    ("b1^2 b2^dag", 1, False, 3),
                    ("b1^dag2 b2", -1, False, 3),
                    ("b1^dag b1 b2", 1, False, 6),
                    ("b1^dag b1 b2^dag", -1, False, 6),
                ],
            ),
            (
                "3x8",
                [
                    ("b1 b2^2", 3, False, 3),
                    ("b1^dag b2^dag2", -3, False, 3),
                    ("b1^dag b2^2", 1, False, 3),
                    ("b1 b2^dag2", -1, False, 3),
                    ("b1 b2^dag b2", 1, False, 6),
                    ("b1^dag b2^dag b2", -1, False, 6),
                ],
            ),
            (
                "1x8",
                [
                    ("b1^3", 3, False, 1),
                    ("b1^dag3", -3, False, 1),
                    ("b1^dag b1^2", 1, False, 3),
                    ("b1^dag2 b1", -1, False, 3),
                ],
            ),
            (
                "1x8",
                [
                    ("b2^3", 3, False, 1),
                    ("b2^dag3", -3, False, 1),
                    ("b2^dag b2^2", 1, False, 3),
                    ("b2^dag2 b2", -1, False, 3),
                ],
            ),
        ],
    ),
    4: (
        "16x16",
        [
            (
                "4x16",
                [
                    ("b1^3 b2", 4, False, 4),
                    ("b1^dag3 b2^dag", -4, False, 4),
                    ("b1^3 b2^dag", 2, False, 4),
                    ("b1^dag3 b2", -2, False, 4),
                    ("b1^dag b1^2 b2", 2, False, 12),
                    ("b1 b1^dag2 b2^dag", -2, False, 12),
                    ("b1^dag b1^2 b2^dag", 0, True, 12),
                    ("b1^dag2 b1 b2", 0, True, 12),
                ],
            ),
            (
                "4x16",
                [
                    ("b1 b2^3", 4, False, 4),
                    ("b1^dag b2^dag3", -4, False, 4),
                    ("b1^dag b2^3", 2, False, 4),
                    ("b1 b2^dag3", -2, False, 4),
                    ("b1 b2^dag b2^2", 2, False, 12),
                    ("b1^dag b2^dag2 b2", -2, False, 12),
                    ("b1 b2^dag2 b2", 0, True, 12),
                    ("b1^dag b2^2 b2^dag", 0, True, 12),
                ],
            ),
            (
                "6x16",
                [
                    ("b1^2 b2^2", 4, False, 6),
                    ("b1^dag2 b2^dag2", -4, False, 6),
                    ("b1^2 b2^dag2", 0, True, 6),
                    ("b1^dag2 b2^2", 0, True, 6),
                    ("b1^2 b2^dag b2", 2, False, 12),
                    ("b1^dag2 b2^dag b2", -2, False, 12),
                    ("b1^dag b1 b2^2", 2, False, 12),
                    ("b1^dag b1 b2^dag2", -2, False, 12),
                    ("b1^dag b1 b2^dag b2", 0, True, 24),
                ],
            ),
            (
                "1x16",
                [
                    ("b1^4", 4, False, 1),
                    ("b1^dag4", -4, False, 1),
                    ("b1^dag b1^3", 2, False, 4),
                    ("b1^dag3 b1", -2, False, 4),
                    ("b1^dag2 b1^2", 0, True, 6),
                ],
            ),
            (
                "1x16",
                [
                    ("b2^4", 4, False, 1),
                    ("b2^dag4", -4, False, 1),
                    ("b2^dag b2^3", 2, False, 4),
                    ("b2^dag3 b2", -2, False, 4),
                    ("b2^dag2 b2^2", 0, True, 6),
                ],
            ),
        ],
    ),
}

# Parameters (epsilon = 1 for the single point, 1.25 for the double one) that
# sit exactly on the surfaces: alpha = hypot(0.75, 1.0) = 1.25.
SINGLE_EP_PARAMS = dict(gamma1d=3.0, gamma2a=1.0, epsilon=1.0, kappa=0.75, g=0.25)
DOUBLE_EP_PARAMS = dict(gamma1d=3.0, gamma2a=1.0, epsilon=1.25, kappa=0.75, g=0.0)


def single_ep_rows(order):
    """All rows of the single-EP system at one order with their printed cells
    (``None`` for the mode-2 rows, whose cell is ``"<deg>x1"``)."""
    out = []
    for cell, rows in TABLE_SINGLE_EP[order]:
        out += [(cell, r) for r in rows]
    out += [(f"{r[3]}x1", r) for r in TABLE_NO_EP[order]]
    return out
