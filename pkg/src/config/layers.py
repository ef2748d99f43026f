# Representative layers at their reported batch size, with the interpolation
# sizes the tuner picked for them (`bench --preset layers-full`), and the desk-scale
# shapes `bench --preset layers` runs.
REPORTED_BATCH = 128

REPRESENTATIVE_LAYERS = {
    "L1": {"f": 3, "fp": 96, "h": 128, "k": 11, "sizes": (128, 128)},
    "L2": {"f": 64, "fp": 64, "h": 64, "k": 9, "sizes": (64, 64)},
    "L3": {"f": 128, "fp": 128, "h": 32, "k": 9, "sizes": (32, 32)},
    "L4": {"f": 128, "fp": 128, "h": 16, "k": 7, "sizes": (16, 16)},
    "L5": {"f": 384, "fp": 384, "h": 13, "k": 3, "sizes": (13, 14)},
}

DESK_LAYERS = {
    "L1": {"S": 2, "f": 3, "fp": 8, "h": 32, "k": 11},
    "L2": {"S": 2, "f": 8, "fp": 8, "h": 32, "k": 9},
    "L3": {"S": 4, "f": 16, "fp": 16, "h": 32, "k": 9},
    "L4": {"S": 4, "f": 16, "fp": 16, "h": 16, "k": 7},
    "L5": {"S": 4, "f": 8, "fp": 8, "h": 13, "k": 3},
}
