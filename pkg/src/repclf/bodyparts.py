"""The 25-part body layout used by the pose estimator's keypoint output.

Index order matches the BODY_25 output of common pose-estimation tools:
one (x, y, confidence) triple per part, 75 values per frame.
"""

BODY_PARTS = (
    "nose",            # 0
    "neck",            # 1
    "right_shoulder",  # 2
    "right_elbow",     # 3
    "right_wrist",     # 4
    "left_shoulder",   # 5
    "left_elbow",      # 6
    "left_wrist",      # 7
    "mid_hip",         # 8
    "right_hip",       # 9
    "right_knee",      # 10
    "right_ankle",     # 11
    "left_hip",        # 12
    "left_knee",       # 13
    "left_ankle",      # 14
    "right_eye",       # 15
    "left_eye",        # 16
    "right_ear",       # 17
    "left_ear",        # 18
    "left_big_toe",    # 19
    "left_small_toe",  # 20
    "left_heel",       # 21
    "right_big_toe",   # 22
    "right_small_toe", # 23
    "right_heel",      # 24
)

NUM_BODY_PARTS = len(BODY_PARTS)

PART_INDEX = {name: i for i, name in enumerate(BODY_PARTS)}

# Upper-body parts with clear overhead-press motion: shoulders, elbows,
# wrists and hips (left and right), 16 channels with both axes.
UPPER_BODY_PARTS = (
    PART_INDEX["right_shoulder"],
    PART_INDEX["right_elbow"],
    PART_INDEX["right_wrist"],
    PART_INDEX["left_shoulder"],
    PART_INDEX["left_elbow"],
    PART_INDEX["left_wrist"],
    PART_INDEX["right_hip"],
    PART_INDEX["left_hip"],
)

# Parts whose vertical trace carries the repetition rhythm.
DEFAULT_ANCHOR_PARTS = (
    PART_INDEX["right_elbow"],
    PART_INDEX["right_wrist"],
    PART_INDEX["left_elbow"],
    PART_INDEX["left_wrist"],
)


def part_name(index: int) -> str:
    if not 0 <= index < NUM_BODY_PARTS:
        raise IndexError(f"body part index out of range: {index}")
    return BODY_PARTS[index]
