# %% [markdown]
# # Digits and what the agent can see
#
# The agent never sees a whole image. Each step it reads a 3x3 window (the
# fovea) and four axis-aligned rays that report whether any lit pixel lies
# further out along its row or column.

# %%
import numpy as np

from saccade.env import raycast, sense
from saccade.idx import binarize, synthetic_digits


def show(img, marks=()):
    marks = set(marks)
    for y, row in enumerate(img):
        print("".join("@" if (x, y) in marks else ("#" if v else ".") for x, v in enumerate(row)))


digits = synthetic_digits()
print(digits.labels, digits.images.shape)
show(digits.images[4])

# %% [markdown]
# Grayscale input is thresholded at 127: anything brighter becomes 1.

# %%
print(binarize(np.array([0, 127, 128, 255])))

# %% [markdown]
# Put the fovea on the left arm of the 4 and read all 13 sensors.

# %%
pos = (9, 8)
reading = sense(digits.images[4], pos)
print("fovea", np.array(reading.fovea).reshape(3, 3), sep="\n")
print("rays (0, 90, 180, 270 deg):", reading.rays)
window = [(pos[0] + dx, pos[1] + dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
show(digits.images[4], window)

# %% [markdown]
# Rays start two cells from the center, so they never double-count the
# fovea. From the top-left corner only the rays can find the digit, and
# only if it crosses row 0 or column 0.

# %%
print([raycast(digits.images[4], (0, 0), d) for d in (0, 90, 180, 270)])
print([raycast(digits.images[4], (0, 13), d) for d in (0, 90, 180, 270)])
