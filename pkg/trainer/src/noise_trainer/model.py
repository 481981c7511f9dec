"""The pinned classifier architecture, in torch, matching the engine's reader.

Any change here must stay in lockstep with the GCPW architecture string:
128x128 single-channel input scaled to [0, 1], two valid 5x5 convolutions
with 2x2 max pooling, then dense 120 -> 84 -> classes.  torch's Conv2d is
cross-correlation with no padding by default, and `flatten(1)` walks the
(C, H, W) feature map in C order -- both exactly what the weight file pins.
"""

from __future__ import annotations

import torch
from torch import nn

TILE = 128
FLAT_FEATURES = 16 * 29 * 29

ARCHITECTURE = (
    "in:1x128x128;conv:6x1x5x5,valid,xcorr;relu;maxpool:2;"
    "conv:16x6x5x5,valid,xcorr;relu;maxpool:2;flatten:chw;"
    "dense:120;relu;dense:84;relu;dense:classes"
)
INPUT_SCALING = "green/255"


class SigmaClassifier(nn.Module):
    """Green-tile noise-level classifier over a fixed sigma grid."""

    def __init__(self, classes: int):
        super().__init__()
        if classes < 2:
            raise ValueError("need at least two classes")
        self.classes = classes
        self.conv1 = nn.Conv2d(1, 6, 5)
        self.conv2 = nn.Conv2d(6, 16, 5)
        self.pool = nn.MaxPool2d(2, 2)
        self.fc1 = nn.Linear(FLAT_FEATURES, 120)
        self.fc2 = nn.Linear(120, 84)
        self.fc3 = nn.Linear(84, classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.pool(torch.relu(self.conv1(x)))
        x = self.pool(torch.relu(self.conv2(x)))
        x = x.flatten(1)
        x = torch.relu(self.fc1(x))
        x = torch.relu(self.fc2(x))
        return self.fc3(x)


def new_model(classes: int, seed: int = 0) -> SigmaClassifier:
    torch.manual_seed(seed)
    return SigmaClassifier(classes)
