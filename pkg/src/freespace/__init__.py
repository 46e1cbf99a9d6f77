"""Unsupervised indoor free-space segmentation from RGB-D image pairs.

Pipeline: depth-adaptive superpixels (density from depth, variable-radius
Poisson disc seeding, local iterative clustering), dense-feature pooling per
superpixel, depth/seed-weighted k-means, deepest-cluster selection, mask
rasterization. Plus telemetry-driven positive-unlabeled frame annotation,
an IoU evaluation harness, and a synthetic corridor-scene oracle.
"""

__version__ = "0.1.0"
