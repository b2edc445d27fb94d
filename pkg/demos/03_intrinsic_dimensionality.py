"""PCA spectra and intrinsic dimensionality profiles.

Builds a little activation container whose layers have planted covariance
structure, then reads back per-layer ID thresholds the way the `dims`
command does.  A layer whose variance sits on one axis has ID 1 at every
threshold; an isotropic layer needs nearly all of its components.
"""

import tempfile

import numpy as np

from layerprobe.geometry import dim_profile, intrinsic_dim, pca_spectrum
from layerprobe.tensorstore import StoreHeader, manifest_digest, write_store

rng = np.random.default_rng(0)
m, d = 4000, 32

# Layer 0: one dominant direction.  Layer 1: three planted components with
# variances 100/10/1.  Layer 2: isotropic noise.
rank1 = np.outer(rng.standard_normal(m), rng.standard_normal(d))
planted = np.zeros((m, d))
planted[:, :3] = rng.standard_normal((m, 3)) * np.sqrt([100.0, 10.0, 1.0])
Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
planted = planted @ Q.T
isotropic = rng.standard_normal((m, d))

spectrum = pca_spectrum(planted)
print("planted layer, leading explained-variance ratios:")
print(" ", np.round(spectrum.ratios[:5], 4), f"(analytic: {np.round(np.array([100, 10, 1]) / 111, 4)})")
print("  ID50 ID90 ID99 ID100 =",
      [intrinsic_dim(spectrum, t) for t in (50, 90, 99, 100)])

with tempfile.TemporaryDirectory() as tmp:
    path = f"{tmp}/demo.store"
    header = StoreHeader(
        model_id="demo",
        layer_count=3,
        example_count=m,
        hidden_dim=d,
        manifest_digest=manifest_digest(b"demo manifest"),
    )
    write_store(header, [x.astype(np.float32) for x in (rank1, planted, isotropic)], path)

    profile = dim_profile(path, thresholds=(50, 70, 90, 100))
    print("\nper-layer intrinsic dimensionality (of d =", d, "components):")
    print("  layer  ID50  ID70  ID90  ID100")
    for layer in sorted(profile.ids):
        row = profile.ids[layer]
        print(f"  {layer:>5}  {row[50]:>4}  {row[70]:>4}  {row[90]:>4}  {row[100]:>5}")
    anchors = profile.summary_layers()
    print("summary anchors (first/mid/final):", anchors)
