"""
Features of a synthetic lesion
==============================

Generate one ellipsoidal phantom, look at the derived images and extract
the full feature vector.
"""
import numpy as np

from radiomarker.features.extract import count_by_image_family, extract_case
from radiomarker.filters import derive_all
from radiomarker.synth import PhantomSpec, gen_phantom
from radiomarker.volume_io import crop

# %%
# A 48^3 grid of box-smoothed noise with an ellipsoidal mask. Class 1
# phantoms are smoothed with a larger box, which makes them more
# homogeneous.
spec = PhantomSpec(seed=1, class_label=1)
volume, mask = gen_phantom(spec)
print("grid", volume.dims, "mask voxels", int(mask.voxels.sum()))

# %%
# Every filter runs on the crop around the mask; three voxels of margin
# keep the neighbourhood filters away from the crop edge.
v, m = crop(volume, mask, margin=3)
for img in derive_all(v, m):
    inside = img.volume.voxels[m.voxels]
    print(f"{img.image_type:14s} mean {inside.mean():10.3f}  sd {inside.std():9.3f}")

# %%
# The feature vector has one entry per (image type, feature) pair.
fv = extract_case(volume, mask, case_id="demo")
print(count_by_image_family(fv.columns), "total", fv.values.size)
values = fv.as_dict()
for name in ("original_Shape_Sphericity", "original_FirstOrder_Mean", "original_GLCM_Contrast",
             "wavelet-LLL_GLSZM_ZoneEntropy"):
    print(f"{name:34s} {values[name]:.4f}")
assert np.all(np.isfinite(fv.values))
