#pragma once

#include "splicedet/fusion.hpp"
#include "splicedet/image.hpp"
#include "splicedet/noise_features.hpp"

namespace splicedet {

/// Schema for a given filter bank: 4 pooled moments per kernel, the 72
/// spatial entries, and the 25 frequency entries (4K + 72 + 25 total).
FeatureSchema default_schema(const FilterBank& bank);

/// Fused descriptor of one patch in schema order.
Vector extract_features(const ImageBuffer& patch_rgb, const FilterBank& bank);

/// Row-per-patch feature matrix; parallelized over patches when threads > 1,
/// with results written by index so the output is order-deterministic.
Matrix extract_feature_rows(const std::vector<Patch>& patches, const FilterBank& bank,
                            int threads = 1);

}  // namespace splicedet
