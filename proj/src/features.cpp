#include "splicedet/features.hpp"

#include "splicedet/freq_features.hpp"
#include "splicedet/spatial_features.hpp"

#include <atomic>
#include <thread>

namespace splicedet {

FeatureSchema default_schema(const FilterBank& bank) {
  FeatureSchema schema;
  static const char* moment[4] = {"mean_abs", "std", "skew", "kurt"};
  for (int k = 0; k < bank.size(); ++k)
    for (int m = 0; m < 4; ++m)
      schema.entries.push_back(
          {"noise." + bank.names[std::size_t(k)] + "." + moment[m], FeatureGroup::noise});

  for (int i = 0; i < 59; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "lbp.%02d", i);
    schema.entries.push_back({std::string("spatial.") + buf, FeatureGroup::spatial});
  }
  for (const char* n : {"edge.density", "edge.mean_mag", "edge.std_mag",
                        "grad.mean_mag", "grad.std_mag", "grad.orient_entropy",
                        "color.corr_rg", "color.corr_rb", "color.corr_gb",
                        "noise_sigma", "blockvar.mean", "blockvar.std", "blockvar.cv"})
    schema.entries.push_back({std::string("spatial.") + n, FeatureGroup::spatial});

  for (const char* n : {"dct.dc_frac", "dct.low_frac", "dct.mid_frac", "dct.high_frac",
                        "dct.ac_std", "dct.ac_kurt", "blockiness",
                        "period.peak_ratio", "period.peak_radius"})
    schema.entries.push_back({std::string("freq.") + n, FeatureGroup::frequency});
  for (int level = 1; level <= 2; ++level)
    for (const char* band : {"lh", "hl", "hh"})
      for (const char* stat : {"mean_abs", "std"}) {
        schema.entries.push_back({"freq.wavelet.l" + std::to_string(level) + "_" + band +
                                      "_" + stat,
                                  FeatureGroup::frequency});
      }
  for (const char* n : {"psd.slope", "psd.band_low", "psd.band_mid", "psd.band_high"})
    schema.entries.push_back({std::string("freq.") + n, FeatureGroup::frequency});
  return schema;
}

Vector extract_features(const ImageBuffer& patch_rgb, const FilterBank& bank) {
  const Array2D gray =
      patch_rgb.channels == 1 ? patch_rgb.plane() : to_grayscale(patch_rgb).plane();
  Vector noise = noise_statistics(apply_filters(gray, bank));
  Vector spatial = spatial_features(patch_rgb);
  Vector freq = frequency_features(gray);
  Vector out(noise.size() + spatial.size() + freq.size());
  out << noise, spatial, freq;
  return out;
}

Matrix extract_feature_rows(const std::vector<Patch>& patches, const FilterBank& bank,
                            int threads) {
  const int dim = 4 * bank.size() + kSpatialDim + kFrequencyDim;
  Matrix rows(Eigen::Index(patches.size()), dim);
  if (patches.empty()) return rows;

  auto worker = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next.fetch_add(1); i < patches.size(); i = next.fetch_add(1))
      rows.row(Eigen::Index(i)) = extract_features(patches[i].pixels, bank).transpose();
  };

  threads = std::max(1, threads);
  if (threads == 1 || patches.size() < 2) {
    for (std::size_t i = 0; i < patches.size(); ++i)
      rows.row(Eigen::Index(i)) = extract_features(patches[i].pixels, bank).transpose();
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, std::ref(next));
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace splicedet
