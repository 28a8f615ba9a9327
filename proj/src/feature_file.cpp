#include "splicedet/feature_file.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

namespace splicedet {

using nlohmann::json;

namespace {
constexpr char kMagic[5] = {'S', 'P', 'L', 'F', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_feature_file(const PatchTable& table, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write feature file: " + path.string());
    out.write(kMagic, 5);
    std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    std::uint64_t rows = std::uint64_t(table.features.rows());
    std::uint32_t dim = std::uint32_t(table.features.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    std::vector<float> row(dim);
    for (Eigen::Index r = 0; r < table.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < table.features.cols(); ++c)
        row[std::size_t(c)] = float(table.features(r, c));
      out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(4 * dim));
    }
    if (!out) throw IoError("feature file write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);

  json sidecar;
  sidecar["schema"] = json::array();
  for (const auto& e : table.schema.entries)
    sidecar["schema"].push_back({{"name", e.name}, {"group", to_string(e.group)}});
  sidecar["rows"] = json::array();
  for (std::size_t r = 0; r < table.patch_image.size(); ++r) {
    int img = table.patch_image[r];
    int label = table.patch_labels[r];
    sidecar["rows"].push_back(
        {{"image", table.image_ids[std::size_t(img)]},
         {"label", label == 1 ? "tampered" : (label == 0 ? "authentic" : "unlabeled")}});
  }
  std::filesystem::path side = path;
  side += ".json";
  std::ofstream out(side, std::ios::binary);
  if (!out) throw IoError("cannot write feature sidecar: " + side.string());
  out << sidecar.dump(2) << "\n";
}

FeatureFile load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    throw FormatError("not a SPLF1 feature file");
  std::uint32_t version = 0, dim = 0;
  std::uint64_t rows = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&dim), 4);
  if (!in || version != kVersion) throw FormatError("unsupported SPLF1 header");

  FeatureFile f;
  f.rows.resize(Eigen::Index(rows), Eigen::Index(dim));
  std::vector<float> buf(dim);
  for (std::uint64_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(4 * dim));
    if (std::size_t(in.gcount()) != std::size_t(4) * dim)
      throw FormatError("truncated SPLF1 feature file");
    for (std::uint32_t c = 0; c < dim; ++c) f.rows(Eigen::Index(r), Eigen::Index(c)) = buf[c];
  }

  std::filesystem::path side = path;
  side += ".json";
  std::ifstream sin(side, std::ios::binary);
  if (sin) {
    json sidecar = json::parse(sin, nullptr, false);
    if (!sidecar.is_discarded()) {
      for (const auto& e : sidecar.value("schema", json::array()))
        f.schema.entries.push_back(
            {e.at("name").get<std::string>(),
             feature_group_from_string(e.at("group").get<std::string>())});
      for (const auto& r : sidecar.value("rows", json::array())) {
        f.row_image.push_back(r.at("image").get<std::string>());
        std::string l = r.at("label").get<std::string>();
        f.row_labels.push_back(l == "tampered" ? 1 : (l == "authentic" ? 0 : -1));
      }
    }
  }
  return f;
}

}  // namespace splicedet
