#include "splicedet/model_bundle.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

namespace splicedet {

using nlohmann::json;

namespace {

constexpr char kMagic[5] = {'S', 'P', 'L', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void vec(const Vector& v) {
    u32(std::uint32_t(v.size()));
    raw(v.data(), std::size_t(v.size()) * 8);
  }
  void mat(const Matrix& m) {
    // row-major on the wire
    u32(std::uint32_t(m.rows()));
    u32(std::uint32_t(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("model file truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::string str() {
    std::uint64_t n = u64();
    if (pos_ + n > bytes_.size()) throw FormatError("model file truncated");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Vector vec() {
    std::uint32_t n = u32();
    Vector v(n);
    raw(v.data(), std::size_t(n) * 8);
    return v;
  }
  Matrix mat() {
    std::uint32_t rows = u32(), cols = u32();
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void validate_bundle(const ModelBundle& bundle) {
  const int total = bundle.schema.total_dim();
  if (total != 4 * bundle.bank.size() + bundle.schema.group_dim(FeatureGroup::spatial) +
                   bundle.schema.group_dim(FeatureGroup::frequency))
    throw ArgumentError("model bundle: schema does not match filter bank");
  if (int(bundle.mask.size()) != total)
    throw ArgumentError("model bundle: mask length != schema dim");
  const int kept = int(mask_popcount(bundle.mask));
  if (int(bundle.stats.mean.size()) != kept || int(bundle.stats.std.size()) != kept)
    throw ArgumentError("model bundle: standardizer dim != mask popcount");
  if (bundle.pca.input_dim() != kept)
    throw ArgumentError("model bundle: PCA input dim != mask popcount");
  if (bundle.net.input_dim() != bundle.pca.output_dim())
    throw ArgumentError("model bundle: net input dim != PCA output dim");
  if (bundle.net.output_dim() != kEmbeddingDim)
    throw ArgumentError("model bundle: net output dim != 64");
}

Vector reduce_features(const ModelBundle& bundle, const Vector& raw) {
  return apply_pca(bundle.pca, apply_standardizer(bundle.stats, apply_mask(bundle.mask, raw)));
}

Matrix reduce_feature_rows(const ModelBundle& bundle, const Matrix& rows) {
  return apply_pca_rows(bundle.pca,
                        apply_standardizer(bundle.stats, apply_mask_rows(bundle.mask, rows)));
}

std::vector<std::uint8_t> serialize_model(const ModelBundle& bundle) {
  validate_bundle(bundle);
  Writer w;
  w.raw(kMagic, 5);
  w.u32(kVersion);

  json schema = json::array();
  for (const auto& e : bundle.schema.entries)
    schema.push_back({{"name", e.name}, {"group", to_string(e.group)}});
  w.str(schema.dump());

  w.u64(bundle.bank.seed);
  w.u32(std::uint32_t(bundle.bank.k_random));
  w.u32(std::uint32_t(bundle.bank.size()));
  for (int k = 0; k < bundle.bank.size(); ++k) {
    w.str(bundle.bank.names[std::size_t(k)]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w.f64(bundle.bank.kernels[std::size_t(k)](i, j));
  }

  w.u32(std::uint32_t(bundle.mask.size()));
  w.raw(bundle.mask.data(), bundle.mask.size());

  w.vec(bundle.stats.mean);
  w.vec(bundle.stats.std);

  w.f64(bundle.pca.variance_fraction);
  w.vec(bundle.pca.mean);
  w.mat(bundle.pca.components);
  w.vec(bundle.pca.explained_variance);

  w.u32(std::uint32_t(bundle.net.weights.size()));
  for (std::size_t l = 0; l < bundle.net.weights.size(); ++l) {
    w.mat(bundle.net.weights[l]);
    w.vec(bundle.net.biases[l]);
  }

  w.f64(bundle.threshold);

  json meta{{"config", bundle.config_json},
            {"dataset_fingerprint", bundle.dataset_fingerprint}};
  w.str(meta.dump());
  return w.take();
}

ModelBundle deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[5];
  r.raw(magic, 5);
  if (std::memcmp(magic, kMagic, 5) != 0) throw FormatError("not a SPLM1 model file");
  if (r.u32() != kVersion) throw FormatError("unsupported SPLM1 version");

  ModelBundle b;
  json schema;
  try {
    schema = json::parse(r.str());
  } catch (const json::exception&) {
    throw FormatError("model file: bad schema blob");
  }
  for (const auto& e : schema)
    b.schema.entries.push_back({e.at("name").get<std::string>(),
                                feature_group_from_string(e.at("group").get<std::string>())});

  b.bank.seed = r.u64();
  b.bank.k_random = int(r.u32());
  std::uint32_t n_kernels = r.u32();
  for (std::uint32_t k = 0; k < n_kernels; ++k) {
    b.bank.names.push_back(r.str());
    Kernel3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = r.f64();
    b.bank.kernels.push_back(m);
  }

  std::uint32_t mask_len = r.u32();
  b.mask.resize(mask_len);
  r.raw(b.mask.data(), mask_len);

  b.stats.mean = r.vec();
  b.stats.std = r.vec();

  b.pca.variance_fraction = r.f64();
  b.pca.mean = r.vec();
  b.pca.components = r.mat();
  b.pca.explained_variance = r.vec();

  std::uint32_t n_layers = r.u32();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    b.net.weights.push_back(r.mat());
    b.net.biases.push_back(r.vec());
  }

  b.threshold = r.f64();

  json meta;
  try {
    meta = json::parse(r.str());
  } catch (const json::exception&) {
    throw FormatError("model file: bad metadata blob");
  }
  b.config_json = meta.at("config").get<std::string>();
  b.dataset_fingerprint = meta.at("dataset_fingerprint").get<std::string>();

  if (!r.at_end()) throw FormatError("model file: trailing bytes");
  try {
    validate_bundle(b);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("model file inconsistent: ") + e.what());
  }
  return b;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  auto bytes = serialize_model(bundle);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("model write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::vector<std::uint8_t> bytes(std::size_t(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!in) throw IoError("model read failed: " + path.string());
  return deserialize_model(bytes);
}

}  // namespace splicedet
