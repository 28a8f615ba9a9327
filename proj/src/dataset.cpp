#include "splicedet/dataset.hpp"

#include "splicedet/sha256.hpp"

#include <algorithm>
#include <set>

namespace splicedet {

namespace fs = std::filesystem;

namespace {

bool readable_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".ppm";
}

bool starts_with_ci(const std::string& s, const std::string& prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower((unsigned char)s[i]) != std::tolower((unsigned char)prefix[i]))
      return false;
  return true;
}

bool under_dir(const fs::path& file, const fs::path& root, const char* name) {
  for (fs::path p = file.parent_path(); p != root && !p.empty();
       p = p.parent_path()) {
    if (p.filename() == name) return true;
    if (p == p.parent_path()) break;
  }
  return file.parent_path().filename() == name;
}

}  // namespace

std::vector<DatasetImage> scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root.string());

  std::vector<DatasetImage> out;
  std::set<std::string> seen;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || !readable_image(entry.path())) continue;
    const fs::path& p = entry.path();
    if (under_dir(p, root, "masks")) continue;

    DatasetImage img;
    img.id = p.stem().string();
    img.path = p;
    if (under_dir(p, root, "authentic"))
      img.tampered = false;
    else if (under_dir(p, root, "tampered"))
      img.tampered = true;
    else if (starts_with_ci(img.id, "Au_"))
      img.tampered = false;
    else if (starts_with_ci(img.id, "Tp_"))
      img.tampered = true;
    else
      continue;  // unclassifiable file, not part of the dataset

    fs::path mask = root / "masks" / (img.id + ".png");
    if (fs::exists(mask)) img.mask_path = mask;

    if (!seen.insert(img.id).second)
      throw DataError("duplicate image id in dataset: " + img.id);
    out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(),
            [](const DatasetImage& a, const DatasetImage& b) { return a.id < b.id; });
  return out;
}

std::string dataset_fingerprint(const std::vector<DatasetImage>& images) {
  std::vector<std::string> lines;
  lines.reserve(images.size() * 2);
  for (const auto& img : images) {
    lines.push_back(img.id + ":" + sha256_file(img.path) + "\n");
    if (!img.mask_path.empty())
      lines.push_back(img.id + ".mask:" + sha256_file(img.mask_path) + "\n");
  }
  std::sort(lines.begin(), lines.end());
  Sha256 h;
  for (const auto& l : lines) h.update(l.data(), l.size());
  return h.hex_digest();
}

}  // namespace splicedet
