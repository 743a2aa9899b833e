#include "emorec/image.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace emorec {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::BadImageShape, "pgm: " + what); }

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) bad("expected a number in header");
    if (pos_ - start > 9) bad("header number too large");
    return std::stol(std::string(bytes_.substr(start, pos_ - start)));
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) bad("missing P5/P2 magic");
  const bool binary = bytes[1] == '5';
  HeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width <= 0 || height <= 0 || width > 4096 || height > 4096) bad("unsupported dimensions");
  if (maxval <= 0 || maxval > 255) bad("maxval must be in 1..255");

  GrayImage img(height, width);
  const auto count = static_cast<std::size_t>(width * height);
  if (binary) {
    const std::size_t start = header.position() + 1;  // single whitespace after maxval
    if (bytes.size() < start + count) bad("pixel data truncated");
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<unsigned char>(bytes[start + i]);
      if (v > maxval) bad("pixel exceeds maxval");
      img.data()[i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = header.next_int();
      if (v > maxval) bad("pixel exceeds maxval");
      img.data()[i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.data()[i], 0.0f, 1.0f);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << encode_pgm(image);
}

std::vector<LabeledMoodImage> load_image_dataset(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LabeledMoodImage> out;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const auto underscore = stem.find('_');
    if (underscore == std::string::npos) throw Error(Errc::Parse, "image name must be <label>_<n>: " + stem);
    out.push_back({read_pgm(f), parse_emotion(stem.substr(0, underscore))});
  }
  return out;
}

void save_image_dataset(const std::filesystem::path& dir, const std::vector<LabeledMoodImage>& images) {
  std::filesystem::create_directories(dir);
  std::vector<int> counters(kEmotionCount, 0);
  for (const auto& img : images) {
    const int n = counters[static_cast<std::size_t>(ordinal(img.label))]++;
    write_pgm(dir / (std::string(to_string(img.label)) + "_" + std::to_string(n) + ".pgm"), img.pixels);
  }
}

}  // namespace emorec
