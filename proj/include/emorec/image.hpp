#pragma once

#include "emorec/emotion.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

inline constexpr int kMoodImageSide = 48;

/// Grayscale image with intensities in [0, 1], row-major.
using GrayImage = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Decodes a portable graymap (binary P5 or ASCII P2, maxval <= 255) and
/// divides by maxval. Throws Error(BadImageShape) on malformed data.
GrayImage decode_pgm(std::string_view bytes);
GrayImage read_pgm(const std::filesystem::path& path);

/// Binary P5 with maxval 255.
std::string encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

struct LabeledMoodImage {
  GrayImage pixels;
  EmotionLabel label;
};

/// Loads every "<label>_<n>.pgm" in `dir`, sorted by file name.
std::vector<LabeledMoodImage> load_image_dataset(const std::filesystem::path& dir);
void save_image_dataset(const std::filesystem::path& dir, const std::vector<LabeledMoodImage>& images);

}  // namespace emorec
