#pragma once

#include "emorec/corpus.hpp"
#include "emorec/image.hpp"
#include "emorec/rng.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace emorec::synthetic {

/// Word that appears only in lyrics of class `e`.
std::string_view class_keyword(EmotionLabel e) noexcept;

/// Balanced keyword corpus: every song carries its class keyword among
/// shared filler words and stop words. Ids are "syn-<class>-<n>".
std::vector<SongEntry> lyric_corpus(std::size_t per_class, std::uint64_t seed);

/// Clean 48x48 glyph for `e` (mouth-shape line drawings on a dark field).
GrayImage glyph(EmotionLabel e);

/// Glyph shifted by up to +-2 pixels with additive uniform noise.
GrayImage noisy_glyph(EmotionLabel e, Rng& rng, float noise = 0.15f);

std::vector<LabeledMoodImage> glyph_dataset(std::size_t per_class, std::uint64_t seed, float noise = 0.15f);

/// Pixelwise mix: weight * a + (1 - weight) * b.
GrayImage blend(const GrayImage& a, const GrayImage& b, float weight = 0.5f);

}  // namespace emorec::synthetic
