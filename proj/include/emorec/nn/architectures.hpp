#pragma once

#include "emorec/nn/layers.hpp"

#include <vector>

namespace emorec::nn {

/// embedding(ids -> 32) -> conv1d(64, width 3) -> relu -> global_maxpool
/// -> dense(64) -> relu -> dense(classes) -> softmax
inline std::vector<LayerSpec> lyric_model_layers(Index id_space, Index classes = 5) {
  return {LayerSpec::embedding(id_space, 32), LayerSpec::conv1d(64, 3), LayerSpec::relu(),
          LayerSpec::global_maxpool(),        LayerSpec::dense(64),      LayerSpec::relu(),
          LayerSpec::dense(classes),          LayerSpec::softmax()};
}

inline Shape lyric_input_shape(Index sequence_length) { return {sequence_length}; }

inline constexpr Index kMoodImageSide = 48;

/// 48x48x1 -> conv2d(8, 3x3) -> relu -> maxpool(2) -> conv2d(16, 3x3) -> relu
/// -> maxpool(2) -> dense(64) -> relu -> dense(classes) -> softmax
inline std::vector<LayerSpec> mood_image_model_layers(Index classes = 5) {
  return {LayerSpec::conv2d(8, 3, 3),  LayerSpec::relu(), LayerSpec::maxpool2d(2),
          LayerSpec::conv2d(16, 3, 3), LayerSpec::relu(), LayerSpec::maxpool2d(2),
          LayerSpec::dense(64),        LayerSpec::relu(), LayerSpec::dense(classes),
          LayerSpec::softmax()};
}

inline Shape mood_image_input_shape() { return {kMoodImageSide, kMoodImageSide, 1}; }

}  // namespace emorec::nn
