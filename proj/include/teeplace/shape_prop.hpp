#ifndef TEEPLACE_SHAPE_PROP_HPP
#define TEEPLACE_SHAPE_PROP_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "teeplace/core_model.hpp"

namespace teeplace {

struct TensorShape {
  int64_t height = 1;
  int64_t width = 1;
  int64_t channels = 1;

  int64_t elements() const { return height * width * channels; }
  bool operator==(const TensorShape&) const = default;
};

struct LayerSignature {
  int layer_index = 0;
  TensorShape input_shape;
  TensorShape output_shape;
  /// Size of the output tensor in bytes (the transfer size when the chain is
  /// cut after this layer).
  int64_t output_bytes = 0;
  /// Resolution of a single feature map of the output.
  Resolution resolution;
};

/// Spatial output size of a sliding window: floor((in + 2p - k) / s) + 1.
int64_t window_output_dim(int64_t in, int kernel, int stride, int padding);

/// Walks the chain from the input frame. Throws StructuralError naming the
/// layer when a derived dimension drops below one pixel.
std::vector<LayerSignature> propagate_shapes(const NetworkProfile& net);

/// Per-layer output resolution, in layer order.
std::vector<std::pair<int, Resolution>> resolution_profile(
    const std::vector<LayerSignature>& signatures);

}  // namespace teeplace

#endif  // TEEPLACE_SHAPE_PROP_HPP
