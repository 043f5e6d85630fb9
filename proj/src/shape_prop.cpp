#include "teeplace/shape_prop.hpp"

#include <string>

namespace teeplace {

int64_t window_output_dim(int64_t in, int kernel, int stride, int padding) {
  const int64_t span = in + 2 * static_cast<int64_t>(padding) - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

std::vector<LayerSignature> propagate_shapes(const NetworkProfile& net) {
  require_valid_network(net);

  std::vector<LayerSignature> out;
  out.reserve(net.layers.size());
  TensorShape current{net.input_height, net.input_width, net.input_channels};

  for (const auto& layer : net.layers) {
    LayerSignature sig;
    sig.layer_index = layer.index;
    sig.input_shape = current;

    TensorShape next = current;
    switch (layer.kind) {
      case LayerKind::kConv:
      case LayerKind::kPool: {
        const auto& s = layer.shape;
        next.height = window_output_dim(current.height, s.kernel, s.stride,
                                        s.padding);
        next.width =
            window_output_dim(current.width, s.kernel, s.stride, s.padding);
        if (layer.kind == LayerKind::kConv) next.channels = *s.out_channels;
        break;
      }
      case LayerKind::kFc:
        next = {1, 1, *layer.shape.out_length};
        break;
      case LayerKind::kOther:
        if (layer.shape.out_channels) next.channels = *layer.shape.out_channels;
        break;
      case LayerKind::kRelu:
      case LayerKind::kSoftmax:
        break;
    }
    if (next.height < 1 || next.width < 1) {
      throw StructuralError("network consumes input below 1 pixel at layer " +
                            std::to_string(layer.index) + " (" +
                            to_string(layer.kind) + ")");
    }

    sig.output_shape = next;
    sig.output_bytes = layer.explicit_output_bytes.value_or(
        next.elements() * net.bytes_per_element);
    sig.resolution =
        layer.explicit_resolution.value_or(Resolution{next.height, next.width});
    out.push_back(sig);
    current = next;
  }
  return out;
}

std::vector<std::pair<int, Resolution>> resolution_profile(
    const std::vector<LayerSignature>& signatures) {
  std::vector<std::pair<int, Resolution>> out;
  out.reserve(signatures.size());
  for (const auto& s : signatures) out.emplace_back(s.layer_index, s.resolution);
  return out;
}

}  // namespace teeplace
