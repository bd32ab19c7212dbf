#include "fedsim/registry.hpp"

#include "fedsim/errors.hpp"

namespace fedsim {

ArchDescriptor make_arch(std::string_view name, const Shape& input_shape, std::size_t num_classes) {
  const std::size_t features = shape_size(input_shape);
  if (name == "cnn-small") {
    if (input_shape.size() != 3) {
      throw ConfigError("cnn-small needs an image input, got " + shape_string(input_shape),
                        "model_arch");
    }
    const std::size_t pooled = 16 * (input_shape[1] / 2 / 2) * (input_shape[2] / 2 / 2);
    return ArchDescriptor(input_shape,
                          {Conv2dLayer{input_shape[0], 8, 3}, ReluLayer{}, MaxPool2x2Layer{},
                           Conv2dLayer{8, 16, 3}, ReluLayer{}, MaxPool2x2Layer{}, FlattenLayer{},
                           DenseLayer{pooled, num_classes}},
                          num_classes);
  }
  if (name == "mlp-weak") {
    return ArchDescriptor(input_shape,
                          {FlattenLayer{}, DenseLayer{features, 32}, ReluLayer{},
                           DenseLayer{32, num_classes}},
                          num_classes);
  }
  if (name == "linear") {
    return ArchDescriptor(input_shape, {FlattenLayer{}, DenseLayer{features, num_classes}},
                          num_classes);
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

std::vector<std::string> registry_names() { return {"cnn-small", "mlp-weak", "linear"}; }

}  // namespace fedsim
