#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim {

/// Built-in architectures, sized for the given input shape and class count.
///
///   cnn-small  conv2d(c->8,3) relu maxpool conv2d(8->16,3) relu maxpool flatten dense(->C)
///   mlp-weak   flatten dense(->32) relu dense(32->C)
///   linear     flatten dense(->C)
///
/// cnn-small needs a (channels, height, width) input. Unknown names throw ConfigError.
ArchDescriptor make_arch(std::string_view name, const Shape& input_shape, std::size_t num_classes);

std::vector<std::string> registry_names();

}  // namespace fedsim
