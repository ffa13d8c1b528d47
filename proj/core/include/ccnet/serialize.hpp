#pragma once

#include <string>

#include "ccnet/model.hpp"

namespace ccnet {

// Self-describing binary container: magic, format version, full model config
// including the alphabet, named parameter tensors as little-endian 32-bit
// reals with explicit shapes, and an optional optimizer-velocity section.
// A loaded model's eval-mode forward is bit-identical to the saved one.
void save_model(Model<float>& model, const std::string& path, bool include_velocities = true);
Model<float> load_model(const std::string& path);

} // namespace ccnet
