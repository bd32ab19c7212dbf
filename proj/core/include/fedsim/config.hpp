#pragma once

// Experiment config files: `key = value` lines grouped under optional
// `[section]` headers, `#` or `;` starting a comment. Every key belongs to
// exactly one section and may appear at most once; keys before the first
// header are accepted from any section. Missing keys keep their defaults.
//
//   [experiment]  rounds local_epochs num_clients gamma beta batch_size seed
//                 eval_every target_accuracy threads record_time
//   [optimizer]   lr momentum weight_decay
//   [method]      method mu model_arch weak_arch
//   [data]        source (synthetic|idx) classes per_class test_per_class dim
//                 separation train_images train_labels test_images test_labels

#include <filesystem>
#include <string>
#include <string_view>

#include "fedsim/engine.hpp"

namespace fedsim {

/// Relative data paths are resolved against `base_dir` when it is non-empty.
/// Throws ConfigError carrying the key and line of the first problem.
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::filesystem::path& base_dir = {});

ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace fedsim
