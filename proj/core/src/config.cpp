#include "fedsim/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

const std::map<std::string, std::string, std::less<>>& key_sections() {
  static const std::map<std::string, std::string, std::less<>> sections = {
      {"rounds", "experiment"},       {"local_epochs", "experiment"},
      {"num_clients", "experiment"},  {"gamma", "experiment"},
      {"beta", "experiment"},         {"batch_size", "experiment"},
      {"seed", "experiment"},         {"eval_every", "experiment"},
      {"target_accuracy", "experiment"}, {"threads", "experiment"},
      {"record_time", "experiment"},  {"lr", "optimizer"},
      {"momentum", "optimizer"},      {"weight_decay", "optimizer"},
      {"method", "method"},           {"mu", "method"},
      {"model_arch", "method"},       {"weak_arch", "method"},
      {"source", "data"},             {"classes", "data"},
      {"per_class", "data"},          {"test_per_class", "data"},
      {"dim", "data"},                {"separation", "data"},
      {"train_images", "data"},       {"train_labels", "data"},
      {"test_images", "data"},        {"test_labels", "data"},
  };
  return sections;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

template <typename T>
T parse_number(std::string_view v, const std::string& key, int line) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": '" + std::string(v) +
                          "' is not a valid number for " + key,
                      key, line);
  }
  return out;
}

bool parse_bool(std::string_view v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": '" + std::string(v) +
                        "' is not a boolean for " + key,
                    key, line);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p(value);
  if (!p.empty() && p.is_relative() && !base.empty()) p = std::filesystem::weakly_canonical(base / p);
  return p;
}

void apply(ExperimentConfig& c, const std::string& key, std::string_view raw, int line,
           const std::filesystem::path& base) {
  const std::string value = unquote(raw);
  auto num_int = [&] { return parse_number<int>(value, key, line); };
  auto num_size = [&] { return parse_number<std::size_t>(value, key, line); };
  auto num_real = [&] { return parse_number<double>(value, key, line); };

  if (key == "rounds") c.rounds = num_int();
  else if (key == "local_epochs") c.local_epochs = num_int();
  else if (key == "num_clients") c.num_clients = num_int();
  else if (key == "gamma") c.sample_fraction = num_real();
  else if (key == "beta") c.beta = num_real();
  else if (key == "batch_size") c.batch_size = num_int();
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, key, line);
  else if (key == "eval_every") c.eval_every = num_int();
  else if (key == "target_accuracy") {
    if (value == "none" || value.empty()) c.target_accuracy.reset();
    else c.target_accuracy = num_real();
  } else if (key == "threads") c.threads = num_int();
  else if (key == "record_time") c.record_time = parse_bool(value, key, line);
  else if (key == "lr") c.sgd.lr = num_real();
  else if (key == "momentum") c.sgd.momentum = num_real();
  else if (key == "weight_decay") c.sgd.weight_decay = num_real();
  else if (key == "method") {
    try {
      c.method = parse_method(value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line) + ": " + e.what(), key, line);
    }
  } else if (key == "mu") c.mu = num_real();
  else if (key == "model_arch") c.model_arch = value;
  else if (key == "weak_arch") c.weak_arch = value;
  else if (key == "source") {
    if (value == "synthetic") c.data.kind = DataSource::Kind::kSynthetic;
    else if (value == "idx") c.data.kind = DataSource::Kind::kIdx;
    else throw ConfigError("line " + std::to_string(line) + ": unknown data source '" + value + "'", key, line);
  } else if (key == "classes") c.data.classes = num_size();
  else if (key == "per_class") c.data.per_class = num_size();
  else if (key == "test_per_class") c.data.test_per_class = num_size();
  else if (key == "dim") c.data.dim = num_size();
  else if (key == "separation") c.data.separation = num_real();
  else if (key == "train_images") c.data.train_images = resolve(value, base);
  else if (key == "train_labels") c.data.train_labels = resolve(value, base);
  else if (key == "test_images") c.data.test_images = resolve(value, base);
  else if (key == "test_labels") c.data.test_labels = resolve(value, base);
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::map<std::string, int> key_lines;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header", {}, line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "experiment" && section != "optimizer" && section != "method" &&
          section != "data") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]",
                          section, line_no);
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", {}, line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    const auto it = key_sections().find(key);
    if (it == key_sections().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", key, line_no);
    }
    if (!section.empty() && it->second != section) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' belongs in [" +
                            it->second + "], not [" + section + "]",
                        key, line_no);
    }
    if (auto [prev, inserted] = key_lines.emplace(key, line_no); !inserted) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                            "' (first set on line " + std::to_string(prev->second) + ")",
                        key, line_no);
    }
    apply(config, key, value, line_no, base_dir);
  }

  try {
    validate(config);
  } catch (const ConfigError& e) {
    const auto line = key_lines.find(e.key());
    const int at = line == key_lines.end() ? 0 : line->second;
    throw ConfigError(at ? "line " + std::to_string(at) + ": " + e.what() : std::string(e.what()),
                      e.key(), at);
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path().empty() ? std::filesystem::current_path()
                                                                : path.parent_path());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n"
     << "rounds = " << c.rounds << "\n"
     << "local_epochs = " << c.local_epochs << "\n"
     << "num_clients = " << c.num_clients << "\n"
     << "gamma = " << format_double(c.sample_fraction) << "\n"
     << "beta = " << format_double(c.beta) << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "seed = " << c.seed << "\n"
     << "eval_every = " << c.eval_every << "\n"
     << "target_accuracy = "
     << (c.target_accuracy ? format_double(*c.target_accuracy) : std::string("none")) << "\n"
     << "threads = " << c.threads << "\n"
     << "record_time = " << (c.record_time ? "true" : "false") << "\n"
     << "\n[optimizer]\n"
     << "lr = " << format_double(c.sgd.lr) << "\n"
     << "momentum = " << format_double(c.sgd.momentum) << "\n"
     << "weight_decay = " << format_double(c.sgd.weight_decay) << "\n"
     << "\n[method]\n"
     << "method = " << method_name(c.method) << "\n"
     << "mu = " << format_double(c.mu) << "\n"
     << "model_arch = " << c.model_arch << "\n"
     << "weak_arch = " << c.weak_arch << "\n"
     << "\n[data]\n";
  os << "source = " << (c.data.kind == DataSource::Kind::kSynthetic ? "synthetic" : "idx") << "\n"
     << "classes = " << c.data.classes << "\n"
     << "per_class = " << c.data.per_class << "\n"
     << "test_per_class = " << c.data.test_per_class << "\n"
     << "dim = " << c.data.dim << "\n"
     << "separation = " << format_double(c.data.separation) << "\n"
     << "train_images = \"" << c.data.train_images.string() << "\"\n"
     << "train_labels = \"" << c.data.train_labels.string() << "\"\n"
     << "test_images = \"" << c.data.test_images.string() << "\"\n"
     << "test_labels = \"" << c.data.test_labels.string() << "\"\n";
  return os.str();
}

}  // namespace fedsim
