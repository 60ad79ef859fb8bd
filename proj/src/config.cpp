#include "ridgerisk/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "ridgerisk/error.hpp"

namespace ridgerisk {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw DomainError("bad number for " + std::string(key) + ": '" + text + "'");
  }
  return v;
}

int parse_int(std::string_view key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DomainError("bad integer for " + std::string(key) + ": '" + text + "'");
  }
  return v;
}

void apply_tree(ExperimentConfig& config, const boost::property_tree::ptree& tree) {
  for (const auto& [key, child] : tree) {
    if (!child.empty()) continue;  // a section, handled by the caller
    apply_setting(config, key, child.data());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (d < 1 || n < 1 || p < 1) throw DomainError("d, n and p must be positive");
  if (d >= p) throw DomainError("spike dimension d must be < p");
  if (pattern == SpectrumPattern::ThreeLevel && !(mid_multiplier >= 1 && d * (mid_multiplier + 1) < p)) {
    throw DomainError("three-level spectrum needs mid_multiplier >= 1 and d (mid_multiplier + 1) < p");
  }
  if (!(tail_factor > 0.0 && tail_factor <= 1.0)) throw DomainError("tail_factor must lie in (0, 1]");
  if (rho && !(*rho > 0.0 && *rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  if (!(noise_var >= 0.0)) throw DomainError("sigma2 must be >= 0");
  if (tau_count < 1) throw DomainError("tau_count must be >= 1");
  if (tau_min && !(*tau_min >= 0.0)) throw DomainError("tau_min must be >= 0");
  if (tau_max && !(*tau_max > 0.0)) throw DomainError("tau_max must be > 0");
  if (tau_min && tau_max && *tau_min > *tau_max) throw DomainError("tau_min must be <= tau_max");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (threads < 1) throw DomainError("threads must be >= 1");
  if (multipliers.empty()) throw DomainError("multipliers must be nonempty");
  for (double m : multipliers) {
    if (!(m > 0.0)) throw DomainError("multipliers must be positive");
  }
}

Spectrum build_spectrum(const ExperimentConfig& config, double rho) {
  if (config.pattern == SpectrumPattern::TwoLevel) {
    return make_two_level_spectrum(config.d, config.p, rho);
  }
  return make_three_level_spectrum(config.d, config.p, rho, config.mid_multiplier,
                                   config.tail_factor);
}

void apply_setting(ExperimentConfig& config, std::string_view key, const std::string& value) {
  if (key == "d") {
    config.d = parse_int(key, value);
  } else if (key == "n") {
    config.n = parse_int(key, value);
  } else if (key == "p") {
    config.p = parse_int(key, value);
  } else if (key == "pattern") {
    config.pattern = parse_pattern(trim(value));
  } else if (key == "rho") {
    config.rho = parse_double(key, value);
  } else if (key == "mid_multiplier") {
    config.mid_multiplier = parse_int(key, value);
  } else if (key == "tail_factor") {
    config.tail_factor = parse_double(key, value);
  } else if (key == "sigma2") {
    config.noise_var = parse_double(key, value);
  } else if (key == "seed") {
    config.seed = parse_seed(value);
  } else if (key == "tau_min") {
    config.tau_min = parse_double(key, value);
  } else if (key == "tau_max") {
    config.tau_max = parse_double(key, value);
  } else if (key == "tau_count") {
    config.tau_count = parse_int(key, value);
  } else if (key == "tau_scale") {
    config.tau_scale = parse_tau_scale(trim(value));
  } else if (key == "replicates") {
    config.replicates = parse_int(key, value);
  } else if (key == "multipliers") {
    config.multipliers = parse_multipliers(value);
  } else if (key == "threads") {
    config.threads = parse_int(key, value);
  } else if (key == "out") {
    config.out = trim(value);
  } else if (key == "plot") {
    config.plot = trim(value);
  } else if (key == "debug_dir") {
    config.debug_dir = trim(value);
  } else {
    throw DomainError("unknown config key '" + std::string(key) + "'");
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path,
                       const std::string& section) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw DomainError("cannot read config " + path + ": " + e.what());
  }
  try {
    apply_tree(config, tree);
    // Section names contain dots (fig1.c1), so look them up as plain keys.
    if (const auto child = tree.get_child_optional(boost::property_tree::ptree::path_type(section, '\0'))) {
      apply_tree(config, *child);
    }
  } catch (const DomainError& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void apply_environment(ExperimentConfig& config) {
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    try {
      config.seed = parse_seed(env);
    } catch (const DomainError& e) {
      throw DomainError(std::string(kSeedEnvVar) + ": " + e.what());
    }
  }
}

TauScale parse_tau_scale(std::string_view text) {
  if (text == "log") return TauScale::Log;
  if (text == "linear") return TauScale::Linear;
  throw DomainError("tau scale must be 'log' or 'linear'");
}

SpectrumPattern parse_pattern(std::string_view text) {
  if (text == "two_level" || text == "two-level") return SpectrumPattern::TwoLevel;
  if (text == "three_level" || text == "three-level") return SpectrumPattern::ThreeLevel;
  throw DomainError("pattern must be 'two_level' or 'three_level'");
}

std::vector<double> parse_multipliers(std::string_view text) {
  std::vector<double> out;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double("multipliers", item));
  if (out.empty()) throw DomainError("multipliers must be nonempty");
  return out;
}

std::uint64_t parse_seed(std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DomainError("seed must be an unsigned 64-bit integer, got '" + t + "'");
  }
  return v;
}

std::string_view to_string(SpectrumPattern pattern) noexcept {
  return pattern == SpectrumPattern::TwoLevel ? "two_level" : "three_level";
}

std::string_view to_string(TauScale scale) noexcept {
  return scale == TauScale::Log ? "log" : "linear";
}

}  // namespace ridgerisk
