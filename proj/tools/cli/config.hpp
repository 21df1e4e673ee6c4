/*
 * config.hpp
 *
 * JSON run configuration of the gridabs tool (schema in docs/config.md).
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridabs/errors.hpp"
#include "gridabs/models.hpp"

namespace gridabs::cli {

/* validation failure; what() starts with the offending field path */
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : InvalidArgument(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct DomainConfig {
  Vector lb;
  Vector ub;
  std::vector<bool> periodic;
};

struct GridConfig {
  std::optional<Vector> eta;
  std::optional<std::vector<std::int64_t>> subdivisions;
  std::optional<double> volume_gamma;
  std::optional<double> target_cells;
};

struct OptimizeConfig {
  /* in eta units */
  std::optional<Vector> box_lower;
  std::optional<Vector> box_upper;
  double tol = 1e-10;
};

struct OutputConfig {
  std::string transitions_path;
  std::string csv_path;
};

struct Config {
  ModelSpec model;
  DomainConfig domain;
  GridConfig grid;
  OptimizeConfig optimize;
  OutputConfig output;
  std::uint64_t seed = 0;
  std::size_t substeps = 0;
};

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);

}  // namespace gridabs::cli
