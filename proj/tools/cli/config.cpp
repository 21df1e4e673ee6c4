/*
 * config.cpp
 */
#include "config.hpp"

#include <cmath>
#include <fstream>

namespace gridabs::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

Vector vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], at_index(path, i));
  return v;
}

Vector vector_of(const json& j, const std::string& path, std::size_t n) {
  Vector v = vector(j, path);
  if (static_cast<std::size_t>(v.size()) != n) throw ConfigError(path, "expected " + std::to_string(n) + " entries");
  return v;
}

Matrix matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ConfigError(at_index(path, 0), "expected an array of numbers");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector row = vector(j[i], at_index(path, i));
    if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(at_index(path, i), "rows differ in length");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

Param param(const json& j, const std::string& path) {
  if (j.is_number()) return Param::scalar(number(j, path));
  if (j.is_array() && !j.empty() && j[0].is_array()) return Param::matrix(matrix(j, path));
  if (j.is_array()) {
    const Vector v = vector(j, path);
    return Param::vector(std::vector<double>(v.data(), v.data() + v.size()));
  }
  throw ConfigError(path, "expected a number, an array or an array of rows");
}

const json& required(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "missing");
  return obj.at(key);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

std::vector<Vector> inputs(const json& j, const std::string& path) {
  if (j.is_object()) {
    reject_unknown(j, path, {"lower", "upper", "counts"});
    const Vector lower = vector(required(j, "lower", path), join(path, "lower"));
    const auto n = static_cast<std::size_t>(lower.size());
    const Vector upper = vector_of(required(j, "upper", path), join(path, "upper"), n);
    const json& jc = required(j, "counts", path);
    if (!jc.is_array() || jc.size() != n) throw ConfigError(join(path, "counts"), "expected " + std::to_string(n) + " counts");
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
      if (!jc[i].is_number_integer() || jc[i].get<std::int64_t>() < 1)
        throw ConfigError(at_index(join(path, "counts"), i), "expected a positive integer");
      counts.push_back(jc[i].get<std::size_t>());
    }
    try {
      return linspace_inputs(lower, upper, counts);
    } catch (const InvalidArgument& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list of inputs or a linspace object");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_number())
      out.push_back(Vector::Constant(1, number(j[i], at_index(path, i))));
    else
      out.push_back(vector(j[i], at_index(path, i)));
  }
  return out;
}

ModelSpec model(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"name", "params", "inputs", "tau", "w", "z", "growth"});
  ModelSpec spec;
  const json& name = required(j, "name", path);
  if (!name.is_string()) throw ConfigError(join(path, "name"), "expected a string");
  spec.name = name.get<std::string>();
  if (j.contains("params")) {
    const json& p = j.at("params");
    expect_object(p, join(path, "params"));
    for (auto it = p.begin(); it != p.end(); ++it)
      spec.params[it.key()] = param(it.value(), join(join(path, "params"), it.key()));
  }
  spec.inputs = inputs(required(j, "inputs", path), join(path, "inputs"));
  spec.tau = number(required(j, "tau", path), join(path, "tau"));
  if (!(spec.tau > 0.0)) throw ConfigError(join(path, "tau"), "must be positive");
  spec.w = vector(required(j, "w", path), join(path, "w"));
  if ((spec.w.array() < 0.0).any()) throw ConfigError(join(path, "w"), "must be nonnegative");
  const auto n = static_cast<std::size_t>(spec.w.size());
  spec.z = j.contains("z") ? vector_of(j.at("z"), join(path, "z"), n) : Vector::Zero(spec.w.size());
  if ((spec.z.array() < 0.0).any()) throw ConfigError(join(path, "z"), "must be nonnegative");
  if (j.contains("growth")) {
    const json& g = j.at("growth");
    const std::string gp = join(path, "growth");
    if (!g.is_array() || g.empty()) throw ConfigError(gp, "expected a nonempty list of {L, v?}");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string ip = at_index(gp, i);
      expect_object(g[i], ip);
      reject_unknown(g[i], ip, {"L", "v"});
      GrowthOverride o;
      o.L = matrix(required(g[i], "L", ip), join(ip, "L"));
      if (g[i].contains("v")) o.v = vector(g[i].at("v"), join(ip, "v"));
      spec.growth.push_back(std::move(o));
    }
  }
  return spec;
}

std::vector<std::int64_t> integers(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw ConfigError(path, "expected " + std::to_string(n) + " integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_number_integer() || j[i].get<std::int64_t>() < 1)
      throw ConfigError(at_index(path, i), "expected a positive integer");
    out.push_back(j[i].get<std::int64_t>());
  }
  return out;
}

}  // namespace

Config parse_config(const json& doc) {
  expect_object(doc, "");
  reject_unknown(doc, "", {"model", "domain", "grid", "optimize", "output", "seed", "substeps"});
  Config cfg;
  cfg.model = model(required(doc, "model", ""), "model");
  const auto n = static_cast<std::size_t>(cfg.model.w.size());

  const json& d = required(doc, "domain", "");
  expect_object(d, "domain");
  reject_unknown(d, "domain", {"lb", "ub", "periodic"});
  cfg.domain.lb = vector_of(required(d, "lb", "domain"), "domain.lb", n);
  cfg.domain.ub = vector_of(required(d, "ub", "domain"), "domain.ub", n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!(cfg.domain.lb(ii) < cfg.domain.ub(ii))) throw ConfigError(at_index("domain.ub", i), "must exceed lb");
  }
  cfg.domain.periodic.assign(n, false);
  if (d.contains("periodic")) {
    const json& p = d.at("periodic");
    if (!p.is_array() || p.size() != n) throw ConfigError("domain.periodic", "expected " + std::to_string(n) + " booleans");
    for (std::size_t i = 0; i < n; ++i) {
      if (!p[i].is_boolean()) throw ConfigError(at_index("domain.periodic", i), "expected a boolean");
      cfg.domain.periodic[i] = p[i].get<bool>();
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    expect_object(g, "grid");
    reject_unknown(g, "grid", {"eta", "subdivisions", "volume_gamma", "target_cells"});
    if (g.size() != 1)
      throw ConfigError("grid", "exactly one of eta, subdivisions, volume_gamma, target_cells is required");
    if (g.contains("eta")) {
      cfg.grid.eta = vector_of(g.at("eta"), "grid.eta", n);
      if ((cfg.grid.eta->array() <= 0.0).any()) throw ConfigError("grid.eta", "entries must be positive");
    }
    if (g.contains("subdivisions")) cfg.grid.subdivisions = integers(g.at("subdivisions"), "grid.subdivisions", n);
    if (g.contains("volume_gamma")) cfg.grid.volume_gamma = number(g.at("volume_gamma"), "grid.volume_gamma");
    if (g.contains("target_cells")) {
      cfg.grid.target_cells = number(g.at("target_cells"), "grid.target_cells");
      if (!(*cfg.grid.target_cells > 0.0)) throw ConfigError("grid.target_cells", "must be positive");
    }
  }

  if (doc.contains("optimize")) {
    const json& o = doc.at("optimize");
    expect_object(o, "optimize");
    reject_unknown(o, "optimize", {"box_lower", "box_upper", "tol"});
    if (o.contains("box_lower")) {
      cfg.optimize.box_lower = vector_of(o.at("box_lower"), "optimize.box_lower", n);
      if ((cfg.optimize.box_lower->array() < 0.0).any())
        throw ConfigError("optimize.box_lower", "entries must be nonnegative (eta units)");
    }
    if (o.contains("box_upper")) {
      cfg.optimize.box_upper = vector_of(o.at("box_upper"), "optimize.box_upper", n);
      if ((cfg.optimize.box_upper->array() <= 0.0).any())
        throw ConfigError("optimize.box_upper", "entries must be positive (eta units)");
    }
    if (o.contains("tol")) {
      cfg.optimize.tol = number(o.at("tol"), "optimize.tol");
      if (!(cfg.optimize.tol > 0.0)) throw ConfigError("optimize.tol", "must be positive");
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    expect_object(o, "output");
    reject_unknown(o, "output", {"transitions_path", "csv_path"});
    for (const char* key : {"transitions_path", "csv_path"}) {
      if (!o.contains(key)) continue;
      if (!o.at(key).is_string()) throw ConfigError(join("output", key), "expected a string");
      (std::string(key) == "csv_path" ? cfg.output.csv_path : cfg.output.transitions_path) =
          o.at(key).get<std::string>();
    }
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("substeps")) {
    if (!doc.at("substeps").is_number_unsigned() || doc.at("substeps").get<std::uint64_t>() < 1)
      throw ConfigError("substeps", "expected a positive integer");
    cfg.substeps = doc.at("substeps").get<std::size_t>();
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace gridabs::cli
