#pragma once

// Run configuration: TOML text with one table per module.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "fracreg/core.hpp"
#include "fracreg/solver.hpp"

namespace fracreg {

struct DomainConfig {
  std::string kind = "interval";
  int dim = 0;                 // 0: implied by kind
  std::vector<double> center;  // defaults to the origin
  // interval: [half_length]; ball: [radius]; stadium: [half_length, cap_radius]; ellipse: [a, b]
  std::vector<double> params{1.0};

  int dimension() const { return kind == "interval" ? 1 : 2; }
  std::size_t param_count() const { return kind == "interval" || kind == "ball" ? 1 : 2; }
};

struct GridConfig {
  double h = 1.0 / 256;
  int margin = 2;
};

struct DiagnosticsConfig {
  int anchors = 4;
  double t = 2.0;
  int max_levels = 8;
  double excess_scale = 0.0;
};

struct ObstacleConfig {
  std::vector<double> center;
  double lower_height = 0.25;
  double lower_radius = 0.5;
  double lower_offset = 0.1;
  double upper_level = 0.3;
};

struct BarrierConfig {
  std::string kind = "bump_lower";
  double R = 0.1;
  double anchor_t = 0.5;
  double lambda_max = 0.5;
  int lambda_count = 11;
  double multiplier = 1.0;
  bool upper = false;
  double xbar_depth = 0.25;  // xbar = anchor + depth R along the inner normal
};

struct VerifyConfig {
  std::vector<int> criteria;
  double tolerance_scale = 1.0;
};

struct RunConfig {
  std::string source;  // raw text, hashed
  DomainConfig domain;
  double p = 2.0;
  double s = 0.5;
  double load = 1.0;
  GridConfig grid;
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
  ObstacleConfig obstacle;
  BarrierConfig barrier;
  VerifyConfig verify;
  std::uint64_t seed = 0xF5AC;
  int refine = 0;
  std::string out_dir = "out";

  double spacing() const { return grid.h / std::pow(2.0, refine); }
};

/// FNV-1a over the config text and the command-line overrides, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  mix(c.source);
  mix("\nseed=" + std::to_string(c.seed) + "\nrefine=" + std::to_string(c.refine));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

class TableReader {
 public:
  TableReader(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!t_) return;
    const toml::node* n = t_->get(key);
    if (!n) return;
    if constexpr (std::is_same_v<T, bool>) {
      auto v = n->value_exact<bool>();
      if (!v) fail(key, "a boolean");
      out = *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = n->value_exact<std::string>();
      if (!v) fail(key, "a string");
      out = *v;
    } else if constexpr (std::is_integral_v<T>) {
      auto v = n->value_exact<std::int64_t>();
      if (!v) fail(key, "an integer");
      out = static_cast<T>(*v);
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = n->value<double>();
      if (!v || !(n->is_floating_point() || n->is_integer())) fail(key, "a number");
      out = *v;
    } else {
      const toml::array* a = n->as_array();
      if (!a) fail(key, "an array");
      out.clear();
      for (const auto& e : *a) {
        using E = typename T::value_type;
        if constexpr (std::is_integral_v<E>) {
          auto v = e.value_exact<std::int64_t>();
          if (!v) fail(key, "an array of integers");
          out.push_back(static_cast<E>(*v));
        } else {
          auto v = e.value<double>();
          if (!v || !(e.is_floating_point() || e.is_integer())) fail(key, "an array of numbers");
          out.push_back(*v);
        }
      }
    }
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!seen_.count(std::string(k.str())))
        throw ConfigError("config: unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("config: [" + name_ + "] " + key + " must be " + what);
  }

  const toml::table* t_;
  std::string name_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  using detail::require;
  const auto& d = c.domain;
  require(d.kind == "interval" || d.kind == "ball" || d.kind == "stadium" || d.kind == "ellipse",
          "domain.kind must be interval, ball, stadium or ellipse");
  require(d.center.empty() || static_cast<int>(d.center.size()) == d.dimension(),
          "domain.center has the wrong dimension");
  require(d.dim == 0 || d.dim == d.dimension(), "domain.dim does not match domain.kind");
  require(d.params.size() == d.param_count(), "domain.params has the wrong length for domain.kind");
  for (double v : d.params) require(v > 0.0 && std::isfinite(v), "domain lengths must be positive");
  if (d.kind == "ellipse") require(d.params[0] >= d.params[1] && d.params[0] <= 10.0 * d.params[1], "ellipse needs b <= a <= 10 b");
  require(c.p >= 2.0 && std::isfinite(c.p), "problem.p must be >= 2");
  require(c.s > 0.0 && c.s < 1.0, "problem.s must lie in (0, 1)");
  require(std::isfinite(c.load), "problem.load must be finite");
  require(c.grid.h > 0.0 && c.grid.h < 1.0, "grid.h must lie in (0, 1)");
  require(c.grid.margin >= 2, "grid.margin must be at least 2");
  require(c.refine >= 0 && c.refine <= 6, "refine must lie in [0, 6]");
  require(c.solver.tol > 0.0 && c.solver.tol < 1.0, "solver.tol must lie in (0, 1)");
  require(c.solver.max_iter >= 1, "solver.max_iter must be positive");
  require(c.diagnostics.anchors >= 1 && c.diagnostics.max_levels >= 3, "diagnostics needs anchors >= 1, max_levels >= 3");
  require(c.diagnostics.t > 0.0, "diagnostics.t must be positive");
  require(c.obstacle.center.empty() || static_cast<int>(c.obstacle.center.size()) == d.dimension(),
          "obstacle.center has the wrong dimension");
  require(c.obstacle.lower_radius > 0.0, "obstacle.lower_radius must be positive");
  require(c.barrier.kind == "bump_lower" || c.barrier.kind == "bump_upper", "barrier.kind must be bump_lower or bump_upper");
  require(c.barrier.R > 0.0 && c.barrier.lambda_max >= 0.0 && c.barrier.lambda_count >= 2, "bad barrier sweep");
  require(c.barrier.xbar_depth > 0.0 && c.barrier.xbar_depth < 0.5, "barrier.xbar_depth must lie in (0, 1/2)");
  for (int k : c.verify.criteria) require(k >= 1 && k <= 11, "verify.criteria entries must lie in [1, 11]");
  require(c.verify.tolerance_scale > 0.0, "verify.tolerance_scale must be positive");
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  c.source = text;
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(os.str());
  }
  static const std::set<std::string> tables{"domain", "problem", "grid", "solver", "diagnostics", "obstacle", "barrier",
                                            "verify", "run"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (!tables.count(key)) throw ConfigError("config: unknown table [" + key + "]");
    if (!v.is_table()) throw ConfigError("config: '" + key + "' must be a table");
  }
  auto tab = [&](const char* n) { return root[n].as_table(); };

  detail::TableReader dom(tab("domain"), "domain");
  dom.get("kind", c.domain.kind);
  dom.get("center", c.domain.center);
  dom.get("dim", c.domain.dim);
  dom.get("params", c.domain.params);
  dom.finish();

  detail::TableReader pr(tab("problem"), "problem");
  pr.get("p", c.p);
  pr.get("s", c.s);
  pr.get("load", c.load);
  pr.finish();

  detail::TableReader gr(tab("grid"), "grid");
  gr.get("h", c.grid.h);
  gr.get("margin", c.grid.margin);
  gr.finish();

  detail::TableReader so(tab("solver"), "solver");
  std::string method = "two_point";
  so.get("tol", c.solver.tol);
  so.get("max_iter", c.solver.max_iter);
  so.get("method", method);
  so.get("memory", c.solver.memory);
  so.get("window", c.solver.nonmonotone_window);
  so.finish();
  if (method == "two_point") c.solver.method = Descent::two_point;
  else if (method == "lbfgs") c.solver.method = Descent::lbfgs;
  else throw ConfigError("config: solver.method must be two_point or lbfgs");

  detail::TableReader di(tab("diagnostics"), "diagnostics");
  di.get("anchors", c.diagnostics.anchors);
  di.get("t", c.diagnostics.t);
  di.get("max_levels", c.diagnostics.max_levels);
  di.get("excess_scale", c.diagnostics.excess_scale);
  di.finish();

  detail::TableReader ob(tab("obstacle"), "obstacle");
  ob.get("center", c.obstacle.center);
  ob.get("lower_height", c.obstacle.lower_height);
  ob.get("lower_radius", c.obstacle.lower_radius);
  ob.get("lower_offset", c.obstacle.lower_offset);
  ob.get("upper_level", c.obstacle.upper_level);
  ob.finish();

  detail::TableReader ba(tab("barrier"), "barrier");
  ba.get("kind", c.barrier.kind);
  ba.get("R", c.barrier.R);
  ba.get("anchor_t", c.barrier.anchor_t);
  ba.get("lambda_max", c.barrier.lambda_max);
  ba.get("lambda_count", c.barrier.lambda_count);
  ba.get("multiplier", c.barrier.multiplier);
  ba.get("upper", c.barrier.upper);
  ba.get("xbar_depth", c.barrier.xbar_depth);
  ba.finish();

  detail::TableReader ve(tab("verify"), "verify");
  ve.get("criteria", c.verify.criteria);
  ve.get("tolerance_scale", c.verify.tolerance_scale);
  ve.finish();

  detail::TableReader ru(tab("run"), "run");
  std::int64_t seed = static_cast<std::int64_t>(c.seed);
  ru.get("seed", seed);
  ru.get("out", c.out_dir);
  ru.finish();
  c.seed = static_cast<std::uint64_t>(seed);

  c.solver.p = c.p;
  c.solver.s = c.s;
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

}  // namespace fracreg
