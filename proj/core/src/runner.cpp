#include "uclab/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "uclab/parallel.hpp"
#include "uclab/zoo.hpp"

#ifndef UCLAB_VERSION
#define UCLAB_VERSION "0.0.0"
#endif

namespace uclab::cli {

using harmonic::HarmonicFunction;
using lattice::Cube;
using lattice::GridSet;

std::string version() { return UCLAB_VERSION; }

namespace {

const std::vector<std::pair<ExperimentKind, const char*>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, const char*>> names{
      {ExperimentKind::census, "census"},
      {ExperimentKind::hyperplane_census, "hyperplane_census"},
      {ExperimentKind::capacity_census, "capacity_census"},
      {ExperimentKind::width, "width"},
      {ExperimentKind::sublevel_content, "sublevel_content"},
      {ExperimentKind::critical_set, "critical_set"},
      {ExperimentKind::recursion, "recursion"},
      {ExperimentKind::fit_propagation, "fit_propagation"},
      {ExperimentKind::weak_bound, "weak_bound"},
      {ExperimentKind::doubling_index, "doubling_index"},
      {ExperimentKind::maximal_doubling, "maximal_doubling"},
      {ExperimentKind::hausdorff_content, "hausdorff_content"},
      {ExperimentKind::riesz_capacity, "riesz_capacity"},
      {ExperimentKind::counting_check, "counting_check"},
  };
  return names;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names()) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(const std::string& s) {
  for (const auto& [kind, name] : kind_names()) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

ValidationError::ValidationError(std::vector<std::string> problems)
    : InvalidArgument("invalid config: " + join(problems, "; ")), problems_(std::move(problems)) {}

namespace {

// Typed access to a config with range checks; every failure is recorded
// against its dotted path and the default is returned.
class Reader {
 public:
  explicit Reader(const Json& root) : root_(root) {}

  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& what) { problems.push_back(path + ": " + what); }

  const Json* get(const std::string& path) const {
    const Json* cur = &root_;
    std::size_t pos = 0;
    while (true) {
      const auto dot = path.find('.', pos);
      const auto key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (!cur->is_object() || !cur->contains(key)) return nullptr;
      cur = &cur->at(key);
      if (dot == std::string::npos) return cur;
      pos = dot + 1;
    }
  }

  bool has(const std::string& path) const { return get(path) != nullptr; }

  template <class Ok>
  std::optional<double> maybe_real(const std::string& path, Ok ok, const char* rule) {
    const Json* v = get(path);
    if (!v) return std::nullopt;
    double x = 0.0;
    try {
      x = io::real_from_json(*v);
    } catch (const Error&) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    if (!std::isfinite(x) || !ok(x)) {
      fail(path, std::string(rule) + " (got " + io::format_double(x) + ")");
      return std::nullopt;
    }
    return x;
  }

  template <class Ok>
  double real(const std::string& path, double def, Ok ok, const char* rule) {
    return maybe_real(path, ok, rule).value_or(def);
  }

  template <class Ok>
  std::int64_t integer(const std::string& path, std::int64_t def, Ok ok, const char* rule) {
    const Json* v = get(path);
    if (!v) return def;
    if (!v->is_number_integer()) {
      fail(path, "expected an integer");
      return def;
    }
    const auto x = v->get<std::int64_t>();
    if (!ok(x)) {
      fail(path, std::string(rule) + " (got " + std::to_string(x) + ")");
      return def;
    }
    return x;
  }

  bool boolean(const std::string& path, bool def) {
    const Json* v = get(path);
    if (!v) return def;
    if (!v->is_boolean()) {
      fail(path, "expected true or false");
      return def;
    }
    return v->get<bool>();
  }

  std::string string(const std::string& path, const std::string& def) {
    const Json* v = get(path);
    if (!v) return def;
    if (!v->is_string()) {
      fail(path, "expected a string");
      return def;
    }
    return v->get<std::string>();
  }

  template <class Ok>
  std::vector<double> reals(const std::string& path, std::vector<double> def, Ok ok, const char* rule) {
    const Json* v = get(path);
    if (!v) return def;
    if (!v->is_array()) {
      if (auto x = maybe_real(path, ok, rule)) return {*x};
      return def;
    }
    if (v->empty()) {
      fail(path, "empty list");
      return def;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      double x = 0.0;
      try {
        x = io::real_from_json((*v)[i]);
      } catch (const Error&) {
        fail(path + "[" + std::to_string(i) + "]", "expected a number");
        continue;
      }
      if (!std::isfinite(x) || !ok(x)) {
        fail(path + "[" + std::to_string(i) + "]", std::string(rule) + " (got " + io::format_double(x) + ")");
        continue;
      }
      out.push_back(x);
    }
    return out.empty() ? def : out;
  }

  void allow(const std::string& section, std::initializer_list<const char*> keys) {
    const Json* v = section.empty() ? &root_ : get(section);
    if (!v) return;
    if (!v->is_object()) {
      fail(section, "expected an object");
      return;
    }
    for (const auto& item : v->items()) {
      bool known = false;
      for (const char* k : keys) known = known || item.key() == k;
      if (!known) fail(section.empty() ? item.key() : section + "." + item.key(), "unknown field");
    }
  }

 private:
  const Json& root_;
};

bool power_of_three(std::int64_t k) { return k >= 1 && lattice::is_power_of_three(k); }

bool needs_functions(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::recursion:
    case ExperimentKind::weak_bound:
    case ExperimentKind::hausdorff_content:
    case ExperimentKind::riesz_capacity:
    case ExperimentKind::counting_check:
      return false;
    default:
      return true;
  }
}

bool needs_set(ExperimentKind k) {
  return k == ExperimentKind::fit_propagation || k == ExperimentKind::hausdorff_content ||
         k == ExperimentKind::riesz_capacity || k == ExperimentKind::counting_check;
}

bool is_census(ExperimentKind k) {
  return k == ExperimentKind::census || k == ExperimentKind::hyperplane_census ||
         k == ExperimentKind::capacity_census;
}

// Censuses and maximal doubling assume harmonicity on 100Q.
bool needs_wide_harmonicity(ExperimentKind k) {
  return is_census(k) || k == ExperimentKind::width || k == ExperimentKind::maximal_doubling;
}

void read_functions(Reader& rd, const Json& j, ExperimentConfig& cfg) {
  auto parse_one = [&](const Json& f, const std::string& path, const std::string& fallback) {
    try {
      std::string name = fallback;
      if (f.is_object() && f.contains("name")) name = f.at("name").get<std::string>();
      cfg.functions.push_back({name, io::function_from_json(f)});
    } catch (const std::exception& e) {
      rd.fail(path, e.what());
    }
  };
  if (j.contains("function")) parse_one(j.at("function"), "function", "u");
  if (j.contains("functions")) {
    const auto& fs = j.at("functions");
    if (!fs.is_array()) {
      rd.fail("functions", "expected an array");
    } else {
      for (std::size_t i = 0; i < fs.size(); ++i) {
        parse_one(fs[i], "functions[" + std::to_string(i) + "]", "u" + std::to_string(i));
      }
    }
  }
  if (j.contains("zoo")) {
    rd.allow("zoo", {"family", "dimension", "min_degree", "max_degree", "count", "normalize"});
    const auto family = rd.string("zoo.family", "homogeneous");
    const int n = static_cast<int>(rd.integer("zoo.dimension", cfg.dim > 0 ? cfg.dim : 2, [](auto v) { return v == 2 || v == 3; }, "must be 2 or 3"));
    const int lo = static_cast<int>(rd.integer("zoo.min_degree", 1, [](auto v) { return v >= 1 && v <= 12; }, "must lie in [1, 12]"));
    const int hi = static_cast<int>(rd.integer("zoo.max_degree", 8, [](auto v) { return v >= 1 && v <= 12; }, "must lie in [1, 12]"));
    const int count = static_cast<int>(rd.integer("zoo.count", 10, [](auto v) { return v >= 1 && v <= 10000; }, "must lie in [1, 10000]"));
    const auto normalize = rd.string("zoo.normalize", "none");
    if (normalize != "none" && normalize != "unit_ball") rd.fail("zoo.normalize", "must be \"none\" or \"unit_ball\"");
    if (lo > hi) rd.fail("zoo.min_degree", "exceeds zoo.max_degree");
    std::vector<zoo::Entry> entries;
    if (family == "homogeneous") {
      for (auto& e : zoo::homogeneous_family(n, hi)) {
        if (e.u.as_polynomial().degree() >= lo) entries.push_back(std::move(e));
      }
    } else if (family == "randomized") {
      if (!cfg.seed) {
        rd.fail("seed", "required for a randomized zoo");
      } else if (hi < 2) {
        rd.fail("zoo.max_degree", "must be at least 2 for a randomized zoo");
      } else {
        entries = zoo::randomized_zoo(n, count, *cfg.seed, hi);
      }
    } else {
      rd.fail("zoo.family", "must be \"homogeneous\" or \"randomized\"");
    }
    for (auto& e : entries) {
      if (normalize == "unit_ball") {
        try {
          e.u = zoo::normalize_on(e.u, harmonic::Ball(Point(n), 1.0));
        } catch (const Error& ex) {
          rd.fail("zoo.normalize", e.name + ": " + ex.what());
          continue;
        }
      }
      cfg.functions.push_back({e.name, e.u});
    }
  }
}

std::optional<GridSet> read_set_shape(Reader& rd, int dim);

// "shrink": k scales the set by 3^-k about the origin
std::optional<GridSet> read_set(Reader& rd, int dim) {
  if (!rd.has("set")) return std::nullopt;
  rd.allow("set", {"type", "dims", "depth", "hyperplane", "dimension", "placement", "radius", "K", "gridset", "shrink"});
  const int shrink = static_cast<int>(rd.integer("set.shrink", 0, [](auto v) { return v >= 0 && v <= 4; }, "must lie in [0, 4]"));
  auto e = read_set_shape(rd, dim);
  if (e && shrink > 0) {
    if (e->resolution() > 20000) {
      rd.fail("set.shrink", "the shrunk grid would be too fine");
      return std::nullopt;
    }
    e = lattice::shrink_to_center(*e, shrink);
  }
  return e;
}

std::optional<GridSet> read_set_shape(Reader& rd, int dim) {
  const auto type = rd.string("set.type", "");
  try {
    if (type == "cantor_product") {
      const auto dims = rd.reals("set.dims", {}, [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
      const int depth = static_cast<int>(rd.integer("set.depth", 3, [](auto v) { return v >= 0 && v <= 30; }, "must lie in [0, 30]"));
      const bool hyper = rd.boolean("set.hyperplane", false);
      if (dims.empty()) {
        rd.fail("set.dims", "required");
        return std::nullopt;
      }
      if (static_cast<int>(dims.size()) != dim - (hyper ? 1 : 0)) {
        rd.fail("set.dims", hyper ? "needs one entry per axis except the last" : "needs one entry per axis");
      }
      if (!rd.problems.empty()) return std::nullopt;
      return gmt::cantor_product(dims, depth, hyper);
    }
    if (type == "cantor") {
      const double t = rd.real("set.dimension", 0.5, [](double v) { return v >= 0.0; }, "must be nonnegative");
      const int depth = static_cast<int>(rd.integer("set.depth", 3, [](auto v) { return v >= 0 && v <= 30; }, "must lie in [0, 30]"));
      const auto placement = rd.string("set.placement", "hyperplane");
      if (placement != "hyperplane" && placement != "generic") {
        rd.fail("set.placement", "must be \"hyperplane\" or \"generic\"");
        return std::nullopt;
      }
      if (!rd.problems.empty()) return std::nullopt;
      return gmt::cantor_product_set(t, dim, depth,
                                     placement == "hyperplane" ? gmt::Placement::hyperplane : gmt::Placement::generic);
    }
    if (type == "ball") {
      // cells of the K-grid of the unit cube meeting the closed ball B(0, radius)
      const double radius = rd.real("set.radius", 0.5, [](double v) { return v > 0.0; }, "must be positive");
      const auto K = rd.integer("set.K", 27, [](auto v) { return v >= 1 && v <= 4096; }, "must lie in [1, 4096]");
      if (!rd.problems.empty()) return std::nullopt;
      const double h = 1.0 / static_cast<double>(K);
      return GridSet::from_predicate(dim, K, false, [&](const Point& c) {
        double d2 = 0.0;
        for (int i = 0; i < c.dim(); ++i) {
          const double t = std::max(std::abs(c[i]) - 0.5 * h, 0.0);
          d2 += t * t;
        }
        return d2 <= radius * radius;
      });
    }
    if (type == "cells") {
      const Json* g = rd.get("set.gridset");
      if (!g) {
        rd.fail("set.gridset", "required");
        return std::nullopt;
      }
      return io::gridset_from_json(*g);
    }
    rd.fail("set.type", "must be one of cantor_product, cantor, ball, cells");
  } catch (const std::exception& e) {
    rd.fail("set", e.what());
  }
  return std::nullopt;
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ValidationError({"config: expected a JSON object"});
  Reader rd(j);
  ExperimentConfig cfg;
  cfg.source = j;
  rd.allow("", {"name", "experiment", "dimension", "seed", "workers", "function", "functions", "zoo", "cube",
                "lattice", "thresholds", "point", "tolerances", "recursion", "set", "capacity", "weak_bound",
                "comment"});
  rd.allow("lattice", {"A", "generations", "generations_down", "K", "child"});
  rd.allow("thresholds", {"N", "N_factor", "a", "s", "r", "delta", "deltas", "eta", "etas", "c", "C1"});
  rd.allow("tolerances", {"sup", "quadrature", "grid_density", "rungs", "ratio", "width_rungs", "directions",
                          "compare_depth", "search_depth", "check_normalization", "normalization_tolerance"});
  rd.allow("recursion", {"A", "delta", "c", "C1", "ceiling", "variant", "N_min", "N_max", "N_step", "a_max",
                         "a_step", "boundary"});
  rd.allow("recursion.boundary", {"type", "C", "beta", "N0"});
  rd.allow("capacity", {"family", "sweeps", "max_atoms"});
  rd.allow("weak_bound", {"kappa", "epsilon", "C", "beta"});
  rd.allow("cube", {"center", "side"});

  cfg.name = rd.string("name", "");
  if (cfg.name.empty()) {
    rd.fail("name", "required");
  } else if (cfg.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-=+") !=
             std::string::npos) {
    rd.fail("name", "only letters, digits and _ . - = + are allowed");
  }
  const auto kind_name = rd.string("experiment", "");
  if (const auto k = experiment_from_string(kind_name)) {
    cfg.kind = *k;
  } else {
    std::vector<std::string> names;
    for (const auto& kv : kind_names()) names.emplace_back(kv.second);
    rd.fail("experiment", kind_name.empty() ? "required" : "unknown experiment \"" + kind_name + "\" (one of " + join(names, ", ") + ")");
  }
  if (const Json* s = rd.get("seed")) {
    if (s->is_number_unsigned() || (s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      cfg.seed = s->get<std::uint64_t>();
    } else {
      rd.fail("seed", "expected a nonnegative integer");
    }
  }
  cfg.workers = static_cast<int>(rd.integer("workers", 1, [](auto v) { return v >= 1 && v <= 1024; }, "must lie in [1, 1024]"));

  // dimension: explicit, else from the first function, the zoo, the cube or 2
  cfg.dim = static_cast<int>(rd.integer("dimension", 0, [](auto v) { return v >= 1 && v <= kMaxDim; }, "must lie in [1, 8]"));
  read_functions(rd, j, cfg);
  if (cfg.dim == 0) {
    if (!cfg.functions.empty()) {
      cfg.dim = cfg.functions.front().u.dim();
    } else if (const Json* c = rd.get("cube.center"); c && c->is_array() && !c->empty()) {
      cfg.dim = static_cast<int>(c->size());
    } else {
      cfg.dim = 2;
    }
  }
  for (const auto& f : cfg.functions) {
    if (f.u.dim() != cfg.dim) rd.fail("functions", f.name + " has dimension " + std::to_string(f.u.dim()) + ", expected " + std::to_string(cfg.dim));
  }

  // cube
  {
    Point center(cfg.dim);
    if (const Json* c = rd.get("cube.center")) {
      try {
        center = io::point_from_json(*c);
        if (center.dim() != cfg.dim) {
          rd.fail("cube.center", "needs " + std::to_string(cfg.dim) + " coordinates");
          center = Point(cfg.dim);
        }
      } catch (const std::exception& e) {
        rd.fail("cube.center", e.what());
      }
    }
    const double side = rd.real("cube.side", 1.0, [](double v) { return v > 0.0; }, "must be positive");
    cfg.cube = Cube::root(center, side);
  }

  // lattice
  cfg.A = static_cast<int>(rd.integer("lattice.A", 4, [](auto v) { return v >= 1 && v <= 1000 && power_of_three(2 * v + 1); }, "2A+1 must be a power of 3"));
  cfg.generations = static_cast<int>(rd.integer("lattice.generations", 1, [](auto v) { return v >= 1 && v <= 6; }, "must lie in [1, 6]"));
  cfg.generations_down = static_cast<int>(rd.integer("lattice.generations_down", 1, [](auto v) { return v >= 0 && v <= 4; }, "must lie in [0, 4]"));
  cfg.K = rd.integer("lattice.K", 27, [](auto v) { return v >= 1 && v <= 100000; }, "must lie in [1, 100000]");
  cfg.child.assign(static_cast<std::size_t>(cfg.dim), cfg.A);
  if (const Json* ch = rd.get("lattice.child")) {
    if (!ch->is_array() || static_cast<int>(ch->size()) != cfg.dim) {
      rd.fail("lattice.child", "needs one offset per axis");
    } else {
      for (std::size_t i = 0; i < ch->size(); ++i) {
        const auto& v = (*ch)[i];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 2 * cfg.A) {
          rd.fail("lattice.child[" + std::to_string(i) + "]", "must be an integer in [0, 2A]");
        } else {
          cfg.child[i] = v.get<std::int64_t>();
        }
      }
    }
  }

  // thresholds
  auto positive = [](double v) { return v > 0.0; };
  cfg.N = rd.maybe_real("thresholds.N", positive, "must be positive");
  cfg.N_factor = rd.maybe_real("thresholds.N_factor", positive, "must be positive");
  cfg.a = rd.real("thresholds.a", 1.0, [](double) { return true; }, "must be finite");
  cfg.r = rd.real("thresholds.r", 0.1, positive, "must be positive");
  auto in_delta = [](double v) { return v > 0.0 && v <= 1.0; };
  if (rd.has("thresholds.delta") && rd.has("thresholds.deltas")) rd.fail("thresholds.delta", "give delta or deltas, not both");
  cfg.deltas = rd.reals(rd.has("thresholds.deltas") ? "thresholds.deltas" : "thresholds.delta", {0.5}, in_delta, "must lie in (0, 1]");
  if (rd.has("thresholds.eta") && rd.has("thresholds.etas")) rd.fail("thresholds.eta", "give eta or etas, not both");
  cfg.etas = rd.reals(rd.has("thresholds.etas") ? "thresholds.etas" : "thresholds.eta", {0.5}, positive, "must be positive");
  cfg.s = rd.real("thresholds.s", cfg.dim - 2 + cfg.deltas.front(), positive, "must be positive");
  cfg.c = rd.real("thresholds.c", 1.0, positive, "must be positive");
  cfg.C1 = rd.real("thresholds.C1", 1.0, positive, "must be positive");
  cfg.x = Point(cfg.dim);
  if (const Json* p = rd.get("point")) {
    try {
      cfg.x = io::point_from_json(*p);
      if (cfg.x.dim() != cfg.dim) rd.fail("point", "needs " + std::to_string(cfg.dim) + " coordinates");
    } catch (const std::exception& e) {
      rd.fail("point", e.what());
    }
  }

  // tolerances
  cfg.sup_tolerance = rd.real("tolerances.sup", 1e-4, [](double v) { return v > 0.0 && v <= 0.1; }, "must lie in (0, 0.1]");
  cfg.quadrature_tolerance = rd.real("tolerances.quadrature", 1e-10, [](double v) { return v > 0.0 && v <= 1e-2; }, "must lie in (0, 1e-2]");
  cfg.grid_density = static_cast<int>(rd.integer("tolerances.grid_density", 9, [](auto v) { return v >= 1 && v <= 64; }, "must lie in [1, 64]"));
  cfg.rungs = static_cast<int>(rd.integer("tolerances.rungs", 8, [](auto v) { return v >= 1 && v <= 40; }, "must lie in [1, 40]"));
  cfg.ratio = rd.real("tolerances.ratio", 0.0, [](double v) { return v == 0.0 || v > 1.0; }, "must be 0 (10n) or exceed 1");
  cfg.width_rungs = static_cast<int>(rd.integer("tolerances.width_rungs", 6, [](auto v) { return v >= 1 && v <= 20; }, "must lie in [1, 20]"));
  cfg.directions = static_cast<int>(rd.integer("tolerances.directions", 12, [](auto v) { return v >= 2 && v <= 360; }, "must lie in [2, 360]"));
  cfg.compare_depth = static_cast<int>(rd.integer("tolerances.compare_depth", 12, [](auto v) { return v >= 1 && v <= 40; }, "must lie in [1, 40]"));
  cfg.search_depth = static_cast<int>(rd.integer("tolerances.search_depth", 64, [](auto v) { return v >= 1 && v <= 64; }, "must lie in [1, 64]"));
  cfg.check_normalization = rd.boolean("tolerances.check_normalization", true);
  cfg.normalization_tolerance = rd.real("tolerances.normalization_tolerance", 1e-3, [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0, 1)");

  // recursion
  auto& rp = cfg.recursion;
  rp.A = rd.real("recursion.A", 9.0, [](double v) { return v > 1.0; }, "must exceed 1");
  rp.delta = rd.real("recursion.delta", 0.5, positive, "must be positive");
  rp.c = rd.real("recursion.c", 1.0, positive, "must be positive");
  rp.C1 = rd.real("recursion.C1", 1.0, positive, "must be positive");
  rp.ceiling = rd.real("recursion.ceiling", 2.0, positive, "must be positive");
  const auto variant = rd.string("recursion.variant", "proof");
  if (variant == "proof") {
    rp.variant = propagation::RecursionVariant::proof;
  } else if (variant == "statement") {
    rp.variant = propagation::RecursionVariant::statement;
  } else {
    rd.fail("recursion.variant", "must be \"proof\" or \"statement\"");
  }
  auto& g = cfg.grid;
  g.N_min = rd.real("recursion.N_min", 10.0, positive, "must be positive");
  g.N_max = rd.real("recursion.N_max", 160.0, positive, "must be positive");
  g.N_step = rd.real("recursion.N_step", 10.0, positive, "must be positive");
  g.a_max = rd.real("recursion.a_max", 1000.0, positive, "must be positive");
  g.a_step = rd.real("recursion.a_step", 0.5, positive, "must be positive");
  if (g.N_max < g.N_min) rd.fail("recursion.N_max", "below recursion.N_min");
  if (rd.string("recursion.boundary.type", "exponential") != "exponential") rd.fail("recursion.boundary.type", "must be \"exponential\"");
  cfg.boundary_C = rd.real("recursion.boundary.C", 2.0, positive, "must be positive");
  cfg.boundary_beta = rd.real("recursion.boundary.beta", 1.0, [](double v) { return v >= 0.0; }, "must be nonnegative");
  cfg.boundary_N0 = rd.real("recursion.boundary.N0", 10.0, positive, "must be positive");

  // capacity
  const auto family = rd.string("capacity.family", "uniform");
  if (family == "uniform") {
    cfg.capacity.family = gmt::MeasureFamily::uniform;
  } else if (family == "greedy") {
    cfg.capacity.family = gmt::MeasureFamily::greedy_redistribution;
  } else {
    rd.fail("capacity.family", "must be \"uniform\" or \"greedy\"");
  }
  cfg.capacity.sweeps = static_cast<int>(rd.integer("capacity.sweeps", 20, [](auto v) { return v >= 0 && v <= 1000; }, "must lie in [0, 1000]"));
  cfg.capacity.max_atoms = static_cast<std::size_t>(rd.integer("capacity.max_atoms", 12000, [](auto v) { return v >= 1 && v <= 200000; }, "must lie in [1, 200000]"));

  // weak bound
  cfg.kappa = rd.real("weak_bound.kappa", 1.0, positive, "must be positive");
  cfg.epsilon = rd.real("weak_bound.epsilon", 1.0, [](double v) { return v > 0.0 && v <= 1.0; }, "must lie in (0, 1]");
  cfg.C_census = rd.real("weak_bound.C", 2.0, positive, "must be positive");
  cfg.beta = rd.real("weak_bound.beta", 1.0, positive, "must be positive");

  cfg.set = read_set(rd, cfg.dim);

  // requirements of the chosen experiment
  const auto k = cfg.kind;
  if (needs_functions(k) && !rd.has("function") && !rd.has("functions") && !rd.has("zoo")) rd.fail("function", "this experiment needs a function, functions or zoo");
  if (needs_set(k) && !cfg.set && !rd.has("set")) rd.fail("set", "this experiment needs a set");
  if (cfg.set && cfg.set->dim() != cfg.dim) rd.fail("set", "dimension differs from the functions");
  if (is_census(k)) {
    if (rd.has("thresholds.N") == rd.has("thresholds.N_factor")) rd.fail("thresholds.N", "give exactly one of N and N_factor");
  }
  if ((k == ExperimentKind::hyperplane_census || k == ExperimentKind::capacity_census) &&
      std::abs(cfg.cube.center()[cfg.dim - 1]) > 0.0) {
    rd.fail("cube.center", "must lie on {x_n = 0} for hyperplane censuses");
  }
  if (k == ExperimentKind::capacity_census && !(cfg.deltas.front() < 1.0)) rd.fail("thresholds.delta", "must lie in (0, 1) for capacity");
  if (k == ExperimentKind::sublevel_content && !power_of_three(cfg.K)) rd.fail("lattice.K", "must be a power of 3");
  if (k == ExperimentKind::fit_propagation && !cfg.functions.empty() && cfg.functions.size() < 4) rd.fail("functions", "the fit needs at least 4 functions");
  if (needs_wide_harmonicity(k)) {
    const Point c = cfg.cube.center();
    const Point half = Point::filled(cfg.dim, 50.0 * cfg.cube.side());
    for (const auto& f : cfg.functions) {
      if (f.u.charge_distance(c - half, c + half) <= 0.0) rd.fail("functions", f.name + " has a charge inside 100Q");
    }
  }
  if (!rd.problems.empty()) throw ValidationError(rd.problems);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({path.string() + ": cannot open"});
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return parse_config(j);
}

namespace {

doubling::MaximalOptions maximal_options(const ExperimentConfig& cfg, int workers) {
  doubling::MaximalOptions m;
  m.grid_density = cfg.grid_density;
  m.rungs = cfg.rungs;
  m.ratio = cfg.ratio;
  m.sup = {cfg.sup_tolerance};
  m.workers = workers;
  return m;
}

propagation::CensusOptions census_options(const ExperimentConfig& cfg) {
  propagation::CensusOptions o;
  o.c = cfg.c;
  o.deltas = cfg.deltas;
  o.etas = cfg.etas;
  o.classify.maximal = maximal_options(cfg, 1);
  o.workers = cfg.workers;
  return o;
}

struct Item {
  Json json;
  bool applicable = true;
  std::vector<double> metrics;
};

// Threshold for one function: fixed, or a multiple of the measured index
// lower bound of Q (of 2Q for hyperplane censuses).
double resolve_N(const ExperimentConfig& cfg, const HarmonicFunction& u, bool doubled) {
  if (cfg.N) return *cfg.N;
  const Cube q = doubled ? Cube::root(cfg.cube.center(), 2.0 * cfg.cube.side()) : cfg.cube;
  const double idx = doubling::maximal_doubling(u, q, maximal_options(cfg, cfg.workers)).index_value;
  const double N = *cfg.N_factor * idx;
  if (!(N > 0.0)) throw Inapplicable("measured index of Q is not positive, N_factor gives no threshold");
  return N;
}

const char* kDomain =
    "Q is the configured cube (default [-1/2, 1/2]^n); functions are polynomials or exterior potentials; "
    "censuses, widths and maximal doubling require harmonicity on 100Q";

}  // namespace

ExperimentReport run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.name = cfg.name;
  Json items = Json::array();
  Json measured = Json::object();
  Json notes = Json::array();
  std::vector<Item> collected;
  std::vector<std::string> names;

  auto per_function = [&](auto&& body) {
    for (const auto& f : cfg.functions) {
      Item it;
      it.json = {{"function", f.name}, {"u", io::to_json(f.u)}};
      try {
        body(f.u, it);
      } catch (const Inapplicable& e) {
        it.applicable = false;
        it.json["applicable"] = false;
        it.json["reason"] = e.what();
      } catch (const InvalidArgument&) {
        throw;
      } catch (const Error& e) {
        // a result about this function (no convergence, vanishing gradient, ...)
        it.applicable = false;
        it.json["error"] = e.what();
        rep.failures.push_back(f.name + ": " + e.what());
      }
      names.push_back(f.name);
      collected.push_back(std::move(it));
    }
  };

  switch (cfg.kind) {
    case ExperimentKind::census: {
      rep.metric_names = {"N", "applicable", "flagged", "bound"};
      const auto opt = census_options(cfg);
      per_function([&](const HarmonicFunction& u, Item& it) {
        const double N = resolve_N(cfg, u, false);
        const auto r = propagation::bad_cube_census(u, cfg.cube, cfg.A, N, cfg.generations, opt);
        it.applicable = r.applicable;
        it.json["N"] = io::number(N);
        it.json["census"] = io::to_json(r);
        double flagged = 0.0, bound = 0.0;
        for (const auto& c : r.results) {
          if (!c.within_bound()) {
            std::ostringstream msg;
            msg << it.json["function"].get<std::string>() << ": generation " << c.level << ", delta "
                << io::format_double(c.context.delta) << ": " << c.bad_count + c.undecided_count << " flagged > ceiling "
                << io::format_double(c.bound);
            rep.failures.push_back(msg.str());
          }
          if (c.level == cfg.generations && c.context.delta == cfg.deltas.front()) {
            flagged = static_cast<double>(c.bad_count + c.undecided_count);
            bound = c.bound;
          }
        }
        it.metrics = {N, r.applicable ? 1.0 : 0.0, flagged, bound};
      });
      break;
    }
    case ExperimentKind::hyperplane_census: {
      rep.metric_names = {"N", "applicable", "flagged", "bound"};
      const auto opt = census_options(cfg);
      per_function([&](const HarmonicFunction& u, Item& it) {
        const double N = resolve_N(cfg, u, true);
        const auto r = propagation::hyperplane_census(u, cfg.cube, cfg.A, N, opt);
        it.applicable = r.applicable;
        it.json["N"] = io::number(N);
        it.json["census"] = io::to_json(r);
        for (const auto& c : r.results) {
          if (!c.within_bound()) {
            std::ostringstream msg;
            msg << it.json["function"].get<std::string>() << ": eta " << io::format_double(c.context.eta) << ", delta "
                << io::format_double(c.context.delta) << ": " << c.bad_count + c.undecided_count
                << " flagged > ceiling " << io::format_double(c.bound);
            rep.failures.push_back(msg.str());
          }
        }
        const double flagged = r.results.empty() ? 0.0 : static_cast<double>(r.results[0].bad_count + r.results[0].undecided_count);
        it.metrics = {N, r.applicable ? 1.0 : 0.0, flagged, r.results.empty() ? 0.0 : r.results[0].bound};
      });
      break;
    }
    case ExperimentKind::capacity_census: {
      rep.metric_names = {"N", "applicable", "capacity", "ratio"};
      const auto opt = census_options(cfg);
      auto cap = cfg.capacity;
      cap.workers = cfg.workers;
      per_function([&](const HarmonicFunction& u, Item& it) {
        const double N = resolve_N(cfg, u, true);
        const auto r = propagation::capacity_census(u, cfg.cube, cfg.A, N, cfg.deltas.front(), opt, cap);
        it.applicable = r.applicable;
        it.json["N"] = io::number(N);
        it.json["capacity_census"] = io::to_json(r);
        it.metrics = {N, r.applicable ? 1.0 : 0.0, r.capacity, r.ratio};
      });
      break;
    }
    case ExperimentKind::width: {
      rep.metric_names = {"width", "relative", "in_set"};
      propagation::WidthOptions wo;
      wo.maximal = maximal_options(cfg, cfg.workers);
      wo.rungs = cfg.width_rungs;
      wo.directions = cfg.directions;
      std::array<std::int64_t, kMaxDim> offsets{};
      for (int i = 0; i < cfg.dim; ++i) offsets[static_cast<std::size_t>(i)] = cfg.child[static_cast<std::size_t>(i)];
      const Cube q = cfg.cube.child(2 * cfg.A + 1, offsets);
      per_function([&](const HarmonicFunction& u, Item& it) {
        const auto r = propagation::width_of_bad_set(u, q, cfg.c, cfg.generations_down, wo);
        it.json["q"] = io::to_json(q);
        it.json["width"] = io::to_json(r);
        it.metrics = {r.width, r.relative, static_cast<double>(r.in_set)};
      });
      break;
    }
    case ExperimentKind::sublevel_content: {
      rep.metric_names = {"cells", "undecided", "content_upper", "content_lower"};
      propagation::SublevelOptions so;
      so.check_normalization = cfg.check_normalization;
      so.normalization_tolerance = cfg.normalization_tolerance;
      so.compare_depth = cfg.compare_depth;
      so.search_depth = cfg.search_depth;
      so.workers = cfg.workers;
      per_function([&](const HarmonicFunction& u, Item& it) {
        const auto r = propagation::sublevel_content(u, cfg.cube, cfg.a, cfg.s, cfg.K, so);
        it.json["sublevel"] = io::to_json(r);
        it.metrics = {static_cast<double>(r.set.size()), static_cast<double>(r.undecided), r.content.upper * r.scale,
                      r.content.lower * r.scale};
      });
      break;
    }
    case ExperimentKind::critical_set: {
      rep.metric_names = {"ball_count", "detected", "undecided"};
      propagation::CriticalOptions co;
      co.quadrature = {cfg.quadrature_tolerance};
      co.compare_depth = cfg.compare_depth;
      co.workers = cfg.workers;
      per_function([&](const HarmonicFunction& u, Item& it) {
        const auto r = propagation::effective_critical_set(u, cfg.cube, cfg.r, cfg.K, co);
        it.json["critical_set"] = io::to_json(r);
        it.metrics = {static_cast<double>(r.ball_count), static_cast<double>(r.detected.size()),
                      static_cast<double>(r.undecided)};
      });
      break;
    }
    case ExperimentKind::recursion: {
      rep.metric_names = {"beta", "C", "chain_holds", "interpolated_lookups"};
      const auto b = propagation::Boundary::exponential(cfg.boundary_C, cfg.boundary_beta, cfg.boundary_N0);
      const auto st = propagation::recursion_simulate(cfg.recursion, b, cfg.grid);
      Item it;
      it.json = {{"recursion", io::to_json(st)}};
      it.metrics = {st.beta, st.C, st.chain_holds ? 1.0 : 0.0, static_cast<double>(st.interpolated_lookups)};
      collected.push_back(std::move(it));
      names.emplace_back("");
      notes.push_back("decrement variant " + propagation::to_string(cfg.recursion.variant) +
                      ": the proof shifts both arguments by C1 N log A, the statement shifts the second by C1 log N");
      std::vector<std::vector<std::string>> rows;
      for (std::size_t r = 0; r < st.N.size(); ++r) {
        if (!st.on_grid[r]) continue;
        for (std::size_t j = 0; j < st.a.size(); ++j) {
          rows.push_back({io::format_double(st.N[r]), io::format_double(st.a[j]), io::format_double(st.M[r][j])});
        }
      }
      rep.side_outputs.emplace_back("recursion.csv", io::csv({"N", "a", "M"}, rows));
      break;
    }
    case ExperimentKind::fit_propagation: {
      rep.metric_names = {"alpha", "residual"};
      std::vector<HarmonicFunction> family;
      Json members = Json::array();
      for (const auto& f : cfg.functions) {
        family.push_back(f.u);
        members.push_back(f.name);
      }
      propagation::FitOptions fo;
      fo.sup = {cfg.sup_tolerance};
      fo.normalization_tolerance = cfg.normalization_tolerance;
      fo.workers = cfg.workers;
      const auto r = propagation::fit_propagation_exponent(family, *cfg.set, fo);
      Item it;
      it.json = {{"family", std::move(members)}, {"set", io::to_json(*cfg.set)}, {"fit", io::to_json(r)}};
      it.metrics = {r.alpha, r.residual};
      collected.push_back(std::move(it));
      names.emplace_back("");
      break;
    }
    case ExperimentKind::weak_bound: {
      rep.metric_names = {"N", "smallness"};
      Item it;
      try {
        const auto w = propagation::weak_bound_calculator(cfg.kappa, cfg.epsilon, cfg.C_census, cfg.beta);
        it.json = {{"weak_bound", io::to_json(w)}};
        it.metrics = {w.N, w.smallness};
      } catch (const Inapplicable& e) {
        it.applicable = false;
        it.json = {{"applicable", false}, {"reason", e.what()}};
        it.metrics = {std::nan(""), std::nan("")};
      }
      collected.push_back(std::move(it));
      names.emplace_back("");
      break;
    }
    case ExperimentKind::doubling_index: {
      rep.metric_names = {"index", "error_bound"};
      const double L = cfg.ratio == 0.0 ? 2.0 : cfg.ratio;
      per_function([&](const HarmonicFunction& u, Item& it) {
        const auto r = doubling::doubling_index(u, cfg.x, cfg.r, {cfg.sup_tolerance}, L);
        it.json["doubling"] = io::to_json(r);
        it.metrics = {r.index_value, r.error_bound};
      });
      break;
    }
    case ExperimentKind::maximal_doubling: {
      rep.metric_names = {"lower_bound"};
      per_function([&](const HarmonicFunction& u, Item& it) {
        const auto r = doubling::maximal_doubling(u, cfg.cube, maximal_options(cfg, cfg.workers));
        it.json["maximal"] = io::to_json(r);
        it.metrics = {r.index_value};
      });
      break;
    }
    case ExperimentKind::hausdorff_content: {
      rep.metric_names = {"upper", "lower"};
      const auto c = gmt::hausdorff_content(*cfg.set, cfg.s, cfg.search_depth);
      Item it;
      it.json = {{"set", io::to_json(*cfg.set)}, {"content", io::to_json(c, true)}};
      it.metrics = {c.upper, c.lower_available ? c.lower : std::nan("")};
      collected.push_back(std::move(it));
      names.emplace_back("");
      break;
    }
    case ExperimentKind::riesz_capacity: {
      rep.metric_names = {"capacity_lower", "energy"};
      auto cap = cfg.capacity;
      cap.workers = cfg.workers;
      const auto c = gmt::riesz_capacity_lower(*cfg.set, cfg.s, cap);
      Item it;
      it.json = {{"set", io::to_json(*cfg.set)}, {"capacity", io::to_json(c)}};
      it.metrics = {c.lower, c.energy};
      collected.push_back(std::move(it));
      names.emplace_back("");
      break;
    }
    case ExperimentKind::counting_check: {
      rep.metric_names = {"count", "ratio"};
      const auto c = lattice::counting_lower_bound_check(*cfg.set, cfg.s, cfg.K);
      Item it;
      it.json = {{"set", io::to_json(*cfg.set)}, {"counting", io::to_json(c)}};
      it.metrics = {static_cast<double>(c.count), c.ratio};
      collected.push_back(std::move(it));
      names.emplace_back("");
      break;
    }
  }

  bool any = false;
  for (std::size_t i = 0; i < collected.size(); ++i) {
    any = any || collected[i].applicable;
    items.push_back(std::move(collected[i].json));
    rep.metrics.emplace_back(names[i], std::move(collected[i].metrics));
  }
  rep.applicable = any;
  measured["items"] = collected.size();
  std::size_t applicable = 0;
  for (const auto& it : collected) applicable += it.applicable;
  measured["applicable_items"] = applicable;
  measured["findings"] = rep.failures.size();

  Json failures = Json::array();
  for (const auto& f : rep.failures) failures.push_back(f);
  Json echo = cfg.source;
  echo.erase("workers");  // scheduling only; results do not depend on it
  rep.payload = {{"uclab_version", version()},
                 {"experiment", to_string(cfg.kind)},
                 {"name", cfg.name},
                 {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
                 {"domain", kDomain},
                 {"config", std::move(echo)},
                 {"applicable", rep.applicable},
                 {"items", std::move(items)},
                 {"measured", std::move(measured)},
                 {"failures", std::move(failures)},
                 {"notes", std::move(notes)}};
  rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

struct AxisField {
  const char* path;
  bool integral;
  bool list;  // stored as a one-element list
};

const std::map<std::string, AxisField>& axis_fields() {
  static const std::map<std::string, AxisField> fields{
      {"lattice.A", {"lattice.A", true, false}},
      {"lattice.generations", {"lattice.generations", true, false}},
      {"lattice.generations_down", {"lattice.generations_down", true, false}},
      {"lattice.K", {"lattice.K", true, false}},
      {"thresholds.N", {"thresholds.N", false, false}},
      {"thresholds.N_factor", {"thresholds.N_factor", false, false}},
      {"thresholds.a", {"thresholds.a", false, false}},
      {"thresholds.s", {"thresholds.s", false, false}},
      {"thresholds.r", {"thresholds.r", false, false}},
      {"thresholds.delta", {"thresholds.deltas", false, true}},
      {"thresholds.deltas", {"thresholds.deltas", false, true}},
      {"thresholds.eta", {"thresholds.etas", false, true}},
      {"thresholds.etas", {"thresholds.etas", false, true}},
      {"thresholds.c", {"thresholds.c", false, false}},
      {"thresholds.C1", {"thresholds.C1", false, false}},
      {"tolerances.sup", {"tolerances.sup", false, false}},
      {"tolerances.quadrature", {"tolerances.quadrature", false, false}},
      {"tolerances.grid_density", {"tolerances.grid_density", true, false}},
      {"tolerances.rungs", {"tolerances.rungs", true, false}},
      {"tolerances.ratio", {"tolerances.ratio", false, false}},
      {"recursion.A", {"recursion.A", false, false}},
      {"recursion.delta", {"recursion.delta", false, false}},
      {"recursion.c", {"recursion.c", false, false}},
      {"recursion.C1", {"recursion.C1", false, false}},
      {"recursion.ceiling", {"recursion.ceiling", false, false}},
      {"recursion.a_step", {"recursion.a_step", false, false}},
      {"recursion.N_step", {"recursion.N_step", false, false}},
      {"recursion.boundary.C", {"recursion.boundary.C", false, false}},
      {"recursion.boundary.beta", {"recursion.boundary.beta", false, false}},
      {"recursion.boundary.N0", {"recursion.boundary.N0", false, false}},
      {"weak_bound.kappa", {"weak_bound.kappa", false, false}},
      {"weak_bound.epsilon", {"weak_bound.epsilon", false, false}},
      {"weak_bound.C", {"weak_bound.C", false, false}},
      {"weak_bound.beta", {"weak_bound.beta", false, false}},
      {"set.depth", {"set.depth", true, false}},
      {"set.dimension", {"set.dimension", false, false}},
      {"set.radius", {"set.radius", false, false}},
      {"set.K", {"set.K", true, false}},
      {"set.shrink", {"set.shrink", true, false}},
  };
  return fields;
}

std::string resolve_axis(const Json& config, const std::string& axis) {
  if (axis.find('.') != std::string::npos) return axis;
  const bool recursion = config.is_object() && config.value("experiment", "") == "recursion";
  if (recursion && (axis == "A" || axis == "delta" || axis == "c" || axis == "C1" || axis == "ceiling")) {
    return "recursion." + axis;
  }
  for (const char* section : {"thresholds", "lattice", "weak_bound", "tolerances", "recursion", "set"}) {
    const std::string path = std::string(section) + "." + axis;
    if (axis_fields().count(path)) return path;
  }
  return axis;
}

}  // namespace

Json with_axis(const Json& config, const std::string& axis, double value) {
  const auto path = resolve_axis(config, axis);
  const auto it = axis_fields().find(path);
  if (it == axis_fields().end()) throw ValidationError({"--axis: \"" + axis + "\" is not a numeric config field"});
  const auto& f = it->second;
  if (!std::isfinite(value)) throw ValidationError({"--values: not finite"});
  if (f.integral && value != std::floor(value)) {
    throw ValidationError({"--values: " + path + " takes integers (got " + io::format_double(value) + ")"});
  }
  Json out = config;
  Json* cur = &out;
  const std::string target = f.path;
  std::size_t pos = 0;
  while (true) {
    const auto dot = target.find('.', pos);
    const auto key = target.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      if (f.list) {
        // the singular spelling would conflict with the list
        const auto singular = key.substr(0, key.size() - 1);
        cur->erase(singular);
        (*cur)[key] = Json::array({value});
      } else if (f.integral) {
        (*cur)[key] = static_cast<std::int64_t>(value);
      } else {
        (*cur)[key] = value;
      }
      break;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    pos = dot + 1;
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  const auto main = dir / (rep.name + ".json");
  io::write_atomic(main, io::dump(rep.payload));
  out.push_back(main);
  for (const auto& [suffix, content] : rep.side_outputs) {
    const auto p = dir / (rep.name + "." + suffix);
    io::write_atomic(p, content);
    out.push_back(p);
  }
  const auto timing = dir / (rep.name + ".timing.json");
  io::write_atomic(timing, io::dump(Json{{"name", rep.name}, {"wall_clock_seconds", rep.wall_clock}}));
  out.push_back(timing);
  return out;
}

SweepResult sweep(const Json& config, const std::string& axis, const std::vector<double>& values, int workers) {
  if (values.empty()) throw ValidationError({"--values: empty list"});
  std::vector<ExperimentConfig> cfgs;
  std::vector<std::string> problems;
  const std::string base = config.is_object() ? config.value("name", "") : "";
  for (double v : values) {
    try {
      Json j = with_axis(config, axis, v);
      j["name"] = base + "." + axis + "=" + io::format_double(v);
      cfgs.push_back(parse_config(j));
    } catch (const ValidationError& e) {
      for (const auto& p : e.problems()) problems.push_back("value " + io::format_double(v) + ": " + p);
    }
  }
  if (!problems.empty()) throw ValidationError(problems);
  const int outer = std::max(1, std::min(workers, static_cast<int>(cfgs.size())));
  const int inner = std::max(1, workers / outer);
  for (auto& c : cfgs) c.workers = inner;
  SweepResult res;
  res.reports = parallel_map(cfgs.size(), outer, [&](std::size_t i) { return run(cfgs[i]); });
  std::vector<std::string> header{"value", "function"};
  for (const auto& m : res.reports.front().metric_names) header.push_back(m);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    for (const auto& [fname, vals] : res.reports[i].metrics) {
      std::vector<std::string> row{io::format_double(values[i]), fname};
      for (double x : vals) row.push_back(io::format_double(x));
      rows.push_back(std::move(row));
    }
  }
  res.csv = io::csv(header, rows);
  return res;
}

}  // namespace uclab::cli
