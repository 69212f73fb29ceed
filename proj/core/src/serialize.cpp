#include "uclab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>

#include "uclab/error.hpp"

#if defined(_WIN32)
#include <process.h>
#define UCLAB_GETPID _getpid
#else
#include <unistd.h>
#define UCLAB_GETPID getpid
#endif

namespace uclab::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw ParseError("not a number: \"" + s + "\"");
  return v;
}

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw ParseError("expected a number or a decimal string, got " + j.dump());
}

Json to_json(const Point& p) {
  Json a = Json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(number(p[i]));
  return a;
}

Point point_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty coordinate array");
  Point p(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<int>(i)] = real_from_json(j[i]);
  return p;
}

namespace {

Json exact(double x) { return format_double(x); }

Json exact_point(const Point& p) {
  Json a = Json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(format_double(p[i]));
  return a;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int int_field(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) throw ParseError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

}  // namespace

Json to_json(const harmonic::HarmonicFunction& u) {
  using Kind = harmonic::HarmonicFunction::Kind;
  Json j;
  Json terms = Json::array();
  switch (u.kind()) {
    case Kind::polynomial:
      j["kind"] = "polynomial";
      for (const auto& t : u.monomial_terms()) terms.push_back({{"exponents", t.exponents}, {"coef", exact(t.coef)}});
      break;
    case Kind::spherical_harmonic_sum:
      j["kind"] = "spherical";
      for (const auto& t : u.spherical_terms()) {
        terms.push_back({{"degree", t.degree}, {"order", t.order}, {"amplitude", exact(t.amplitude)}});
      }
      break;
    case Kind::point_charge_sum:
      j["kind"] = "point_charges";
      for (const auto& c : u.charges()) terms.push_back({{"location", exact_point(c.location)}, {"charge", exact(c.charge)}});
      break;
  }
  j["dimension"] = u.dim();
  j["scale"] = exact(u.scale());
  j["terms"] = std::move(terms);
  return j;
}

harmonic::HarmonicFunction function_from_json(const Json& j) {
  using HF = harmonic::HarmonicFunction;
  const auto kind = field(j, "kind").get<std::string>();
  const int n = int_field(j, "dimension");
  const double scale = j.contains("scale") ? real_from_json(j.at("scale")) : 1.0;
  const auto& terms = field(j, "terms");
  if (!terms.is_array()) throw ParseError("\"terms\" must be an array");
  if (kind == "polynomial") {
    std::vector<HF::MonomialTerm> ts;
    for (const auto& t : terms) ts.push_back({field(t, "exponents").get<std::vector<int>>(), real_from_json(field(t, "coef"))});
    return HF::polynomial(n, std::move(ts), scale);
  }
  if (kind == "spherical") {
    std::vector<HF::SphericalTerm> ts;
    for (const auto& t : terms) ts.push_back({int_field(t, "degree"), int_field(t, "order"), real_from_json(field(t, "amplitude"))});
    return HF::spherical(n, std::move(ts), scale);
  }
  if (kind == "point_charges") {
    std::vector<HF::Charge> cs;
    for (const auto& t : terms) cs.push_back({point_from_json(field(t, "location")), real_from_json(field(t, "charge"))});
    return HF::point_charges(n, std::move(cs), scale);
  }
  throw ParseError("unknown function kind \"" + kind + "\"");
}

Json to_json(const lattice::GridSet& e) {
  Json runs = Json::array();
  for (const auto& r : e.runs()) runs.push_back({r.start, r.length});
  return {{"dimension", e.dim()},
          {"resolution", e.resolution()},
          {"hyperplane", e.hyperplane()},
          {"size", e.size()},
          {"runs", std::move(runs)}};
}

lattice::GridSet gridset_from_json(const Json& j) {
  std::vector<lattice::GridSet::Run> runs;
  for (const auto& r : field(j, "runs")) {
    if (!r.is_array() || r.size() != 2) throw ParseError("a run is [start, length]");
    runs.push_back({r[0].get<std::int64_t>(), r[1].get<std::int64_t>()});
  }
  const bool hyper = j.contains("hyperplane") && j.at("hyperplane").get<bool>();
  return lattice::GridSet::from_runs(int_field(j, "dimension"), field(j, "resolution").get<std::int64_t>(), hyper, runs);
}

Json to_json(const lattice::Cube& q) {
  return {{"center", to_json(q.center())}, {"side", number(q.side())}, {"generation", q.generation()}};
}

Json to_json(const lattice::CountingReport& r) {
  return {{"K", r.K},     {"s", number(r.s)},         {"count", r.count},
          {"vacuous", r.vacuous}, {"content_upper", number(r.content_upper)}, {"ratio", number(r.ratio)}};
}

Json to_json(const doubling::DoublingReport& r) {
  Json j{{"center", to_json(r.center)},
         {"radius", number(r.radius)},
         {"variant", doubling::to_string(r.variant)},
         {"index", number(r.index_value)},
         {"error_bound", number(r.error_bound)},
         {"is_lower_bound", r.is_lower_bound},
         {"ratio", number(r.ratio)},
         {"tolerance", number(r.tolerance)},
         {"samples", r.samples}};
  if (r.grid_density > 0) j["grid_density"] = r.grid_density;
  if (!r.ladder.empty()) {
    Json l = Json::array();
    for (double x : r.ladder) l.push_back(number(x));
    j["ladder"] = std::move(l);
  }
  return j;
}

Json to_json(const doubling::Classification& c) {
  return {{"class", doubling::to_string(c.cls)}, {"lower", number(c.lower)}, {"upper", number(c.upper)}, {"samples", c.samples}};
}

Json to_json(const gmt::EnergyReport& r) {
  return {{"value", number(r.value)}, {"infinite", r.infinite}, {"method", r.method}, {"atoms", r.atoms}};
}

Json to_json(const gmt::CapacityReport& r) {
  Json sweeps = Json::array();
  for (double e : r.sweep_energies) sweeps.push_back(number(e));
  return {{"lower", number(r.lower)},
          {"energy", number(r.energy)},
          {"atoms", r.atoms},
          {"subsampled", r.subsampled},
          {"sweep_energies", std::move(sweeps)}};
}

Json to_json(const gmt::ContentEstimate& c, bool with_cover) {
  Json j{{"s", number(c.s)},
         {"upper", number(c.upper)},
         {"lower", number(c.lower)},
         {"lower_available", c.lower_available},
         {"coarse", c.coarse},
         {"mass_constant", number(c.mass_constant)},
         {"cover_size", c.cover.size()}};
  if (with_cover) {
    Json cover = Json::array();
    for (const auto& q : c.cover) cover.push_back(to_json(q));
    j["cover"] = std::move(cover);
  }
  return j;
}

Json to_json(const gmt::Claim1Report& r) {
  return {{"growth_exponent", number(r.growth_exponent)},
          {"energy_exponent", number(r.energy_exponent)},
          {"growth_constant", number(r.growth_constant)},
          {"radial_constant", number(r.radial_constant)},
          {"tail", number(r.tail)},
          {"energy", number(r.energy)},
          {"bound", number(r.bound)},
          {"holds", r.holds}};
}

Json to_json(const propagation::CensusReport& r) {
  Json results = Json::array();
  for (const auto& c : r.results) {
    results.push_back({{"level", c.level},
                       {"threshold_N", number(c.threshold_N)},
                       {"A", c.context.A},
                       {"delta", number(c.context.delta)},
                       {"eta", number(c.context.eta)},
                       {"c", number(c.context.c)},
                       {"bad_count", c.bad_count},
                       {"undecided_count", c.undecided_count},
                       {"total_count", c.total_count},
                       {"bound", number(c.bound)},
                       {"within_bound", c.within_bound()},
                       {"flagged", to_json(c.flagged)}});
  }
  return {{"applicable", r.applicable},
          {"reason", r.reason},
          {"precondition_index", number(r.precondition_index)},
          {"precondition_limit", number(r.precondition_limit)},
          {"results", std::move(results)}};
}

Json to_json(const propagation::CapacityCensus& r) {
  Json j{{"applicable", r.applicable},
         {"reason", r.reason},
         {"vacuous", r.vacuous},
         {"flagged", r.flagged},
         {"s", number(r.s)},
         {"capacity", number(r.capacity)},
         {"doubling_2Q", number(r.doubling_2Q)},
         {"ratio", number(r.ratio)}};
  if (r.applicable) j["set"] = to_json(r.set);
  return j;
}

Json to_json(const propagation::WidthReport& r) {
  return {{"width", number(r.width)},
          {"diameter", number(r.diameter)},
          {"relative", number(r.relative)},
          {"threshold", number(r.threshold)},
          {"parent_index", number(r.parent_index)},
          {"in_set", r.in_set},
          {"samples", r.samples},
          {"normal", to_json(r.normal)}};
}

Json to_json(const propagation::SublevelReport& r) {
  return {{"cells", r.set.size()},
          {"undecided", r.undecided},
          {"unresolved", r.unresolved},
          {"scale", number(r.scale)},
          {"content", to_json(r.content)},
          {"set", to_json(r.set)}};
}

Json to_json(const propagation::CriticalSetCover& r) {
  Json centers = Json::array();
  for (const auto& c : r.centers) centers.push_back(to_json(c));
  return {{"r", number(r.r)},
          {"ball_count", r.ball_count},
          {"detected_cells", r.detected.size()},
          {"undecided", r.undecided},
          {"centers", std::move(centers)},
          {"detected", to_json(r.detected)}};
}

Json to_json(const propagation::RecursionState& s) {
  const auto& p = s.params;
  const auto& g = s.grid;
  std::size_t rows = 0;
  for (bool b : s.on_grid) rows += b;
  return {{"params",
           {{"A", number(p.A)},
            {"delta", number(p.delta)},
            {"c", number(p.c)},
            {"C1", number(p.C1)},
            {"ceiling", number(p.ceiling)},
            {"variant", propagation::to_string(p.variant)}}},
          {"grid",
           {{"N_min", number(g.N_min)},
            {"N_max", number(g.N_max)},
            {"N_step", number(g.N_step)},
            {"a_max", number(g.a_max)},
            {"a_step", number(g.a_step)}}},
          {"boundary", s.boundary},
          {"grid_rows", rows},
          {"auxiliary_rows", s.N.size() - rows},
          {"columns", s.a.size()},
          {"interpolated_lookups", s.interpolated_lookups},
          {"beta", number(s.beta)},
          {"C", number(s.C)},
          {"fit_residual", number(s.fit_residual)},
          {"chain_holds", s.chain_holds},
          {"chain_C_prime", number(s.chain_C_prime)}};
}

Json to_json(const propagation::FitReport& r) {
  Json eps = Json::array();
  Json sigma = Json::array();
  for (double e : r.eps) eps.push_back(number(e));
  for (double s : r.sigma) sigma.push_back(number(s));
  return {{"alpha", number(r.alpha)},
          {"intercept", number(r.intercept)},
          {"residual", number(r.residual)},
          {"covers_half_ball", r.covers_half_ball},
          {"eps", std::move(eps)},
          {"sigma", std::move(sigma)}};
}

Json to_json(const propagation::WeakBound& w) { return {{"N", number(w.N)}, {"smallness", number(w.smallness)}}; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(UCLAB_GETPID());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace uclab::io
