#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uclab/doubling.hpp"
#include "uclab/gmt.hpp"
#include "uclab/harmonic.hpp"
#include "uclab/lattice.hpp"
#include "uclab/propagation.hpp"

namespace uclab::io {

/// Insertion-ordered so that emitted reports are byte-stable.
using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
/// Exact inverse of format_double; also accepts "inf", "-inf", "nan".
double parse_double(const std::string& s);

/// JSON number, or a string for non-finite values.
Json number(double x);
/// Accepts a JSON number or a decimal string.
double real_from_json(const Json& j);

Json to_json(const Point& p);
Point point_from_json(const Json& j);

/// {kind, dimension, scale, terms}; coefficients are shortest round-trip
/// decimal strings so parse(serialize(u)) reproduces every bit.
Json to_json(const harmonic::HarmonicFunction& u);
harmonic::HarmonicFunction function_from_json(const Json& j);

/// Run-length encoded cells: {dimension, resolution, hyperplane, size, runs: [[start, length], ...]}.
Json to_json(const lattice::GridSet& e);
lattice::GridSet gridset_from_json(const Json& j);

Json to_json(const lattice::Cube& q);
Json to_json(const lattice::CountingReport& r);

Json to_json(const doubling::DoublingReport& r);
Json to_json(const doubling::Classification& c);

Json to_json(const gmt::EnergyReport& r);
Json to_json(const gmt::CapacityReport& r);
Json to_json(const gmt::ContentEstimate& c, bool with_cover = false);
Json to_json(const gmt::Claim1Report& r);

Json to_json(const propagation::CensusReport& r);
Json to_json(const propagation::CapacityCensus& r);
Json to_json(const propagation::WidthReport& r);
Json to_json(const propagation::SublevelReport& r);
Json to_json(const propagation::CriticalSetCover& r);
/// Summary only; the table goes to CSV.
Json to_json(const propagation::RecursionState& s);
Json to_json(const propagation::FitReport& r);
Json to_json(const propagation::WeakBound& w);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

/// Writes through a temporary file in the same directory and renames it over
/// the target, so the target is either absent, old, or complete.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Header row plus rows, ',' separated, '\n' terminated.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace uclab::io
