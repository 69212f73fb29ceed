#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "uclab/runner.hpp"

namespace cli = uclab::cli;
namespace io = uclab::io;

namespace {

int code(cli::ExitCode c) { return static_cast<int>(c); }

std::filesystem::path default_out() {
  const char* env = std::getenv("UCLAB_OUT");
  return env && *env ? env : "uclab_out";
}

io::Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cli::ValidationError({path + ": cannot open"});
  try {
    return io::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw cli::ValidationError({path + ": " + e.what()});
  }
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(io::parse_double(item));
    } catch (const std::exception&) {
      throw cli::ValidationError({"--values: \"" + item + "\" is not a number"});
    }
  }
  if (out.empty()) throw cli::ValidationError({"--values: empty list"});
  return out;
}

void report(const cli::ExperimentReport& r, const std::vector<std::filesystem::path>& paths) {
  std::cout << r.name << ": " << (r.applicable ? "applicable" : "inapplicable") << ", "
            << r.failures.size() << " finding(s)\n";
  for (const auto& f : r.failures) std::cout << "  " << f << "\n";
  for (const auto& p : paths) std::cout << "  wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uclab: numerical experiments on harmonic gradients and doubling indices"};
  app.set_version_flag("--version", cli::version());
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int workers = 0;
  std::string axis;
  std::string values;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config, "config JSON")->required();
  run->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024));
  run->add_option("--out", out, "output directory (default $UCLAB_OUT or uclab_out)");

  auto* sw = app.add_subcommand("sweep", "run an experiment over values of one parameter");
  sw->add_option("config", config, "config JSON")->required();
  sw->add_option("--axis", axis, "parameter name or dotted path")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024));
  sw->add_option("--out", out, "output directory (default $UCLAB_OUT or uclab_out)");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config, "config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(cli::ExitCode::validation_error);
  }
  const std::filesystem::path dir = out.empty() ? default_out() : std::filesystem::path(out);

  try {
    io::Json j = read_json(config);
    if (workers > 0 && j.is_object()) j["workers"] = workers;
    if (*val) {
      const auto cfg = cli::parse_config(j);
      std::cout << cfg.name << ": valid " << cli::to_string(cfg.kind) << " config, " << cfg.functions.size()
                << " function(s)\n";
      return code(cli::ExitCode::ok);
    }
    if (*run) {
      const auto rep = cli::run(cli::parse_config(j));
      report(rep, cli::write_report(rep, dir));
      return code(rep.applicable ? cli::ExitCode::ok : cli::ExitCode::inapplicable);
    }
    const int w = workers > 0 ? workers : (j.is_object() && j.contains("workers") && j["workers"].is_number_integer()
                                               ? j["workers"].get<int>()
                                               : 1);
    const auto res = cli::sweep(j, axis, parse_values(values), w);
    bool any = false;
    for (const auto& r : res.reports) {
      any = any || r.applicable;
      report(r, cli::write_report(r, dir));
    }
    const auto name = j.value("name", std::string("sweep"));
    const auto csv = dir / (name + ".sweep-" + axis + ".csv");
    io::write_atomic(csv, res.csv);
    std::cout << "wrote " << csv.string() << "\n";
    return code(any ? cli::ExitCode::ok : cli::ExitCode::inapplicable);
  } catch (const cli::ValidationError& e) {
    std::cerr << "invalid config:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return code(cli::ExitCode::validation_error);
  } catch (const uclab::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return code(cli::ExitCode::validation_error);
  } catch (const uclab::Inapplicable& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return code(cli::ExitCode::inapplicable);
  } catch (const std::exception& e) {
    std::cerr << "internal failure: " << e.what() << "\n";
    return code(cli::ExitCode::internal_failure);
  }
}
