// Command-line front end: structural diagnostics, lifted-model fitting, and
// dictionary-degree sweeps for control-affine systems, with reproducible
// seeded configs echoed into every output artifact.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "koopcheck/error.hpp"
#include "koopcheck/report.hpp"

namespace {

using koopcheck::RunConfig;

struct CliFlags {
  std::string config_path;
  std::string system;
  std::string system_file;
  std::string state_box;
  std::string input_box;
  std::string x0;
  std::string degrees;
  std::string out;
  std::string format;
  int degree = 0;
  int samples = 0;
  int larc_depth = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double rank_tol = 0.0;
  double restriction_tol = 0.0;
  double ridge = 0.0;
};

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) {
      throw koopcheck::InvalidArgumentError("cannot parse number '" + item + "'");
    }
    values.push_back(v);
  }
  return values;
}

// "lo,hi" (one interval per axis) or "lo1,hi1;lo2,hi2;...".
void parse_box(const std::string& text, std::vector<double>& lo, std::vector<double>& hi) {
  lo.clear();
  hi.clear();
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const auto bounds = parse_numbers(pair, ',');
    if (bounds.size() != 2) {
      throw koopcheck::InvalidArgumentError("box interval '" + pair + "' must be 'lo,hi'");
    }
    lo.push_back(bounds[0]);
    hi.push_back(bounds[1]);
  }
  if (lo.empty()) throw koopcheck::InvalidArgumentError("empty box specification");
}

// "1..10" or "1,3,5".
std::vector<int> parse_degrees(const std::string& text) {
  std::vector<int> degrees;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const int first = std::stoi(text.substr(0, range_pos));
    const int last = std::stoi(text.substr(range_pos + 2));
    if (last < first) throw koopcheck::InvalidArgumentError("empty degree range");
    degrees.resize(last - first + 1);
    std::iota(degrees.begin(), degrees.end(), first);
  } else {
    for (double v : parse_numbers(text, ',')) degrees.push_back(static_cast<int>(v));
  }
  if (degrees.empty()) throw koopcheck::InvalidArgumentError("empty degree list");
  return degrees;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw koopcheck::IOError("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw koopcheck::InvalidArgumentError("malformed JSON in '" + path + "': " + e.what());
  }
  return j;
}

// Relative output paths land in $KOOPCHECK_OUT_DIR when it is set.
std::string resolve_out_path(const std::string& path) {
  const char* dir = std::getenv("KOOPCHECK_OUT_DIR");
  if (dir == nullptr || path.empty() || std::filesystem::path(path).is_absolute()) {
    return path;
  }
  return (std::filesystem::path(dir) / path).string();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw koopcheck::IOError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw koopcheck::IOError("failed while writing '" + path + "'");
}

void add_common_options(CLI::App* sub, CliFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file; flags override its values");
  sub->add_option("--system", flags.system,
                  "slow-manifold-x1 | slow-manifold-x2 | triple-chain | affine-random | affine");
  sub->add_option("--system-file", flags.system_file, "affine system JSON with F, G, d");
  sub->add_option("--degree", flags.degree, "maximal monomial degree");
  sub->add_option("--samples", flags.samples, "number of uniform samples");
  sub->add_option("--seed", flags.seed, "seed for the counter-based generator");
  sub->add_option("--dt", flags.dt, "sampling time for discretization");
  sub->add_option("--state-box", flags.state_box, "'lo,hi' or 'lo1,hi1;lo2,hi2;...'");
  sub->add_option("--input-box", flags.input_box, "'lo,hi' or per-channel intervals");
  sub->add_option("--x0", flags.x0, "anchor point, comma separated (default: box center)");
  sub->add_option("--depth", flags.larc_depth, "bracket nesting depth (max 4)");
  sub->add_option("--rank-tol", flags.rank_tol, "basis acceptance tolerance");
  sub->add_option("--restrict-tol", flags.restriction_tol,
                  "observable input-direction curvature tolerance");
  sub->add_option("--ridge", flags.ridge, "Tikhonov weight; negative selects the default");
  sub->add_option("--out", flags.out, "output file path");
  sub->add_option("--format", flags.format, "csv | json (sweep output)");
}

RunConfig build_config(const CLI::App* sub, const CliFlags& flags) {
  RunConfig cfg;
  if (sub->count("--config") > 0) cfg = RunConfig::from_json(load_json_file(flags.config_path));
  if (sub->count("--system") > 0) cfg.system = flags.system;
  if (sub->count("--system-file") > 0) cfg.system_file = flags.system_file;
  if (sub->count("--degree") > 0) cfg.degree = flags.degree;
  if (sub->count("--samples") > 0) cfg.samples = flags.samples;
  if (sub->count("--seed") > 0) cfg.seed = flags.seed;
  if (sub->count("--dt") > 0) cfg.dt = flags.dt;
  if (sub->count("--state-box") > 0) parse_box(flags.state_box, cfg.state_lo, cfg.state_hi);
  if (sub->count("--input-box") > 0) parse_box(flags.input_box, cfg.input_lo, cfg.input_hi);
  if (sub->count("--x0") > 0) cfg.x0 = parse_numbers(flags.x0, ',');
  if (sub->count("--depth") > 0) cfg.larc_depth = flags.larc_depth;
  if (sub->count("--rank-tol") > 0) cfg.rank_tol = flags.rank_tol;
  if (sub->count("--restrict-tol") > 0) cfg.restriction_tol = flags.restriction_tol;
  if (sub->count("--ridge") > 0) cfg.ridge = flags.ridge;
  if (sub->count("--out") > 0) cfg.out = flags.out;
  if (sub->count("--format") > 0) cfg.format = flags.format;
  if (cfg.format != "csv" && cfg.format != "json") {
    throw koopcheck::InvalidArgumentError("format must be csv or json");
  }
  return cfg;
}

void cmd_diagnose(const RunConfig& cfg) {
  const koopcheck::DiagnosticsReport report = koopcheck::run_diagnostics(cfg);
  std::cout << report.table();
  if (!cfg.out.empty()) {
    const std::string path = resolve_out_path(cfg.out);
    write_text_file(path, report.to_json().dump(2) + "\n");
    std::cout << "wrote " << path << "\n";
  }
}

void cmd_sweep(const RunConfig& cfg) {
  const koopcheck::ControlAffineSystem sys = koopcheck::resolve_system(cfg);
  const koopcheck::Box state_box = koopcheck::resolve_state_box(cfg, sys.state_dim());
  const koopcheck::Box input_box = koopcheck::resolve_input_box(cfg, sys.input_dim());
  const std::vector<koopcheck::SweepRow> rows = koopcheck::degree_sweep(
      sys, cfg.degrees, cfg.samples, cfg.seed, cfg.dt, state_box, input_box, cfg.ridge);

  std::string out = cfg.out;
  if (out.empty()) out = cfg.format == "json" ? "sweep.json" : "sweep.csv";
  const std::string path = resolve_out_path(out);
  if (cfg.format == "json") {
    write_text_file(path, koopcheck::sweep_to_json(rows, cfg).dump(2) + "\n");
  } else {
    std::ostringstream os;
    koopcheck::write_sweep_csv(os, rows, cfg);
    write_text_file(path, os.str());
  }
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
}

void cmd_fit(const RunConfig& cfg) {
  const koopcheck::ControlAffineSystem sys = koopcheck::resolve_system(cfg);
  const koopcheck::Box state_box = koopcheck::resolve_state_box(cfg, sys.state_dim());
  const koopcheck::Box input_box = koopcheck::resolve_input_box(cfg, sys.input_dim());
  const koopcheck::Dictionary dict = koopcheck::Dictionary::monomials(sys.state_dim(), cfg.degree);
  const koopcheck::SampleSet samples =
      koopcheck::sample_uniform(state_box, input_box, cfg.samples, cfg.seed);
  const koopcheck::TransitionTriples triples = koopcheck::generate_triples(sys, samples, cfg.dt);
  const koopcheck::EdmdcModel model = koopcheck::fit_edmdc(dict, triples, cfg.ridge);

  nlohmann::json out = model.to_json();
  out["config"] = cfg.to_json();
  const std::string path = resolve_out_path(cfg.out.empty() ? "model.json" : cfg.out);
  write_text_file(path, out.dump(2) + "\n");
  std::cout << "fitted " << dict.size() << " observables, training residual "
            << koopcheck::format_double(model.training_residual) << ", condition number "
            << koopcheck::format_double(model.condition_number) << "\n"
            << "wrote " << path << "\n";
}

void cmd_larc(const RunConfig& cfg) {
  const koopcheck::ControlAffineSystem sys = koopcheck::resolve_system(cfg);
  const koopcheck::Box state_box = koopcheck::resolve_state_box(cfg, sys.state_dim());
  const Eigen::VectorXd anchor = koopcheck::resolve_anchor(cfg, state_box);
  std::cout << koopcheck::larc_dimension(sys, anchor, cfg.larc_depth) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTI Koopman suitability diagnostics for control-affine systems"};
  app.require_subcommand(1);

  CliFlags flags;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "excitability, controllability, and curvature report");
  CLI::App* sweep = app.add_subcommand("sweep", "lifted-model error over dictionary degrees");
  CLI::App* fit = app.add_subcommand("fit", "fit one lifted model and write it as JSON");
  CLI::App* larc = app.add_subcommand("larc", "bracket span dimension at a point");
  for (CLI::App* sub : {diagnose, sweep, fit, larc}) add_common_options(sub, flags);
  std::string degrees_flag = "1..10";
  sweep->add_option("--degrees", degrees_flag, "'1..10' or comma-separated list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (diagnose->parsed()) {
      cmd_diagnose(build_config(diagnose, flags));
    } else if (sweep->parsed()) {
      RunConfig cfg = build_config(sweep, flags);
      if (sweep->count("--degrees") > 0 || cfg.degrees.empty()) {
        cfg.degrees = parse_degrees(degrees_flag);
      }
      cmd_sweep(cfg);
    } else if (fit->parsed()) {
      cmd_fit(build_config(fit, flags));
    } else if (larc->parsed()) {
      cmd_larc(build_config(larc, flags));
    }
  } catch (const koopcheck::EvaluationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const koopcheck::IllConditionedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const koopcheck::IOError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const koopcheck::Error& e) {
    // invalid arguments, unknown systems, violated preconditions
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
