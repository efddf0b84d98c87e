#include "koopcheck/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "koopcheck/error.hpp"

namespace koopcheck {

namespace {

// Observable rows with every curvature sup below this are flagged "OK".
constexpr double kBiasVerdictTol = 1e-10;
constexpr double kAffineDetectTol = 1e-8;

template <typename F>
auto run_stage(const std::string& name, F&& fn) {
  const auto prefix = [&name](const Error& e) {
    return "stage " + name + ": " + e.what();
  };
  try {
    return fn();
  } catch (const NotFoundError& e) {
    throw NotFoundError(prefix(e));
  } catch (const InvalidSystemError& e) {
    throw InvalidSystemError(prefix(e));
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(prefix(e));
  } catch (const EvaluationError& e) {
    throw EvaluationError(prefix(e));
  } catch (const IllConditionedError& e) {
    throw IllConditionedError(prefix(e));
  } catch (const AssumptionViolatedError& e) {
    throw AssumptionViolatedError(prefix(e));
  } catch (const DepthLimitError& e) {
    throw DepthLimitError(prefix(e));
  } catch (const IOError& e) {
    throw IOError(prefix(e));
  }
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) {
    throw InvalidArgumentError("expected a nonempty array of matrix rows");
  }
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.at(0).size());
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows.at(i).size()) != c) {
      throw InvalidArgumentError("ragged matrix rows");
    }
    for (int j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  }
  return m;
}

Box broadcast_box(const std::vector<double>& lo, const std::vector<double>& hi, int dim,
                  const char* what) {
  auto expand = [&](const std::vector<double>& v) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(dim, v[0]).eval();
    if (static_cast<int>(v.size()) == dim) {
      return Eigen::Map<const Eigen::VectorXd>(v.data(), dim).eval();
    }
    throw InvalidArgumentError(std::string(what) +
                               " box bounds must have 1 or n entries");
  };
  Box box{expand(lo), expand(hi)};
  box.validate();
  return box;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"system", system},
                   {"degree", degree},
                   {"samples", samples},
                   {"seed", seed},
                   {"dt", dt},
                   {"state_box", {{"lo", state_lo}, {"hi", state_hi}}},
                   {"input_box", {{"lo", input_lo}, {"hi", input_hi}}},
                   {"larc_depth", larc_depth},
                   {"rank_tol", rank_tol},
                   {"restriction_tol", restriction_tol},
                   {"ridge", ridge},
                   {"format", format}};
  if (!system_file.empty()) j["system_file"] = system_file;
  if (!degrees.empty()) j["degrees"] = degrees;
  if (!x0.empty()) j["x0"] = x0;
  if (!out.empty()) j["out"] = out;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.system = j.value("system", c.system);
  c.system_file = j.value("system_file", c.system_file);
  c.degree = j.value("degree", c.degree);
  c.degrees = j.value("degrees", c.degrees);
  c.samples = j.value("samples", c.samples);
  c.seed = j.value("seed", c.seed);
  c.dt = j.value("dt", c.dt);
  if (j.contains("state_box")) {
    c.state_lo = j.at("state_box").at("lo").get<std::vector<double>>();
    c.state_hi = j.at("state_box").at("hi").get<std::vector<double>>();
  }
  if (j.contains("input_box")) {
    c.input_lo = j.at("input_box").at("lo").get<std::vector<double>>();
    c.input_hi = j.at("input_box").at("hi").get<std::vector<double>>();
  }
  c.x0 = j.value("x0", c.x0);
  c.larc_depth = j.value("larc_depth", c.larc_depth);
  c.rank_tol = j.value("rank_tol", c.rank_tol);
  c.restriction_tol = j.value("restriction_tol", c.restriction_tol);
  c.ridge = j.value("ridge", c.ridge);
  c.out = j.value("out", c.out);
  c.format = j.value("format", c.format);
  return c;
}

ControlAffineSystem resolve_system(const RunConfig& config) {
  if (config.system == "affine-random") {
    // Deterministic 2-state, 1-input affine system drawn from the run seed.
    const CounterRng rng(config.seed ^ 0xAFF14EULL);
    std::uint64_t counter = 0;
    auto draw = [&] { return 2.0 * rng.uniform01(counter++) - 1.0; };
    Eigen::MatrixXd F(2, 2), G(2, 1);
    Eigen::VectorXd d(2);
    F << draw(), draw(), draw(), draw();
    d << draw(), draw();
    for (;;) {
      G << draw(), draw();
      if (G.norm() > 0.1) break;
    }
    return make_affine_system(F, G, d);
  }
  if (config.system == "affine") {
    if (config.system_file.empty()) {
      throw InvalidArgumentError("system 'affine' requires a system file with F, G, d");
    }
    std::ifstream in(config.system_file);
    if (!in) throw IOError("cannot read system file '" + config.system_file + "'");
    nlohmann::json j;
    try {
      in >> j;
      return make_affine_system(matrix_from_json(j.at("F")), matrix_from_json(j.at("G")),
                                Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                                    j.at("d").get<std::vector<double>>().data(),
                                    static_cast<int>(j.at("d").size()))));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgumentError("malformed system file '" + config.system_file +
                                 "': " + e.what());
    }
  }
  return make_builtin(config.system);
}

Box resolve_state_box(const RunConfig& config, int n) {
  return broadcast_box(config.state_lo, config.state_hi, n, "state");
}

Box resolve_input_box(const RunConfig& config, int m) {
  return broadcast_box(config.input_lo, config.input_hi, m, "input");
}

Eigen::VectorXd resolve_anchor(const RunConfig& config, const Box& state_box) {
  if (config.x0.empty()) return state_box.center();
  if (static_cast<int>(config.x0.size()) != state_box.dim()) {
    throw InvalidArgumentError("x0 has wrong dimension");
  }
  return Eigen::Map<const Eigen::VectorXd>(config.x0.data(), state_box.dim());
}

std::string derive_verdict(bool excitable, double max_drift_nonlinearity, double affine_tol) {
  if (!excitable) {
    return "not directionally excitable (no witness found in the search box): an exact LTI "
           "representation is not ruled out; nonlinear autonomous dynamics may persist "
           "outside the excited subspace";
  }
  if (max_drift_nonlinearity > affine_tol) {
    return "exact LTI representation impossible: the system is directionally excitable and "
           "its drift is not affine";
  }
  return "affine dynamics: an exact LTI representation exists (affine observables suffice)";
}

DiagnosticsReport run_diagnostics(const RunConfig& config) {
  DiagnosticsReport rep;
  rep.config = config;

  const ControlAffineSystem sys =
      run_stage("system", [&] { return resolve_system(config); });
  rep.system_name = sys.name();
  const int n = sys.state_dim();
  const Box state_box = resolve_state_box(config, n);
  const Box input_box = resolve_input_box(config, sys.input_dim());
  const Eigen::VectorXd anchor = resolve_anchor(config, state_box);

  rep.certificate = run_stage("excitability", [&] {
    return excitability_basis(sys, state_box, config.seed, config.rank_tol);
  });
  rep.kalman_rank_at_anchor = run_stage("kalman", [&] {
    return kalman_rank(sys.jacobian(anchor), sys.input_matrix());
  });
  rep.larc_depth = config.larc_depth;
  rep.larc_dim =
      run_stage("larc", [&] { return larc_dimension(sys, anchor, config.larc_depth); });

  const Dictionary dict = Dictionary::monomials(n, config.degree);
  rep.conditions = run_stage("curvature", [&] {
    return curvature_conditions(sys, dict, state_box, config.samples, config.seed);
  });
  rep.drift_nonlinearity = run_stage("curvature", [&] {
    Eigen::VectorXd nl = Eigen::VectorXd::Zero(n);
    const CounterRng rng(config.seed);
    for (int s = 0; s < config.samples; ++s) {
      const Eigen::VectorXd x = state_box.sample(rng, static_cast<std::uint64_t>(s) * n);
      for (int j = 0; j < n; ++j) {
        nl(j) = std::max(nl(j), spectral_norm(sys.drift_hessian(j, x)));
      }
    }
    return nl;
  });

  run_stage("bounds", [&] {
    const SampleSet set = sample_uniform(state_box, input_box, config.samples, config.seed);
    const GeneratorModel model = generator_fit(sys, dict, set.states, anchor, 0.0);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(sys.input_dim(), 0.1);
    for (int i = 0; i < dict.size(); ++i) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(dict.size());
      a(i) = 1.0;
      const BiasBound b = anchored_bias_bound(sys, dict, a, model, state_box, u, set.states);
      rep.anchored_bounds.push_back({dict.label(i), b.lhs_max, b.rhs});
      try {
        rep.restricted_bounds.emplace_back(restricted_bias_bound(
            sys, dict, i, state_box, set.states, config.restriction_tol));
      } catch (const AssumptionViolatedError&) {
        rep.restricted_bounds.emplace_back(std::nullopt);
      }
    }
    return 0;
  });

  rep.verdict = derive_verdict(rep.certificate.excitable, rep.drift_nonlinearity.maxCoeff(),
                               kAffineDetectTol);
  return rep;
}

nlohmann::json DiagnosticsReport::to_json() const {
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& row : anchored_bounds) {
    bounds.push_back({{"observable", row.label}, {"lhs_max", row.lhs_max}, {"rhs", row.rhs}});
  }
  nlohmann::json restricted = nlohmann::json::array();
  for (const auto& v : restricted_bounds) {
    if (v.has_value()) {
      restricted.push_back(*v);
    } else {
      restricted.push_back(nullptr);
    }
  }
  return {{"config", config.to_json()},
          {"system", system_name},
          {"excitability", certificate.to_json()},
          {"kalman_rank_at_anchor", kalman_rank_at_anchor},
          {"larc", {{"dimension", larc_dim}, {"depth", larc_depth}}},
          {"conditions", conditions.to_json()},
          {"drift_nonlinearity", to_vec(drift_nonlinearity)},
          {"anchored_bounds", bounds},
          {"restricted_bounds", restricted},
          {"verdict", verdict}};
}

std::string DiagnosticsReport::table() const {
  std::ostringstream os;
  char line[256];
  os << "system: " << system_name << "\n";
  os << "excitable: " << (certificate.excitable ? "yes" : "no (no witness found)")
     << "  basis rank: " << certificate.rank << "/" << certificate.basis.rows()
     << "  kalman rank at anchor: " << kalman_rank_at_anchor << "  larc dimension: " << larc_dim
     << " (depth " << larc_depth << ")\n\n";

  os << "observable curvature along input directions (sampled sup-norms)\n";
  std::snprintf(line, sizeof(line), "  %-12s %12s %12s %12s  %s\n", "observable", "own",
                "coupled", "total", "verdict");
  os << line;
  for (int i = 0; i < static_cast<int>(conditions.labels.size()); ++i) {
    const double own = conditions.observable_curvature(i);
    const double coupled = conditions.coupling_curvature(i);
    const double total = conditions.total_curvature(i);
    const bool ok = own < kBiasVerdictTol && coupled < kBiasVerdictTol && total < kBiasVerdictTol;
    std::snprintf(line, sizeof(line), "  %-12s %12.4e %12.4e %12.4e  %s\n",
                  conditions.labels[i].c_str(), own, coupled, total, ok ? "OK" : "BIAS");
    os << line;
  }
  os << "\ndrift curvature (along input directions | full, for the affinity test)\n";
  for (int j = 0; j < conditions.drift_curvature.size(); ++j) {
    const double v = conditions.drift_curvature(j);
    std::snprintf(line, sizeof(line), "  f%-11d %12.4e %12.4e %25s  %s\n", j + 1, v,
                  drift_nonlinearity(j), "", v < kBiasVerdictTol ? "OK" : "BIAS");
    os << line;
  }

  os << "\nbias bounds per observable (anchored input matrix, u = 0.1 per channel)\n";
  std::snprintf(line, sizeof(line), "  %-12s %12s %12s %14s\n", "observable", "worst error",
                "bound", "restricted");
  os << line;
  for (size_t i = 0; i < anchored_bounds.size(); ++i) {
    const auto& row = anchored_bounds[i];
    std::string restricted = "n/a";
    if (i < restricted_bounds.size() && restricted_bounds[i].has_value()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%12.4e", *restricted_bounds[i]);
      restricted = buf;
    }
    std::snprintf(line, sizeof(line), "  %-12s %12.4e %12.4e %14s\n", row.label.c_str(),
                  row.lhs_max, row.rhs, restricted.c_str());
    os << line;
  }
  os << "\nverdict: " << verdict << "\n";
  return os.str();
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                     const RunConfig& config) {
  os << "# config: " << config.to_json().dump() << "\n";
  os << "Degree,Training Error,Autonomous Part Error,Control Part Error\n";
  for (const auto& row : rows) {
    os << row.degree << "," << format_double(row.errors.combined) << ","
       << format_double(row.errors.autonomous) << ","
       << format_double(row.errors.input_dependent) << "\n";
  }
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows, const RunConfig& config) {
  nlohmann::json out{{"config", config.to_json()}, {"rows", nlohmann::json::array()}};
  for (const auto& row : rows) {
    out["rows"].push_back({{"degree", row.degree},
                           {"combined", row.errors.combined},
                           {"autonomous", row.errors.autonomous},
                           {"input_dependent", row.errors.input_dependent}});
  }
  return out;
}

}  // namespace koopcheck
