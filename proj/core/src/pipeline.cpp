#include "sprid/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "sprid/error.hpp"
#include "sprid/gobf.hpp"
#include "sprid/io.hpp"

namespace sprid {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, value));
  }
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  if (!value.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, value));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean (true/false)", key, value));
}

std::filesystem::path to_path(const std::string& value, const std::filesystem::path& base_dir) {
  std::filesystem::path p(value);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p.lexically_normal();
}

std::vector<BasisAtom> parse_atom_list(const std::string& text) {
  std::vector<BasisAtom> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(BasisAtom::parse(item));
  }
  if (out.empty()) throw ConfigError("atoms: no basis atoms given");
  return out;
}

std::string join_atoms(const std::vector<BasisAtom>& atoms) {
  std::string out;
  for (const auto& atom : atoms) {
    if (!out.empty()) out += ',';
    out += atom.to_string();
  }
  return out;
}

/// Rethrows any failure inside `body` with the stage name in front, keeping the exit code.
template <class F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("[{}] {}", stage, e.what()));
  } catch (const std::exception& e) {
    throw Error(ExitCode::kNumerical, fmt::format("[{}] {}", stage, e.what()));
  }
}

double phase_deg(Complex z) { return std::arg(z) * 180.0 / std::numbers::pi; }

void echo_config(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [k, v] : entries) out << "# config " << k << '=' << v << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  out.close();
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

void remove_outputs(const std::filesystem::path& dir) {
  std::error_code ec;
  for (const auto& name : kPipelineOutputs) std::filesystem::remove(dir / name, ec);
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir) {
  if (key == "frf") frf = value.empty() ? std::filesystem::path{} : to_path(value, base_dir);
  else if (key == "tio") tio = value.empty() ? std::filesystem::path{} : to_path(value, base_dir);
  else if (key == "out_dir") out_dir = to_path(value, base_dir);
  else if (key == "basis") {
    if (value != "from-okid" && value != "laguerre" && value != "kautz" && value != "mixed") {
      throw ConfigError(fmt::format("basis: '{}' is not one of from-okid, laguerre, kautz, mixed", value));
    }
    basis = value;
  } else if (key == "laguerre_a") laguerre_a = to_double(key, value);
  else if (key == "kautz_b") kautz_b = to_double(key, value);
  else if (key == "kautz_c") kautz_c = to_double(key, value);
  else if (key == "atoms") atoms = value;
  else if (key == "n_funcs") n_funcs = to_int(key, value);
  else if (key == "feedthrough") feedthrough = to_bool(key, value);
  else if (key == "epsilon") {
    if (value == "auto") epsilon.reset();
    else epsilon = to_double(key, value);
  } else if (key == "mode") {
    if (value == "absolute") mode = ConstraintMode::kAbsolute;
    else if (value == "ratio") mode = ConstraintMode::kRatio;
    else throw ConfigError(fmt::format("mode: '{}' is not absolute or ratio", value));
  } else if (key == "grid_mult") grid_mult = to_int(key, value);
  else if (key == "refine_rounds") refine_rounds = to_int(key, value);
  else if (key == "p_window") p_window = to_int(key, value);
  else if (key == "hankel_rows") hankel_rows = to_int(key, value);
  else if (key == "hankel_cols") hankel_cols = to_int(key, value);
  else if (key == "sv_threshold") sv_threshold = to_double(key, value);
  else if (key == "order") order = to_int(key, value);
  else if (key == "realization") {
    if (value == "system") realization = RealizationRoute::kSystemMarkov;
    else if (value == "observer") realization = RealizationRoute::kObserverMarkov;
    else throw ConfigError(fmt::format("realization: '{}' is not system or observer", value));
  } else if (key == "n_freqs") n_freqs = to_int(key, value);
  else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void PipelineConfig::validate() const {
  if (frf.empty() && tio.empty()) throw ConfigError("no input: set frf and/or tio");
  if (basis == "from-okid" && tio.empty()) throw ConfigError("basis=from-okid needs time-domain data (tio)");
  if (basis == "mixed" && atoms.empty()) throw ConfigError("basis=mixed needs an atoms list");
  if (n_funcs < 1 || n_funcs > kMaxBasisFunctions) {
    throw ConfigError(fmt::format("n_funcs must be in [1, {}]", kMaxBasisFunctions));
  }
  if (epsilon && !(*epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (grid_mult < 1) throw ConfigError("grid_mult must be >= 1");
  if (refine_rounds < 0) throw ConfigError("refine_rounds must be >= 0");
  if (p_window < 0 || hankel_rows < 0 || hankel_cols < 0 || order < 0) {
    throw ConfigError("p_window, hankel_rows, hankel_cols and order must be non-negative");
  }
  if (!(sv_threshold > 0.0 && sv_threshold < 1.0)) throw ConfigError("sv_threshold must be in (0, 1)");
  if (n_freqs < 2) throw ConfigError("n_freqs must be >= 2");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  return {
      {"frf", frf.string()},
      {"tio", tio.string()},
      {"out_dir", out_dir.string()},
      {"basis", basis},
      {"laguerre_a", format_number(laguerre_a)},
      {"kautz_b", format_number(kautz_b)},
      {"kautz_c", format_number(kautz_c)},
      {"atoms", atoms},
      {"n_funcs", std::to_string(n_funcs)},
      {"feedthrough", feedthrough ? "true" : "false"},
      {"epsilon", epsilon ? format_number(*epsilon) : "auto"},
      {"mode", mode == ConstraintMode::kRatio ? "ratio" : "absolute"},
      {"grid_mult", std::to_string(grid_mult)},
      {"refine_rounds", std::to_string(refine_rounds)},
      {"p_window", std::to_string(effective_window())},
      {"hankel_rows", std::to_string(hankel_rows)},
      {"hankel_cols", std::to_string(hankel_cols)},
      {"sv_threshold", format_number(sv_threshold)},
      {"order", std::to_string(order)},
      {"realization", realization == RealizationRoute::kObserverMarkov ? "observer" : "system"},
      {"n_freqs", std::to_string(n_freqs)},
  };
}

int PipelineConfig::effective_window() const {
  if (p_window > 0) return p_window;
  return order > 0 ? OkidConfig::default_window(order) : 20;
}

OkidConfig PipelineConfig::okid_config() const {
  OkidConfig out;
  out.p_window = effective_window();
  out.hankel_rows = hankel_rows;
  out.hankel_cols = hankel_cols;
  out.order_rule = order > 0 ? OrderRule::fixed(order) : OrderRule::relative(sv_threshold);
  out.route = realization;
  return out;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  PipelineConfig cfg;
  const auto base_dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", path.string(), line_no));
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  return cfg;
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  staged("config", [&] { cfg.validate(); });
  remove_outputs(cfg.out_dir);

  PipelineReport report;
  report.model_path = cfg.out_dir / "model.txt";
  report.bode_path = cfg.out_dir / "bode.txt";
  report.nyquist_path = cfg.out_dir / "nyquist.txt";
  report.diagnostics_path = cfg.out_dir / "diagnostics.txt";

  std::optional<FrequencyResponse> data;
  if (!cfg.frf.empty()) data = staged("parse", [&] { return parse_frf(cfg.frf).to_response(); });

  if (!cfg.tio.empty()) {
    const TioFile tio = staged("parse", [&] { return parse_tio(cfg.tio); });
    report.okid = staged("okid", [&] { return okid_era(tio.u, tio.y, cfg.okid_config(), tio.ts); });
    if (data && std::abs(data->ts() - tio.ts) > 1e-12 * tio.ts) {
      throw ConfigError("[config] frf and tio sampling periods differ");
    }
    if (!data) {
      data = staged("okid", [&] {
        const auto grid = uniform_grid(tio.ts, static_cast<std::size_t>(cfg.n_freqs));
        return FrequencyResponse(grid, ss_eval_freq(report.okid->model, grid), tio.ts);
      });
    }
  }

  const GobfBasis basis = staged("basis", [&] {
    BasisSpec spec;
    spec.n_funcs = cfg.n_funcs;
    spec.include_feedthrough = cfg.feedthrough;
    if (cfg.basis == "laguerre") spec.atoms = {BasisAtom::laguerre(cfg.laguerre_a)};
    else if (cfg.basis == "kautz") spec.atoms = {BasisAtom::kautz(cfg.kautz_b, cfg.kautz_c)};
    else if (cfg.basis == "mixed") spec.atoms = parse_atom_list(cfg.atoms);
    else spec.atoms = atoms_from_poles(report.okid->poles);
    if (spec.atoms.empty()) throw NumericalError("no usable poles for the basis");
    return GobfBasis(spec, data->ts());
  });
  report.basis = basis.spec();

  SprFitConfig fit_cfg;
  fit_cfg.epsilon = cfg.epsilon;
  fit_cfg.mode = cfg.mode;
  fit_cfg.verify_mult = cfg.grid_mult;
  fit_cfg.refine_rounds = cfg.refine_rounds;
  report.fit = staged("fit", [&] { return fit_spr(*data, basis, fit_cfg); });
  const SprFitResult& fit = *report.fit;

  auto entries = cfg.entries();
  for (auto& [k, v] : entries) {
    if (k == "epsilon") v = format_number(fit.epsilon);
  }

  staged("output", [&] {
    const auto& omegas = data->omegas();
    const auto fitted = eval_freq(fit.fitted_tf, omegas);

    ModelFile model;
    model.config = entries;
    auto& f = model.fields;
    const auto num = [](double v) { return format_number(v); };
    f = {
        {"format", "sprident-model-1"},
        {"ts", num(data->ts())},
        {"basis", join_atoms(basis.spec().atoms)},
        {"n_funcs", std::to_string(basis.spec().n_funcs)},
        {"feedthrough", basis.spec().include_feedthrough ? "true" : "false"},
        {"n_theta", std::to_string(fit.theta.size())},
        {"epsilon", num(fit.epsilon)},
        {"mode", fit.mode == ConstraintMode::kRatio ? "ratio" : "absolute"},
        {"objective", num(fit.objective)},
        {"worst_case_error", num(fit.worst_case_error)},
        {"relative_error", num(fit.relative_error)},
        {"min_real_part", num(fit.min_real_part)},
        {"min_real_omega", num(fit.min_real_omega)},
        {"dense_min_real_part", num(fit.dense_min_real_part)},
        {"dense_min_omega", num(fit.dense_min_omega)},
        {"relative_degree", std::to_string(fit.fitted_tf.relative_degree())},
        {"kkt_stationarity", num(fit.kkt.stationarity)},
        {"kkt_primal_feasibility", num(fit.kkt.primal_feasibility)},
        {"kkt_dual_feasibility", num(fit.kkt.dual_feasibility)},
        {"kkt_complementarity", num(fit.kkt.complementarity)},
        {"ridge", num(fit.ridge)},
        {"qp_iterations", std::to_string(fit.qp_iterations)},
        {"refinement_rounds", std::to_string(fit.refinement_rounds)},
        {"n_active", std::to_string(fit.active_set.size())},
    };
    if (fit.min_ratio_real_part) f.emplace_back("min_ratio_real_part", num(*fit.min_ratio_real_part));
    model.theta = fit.theta;
    model.num = fit.fitted_tf.num();
    model.den = fit.fitted_tf.den();
    for (int i : fit.active_set) model.active_omegas.push_back(fit.constraint_omegas[static_cast<std::size_t>(i)]);
    std::ostringstream model_text;
    emit_model(model_text, model);

    std::ostringstream bode;
    bode << "# sprident bode v1\n";
    echo_config(bode, entries);
    bode << "# omega mag_G phase_G_deg mag_Ghat phase_Ghat_deg\n";
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const Complex g = data->values()[i];
      bode << num(omegas[i]) << ' ' << num(std::abs(g)) << ' ' << num(phase_deg(g)) << ' '
           << num(std::abs(fitted[i])) << ' ' << num(phase_deg(fitted[i])) << '\n';
    }

    // G is known between data points only when it came from the identified model.
    const auto& dense = fit.dense_omegas;
    const auto dense_fit = eval_freq(fit.fitted_tf, dense);
    std::vector<Complex> dense_g(dense.size(), Complex(std::numeric_limits<double>::quiet_NaN(),
                                                       std::numeric_limits<double>::quiet_NaN()));
    if (cfg.frf.empty() && report.okid) {
      dense_g = ss_eval_freq(report.okid->model, dense);
    } else {
      std::size_t j = 0;
      for (std::size_t i = 0; i < dense.size() && j < omegas.size(); ++i) {
        if (dense[i] == omegas[j]) dense_g[i] = data->values()[j++];
      }
    }
    std::ostringstream nyquist;
    nyquist << "# sprident nyquist v1\n";
    echo_config(nyquist, entries);
    nyquist << "# G is nan where no measurement exists\n";
    nyquist << "# omega re_G im_G re_Ghat im_Ghat\n";
    for (std::size_t i = 0; i < dense.size(); ++i) {
      nyquist << num(dense[i]) << ' ' << num(dense_g[i].real()) << ' ' << num(dense_g[i].imag()) << ' '
              << num(dense_fit[i].real()) << ' ' << num(dense_fit[i].imag()) << '\n';
    }

    std::ostringstream diag;
    diag << "# sprident diagnostics v1\n";
    echo_config(diag, entries);
    if (report.okid) {
      const OkidResult& ok = *report.okid;
      diag << "[okid]\n";
      diag << "retained_order=" << ok.retained_order << '\n';
      diag << "regression_rank=" << ok.regression_rank << '\n';
      diag << "rank_deficient=" << (ok.rank_deficient ? "true" : "false") << '\n';
      diag << "ls_residual=" << num(ok.ls_residual) << '\n';
      diag << "[singular_values]\n";
      for (Eigen::Index i = 0; i < ok.singular_values.size(); ++i) diag << num(ok.singular_values(i)) << '\n';
      diag << "[poles]\n# re im modulus\n";
      for (const Complex& p : ok.poles) {
        diag << num(p.real()) << ' ' << num(p.imag()) << ' ' << num(std::abs(p)) << '\n';
      }
    }
    diag << "[basis]\n";
    for (const auto& atom : basis.spec().atoms) diag << atom.to_string() << '\n';
    diag << "[spr]\n";
    diag << "epsilon=" << num(fit.epsilon) << '\n';
    diag << "min_real_part=" << num(fit.min_real_part) << '\n';
    diag << "dense_points=" << dense.size() << '\n';
    diag << "dense_min_real_part=" << num(fit.dense_min_real_part) << '\n';
    diag << "dense_min_omega=" << num(fit.dense_min_omega) << '\n';
    diag << "dense_margin=" << num(fit.dense_min_real_part - fit.epsilon) << '\n';
    double data_min = std::numeric_limits<double>::infinity();
    for (const Complex& g : data->values()) data_min = std::min(data_min, g.real());
    diag << "data_min_real_part=" << num(data_min) << '\n';
    diag << "[warnings]\n";
    if (report.okid) {
      for (const auto& w : report.okid->warnings) diag << "okid: " << w << '\n';
    }
    for (const auto& w : fit.warnings) diag << "fit: " << w << '\n';

    std::filesystem::create_directories(cfg.out_dir);
    try {
      write_file(report.model_path, model_text.str());
      write_file(report.bode_path, bode.str());
      write_file(report.nyquist_path, nyquist.str());
      write_file(report.diagnostics_path, diag.str());
    } catch (...) {
      remove_outputs(cfg.out_dir);
      throw;
    }
  });
  return report;
}

CheckReport check_model(const std::filesystem::path& model_path, const std::filesystem::path& frf_path,
                        int grid_mult) {
  if (grid_mult < 1) throw ConfigError("grid-mult must be >= 1");
  const ModelFile model = staged("parse", [&] { return parse_model(model_path); });
  const FrequencyResponse data = staged("parse", [&] { return parse_frf(frf_path).to_response(); });
  return staged("check", [&] {
    const RationalTf tf = model.transfer_function();
    if (std::abs(tf.ts() - data.ts()) > 1e-12 * data.ts()) {
      throw ConfigError("model and frf sampling periods differ");
    }
    CheckReport out;
    out.epsilon = model.number("epsilon");
    out.schur = is_schur(tf).schur;
    const SprMargin grid = spr_margin(tf, data.omegas());
    out.min_real_part = grid.minimum;
    out.min_real_omega = grid.argmin_omega;
    const auto dense_omegas = refine_grid(data.omegas(), grid_mult);
    const SprMargin dense = spr_margin(tf, dense_omegas);
    out.dense_min_real_part = dense.minimum;
    out.dense_min_omega = dense.argmin_omega;
    const auto fitted = eval_freq(tf, data.omegas());
    double max_g = 0.0;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
      out.worst_case_error = std::max(out.worst_case_error, std::abs(data.values()[i] - fitted[i]));
      max_g = std::max(max_g, std::abs(data.values()[i]));
    }
    out.relative_error = max_g > 0.0 ? out.worst_case_error / max_g : out.worst_case_error;
    const double tol = 1e-10 * std::max(1.0, out.epsilon);
    out.spr_on_grid = out.schur && out.min_real_part >= out.epsilon - tol;
    out.spr_on_dense_grid = out.schur && out.dense_min_real_part >= out.epsilon - tol;
    return out;
  });
}

}  // namespace sprid
