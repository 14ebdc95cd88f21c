#pragma once

// File formats: dataset CSV (header row, outcome column `y` or `y1..yK`
// plus `n`, optional weight column `w`, everything else features), the flat
// key=value run configuration with a stable hash, and the per-chain draw
// files.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qlbart/data.hpp"
#include "qlbart/dispersion.hpp"
#include "qlbart/draws.hpp"
#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"
#include "qlbart/sampler.hpp"

namespace qlbart {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& field, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + field +
                     "'");
  }
}

}  // namespace detail

// Reads a dataset CSV for the given family. Outcome columns: `y` for the
// scalar families, `y1..yK` for the multinomial. Weight column: `w`
// (scalar) or `n` (multinomial counts); defaults to 1.
inline Dataset read_dataset_csv(const std::string& path, const QuasiFamily& family) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);

  const int k = family.kind == Family::multinomial ? family.dim : 1;
  std::vector<int> y_col(static_cast<std::size_t>(k), -1);
  int w_col = -1;
  std::vector<int> feature_cols;
  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (k == 1 && name == "y") {
      y_col[0] = static_cast<int>(c);
    } else if (k > 1 && name.size() > 1 && name[0] == 'y') {
      bool digits = true;
      for (std::size_t q = 1; q < name.size(); ++q)
        if (!std::isdigit(static_cast<unsigned char>(name[q]))) digits = false;
      if (digits) {
        const int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > k) throw SchemaError(path + ": outcome column " + name +
                                                  " outside y1..y" + std::to_string(k));
        y_col[static_cast<std::size_t>(idx - 1)] = static_cast<int>(c);
      } else {
        feature_cols.push_back(static_cast<int>(c));
        data.feature_names.push_back(name);
      }
    } else if ((k == 1 && name == "w") || (k > 1 && name == "n")) {
      w_col = static_cast<int>(c);
    } else {
      feature_cols.push_back(static_cast<int>(c));
      data.feature_names.push_back(name);
    }
  }
  for (int c : y_col)
    if (c < 0)
      throw SchemaError(path + ": missing outcome column" +
                        (k == 1 ? std::string(" y") : std::string(" y1..y" + std::to_string(k))));

  data.p = feature_cols.size();
  data.k = static_cast<std::size_t>(k);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    for (int c : feature_cols)
      data.x.push_back(detail::parse_double(fields[static_cast<std::size_t>(c)], line_no));
    for (int c : y_col)
      data.y.push_back(detail::parse_double(fields[static_cast<std::size_t>(c)], line_no));
    data.weight.push_back(
        w_col < 0 ? 1.0 : detail::parse_double(fields[static_cast<std::size_t>(w_col)], line_no));
    ++data.n;
  }
  data.validate(family);
  return data;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data,
                              const QuasiFamily& family) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (std::size_t j = 0; j < data.p; ++j) {
    out << (j ? "," : "")
        << (j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j + 1));
  }
  if (family.kind == Family::multinomial) {
    for (std::size_t c = 0; c < data.k; ++c) out << ",y" << (c + 1);
    out << ",n";
  } else {
    out << ",y,w";
  }
  out << '\n';
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.p; ++j)
      out << (j ? "," : "") << detail::format_double(data.xval(i, j));
    for (std::size_t c = 0; c < data.k; ++c) out << ',' << detail::format_double(data.yval(i, c));
    out << ',' << detail::format_double(data.weight[i]) << '\n';
  }
}

// --- run configuration ------------------------------------------------------

struct RunConfig {
  QuasiFamily family = QuasiFamily::poisson();
  int chains = 2;
  std::uint64_t seed = 1;
  ChainConfig chain;
  double interval_level = 0.95;
  int max_saved_ensembles = 200;
  std::string input_path;
  std::string test_path;
  std::string out_dir = ".";

  void validate() const {
    if (chains < 1) throw ConfigError("config: chains must be >= 1");
    if (!(interval_level > 0.0) || !(interval_level < 1.0))
      throw ConfigError("config: level must lie in (0,1)");
    if (max_saved_ensembles < 1) throw ConfigError("config: snapshots must be >= 1");
    chain.validate();
  }

  std::map<std::string, std::string> to_kv() const {
    std::map<std::string, std::string> kv;
    kv["family"] = family_name(family.kind);
    kv["k"] = std::to_string(family.dim);
    kv["kappa"] = detail::format_double(family.kappa);
    kv["chains"] = std::to_string(chains);
    kv["seed"] = std::to_string(seed);
    kv["trees"] = std::to_string(chain.n_trees);
    kv["iters"] = std::to_string(chain.iterations);
    kv["burnin"] = std::to_string(chain.burn_in);
    kv["thin"] = std::to_string(chain.thin);
    kv["phi_init"] = detail::format_double(chain.phi_init);
    kv["k_scale"] = detail::format_double(chain.k_scale);
    kv["alpha_dirichlet"] = detail::format_double(chain.alpha_dirichlet);
    kv["update_split_probs"] = chain.update_split_probs ? "1" : "0";
    kv["update_sigma_lambda"] = chain.update_sigma_lambda ? "1" : "0";
    kv["max_depth"] = std::to_string(chain.max_depth);
    kv["max_cutpoints"] = std::to_string(chain.max_cutpoints);
    kv["tree_gamma"] = detail::format_double(chain.tree_gamma);
    kv["tree_beta"] = detail::format_double(chain.tree_beta);
    kv["dispersion"] = dispersion_method_name(chain.dispersion.method);
    kv["prior_a"] = detail::format_double(chain.dispersion.prior_a);
    kv["prior_b"] = detail::format_double(chain.dispersion.prior_b);
    kv["kappa_min"] = detail::format_double(chain.dispersion.kappa_min);
    kv["kappa_max"] = detail::format_double(chain.dispersion.kappa_max);
    kv["estimate_kappa"] = chain.dispersion.estimate_kappa ? "1" : "0";
    kv["level"] = detail::format_double(interval_level);
    kv["snapshots"] = std::to_string(max_saved_ensembles);
    kv["input"] = input_path;
    kv["test"] = test_path;
    kv["out"] = out_dir;
    return kv;
  }

  void apply_kv(const std::string& key, const std::string& value) {
    if (key == "family") family.kind = family_from_name(value);
    else if (key == "k") family.dim = std::stoi(value);
    else if (key == "kappa") { family.kappa = std::stod(value); chain.kappa_init = family.kappa; }
    else if (key == "chains") chains = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "trees") chain.n_trees = std::stoi(value);
    else if (key == "iters") chain.iterations = std::stoi(value);
    else if (key == "burnin") chain.burn_in = std::stoi(value);
    else if (key == "thin") chain.thin = std::stoi(value);
    else if (key == "phi_init") chain.phi_init = std::stod(value);
    else if (key == "k_scale") chain.k_scale = std::stod(value);
    else if (key == "alpha_dirichlet") chain.alpha_dirichlet = std::stod(value);
    else if (key == "update_split_probs") chain.update_split_probs = value != "0";
    else if (key == "update_sigma_lambda") chain.update_sigma_lambda = value != "0";
    else if (key == "max_depth") chain.max_depth = std::stoi(value);
    else if (key == "max_cutpoints") chain.max_cutpoints = std::stoi(value);
    else if (key == "tree_gamma") chain.tree_gamma = std::stod(value);
    else if (key == "tree_beta") chain.tree_beta = std::stod(value);
    else if (key == "dispersion") chain.dispersion.method = dispersion_method_from_name(value);
    else if (key == "prior_a") chain.dispersion.prior_a = std::stod(value);
    else if (key == "prior_b") chain.dispersion.prior_b = std::stod(value);
    else if (key == "kappa_min") chain.dispersion.kappa_min = std::stod(value);
    else if (key == "kappa_max") chain.dispersion.kappa_max = std::stod(value);
    else if (key == "estimate_kappa") chain.dispersion.estimate_kappa = value != "0";
    else if (key == "level") interval_level = std::stod(value);
    else if (key == "snapshots") max_saved_ensembles = std::stoi(value);
    else if (key == "input") input_path = value;
    else if (key == "test") test_path = value;
    else if (key == "out") out_dir = value;
    else throw ConfigError("config: unknown key '" + key + "'");
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& [key, value] : to_kv()) os << key << '=' << value << '\n';
    return os.str();
  }

  static RunConfig from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("config: expected key=value, got " + line);
      cfg.apply_kv(line.substr(0, eq), line.substr(eq + 1));
    }
    if (cfg.family.kind == Family::power) cfg.chain.kappa_init = cfg.family.kappa;
    return cfg;
  }

  // FNV-1a over the canonical text; recorded in outputs for provenance.
  std::string hash() const {
    const std::string text = to_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

inline RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return RunConfig::from_text(os.str());
}

// --- draw files ---------------------------------------------------------------

// Per-chain scalar draws: iter, phi, kappa, sigma_lambda, split counts.
inline void write_draws_csv(const std::string& path, const Draws& draws,
                            const std::vector<std::string>& feature_names) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "iter,phi,kappa,sigma_lambda";
  for (std::size_t j = 0; j < feature_names.size(); ++j)
    out << ",split_count_" << feature_names[j];
  out << '\n';
  for (std::size_t it = 0; it < draws.n_iters(); ++it) {
    out << it << ',' << detail::format_double(draws.phi[it]) << ','
        << detail::format_double(draws.kappa[it]) << ','
        << detail::format_double(draws.sigma_lambda[it]);
    for (int c : draws.split_counts[it]) out << ',' << c;
    out << '\n';
  }
}

// Fitted-mean matrix, one retained iteration per row.
inline void write_fitted_csv(const std::string& path, const Draws& draws, bool test_points) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  const std::size_t n = test_points ? draws.n_test : draws.n_train;
  const std::size_t k = static_cast<std::size_t>(draws.k);
  out << "iter";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      out << ",mu_" << (i + 1);
      if (k > 1) out << '_' << (c + 1);
    }
  out << '\n';
  const std::vector<double>& mu = test_points ? draws.mu_test : draws.mu_train;
  for (std::size_t it = 0; it < draws.n_iters(); ++it) {
    out << it;
    for (std::size_t q = 0; q < n * k; ++q)
      out << ',' << detail::format_double(mu[it * n * k + q]);
    out << '\n';
  }
}

}  // namespace qlbart
