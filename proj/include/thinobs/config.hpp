#pragma once

// Run configuration: a flat INI file with one section per concern.
//
//   [grid]     dimension, resolution, half_width
//   [data]     kind, lambda, tau, epsilon, lambda2, spine_angle
//   [solver]   omega, tol, max_iter, thin
//   [analysis] requests, centers, r_min, r_max, mus, gammas, decay_r0,
//              decay_k_max, flatness_eps, sigma, gamma, allowance, delta
//   [verify]   criteria, resolution_2d, resolution_3d, allowance
//   [run]      output_dir, seed
//
// Lists are space separated; centers are ';' separated with ',' between
// coordinates. Missing keys keep their defaults, unknown keys are errors.
// to_ini() writes every key with doubles at %.17g, so a round trip is exact
// and hash() identifies the run.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "thinobs/error.hpp"
#include "thinobs/geometry.hpp"
#include "thinobs/profiles.hpp"
#include "thinobs/solver.hpp"

namespace thinobs {

/// Config validation failure; `field` is the dotted key, e.g. "grid.resolution".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& analysis_request_names() {
  static const std::vector<std::string> names{"frequency", "decay", "contact", "wlapw", "barrier", "holder"};
  return names;
}

struct RunConfig {
  // grid
  int dimension = 2;
  int resolution = 257;
  double half_width = 2.0;
  // data
  DataKind kind = DataKind::profile;
  Homogeneity lambda = Homogeneity::halves(3);
  double tau = 1.0;
  double epsilon = 0.0;
  Homogeneity lambda2 = Homogeneity::halves(7);
  double spine_angle = std::numbers::pi / 2.0;
  // solver
  double omega = 0.0;  // 0: optimal
  double tol = 0.0;    // 0: dimension default
  int max_iter = 200000;
  ThinCondition thin = ThinCondition::obstacle;
  // analysis
  std::vector<std::string> requests;
  std::vector<std::vector<double>> centers{{}};  // one empty entry = origin
  double r_min = 0.0;                            // 0: 8h
  double r_max = 0.5;
  std::vector<double> mus;
  std::vector<double> gammas;
  double decay_r0 = 0.5;
  int decay_k_max = 4;
  double flatness_eps = 0.1;
  double sigma = 0.5;
  double gamma = 0.45;
  double allowance = 1e-2;
  double delta = 0.2;  // barrier cylinder half-width
  // verify
  std::vector<int> criteria;  // empty: all
  int resolution_2d = 513;
  int resolution_3d = 129;
  double verify_allowance = 1e-2;
  // run
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  double spacing() const { return 2.0 * half_width / (resolution - 1); }
  double effective_r_min() const { return r_min > 0.0 ? r_min : 8.0 * spacing(); }

  DataParams data_params() const {
    DataParams p;
    p.lambda = lambda;
    p.tau = tau;
    p.epsilon = epsilon;
    p.lambda2 = lambda2;
    p.spine_angle = spine_angle;
    p.half_width = half_width;
    return p;
  }

  SolverOptions solver_options() const {
    SolverOptions o;
    o.omega = omega;
    o.tol = tol;
    o.max_iter = max_iter;
    o.thin = thin;
    o.slit_angle = spine_angle;
    return o;
  }

  template <int Dim>
  std::vector<Point<Dim>> center_points() const {
    std::vector<Point<Dim>> out;
    for (const auto& c : centers) {
      Point<Dim> p{};
      for (std::size_t k = 0; k < c.size(); ++k) p[k] = c[k];
      out.push_back(p);
    }
    return out;
  }

  void validate() const;
  std::string to_ini() const;
  std::uint64_t hash() const;
};

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + g17(v[i]);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(field, "expected a number, got '" + t + "'");
  return v;
}

inline long long parse_integer(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(field, "expected an integer, got '" + t + "'");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(field, tok));
  return out;
}

// Accepts "3/2", "1.5", "2".
inline Homogeneity parse_homogeneity(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  try {
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
      const double num = parse_double(field, t.substr(0, slash));
      const double den = parse_double(field, t.substr(slash + 1));
      if (den == 0.0) throw ConfigError(field, "zero denominator");
      return Homogeneity::from_double(num / den);
    }
    return Homogeneity::from_double(parse_double(field, t));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace detail

inline void RunConfig::validate() const {
  try {
    validate_grid_request(dimension, resolution, half_width);
  } catch (const Error& e) {
    const std::string w = e.what();
    const std::string f = w.rfind("dimension", 0) == 0    ? "grid.dimension"
                          : w.rfind("resolution", 0) == 0 ? "grid.resolution"
                                                          : "grid.half_width";
    throw ConfigError(f, w);
  }
  if (kind == DataKind::custom) throw ConfigError("data.kind", "custom data cannot be configured from a file");
  if (kind != DataKind::harmonic_min && !lambda.is_solution_admissible())
    throw ConfigError("data.lambda", lambda.str() + " is not the homogeneity of a homogeneous solution");
  if (kind == DataKind::perturbed_profile) {
    if (!lambda.is_three_halves_family()) throw ConfigError("data.lambda", "perturbed data needs lambda in 3/2 + 2N");
    if (!lambda2.is_three_halves_family())
      throw ConfigError("data.lambda2", "perturbed data needs lambda2 in 3/2 + 2N");
    if (!(lambda2 > lambda)) throw ConfigError("data.lambda2", "must exceed data.lambda");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("data.tau", "must be finite and nonnegative");
  if (!std::isfinite(epsilon)) throw ConfigError("data.epsilon", "must be finite");
  if (!std::isfinite(spine_angle)) throw ConfigError("data.spine_angle", "must be finite");
  if (omega != 0.0 && !(omega > 0.0 && omega < 2.0)) throw ConfigError("solver.omega", "must be 0 or lie in (0, 2)");
  if (!(tol >= 0.0)) throw ConfigError("solver.tol", "must be 0 or positive");
  if (max_iter < 1) throw ConfigError("solver.max_iter", "must be positive");
  const std::set<std::string> known(analysis_request_names().begin(), analysis_request_names().end());
  for (const auto& r : requests)
    if (!known.count(r)) throw ConfigError("analysis.requests", "unknown request '" + r + "'");
  for (const auto& c : centers) {
    if (!c.empty() && static_cast<int>(c.size()) != dimension)
      throw ConfigError("analysis.centers", "center with " + std::to_string(c.size()) + " coordinates in dimension " +
                                                std::to_string(dimension));
    if (!c.empty() && c.back() != 0.0) throw ConfigError("analysis.centers", "centers must lie on the thin space");
  }
  const double h = spacing();
  if (r_min != 0.0 && r_min < 8.0 * h * (1.0 - 1e-12))
    throw ConfigError("analysis.r_min", "below the 8h floor " + detail::g17(8.0 * h));
  if (!(r_max >= effective_r_min())) throw ConfigError("analysis.r_max", "smaller than r_min");
  if (!(r_max <= half_width)) throw ConfigError("analysis.r_max", "exceeds the half-width");
  if (!(decay_r0 >= 8.0 * h && decay_r0 <= half_width))
    throw ConfigError("analysis.decay_r0", "must lie in [8h, half_width]");
  if (decay_k_max < 1) throw ConfigError("analysis.decay_k_max", "must be positive");
  if (!(flatness_eps > 0.0)) throw ConfigError("analysis.flatness_eps", "must be positive");
  if (!(sigma > 0.0)) throw ConfigError("analysis.sigma", "must be positive");
  if (!(gamma > 0.0)) throw ConfigError("analysis.gamma", "must be positive");
  if (!(allowance >= 0.0)) throw ConfigError("analysis.allowance", "must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("analysis.delta", "must lie in (0, 1)");
  for (double g : gammas)
    if (!(g > 0.0)) throw ConfigError("analysis.gammas", "entries must be positive");
  for (int c : criteria)
    if (c < 1 || c > 14) throw ConfigError("verify.criteria", "unknown criterion " + std::to_string(c));
  try {
    validate_grid_request(2, resolution_2d, 2.0);
  } catch (const Error& e) {
    throw ConfigError("verify.resolution_2d", e.what());
  }
  try {
    validate_grid_request(3, resolution_3d, 2.0);
  } catch (const Error& e) {
    throw ConfigError("verify.resolution_3d", e.what());
  }
  if (!(verify_allowance >= 0.0)) throw ConfigError("verify.allowance", "must be nonnegative");
  if (output_dir.empty()) throw ConfigError("run.output_dir", "must not be empty");
}

inline std::string RunConfig::to_ini() const {
  using detail::g17;
  std::ostringstream os;
  os << "[grid]\n"
     << "dimension = " << dimension << "\n"
     << "resolution = " << resolution << "\n"
     << "half_width = " << g17(half_width) << "\n\n";
  os << "[data]\n"
     << "kind = " << to_string(kind) << "\n"
     << "lambda = " << lambda.str() << "\n"
     << "tau = " << g17(tau) << "\n"
     << "epsilon = " << g17(epsilon) << "\n"
     << "lambda2 = " << lambda2.str() << "\n"
     << "spine_angle = " << g17(spine_angle) << "\n\n";
  os << "[solver]\n"
     << "omega = " << g17(omega) << "\n"
     << "tol = " << g17(tol) << "\n"
     << "max_iter = " << max_iter << "\n"
     << "thin = " << (thin == ThinCondition::slit ? "slit" : "obstacle") << "\n\n";
  std::string req, cen, crit;
  for (std::size_t i = 0; i < requests.size(); ++i) req += (i ? " " : "") + requests[i];
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::string c;
    for (std::size_t k = 0; k < centers[i].size(); ++k) c += (k ? "," : "") + g17(centers[i][k]);
    cen += (i ? "; " : "") + (c.empty() ? std::string("origin") : c);
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) crit += (i ? " " : "") + std::to_string(criteria[i]);
  os << "[analysis]\n"
     << "requests = " << req << "\n"
     << "centers = " << cen << "\n"
     << "r_min = " << g17(r_min) << "\n"
     << "r_max = " << g17(r_max) << "\n"
     << "mus = " << detail::join_doubles(mus) << "\n"
     << "gammas = " << detail::join_doubles(gammas) << "\n"
     << "decay_r0 = " << g17(decay_r0) << "\n"
     << "decay_k_max = " << decay_k_max << "\n"
     << "flatness_eps = " << g17(flatness_eps) << "\n"
     << "sigma = " << g17(sigma) << "\n"
     << "gamma = " << g17(gamma) << "\n"
     << "allowance = " << g17(allowance) << "\n"
     << "delta = " << g17(delta) << "\n\n";
  os << "[verify]\n"
     << "criteria = " << crit << "\n"
     << "resolution_2d = " << resolution_2d << "\n"
     << "resolution_3d = " << resolution_3d << "\n"
     << "allowance = " << g17(verify_allowance) << "\n\n";
  os << "[run]\n"
     << "output_dir = " << output_dir << "\n"
     << "seed = " << seed << "\n";
  return os.str();
}

/// FNV-1a 64 of the canonical text.
inline std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_ini()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Parses INI text; throws ConfigError naming the offending key.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  const std::set<std::string> sections{"grid", "data", "solver", "analysis", "verify", "run"};
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) throw ConfigError(section, "unknown section");
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
    for (const auto& [key, node] : body) {
      const std::string f = section + "." + key;
      const std::string v = detail::trim(node.data());
      auto integer = [&] { return detail::parse_integer(f, v); };
      auto number = [&] { return detail::parse_double(f, v); };
      auto int32 = [&] {
        const long long x = integer();
        if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(f, "out of range");
        return static_cast<int>(x);
      };
      bool known = true;
      if (section == "grid") {
        if (key == "dimension") c.dimension = int32();
        else if (key == "resolution") c.resolution = int32();
        else if (key == "half_width") c.half_width = number();
        else known = false;
      } else if (section == "data") {
        if (key == "kind") {
          try {
            c.kind = data_kind_from_string(v);
          } catch (const Error& e) {
            throw ConfigError(f, e.what());
          }
        } else if (key == "lambda") c.lambda = detail::parse_homogeneity(f, v);
        else if (key == "tau") c.tau = number();
        else if (key == "epsilon") c.epsilon = number();
        else if (key == "lambda2") c.lambda2 = detail::parse_homogeneity(f, v);
        else if (key == "spine_angle") c.spine_angle = number();
        else known = false;
      } else if (section == "solver") {
        if (key == "omega") c.omega = number();
        else if (key == "tol") c.tol = number();
        else if (key == "max_iter") c.max_iter = int32();
        else if (key == "thin") {
          if (v == "obstacle") c.thin = ThinCondition::obstacle;
          else if (v == "slit") c.thin = ThinCondition::slit;
          else throw ConfigError(f, "expected obstacle or slit, got '" + v + "'");
        } else known = false;
      } else if (section == "analysis") {
        if (key == "requests") {
          c.requests.clear();
          std::istringstream rs(v);
          std::string tok;
          while (rs >> tok) c.requests.push_back(tok);
        } else if (key == "centers") {
          c.centers.clear();
          for (const auto& part : detail::split(v, ';')) {
            const std::string p = detail::trim(part);
            if (p.empty()) continue;
            if (p == "origin") {
              c.centers.emplace_back();
              continue;
            }
            std::vector<double> pt;
            for (const auto& x : detail::split(p, ',')) pt.push_back(detail::parse_double(f, x));
            c.centers.push_back(pt);
          }
        } else if (key == "r_min") c.r_min = number();
        else if (key == "r_max") c.r_max = number();
        else if (key == "mus") c.mus = detail::parse_doubles(f, v);
        else if (key == "gammas") c.gammas = detail::parse_doubles(f, v);
        else if (key == "decay_r0") c.decay_r0 = number();
        else if (key == "decay_k_max") c.decay_k_max = int32();
        else if (key == "flatness_eps") c.flatness_eps = number();
        else if (key == "sigma") c.sigma = number();
        else if (key == "gamma") c.gamma = number();
        else if (key == "allowance") c.allowance = number();
        else if (key == "delta") c.delta = number();
        else known = false;
      } else if (section == "verify") {
        if (key == "criteria") {
          c.criteria.clear();
          std::istringstream cs(v);
          std::string tok;
          while (cs >> tok) c.criteria.push_back(static_cast<int>(detail::parse_integer(f, tok)));
        } else if (key == "resolution_2d") c.resolution_2d = int32();
        else if (key == "resolution_3d") c.resolution_3d = int32();
        else if (key == "allowance") c.verify_allowance = number();
        else known = false;
      } else if (section == "run") {
        if (key == "output_dir") c.output_dir = v;
        else if (key == "seed") {
          const long long s = integer();
          if (s < 0) throw ConfigError(f, "must be nonnegative");
          c.seed = static_cast<std::uint64_t>(s);
        } else known = false;
      }
      if (!known) throw ConfigError(f, "unknown key");
    }
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_config(os.str());
}

}  // namespace thinobs
