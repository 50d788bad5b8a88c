#include "cpgd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "cpgd/matrix_io.hpp"

namespace cpgd::harness {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "preset",     "problem",        "instance",  "dim",       "blocks",        "mu",
      "separable",  "data_seed",      "source",    "data",      "m",             "n",
      "r",          "noise",          "lambda",    "onmf_path", "norm",          "solver",
      "eta_multiplier", "max_cycles", "time_budget", "step_tol", "root_tol",     "assert_descent",
      "seed",       "output_dir",     "rates",     "rates_tail", "rates_fstar",  "track_stationarity"};
  return keys;
}

KeyValues preset_defaults(const std::string& name) {
  if (name.empty()) {
    return {};
  }
  if (name == "quadratic-toy") {
    return {{"problem", "quadratic"}, {"instance", "toy"}, {"max_cycles", "5000"}};
  }
  if (name == "onmf-small") {
    return {{"problem", "onmf"}, {"source", "synthetic"}, {"m", "30"}, {"n", "40"},
            {"r", "3"},          {"lambda", "10"},        {"noise", "0"}, {"max_cycles", "500"}};
  }
  if (name == "onmf-large") {
    // Larger rank and penalty weight with a little noise; bounded by time_budget.
    return {{"problem", "onmf"}, {"source", "synthetic"}, {"m", "400"}, {"n", "204"},
            {"r", "15"},         {"lambda", "1000"},      {"noise", "0.01"},
            {"max_cycles", "2000"}, {"time_budget", "50"}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    double v = 0.0;
    if (!io::parse_double(it->second, v) || !std::isfinite(v)) {
      throw ConfigError("key '" + key + "': expected a finite number, got '" + it->second + "'");
    }
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + s + "'");
    }
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    const auto& s = it->second;
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected on/off, got '" + s + "'");
  }

 private:
  const KeyValues& kv_;
};

int positive_int(const Reader& rd, const std::string& key, int fallback) {
  const auto v = rd.count(key, static_cast<std::uint64_t>(fallback));
  if (v == 0 || v > 1'000'000) {
    throw ConfigError("key '" + key + "' must be a positive dimension");
  }
  return static_cast<int>(v);
}

SyntheticSpec read_synthetic(const Reader& rd) {
  SyntheticSpec s;
  s.m = positive_int(rd, "m", s.m);
  s.n = positive_int(rd, "n", s.n);
  s.r = positive_int(rd, "r", s.r);
  s.noise = rd.real("noise", s.noise);
  s.seed = rd.count("data_seed", s.seed);
  if (s.noise < 0.0) {
    throw ConfigError("noise must be nonnegative");
  }
  return s;
}

}  // namespace

KeyValues parse_key_values(std::istream& is, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const auto body = trim(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = trim(body.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open configuration " + path.string());
  }
  return parse_key_values(in, path.string());
}

void apply_overrides(KeyValues& kv, std::span<const std::string> overrides) {
  for (const auto& o : overrides) {
    std::istringstream ss(o);
    const auto extra = parse_key_values(ss, "override '" + o + "'");
    if (extra.empty()) {
      throw ConfigError("override '" + o + "' is not key=value");
    }
    for (const auto& [k, v] : extra) {
      kv[k] = v;
    }
  }
}

ExperimentConfig parse_experiment_config(const KeyValues& user) {
  for (const auto& [k, v] : user) {
    if (!known_keys().count(k)) {
      throw ConfigError("unknown configuration key '" + k + "'");
    }
  }
  const auto preset_it = user.find("preset");
  KeyValues kv = preset_defaults(preset_it == user.end() ? std::string() : preset_it->second);
  for (const auto& [k, v] : user) {
    kv[k] = v;
  }

  const Reader rd(kv);
  ExperimentConfig cfg;

  const auto problem = rd.str("problem", "onmf");
  if (problem == "onmf") {
    cfg.problem = ProblemKind::onmf;
  } else if (problem == "quadratic") {
    cfg.problem = ProblemKind::quadratic;
  } else {
    throw ConfigError("problem must be onmf or quadratic, got '" + problem + "'");
  }

  cfg.data_seed = rd.count("data_seed", cfg.data_seed);
  if (cfg.problem == ProblemKind::quadratic) {
    cfg.quadratic_instance = rd.str("instance", "toy");
    if (cfg.quadratic_instance != "toy" && cfg.quadratic_instance != "random") {
      throw ConfigError("instance must be toy or random");
    }
    cfg.quadratic_dim = rd.count("dim", cfg.quadratic_dim);
    cfg.quadratic_mu = rd.real("mu", 0.0);
    cfg.quadratic_separable = rd.flag("separable", false);
    if (cfg.quadratic_mu < 0.0) {
      throw ConfigError("mu must be nonnegative");
    }
    if (cfg.quadratic_instance == "random") {
      if (cfg.quadratic_dim == 0) {
        throw ConfigError("dim must be positive");
      }
      if (rd.has("blocks")) {
        std::istringstream ss(rd.str("blocks", ""));
        std::string part;
        while (std::getline(ss, part, ',')) {
          KeyValues one{{"b", trim(part)}};
          cfg.quadratic_blocks.push_back(Reader(one).count("b", 0));
        }
      } else {
        cfg.quadratic_blocks.assign(cfg.quadratic_dim, 1);
      }
      std::size_t total = 0;
      for (auto b : cfg.quadratic_blocks) {
        if (b == 0) throw ConfigError("blocks must be positive sizes");
        total += b;
      }
      if (total != cfg.quadratic_dim) {
        throw ConfigError("blocks sum to " + std::to_string(total) + " but dim is " +
                          std::to_string(cfg.quadratic_dim));
      }
    }
  } else {
    const auto source = rd.str("source", "synthetic");
    cfg.synthetic = read_synthetic(rd);
    if (source == "file") {
      if (!rd.has("data")) {
        throw ConfigError("source=file needs a data path");
      }
      cfg.data_path = rd.str("data", "");
      if (!std::filesystem::exists(*cfg.data_path)) {
        throw ConfigError("data file " + cfg.data_path->string() + " does not exist");
      }
    } else if (source != "synthetic") {
      throw ConfigError("source must be synthetic or file");
    } else if (cfg.synthetic.r > std::min(cfg.synthetic.m, cfg.synthetic.n)) {
      throw ConfigError("r must not exceed min(m, n)");
    }
    cfg.lambda = rd.real("lambda", cfg.lambda);
    if (!(cfg.lambda > 0.0)) {
      throw ConfigError("lambda must be positive");
    }
    const auto path = rd.str("onmf_path", "specialized");
    if (path != "specialized" && path != "generic") {
      throw ConfigError("onmf_path must be specialized or generic");
    }
    cfg.onmf_generic_path = path == "generic";
    const auto norm = rd.str("norm", "v_block");
    if (norm == "v_block") {
      cfg.norm = onmf::NormConvention::v_block;
    } else if (norm == "joint") {
      cfg.norm = onmf::NormConvention::joint;
    } else {
      throw ConfigError("norm must be v_block or joint");
    }
    if (!cfg.onmf_generic_path && cfg.norm == onmf::NormConvention::joint) {
      throw ConfigError("norm=joint is only available with onmf_path=generic");
    }
  }

  const auto solver = rd.str("solver", "cpgd");
  if (solver == "cpgd") {
    cfg.which = SolverChoice::cpgd;
  } else if (solver == "pgd-baseline") {
    cfg.which = SolverChoice::baseline;
  } else if (solver == "both") {
    cfg.which = SolverChoice::both;
  } else {
    throw ConfigError("solver must be cpgd, pgd-baseline or both");
  }

  auto& s = cfg.solver;
  s.eta_multiplier = rd.real("eta_multiplier", s.eta_multiplier);
  s.max_cycles = rd.count("max_cycles", s.max_cycles);
  if (rd.has("time_budget")) s.time_budget_s = rd.real("time_budget", 0.0);
  if (rd.has("step_tol")) s.step_tol = rd.real("step_tol", 0.0);
  s.root_tol = rd.real("root_tol", s.root_tol);
  s.assert_descent = rd.flag("assert_descent", s.assert_descent);
  s.track_stationarity = rd.flag("track_stationarity", s.track_stationarity);
  s.seed = rd.count("seed", s.seed);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  cfg.output_dir = rd.str("output_dir", cfg.output_dir.string());
  cfg.rates = rd.flag("rates", false);
  cfg.fit.tail_fraction = rd.real("rates_tail", cfg.fit.tail_fraction);
  if (!(cfg.fit.tail_fraction > 0.0) || cfg.fit.tail_fraction > 1.0) {
    throw ConfigError("rates_tail must be in (0, 1]");
  }
  const auto fstar = rd.str("rates_fstar", "final");
  if (fstar == "final") {
    cfg.fit.f_star_mode = rates::FStarMode::final_value;
  } else if (fstar == "extrapolate") {
    cfg.fit.f_star_mode = rates::FStarMode::extrapolate;
  } else {
    throw ConfigError("rates_fstar must be final or extrapolate");
  }

  cfg.resolved = kv;
  return cfg;
}

std::string render_config(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const auto& [k, v] : config.resolved) {
    os << k << '=' << v << '\n';
  }
  return os.str();
}

DataSpec parse_data_spec(const KeyValues& kv) {
  static const std::set<std::string> keys = {"m", "n", "r", "noise", "data_seed", "seed",
                                             "output", "planted"};
  for (const auto& [k, v] : kv) {
    if (!keys.count(k)) {
      throw ConfigError("unknown data-spec key '" + k + "'");
    }
  }
  KeyValues merged = kv;
  if (merged.count("seed") && !merged.count("data_seed")) {
    merged["data_seed"] = merged["seed"];
  }
  const Reader rd(merged);
  DataSpec spec;
  spec.synthetic = read_synthetic(rd);
  if (spec.synthetic.r > std::min(spec.synthetic.m, spec.synthetic.n)) {
    throw ConfigError("r must not exceed min(m, n)");
  }
  spec.output = rd.str("output", spec.output.string());
  spec.planted = rd.flag("planted", false);
  try {
    io::format_for_path(spec.output);
  } catch (const io::IoError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

}  // namespace cpgd::harness
