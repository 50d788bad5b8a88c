#include "cpgd/experiment.hpp"

#include <fstream>
#include <future>
#include <memory>
#include <sstream>

#include "cpgd/log.hpp"
#include "cpgd/matrix_io.hpp"
#include "cpgd/onmf.hpp"
#include "cpgd/quadratic.hpp"
#include "cpgd/run_log_io.hpp"

namespace cpgd::harness {
namespace {

// Everything the selected problem needs to start a run.
struct Setup {
  std::unique_ptr<CompositeProblem> problem;
  Point x0;
  std::optional<onmf::Instance> onmf_instance;
  std::optional<onmf::State> onmf_start;
  bool specialized = false;
};

Setup build(const ExperimentConfig& cfg) {
  Setup st;
  if (cfg.problem == ProblemKind::quadratic) {
    if (cfg.quadratic_instance == "toy") {
      auto p = std::make_unique<QuadraticBoxProblem>(toy_quadratic());
      st.x0 = Point::Zero(2);
      st.problem = std::move(p);
    } else {
      auto p = std::make_unique<QuadraticBoxProblem>(
          random_quadratic(cfg.quadratic_dim, cfg.quadratic_blocks, cfg.quadratic_mu,
                           cfg.quadratic_separable, cfg.data_seed));
      st.x0 = Point::Zero(static_cast<Eigen::Index>(cfg.quadratic_dim));
      st.problem = std::move(p);
    }
    return st;
  }

  onmf::Instance inst;
  if (cfg.data_path) {
    inst.X = io::load_matrix(*cfg.data_path);
    inst.r = cfg.synthetic.r;
    inst.lambda = cfg.lambda;
    if (inst.r > std::min(inst.X.rows(), inst.X.cols())) {
      throw ConfigError("r exceeds the dimensions of " + cfg.data_path->string());
    }
  } else {
    const auto& sp = cfg.synthetic;
    inst = onmf::synthetic_instance(sp.m, sp.n, sp.r, sp.noise, sp.seed, cfg.lambda).first;
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto s0 = onmf::random_state(static_cast<int>(inst.X.rows()), static_cast<int>(inst.X.cols()),
                               inst.r, cfg.solver.seed);
  auto p = std::make_unique<onmf::Problem>(
      inst, cfg.onmf_generic_path ? cfg.norm : onmf::NormConvention::v_block);
  st.x0 = p->pack(s0);
  st.problem = std::move(p);
  st.onmf_instance = std::move(inst);
  st.onmf_start = std::move(s0);
  st.specialized = !cfg.onmf_generic_path;
  return st;
}

RunLog run_one(const Setup& st, const ExperimentConfig& cfg, bool baseline) {
  if (baseline) {
    return run_pgd_baseline(*st.problem, st.x0, cfg.solver);
  }
  if (st.specialized) {
    return onmf::run_cpgd_onmf(*st.onmf_instance, *st.onmf_start, cfg.solver);
  }
  return run_cpgd(*st.problem, st.x0, cfg.solver);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw io::IoError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw io::IoError("write failed for " + path.string());
  }
}

void summarize(std::ostream& os, const SolverOutcome& run) {
  const auto& log = run.log;
  const std::string pre = log.solver + ".";
  const bool any = !log.records.empty();
  os << pre << "status: " << to_string(log.status) << '\n';
  os << pre << "cycles: " << (any ? log.last().cycle : 0) << '\n';
  os << pre << "elapsed_s: " << io::format_double(any ? log.last().elapsed_s : 0.0) << '\n';
  os << pre << "F0: " << io::format_double(log.F0) << '\n';
  os << pre << "final_F: " << io::format_double(any ? log.last().F : log.F0) << '\n';
  if (any) {
    for (const auto& [name, value] : log.last().metrics) {
      os << pre << "final_" << name << ": " << io::format_double(value) << '\n';
    }
    os << pre << "final_step_norm: " << io::format_double(log.last().step_norm) << '\n';
    os << pre << "final_stat_bound: " << io::format_double(log.last().stat_bound) << '\n';
  }
  if (log.violation_cycle) {
    os << pre << "violation_cycle: " << *log.violation_cycle << '\n';
  }
  os << pre << "eta_min: " << io::format_double(log.eta_min) << '\n';
  os << pre << "H_F_max: " << io::format_double(log.H_F_max) << '\n';
  os << pre << "L: " << io::format_double(log.constants.L)
     << (log.L_empirical ? " (empirical)" : "") << '\n';
  os << pre << "C: " << io::format_double(stationarity_constant(log.constants)) << '\n';
  if (run.fit) {
    std::ostringstream fit;
    rates::write_report(fit, *run.fit);
    std::istringstream lines(fit.str());
    std::string line;
    while (std::getline(lines, line)) {
      os << pre << "rates." << line << '\n';
    }
  }
}

}  // namespace

bool ExperimentResult::failed() const {
  for (const auto& r : runs) {
    if (r.log.status == RunStatus::descent_violation) {
      return true;
    }
  }
  return false;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Setup st = build(cfg);

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw io::IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());
  }
  write_text(cfg.output_dir / "config.txt", render_config(cfg));

  std::vector<bool> baseline_flags;
  if (cfg.which != SolverChoice::baseline) baseline_flags.push_back(false);
  if (cfg.which != SolverChoice::cpgd) baseline_flags.push_back(true);

  auto task = [&st, &cfg](bool baseline) {
    SolverOutcome out;
    out.log = run_one(st, cfg, baseline);
    out.log_path = cfg.output_dir / (out.log.solver + "_log.csv");
    std::ostringstream csv;
    io::write_run_log_csv(csv, out.log);
    write_text(out.log_path, csv.str());
    if (cfg.rates) {
      out.fit = rates::fit_kl_exponent(out.log, cfg.fit);
      std::ostringstream rep;
      rates::write_report(rep, *out.fit);
      write_text(cfg.output_dir / (out.log.solver + "_rates.txt"), rep.str());
    }
    log::info(out.log.solver + ": " + to_string(out.log.status) + " after " +
              std::to_string(out.log.records.size()) + " cycles");
    return out;
  };

  std::vector<std::future<SolverOutcome>> pending;
  for (bool b : baseline_flags) {
    pending.push_back(std::async(std::launch::async, task, b));
  }
  ExperimentResult result;
  for (auto& f : pending) {
    result.runs.push_back(f.get());
  }

  std::ostringstream summary;
  for (const auto& run : result.runs) {
    summarize(summary, run);
  }
  result.summary_path = cfg.output_dir / "summary.txt";
  write_text(result.summary_path, summary.str());
  return result;
}

std::vector<std::filesystem::path> gen_data(const DataSpec& spec) {
  const auto& sp = spec.synthetic;
  const auto [inst, planted] = onmf::synthetic_instance(sp.m, sp.n, sp.r, sp.noise, sp.seed);
  std::vector<std::filesystem::path> written;
  const auto parent = spec.output.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) {
      throw io::IoError("cannot create " + parent.string() + ": " + ec.message());
    }
  }
  io::save_matrix(spec.output, inst.X);
  written.push_back(spec.output);
  if (spec.planted) {
    const auto stem = spec.output.stem().string();
    const auto ext = spec.output.extension().string();
    const auto w_path = spec.output.parent_path() / (stem + "_W" + ext);
    const auto v_path = spec.output.parent_path() / (stem + "_V" + ext);
    io::save_matrix(w_path, planted.W);
    io::save_matrix(v_path, planted.V);
    written.push_back(w_path);
    written.push_back(v_path);
  }
  return written;
}

}  // namespace cpgd::harness
