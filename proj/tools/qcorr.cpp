// qcorr command-line front end.
//
// Exit codes: 0 success, 2 usage or parse error, 3 invalid state,
// 4 solver failure or other numerical fault.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qcorr/qcorr.hpp"

namespace {

using namespace qcorr;

enum ExitCode { kOk = 0, kUsage = 2, kInvalidState = 3, kSolver = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateSource {
  std::optional<double> werner;
  std::vector<double> gws;
  std::string json_file;

  void attach(CLI::App* cmd) {
    auto* w = cmd->add_option("--werner", werner, "Werner state with weight p");
    auto* g = cmd->add_option("--gws", gws, "Generalized Werner state: p q")->expected(2);
    auto* j = cmd->add_option("--json", json_file, "Density matrix JSON file");
    w->excludes(g)->excludes(j);
    g->excludes(j);
  }

  // Out-of-range p or q is an invalid state, not a usage error.
  DensityMatrix load() const {
    if (werner) return werner_checked(*werner);
    if (!gws.empty()) {
      try {
        return qcorr::gws({gws[0], gws[1]});
      } catch (const ParamOutOfRange& e) {
        throw InvalidState(e.what());
      }
    }
    if (!json_file.empty()) {
      std::ifstream in(json_file);
      if (!in) throw UsageError("cannot open " + json_file);
      std::stringstream buf;
      buf << in.rdbuf();
      return io::state_from_json_text(buf.str());
    }
    throw UsageError("one of --werner, --gws or --json is required");
  }

 private:
  static DensityMatrix werner_checked(double p) {
    try {
      return qcorr::werner(p);
    } catch (const ParamOutOfRange& e) {
      throw InvalidState(e.what());
    }
  }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw UsageError("cannot write " + path);
  return file;
}

std::vector<double> q_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw UsageError("--step must be positive");
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw UsageError("--q-range must satisfy 0 < q_min <= q_max < 1");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> qs;
  for (long i = 0; i <= n; ++i) qs.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return qs;
}

int run(int argc, char** argv) {
  CLI::App app{"Quantum correlation hierarchy of generalized Werner states"};
  app.require_subcommand(1);

  // measures
  auto* measures = app.add_subcommand("measures", "Correlation report (JSON) for a single state");
  StateSource measures_src;
  measures_src.attach(measures);
  bool optimize_pvm = false;
  std::string trace_file;
  measures->add_flag("--optimize-pvm", optimize_pvm, "Also maximize S2 over Alice's local basis");
  measures->add_option("--sdp-trace", trace_file, "Write the S3 solver iteration trace as CSV");

  // thresholds
  auto* thresholds = app.add_subcommand("thresholds", "Threshold curves p_i(q) as CSV");
  std::vector<double> q_range{0.05, 0.95};
  double q_step = 0.05, tol = 1e-4;
  std::vector<std::string> measure_names{"N", "S3", "S2", "B"};
  unsigned jobs = default_jobs();
  std::string thresholds_out;
  thresholds->add_option("--q-range", q_range, "q_min q_max")->expected(2)->capture_default_str();
  thresholds->add_option("--step", q_step, "q step")->capture_default_str();
  thresholds->add_option("--measures", measure_names, "Subset of N, B, S2, S3")->delimiter(',')->capture_default_str();
  thresholds->add_option("--tol", tol, "Bisection width for S2 and S3")->capture_default_str();
  thresholds->add_option("--jobs", jobs, "Worker threads");
  thresholds->add_option("-o,--output", thresholds_out, "Output file (default stdout)");

  // table3
  auto* table3_cmd = app.add_subcommand("table3", "Optimal noise-robustness transitions as CSV");
  double grid_tol = 1e-6;
  std::string table3_out;
  table3_cmd->add_option("--grid-tol", grid_tol, "Golden-section width in q")->capture_default_str();
  table3_cmd->add_option("--jobs", jobs, "Worker threads");
  table3_cmd->add_option("-o,--output", table3_out, "Output file (default stdout)");

  // tomo
  auto* tomo = app.add_subcommand("tomo", "Simulated tomography: counts, reconstruction, fit, report");
  StateSource tomo_src;
  tomo_src.attach(tomo);
  double exposure = 1e5;
  std::uint64_t seed = 1;
  std::string counts_out;
  tomo->add_option("--exposure", exposure, "Expected counts per setting")->capture_default_str();
  tomo->add_option("--seed", seed, "Generator seed")->capture_default_str();
  tomo->add_option("--counts-csv", counts_out, "Also write the count record as CSV");

  // regimes
  auto* regimes = app.add_subcommand("regimes", "Classify a CSV of p,q pairs");
  std::string regimes_in, regimes_out;
  regimes->add_option("input", regimes_in, "CSV with rows p,q ('-' for stdin)")->required();
  regimes->add_option("--jobs", jobs, "Worker threads");
  regimes->add_option("-o,--output", regimes_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (jobs == 0) throw UsageError("--jobs must be at least 1");

  if (*measures) {
    const DensityMatrix rho = measures_src.load();
    const auto report = correlation_report(rho, {}, optimize_pvm);
    std::cout << io::to_json(report).dump(2) << "\n";
    if (!trace_file.empty()) {
      sdp::Options opts;
      opts.record_trace = true;
      const auto sol = sdp::solve(steering_problem(assemblage(rho, {pauli::x(), pauli::y(), pauli::z()})), opts);
      std::ofstream f;
      sdp::write_trace_csv(open_output(trace_file, f), sol);
    }
  } else if (*thresholds) {
    std::vector<Measure> ms;
    try {
      for (const auto& name : measure_names) ms.push_back(parse_measure(name));
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
    if (!(tol > 0.0)) throw UsageError("--tol must be positive");
    const auto qs = q_grid(q_range[0], q_range[1], q_step);
    std::vector<ThresholdCurve> curves;
    for (Measure m : ms) curves.push_back(threshold_curve(m, qs, tol, jobs));
    std::ofstream f;
    io::write_threshold_csv(open_output(thresholds_out, f), curves);
  } else if (*table3_cmd) {
    if (!(grid_tol > 0.0)) throw UsageError("--grid-tol must be positive");
    const auto rows = table3(grid_tol, jobs);
    std::ofstream f;
    io::write_table3_csv(open_output(table3_out, f), rows);
  } else if (*tomo) {
    const DensityMatrix rho = tomo_src.load();
    if (!(exposure > 0.0) || !std::isfinite(exposure)) throw UsageError("--exposure must be positive");
    const CountRecord rec = simulate_counts(rho, exposure, seed);
    const MleResult mle = mle_reconstruct(rec);
    const PqFit fit = fit_pq(mle.rho);
    const auto report = correlation_report(mle.rho);
    io::json out = {{"schema", io::kTomoSchema},
                    {"counts", io::counts_to_json(rec)},
                    {"reconstruction",
                     {{"state", io::to_json(mle.rho)},
                      {"iterations", mle.iterations},
                      {"log_likelihood", mle.log_likelihood},
                      {"fidelity_to_input", fidelity(mle.rho, rho)}}},
                    {"fit", {{"p_est", fit.p_est}, {"q_est", fit.q_est}, {"fidelity", fit.fidelity}}},
                    {"report", io::to_json(report)}};
    std::cout << out.dump(2) << "\n";
    if (!counts_out.empty()) {
      std::ofstream f;
      io::write_counts_csv(open_output(counts_out, f), rec);
    }
  } else if (*regimes) {
    std::vector<GwsParams> pqs;
    if (regimes_in == "-") {
      pqs = io::read_pq_csv(std::cin);
    } else {
      std::ifstream in(regimes_in);
      if (!in) throw UsageError("cannot open " + regimes_in);
      pqs = io::read_pq_csv(in);
    }
    std::vector<DensityMatrix> states;
    for (const auto& g : pqs) {
      try {
        states.push_back(gws(g));
      } catch (const ParamOutOfRange& e) {
        throw InvalidState(e.what());
      }
    }
    const auto reports =
        parallel_map(states.size(), [&](std::size_t i) { return correlation_report(states[i]); }, jobs);
    std::ofstream f;
    io::write_regimes_csv(open_output(regimes_out, f), pqs, reports);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "qcorr: " << e.what() << "\n";
    return kUsage;
  } catch (const qcorr::ParseError& e) {
    std::cerr << "qcorr: " << e.what() << "\n";
    return kUsage;
  } catch (const qcorr::InvalidState& e) {
    std::cerr << "qcorr: invalid state: " << e.what() << "\n";
    return kInvalidState;
  } catch (const qcorr::NotHermitian& e) {
    std::cerr << "qcorr: invalid state: " << e.what() << "\n";
    return kInvalidState;
  } catch (const qcorr::NotPositiveSemidefinite& e) {
    std::cerr << "qcorr: invalid state: " << e.what() << "\n";
    return kInvalidState;
  } catch (const qcorr::Error& e) {
    std::cerr << "qcorr: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "qcorr: " << e.what() << "\n";
    return kSolver;
  }
}
