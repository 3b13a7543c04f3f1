// Command-line front end: one subcommand per analysis stage plus the
// end-to-end validate run. Exit codes: 0 pass, 2 validation failure, 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "overloadx/config.hpp"
#include "overloadx/diffusion.hpp"
#include "overloadx/fluid.hpp"
#include "overloadx/ftsp.hpp"
#include "overloadx/report.hpp"
#include "overloadx/sim.hpp"

namespace ox = overloadx;
using nlohmann::json;

namespace {

ox::FluidState parse_triple(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  double v[3];
  int k = 0;
  while (std::getline(ss, part, ',')) {
    if (k == 3) throw std::invalid_argument("expected q1,q2,z12, got \"" + text + "\"");
    std::size_t used = 0;
    v[k++] = std::stod(part, &used);
    if (used != part.size()) throw std::invalid_argument("bad number \"" + part + "\"");
  }
  if (k != 3) throw std::invalid_argument("expected q1,q2,z12, got \"" + text + "\"");
  return {v[0], v[1], v[2]};
}

json state_json(const ox::FluidState& x) {
  return {{"q1", x.q1}, {"q2", x.q2}, {"z12", x.z12}};
}

json moments_json(const ox::BusyPeriodMoments& m) {
  return {{"mean", m.mean}, {"second_moment", m.second_moment}, {"variance", m.variance}};
}

json summary_json(const ox::FtspSummary& s) {
  json j;
  j["state"] = state_json(s.state);
  j["r"] = s.model.r.to_string();
  j["delta_plus"] = s.delta_plus;
  j["delta_minus"] = s.delta_minus;
  j["recurrent"] = s.recurrent;
  j["pi12"] = s.pi12;
  j["method"] = std::string(ox::to_string(s.method));
  if (s.model.is_birth_death()) {
    const auto bd = s.model.birth_death();
    j["rates"] = {{"lam1", bd.lam1}, {"mu1", bd.mu1}, {"lam2", bd.lam2}, {"mu2", bd.mu2}};
  }
  if (s.t1) j["T1"] = moments_json(*s.t1);
  if (s.t2) j["T2"] = moments_json(*s.t2);
  j["sigma2"] = s.sigma2 ? json(*s.sigma2) : json(nullptr);
  return j;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid, diffusion and simulation analysis of the overloaded X model under FQR-T"};
  app.require_subcommand(0, 1);
  std::string config_path;
  bool echo_config = false;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_flag("--echo-config", echo_config, "print the normalized config and exit");

  // ftsp
  auto* ftsp = app.add_subcommand("ftsp", "frozen fast-time-scale process at a fluid state");
  std::string ftsp_state;
  std::string ftsp_method = "poisson_numeric";
  bool ftsp_json = false;
  ftsp->add_option("--state", ftsp_state, "q1,q2,z12 (default: stationary point)");
  ftsp->add_option("--method", ftsp_method, "paper_r1|regenerative|poisson_numeric|monte_carlo");
  ftsp->add_flag("--json", ftsp_json, "emit JSON");

  // fluid
  auto* fluid = app.add_subcommand("fluid", "integrate the fluid ODE");
  fluid->set_help_flag("--help", "print this help message and exit");
  std::string fluid_x0 = "1.0,0.2,0.0";
  double fluid_T = 40.0;
  double fluid_h = 1e-3;
  std::string fluid_csv;
  fluid->add_option("--x0", fluid_x0, "initial state q1,q2,z12");
  fluid->add_option("--T", fluid_T, "horizon");
  fluid->add_option("--h", fluid_h, "RK4 step");
  fluid->add_option("--csv", fluid_csv, "write t,q1,q2,z12,pi,regime to this file");

  // stationary
  auto* stationary = app.add_subcommand("stationary", "stationary fluid point");
  bool stationary_json = false;
  stationary->add_flag("--json", stationary_json, "emit JSON");

  // diffusion
  auto* diffusion = app.add_subcommand("diffusion", "Gaussian approximation at scale n");
  int diff_n = 1;
  std::string diff_method;
  std::string diff_psi = "printed_sum";
  bool diff_json = false;
  bool diff_csv = false;
  diffusion->add_option("--n", diff_n, "scale parameter");
  diffusion->add_option("--sigma2-method", diff_method, "asymptotic variance formula")
      ->required();
  diffusion->add_option("--psi-convention", diff_psi, "printed_sum|paper-sec10");
  auto* dj = diffusion->add_flag("--json", diff_json, "emit JSON");
  diffusion->add_flag("--csv", diff_csv, "emit CSV")->excludes(dj);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "replicated simulation of the scaled system");
  int sim_n = 100;
  std::optional<int> sim_runs;
  std::optional<std::int64_t> sim_arrivals;
  std::optional<std::string> sim_start;
  std::optional<double> sim_warmup;
  std::optional<std::uint64_t> sim_seed;
  bool sim_csv = false;
  simulate->add_option("--n", sim_n, "scale parameter");
  simulate->add_option("--runs", sim_runs, "independent replications");
  simulate->add_option("--arrivals", sim_arrivals, "arrivals per run");
  simulate->add_option("--start", sim_start, "fluid|empty");
  simulate->add_option("--warmup", sim_warmup, "fraction of elapsed time discarded");
  simulate->add_option("--seed", sim_seed, "root seed");
  simulate->add_flag("--csv", sim_csv, "emit per-run CSV");

  // validate
  auto* validate = app.add_subcommand("validate", "reproduce the base-case comparison table");
  std::string val_csv = "validation.csv";
  std::string val_md = "validation.md";
  std::optional<std::string> val_method;
  std::optional<std::string> val_psi;
  std::optional<std::uint64_t> val_seed;
  validate->add_option("--csv", val_csv, "CSV report path");
  validate->add_option("--markdown", val_md, "Markdown report path");
  validate->add_option("--sigma2-method", val_method, "asymptotic variance formula");
  validate->add_option("--psi-convention", val_psi, "printed_sum|paper-sec10");
  validate->add_option("--seed", val_seed, "root seed");
  std::optional<int> val_runs;
  std::optional<std::int64_t> val_arrivals;
  validate->add_option("--runs", val_runs, "replications per scale");
  validate->add_option("--arrivals", val_arrivals, "arrivals per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ox::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ox::load_config(config_path);
    const ox::ModelParams& p = cfg.params;

    if (echo_config) {
      std::cout << ox::to_json(cfg) << "\n";
      return 0;
    }

    if (*ftsp) {
      const ox::FluidState x =
          ftsp_state.empty() ? ox::stationary_point(p).state() : parse_triple(ftsp_state);
      const auto s = ox::summarize_ftsp(p, x, ox::parse_sigma2_method(ftsp_method));
      if (ftsp_json) {
        std::cout << summary_json(s).dump(2) << "\n";
      } else {
        std::printf("delta+ %.6f  delta- %.6f  recurrent %s  pi12 %.6f\n", s.delta_plus,
                    s.delta_minus, s.recurrent ? "yes" : "no", s.pi12);
        if (s.sigma2) std::printf("sigma2 (%s) %.6f\n", ftsp_method.c_str(), *s.sigma2);
      }
      return 0;
    }

    if (*fluid) {
      const auto path = ox::integrate_fluid(p, parse_triple(fluid_x0), fluid_T, fluid_h);
      if (!fluid_csv.empty()) {
        std::ostringstream os;
        os << "t,q1,q2,z12,pi,regime\n";
        char buf[160];
        for (std::size_t i = 0; i < path.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.9f,%.9f,%s\n", path.t[i],
                        path.x[i].q1, path.x[i].q2, path.x[i].z12, path.pi[i],
                        ox::to_string(path.regime[i]));
          os << buf;
        }
        write_text(fluid_csv, os.str());
      }
      const auto& end = path.x.back();
      const auto xs = ox::stationary_point(p);
      std::printf("x(%g) = (%.6f, %.6f, %.6f)  distance to x* %.3g\n", path.t.back(), end.q1,
                  end.q2, end.z12, ox::max_norm_distance(end, xs.state()));
      return 0;
    }

    if (*stationary) {
      const auto s = ox::stationary_point(p);
      if (stationary_json) {
        std::cout << json{{"z12", s.z12s}, {"q1", s.q1s}, {"q2", s.q2s}, {"pi", s.piStar},
                          {"inA", s.inA}}
                         .dump(2)
                  << "\n";
      } else {
        std::printf("z12* %.6f  q1* %.6f  q2* %.6f  pi* %.6f  in A %s\n", s.z12s, s.q1s, s.q2s,
                    s.piStar, s.inA ? "yes" : "no");
      }
      return 0;
    }

    if (*diffusion) {
      ox::DiffusionOptions o;
      o.method = ox::parse_sigma2_method(diff_method);
      o.psi_convention = ox::parse_psi_convention(diff_psi);
      const auto bou = ox::bou_matrices(p, o);
      const auto cov = ox::steady_state_covariance(bou);
      const auto g = ox::gaussian_queue_approx(p, diff_n, o);
      if (diff_csv) {
        std::printf("n,sigma2_method,psi_convention,mean_q1,mean_q2,std_qs,std_q1,std_q2,"
                    "std_z12,varQs,varZ,covQZ\n%d,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                    "%.6f\n",
                    diff_n, diff_method.c_str(), ox::to_string(o.psi_convention), g.mean_q1,
                    g.mean_q2, g.std_qs, g.std_q1, g.std_q2, g.std_z12, cov.varQs, cov.varZ,
                    cov.covQZ);
      } else {
        json j{{"n", diff_n},
               {"sigma2_method", diff_method},
               {"psi_convention", ox::to_string(o.psi_convention)},
               {"psi", bou.psi},
               {"sigma2", bou.sigma2},
               {"M", {{bou.M(0, 0), bou.M(0, 1)}, {bou.M(1, 0), bou.M(1, 1)}}},
               {"S2", {bou.V(0, 0), bou.V(1, 1)}},
               {"varQs", cov.varQs},
               {"varZ", cov.varZ},
               {"covQZ", cov.covQZ},
               {"mean_q1", g.mean_q1},
               {"mean_q2", g.mean_q2},
               {"std_qs", g.std_qs},
               {"std_q1", g.std_q1},
               {"std_q2", g.std_q2},
               {"std_z12", g.std_z12}};
        std::cout << j.dump(2) << "\n";
      }
      return 0;
    }

    if (*simulate) {
      if (sim_runs) cfg.runs = *sim_runs;
      if (sim_arrivals) cfg.arrivals = *sim_arrivals;
      if (sim_start) cfg.start = ox::parse_start_mode(*sim_start);
      if (sim_warmup) cfg.warmup = *sim_warmup;
      if (sim_seed) cfg.seed = *sim_seed;
      const auto sys = ox::scale(p, sim_n);
      const auto opts = cfg.run_options();
      const auto est = ox::replicate(sys, cfg.runs, opts, cfg.seed);
      std::printf("# n=%d runs=%d arrivals=%lld start=%s warmup=%.2f seed=%llu\n", sim_n,
                  cfg.runs, static_cast<long long>(opts.arrivals), ox::to_string(opts.start),
                  opts.warmup, static_cast<unsigned long long>(cfg.seed));
      if (sim_csv) {
        std::printf("run,mean_q1,mean_q2,std_qs,std_q1,std_q2,mean_z12,frac_d12_positive,"
                    "frac_pools_not_full\n");
        for (std::size_t i = 0; i < est.per_run.size(); ++i) {
          const auto& r = est.per_run[i];
          std::printf("%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", i, r.mean_q1, r.mean_q2,
                      r.std_qs(), r.std_q1(), r.std_q2(), r.mean_z12, r.frac_d12_positive,
                      r.frac_pools_not_full);
        }
      }
      auto line = [](const char* name, const ox::ReplicationSummary& s) {
        std::printf("%-20s %10.4f +- %.4f\n", name, s.mean, s.half_width);
      };
      line("E[Q1]", est.mean_q1);
      line("E[Q2]", est.mean_q2);
      line("std(Qs)", est.std_qs);
      line("std(Q1)", est.std_q1);
      line("std(Q2)", est.std_q2);
      line("P(D12 > 0)", est.frac_d12_positive);
      return 0;
    }

    if (*validate) {
      if (val_method) cfg.sigma2_method = ox::parse_sigma2_method(*val_method);
      if (val_psi) cfg.psi_convention = ox::parse_psi_convention(*val_psi);
      if (val_seed) cfg.seed = *val_seed;
      if (val_runs) cfg.runs = *val_runs;
      if (val_arrivals) cfg.arrivals = *val_arrivals;
      const std::string csv = cfg.output.csv.empty() ? val_csv : cfg.output.csv;
      const std::string md = cfg.output.markdown.empty() ? val_md : cfg.output.markdown;
      const auto report = ox::validate_command(cfg);
      ox::emit_report(report, csv, md);
      std::printf("chain %s, approximations %s, simulation overlap %d/%d -> %s\n",
                  report.chain_pass() ? "pass" : "fail", report.approx_pass() ? "pass" : "fail",
                  report.overlapping_cells(), report.stochastic_cells(),
                  report.passed() ? "PASS" : "FAIL");
      return report.passed() ? 0 : 2;
    }

    std::cout << app.help() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
