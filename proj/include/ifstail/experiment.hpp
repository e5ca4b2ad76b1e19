#pragma once

// Runs one configured experiment and writes its output files.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ifstail/config.hpp"
#include "ifstail/entropy_tools.hpp"
#include "ifstail/error.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/presets.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/tail_analysis.hpp"

namespace ifstail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

struct RunOptions {
  std::filesystem::path out_dir = "out";
  unsigned threads = 0;
};

struct RunResult {
  int exit_code = kExitOk;
  // One line each: results worth echoing, then flags and notes.
  std::vector<std::string> lines;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::string printf_real(const char *format, double v) {
  if (!std::isfinite(v)) return format_real(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

inline std::string join_reals(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_real(v[i]);
  }
  return out;
}

inline std::string join_point(const Point &p) {
  return join_reals(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class Runner {
 public:
  Runner(const ExperimentConfig &config, const RunOptions &options)
      : config_(config), options_(options), mu_(build_measure(config)) {}

  RunResult run() {
    std::error_code ec;
    std::filesystem::create_directories(options_.out_dir, ec);
    require(!ec, ErrorCode::IoError,
            "cannot create " + options_.out_dir.string() + ": " + ec.message());
    if (config_.preset && config_.preset->name == "prime_q" &&
        !presets::is_prime(static_cast<std::uint64_t>(config_.preset->q))) {
      note("note=q = " + std::to_string(config_.preset->q) +
           " is not prime; tail results still apply");
    }
    const auto started = std::chrono::steady_clock::now();
    switch (config_.experiment) {
      case ExperimentKind::Chi: chi(); break;
      case ExperimentKind::Moment: moment_table(); break;
      case ExperimentKind::Lyapunov: lyapunov(); break;
      case ExperimentKind::Sample: sample(); break;
      case ExperimentKind::Tail: tail(); break;
      case ExperimentKind::Ldp: ldp(); break;
      case ExperimentKind::Rate: rate(); break;
      case ExperimentKind::Entropy: entropy(); break;
      case ExperimentKind::LowerBound: lowerbound(); break;
      case ExperimentKind::Diagnose: diagnose(); break;
    }
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    write_manifest(wall);
    return std::move(result_);
  }

 private:
  void emit(const std::string &name, const std::string &body) {
    const auto path = options_.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    out.close();
    require(static_cast<bool>(out), ErrorCode::IoError,
            "failed writing " + path.string());
    result_.files.push_back(path);
    hashes_.push_back(name + "=" + fnv1a_hex(body));
  }

  void say(const std::string &line) { result_.lines.push_back(line); }

  void note(const std::string &line) {
    notes_.push_back(line);
    say(line);
  }

  void flag(const std::string &line) {
    result_.exit_code = kExitFlagged;
    note("flag=" + line);
  }

  Point start() const { return start_point(config_); }

  SampleSet draw_samples() {
    SampleSet set = sample_batch(mu_, start(), config_.tol, config_.count,
                                 config_.max_steps, config_.seed,
                                 {options_.threads, config_.truncation_ceiling});
    if (!set.valid()) {
      flag("truncated fraction " + format_real(set.truncated_fraction()) +
           " exceeds ceiling " + format_real(set.truncation_ceiling));
    }
    return set;
  }

  Point tail_center(const SampleSet &set) const {
    if (!config_.center.empty()) {
      return Eigen::Map<const Point>(
          config_.center.data(), static_cast<Eigen::Index>(config_.center.size()));
    }
    return default_tail_center(mu_, set);
  }

  void chi() {
    const auto c = contraction_rate_certified(mu_);
    std::string body = "chi=" + printf_real("%.9f", c.value) + "\n" +
                       "chi_full=" + format_real(c.value) + "\n" +
                       "error_bound=" + format_real(c.error_bound) + "\n";
    if (mu_.is_countable()) {
      body += "truncation=" + std::to_string(mu_.tail()->truncation) + "\n";
      body += "truncated_mass=" + format_real(mu_.truncated_mass()) + "\n";
    }
    say("chi=" + printf_real("%.9f", c.value));
    require(c.error_bound <= kContractionCertificationTarget,
            ErrorCode::UncertifiableTail,
            "contraction rate truncation error exceeds 1e-9");
    emit("chi.txt", body);
  }

  void moment_table() {
    std::string body = "t,value,diverges,tail_bound,witness\n";
    for (double t : config_.t_grid) {
      const auto m = moment(mu_, t);
      body += format_real(t) + "," + format_real(m.value) + "," +
              (m.diverges ? "1" : "0") + "," + format_real(m.tail_bound) + "," +
              std::to_string(m.witness) + "\n";
      say("moment(" + format_real(t) + ")=" +
          (m.diverges ? std::string("DIVERGES") : format_real(m.value)));
    }
    emit("moment.csv", body);
  }

  void lyapunov() {
    const auto est =
        lyapunov_estimate(mu_, config_.n, config_.trials, config_.seed,
                          {options_.threads, config_.work_budget});
    const double chi = contraction_rate(mu_);
    emit("lyapunov.txt", "lambda_hat=" + format_real(est.mean) + "\n" +
                             "stderr=" + format_real(est.std_error) + "\n" +
                             "n=" + std::to_string(config_.n) + "\n" +
                             "trials=" + std::to_string(config_.trials) + "\n" +
                             "chi=" + format_real(chi) + "\n");
    say("lambda_hat=" + format_real(est.mean) + " stderr=" +
        format_real(est.std_error));
  }

  void sample() {
    const SampleSet set = draw_samples();
    std::ostringstream csv;
    write_samples_csv(csv, set);
    emit("samples.csv", csv.str());
    emit("sample.txt",
         "count=" + std::to_string(set.size()) + "\n" +
             "truncated_fraction=" + format_real(set.truncated_fraction()) +
             "\n" + "valid=" + (set.valid() ? "1" : "0") + "\n" +
             "dropped_mass=" + format_real(set.dropped_mass) + "\n" +
             "measure_id=" + set.measure_id + "\n");
    say("samples=" + std::to_string(set.size()) +
        " truncated_fraction=" + format_real(set.truncated_fraction()));
  }

  void tail() {
    const SampleSet set = draw_samples();
    TailCurve curve;
    const Point center = tail_center(set);
    resolved_.push_back("center_resolved=" + join_point(center));
    std::string body;
    try {
      const auto radii = config_.radii.mode == RadiiSpec::Mode::Auto
                             ? auto_radii(set, center)
                             : resolve_radii(config_.radii);
      resolved_.push_back("radii_resolved=" + join_reals(radii));
      curve = empirical_tail(set, center, radii);
      std::ostringstream csv;
      write_tail_csv(csv, curve);
      emit("tail.csv", csv.str());
      const TailFit fit = fit_tail_exponent(curve, config_.min_exceed);
      body = "alpha_hat=" + format_real(fit.alpha_hat) + "\n" +
             "stderr=" + format_real(fit.std_error) + "\n" +
             "stderr_ols=" + format_real(fit.ols_std_error) + "\n" +
             "r_squared=" + format_real(fit.r_squared) + "\n" +
             "radii_used=" + join_reals(fit.radii_used) + "\n";
      say("alpha_hat=" + format_real(fit.alpha_hat) +
          " stderr=" + format_real(fit.std_error));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::InsufficientTailData) throw;
      if (curve.radii.empty()) {
        std::ostringstream csv;
        write_tail_csv(csv, curve);
        emit("tail.csv", csv.str());
      }
      body = "alpha_hat=nan\nerror=" + std::string(e.what()) + "\n";
      flag(e.what());
    }
    body += "center=" + join_point(center) + "\n";
    if (!mu_.is_countable()) {
      try {
        const auto lb = lower_bound_exponent(mu_);
        body += "alpha_1=" + format_real(lb.alpha_1) + "\n";
      } catch (const Error &) {
      }
    }
    emit("tail_fit.txt", body);
  }

  void ldp() {
    const LdpCurve curve =
        ldp_empirical(mu_, config_.epsilon, config_.n_grid, config_.trials,
                      config_.seed, config_.variant,
                      {options_.threads, config_.work_budget, 0});
    std::ostringstream csv;
    write_ldp_csv(csv, curve);
    emit("ldp.csv", csv.str());
    std::string body;
    try {
      const RateFit fit = ldp_rate_fit(curve);
      body = "delta_hat=" + format_real(fit.delta_hat) + "\n" +
             "stderr=" + format_real(fit.std_error) + "\n";
      say("delta_hat=" + format_real(fit.delta_hat));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::InsufficientLdpData) throw;
      body = "delta_hat=nan\nerror=" + std::string(e.what()) + "\n";
      flag(e.what());
    }
    body += "epsilon=" + format_real(curve.epsilon) + "\n";
    body += std::string("variant=") +
            (curve.variant == LdpVariant::Product ? "product" : "factorwise") +
            "\n";
    body += "reference=" + format_real(curve.reference) + "\n";
    body += "reference_stderr=" + format_real(curve.reference_stderr) + "\n";
    // The Product reference is a Monte Carlo Lyapunov estimate from the same
    // kind of words the event is measured on.
    body += std::string("reference_estimated=") +
            (curve.reference_estimated ? "1" : "0") + "\n";
    if (curve.variant == LdpVariant::Factorwise) {
      body += "rate_minus=" +
              format_real(rate_at(mu_, curve.reference - curve.epsilon,
                                  config_.t_max)) +
              "\n";
      body += "rate_plus=" +
              format_real(rate_at(mu_, curve.reference + curve.epsilon,
                                  config_.t_max)) +
              "\n";
    }
    emit("ldp_fit.txt", body);
  }

  void rate() {
    std::vector<double> grid = config_.x_grid;
    if (grid.empty()) {
      const auto rhos = mu_.lipschitz_constants();
      double lo = std::log(*std::min_element(rhos.begin(), rhos.end()));
      double hi = std::log(*std::max_element(rhos.begin(), rhos.end()));
      const double pad = hi > lo ? 0.05 * (hi - lo) : 0.1;
      lo -= pad;
      hi += pad;
      for (int i = 0; i <= 200; ++i) grid.push_back(lo + (hi - lo) * i / 200.0);
    }
    const RateFunction r = rate_function(mu_, grid, config_.t_max);
    std::string body = "x,rate\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      body += format_real(r.grid[i]) + "," + format_real(r.values[i]) + "\n";
    }
    emit("rate.csv", body);
    say("rate points=" + std::to_string(r.grid.size()));
  }

  void entropy() {
    const SampleSet set = draw_samples();
    const auto h = smoothed_entropy(set, config_.sigma, config_.eval_count,
                                    config_.seed, {options_.threads, 1000});
    const SampleSet smoothed = smooth_samples(set, config_.sigma, config_.seed);
    const Point center = tail_center(set);
    const AnnulusReport a = annulus_bound(smoothed, center, config_.L, config_.i_max);
    if (!a.reliable) {
      flag("annulus leftover mass " + format_real(a.leftover_mass) +
           " exceeds 1%");
    }
    emit("entropy.txt",
         "H_hat=" + format_real(h.mean) + "\n" +
             "stderr=" + format_real(h.std_error) + "\n" +
             "annulus_bound=" + format_real(a.bound) + "\n" +
             "L=" + format_real(a.L) + "\n" +
             "leftover_mass=" + format_real(a.leftover_mass) + "\n" +
             "annulus_bound_from_unit=" + format_real(a.bound_from_unit) +
             "\n" + "i_max=" + std::to_string(a.i_max) + "\n" +
             "sigma=" + format_real(config_.sigma) + "\n" +
             "center=" + join_point(center) + "\n");
    say("H_hat=" + format_real(h.mean) + " annulus_bound=" + format_real(a.bound));
  }

  void lowerbound() {
    const auto lb = lower_bound_exponent(mu_);
    std::string fp;
    for (Eigen::Index i = 0; i < lb.fixed_point.size(); ++i) {
      if (i) fp += ';';
      fp += printf_real("%.10g", lb.fixed_point(i));
    }
    emit("lowerbound.txt", "alpha_1=" + printf_real("%.6f", lb.alpha_1) + "\n" +
                               "alpha_1_full=" + format_real(lb.alpha_1) + "\n" +
                               "atom=" + std::to_string(lb.atom_index) + "\n" +
                               "fixed_point=" + fp + "\n");
    say("alpha_1=" + printf_real("%.6f", lb.alpha_1) + " atom=" +
        std::to_string(lb.atom_index) + " fixed_point=" + fp);
  }

  void diagnose() {
    DiagnosticOptions opts;
    if (!config_.center.empty()) {
      opts.center = Eigen::Map<const Point>(
          config_.center.data(), static_cast<Eigen::Index>(config_.center.size()));
    }
    opts.reference_size = config_.reference_size;
    opts.reference_tol = config_.tol;
    opts.threads = options_.threads;
    const auto report =
        convergence_diagnostic(mu_, start(), config_.radius, config_.n_grid,
                               config_.trials, config_.seed, opts);
    std::string csv = "n,gap,noise,above_noise\n";
    for (const auto &p : report.points) {
      csv += std::to_string(p.n) + "," + format_real(p.gap) + "," +
             format_real(p.noise) + "," + (p.above_noise ? "1" : "0") + "\n";
    }
    emit("diagnose.csv", csv);
    emit("diagnose.txt",
         "reference_mean=" + format_real(report.reference_mean) + "\n" +
             "below_noise=" + (report.below_noise ? "1" : "0") + "\n" +
             "theta_hat=" + format_real(report.theta_hat) + "\n");
    say(report.below_noise ? std::string("BelowNoise")
                           : "theta_hat=" + format_real(report.theta_hat));
  }

  void write_manifest(double wall_seconds) {
    std::string body;
    body += "experiment=" + std::string(to_string(config_.experiment)) + "\n";
    body += "seed=" + std::to_string(config_.seed) + "\n";
    body += "measure_hash=" + mu_.content_hash() + "\n";
    for (const auto &h : hashes_) body += "hash." + h + "\n";
    for (const auto &r : resolved_) body += r + "\n";
    for (const auto &n : notes_) body += n + "\n";
    body += "exit_status=" + std::to_string(result_.exit_code) + "\n";
    body += "threads=" + std::to_string(resolve_threads(options_.threads)) + "\n";
    body += "wall_time_s=" + printf_real("%.3f", wall_seconds) + "\n";
    body += "finished_at=" + std::to_string(std::time(nullptr)) + "\n";
    Json compact = Json::parse(render_config(config_));
    body += "config=" + compact.dump() + "\n";
    const auto path = options_.out_dir / "manifest.txt";
    std::ofstream out(path, std::ios::binary);
    out << body;
    require(static_cast<bool>(out), ErrorCode::IoError,
            "failed writing " + path.string());
    result_.files.push_back(path);
  }

  const ExperimentConfig &config_;
  RunOptions options_;
  GeneratingMeasure mu_;
  RunResult result_;
  std::vector<std::string> hashes_;
  std::vector<std::string> resolved_;
  std::vector<std::string> notes_;
};

}  // namespace detail

/// Throws ifstail::Error on hard failures; flagged results come back with
/// exit_code 2.
inline RunResult run_experiment(const ExperimentConfig &config,
                                const RunOptions &options = {}) {
  validate(config);
  return detail::Runner(config, options).run();
}

}  // namespace ifstail
