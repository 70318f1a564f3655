#pragma once

// Monte Carlo experiments on subsampled-DCT coding problems: posterior chains,
// the MMSE / mMAP estimates, FITRA under three regularization rules, LS and
// the Gaussian-prior baseline, all scored by SNR_y, SNR_x and PAPR.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "democ/coder.hpp"
#include "democ/estimators.hpp"
#include "democ/harness/dct.hpp"
#include "democ/harness/io.hpp"
#include "democ/harness/metrics.hpp"
#include "democ/rng.hpp"

namespace democ::harness {

enum class SignalModel { Toy, Gaussian };

inline std::string to_string(SignalModel s) { return s == SignalModel::Toy ? "toy" : "gaussian"; }

inline SignalModel signal_model_from_string(const std::string& s) {
  if (s == "toy") return SignalModel::Toy;
  if (s == "gaussian") return SignalModel::Gaussian;
  throw std::invalid_argument("unknown signal model: " + s);
}

struct ScenarioConfig {
  Eigen::Index m = 50;
  Eigen::Index n = 70;
  std::size_t trials = 20;
  std::size_t total_iters = 12000;
  std::size_t burn_in = 10000;
  std::vector<CoefStepKind> kinds{CoefStepKind::PMala};
  std::uint64_t seed = 1;
  SignalModel signal = SignalModel::Gaussian;
  std::size_t mh_moves = 20;
  /// Initial P-MALA proposal variance, adapted during burn-in. With
  /// relative_step it is a multiple of sigma2 / ||H||^2 instead.
  double step_size = 0.5;
  bool relative_step = false;
  double hyper_a = 1e-3;
  double hyper_b = 1e-3;
  ResidualExponent exponent = ResidualExponent::Exact;
  bool fitra = true;
  double target_snr_y = 20.0;
  double target_papr = 1.5;
  std::size_t fitra_max_iters = 500;
  std::size_t bisection_steps = 30;
  double log10_beta_lo = -6.0;
  double log10_beta_hi = 4.0;
  /// FITRA (beta, SNR_y, PAPR) grid for the first trial, for trade-off plots; 0 = off.
  std::size_t beta_path_points = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const {
    if (m < 1 || n < m) throw std::invalid_argument("ScenarioConfig: need 1 <= M <= N");
    if (trials < 1) throw std::invalid_argument("ScenarioConfig: trials must be >= 1");
    if (!kinds.empty() && burn_in >= total_iters)
      throw std::invalid_argument("ScenarioConfig: burn_in must be < total_iters");
    if (!(log10_beta_lo < log10_beta_hi)) throw std::invalid_argument("ScenarioConfig: bad beta range");
  }

  static ScenarioConfig scenario1() { return {}; }
  static ScenarioConfig scenario2(Eigen::Index n) {
    ScenarioConfig c;
    c.m = 128;
    c.n = n;
    c.total_iters = 55000;
    c.burn_in = 50000;
    return c;
  }
  static ScenarioConfig toy() {
    ScenarioConfig c;
    c.m = 16;
    c.n = 16;
    c.trials = 1;
    c.total_iters = 3000;
    c.burn_in = 2000;
    c.signal = SignalModel::Toy;
    c.kinds = {CoefStepKind::Gibbs, CoefStepKind::PMala};
    return c;
  }
};

inline Json to_json(const ScenarioConfig& c) {
  Json kinds = Json::array();
  for (auto k : c.kinds) kinds.push_back(to_string(k));
  return Json{{"M", c.m},
              {"N", c.n},
              {"trials", c.trials},
              {"T_MC", c.total_iters},
              {"T_bi", c.burn_in},
              {"kinds", kinds},
              {"seed", c.seed},
              {"signal", to_string(c.signal)},
              {"mh_moves", c.mh_moves},
              {"step_size", c.step_size},
              {"relative_step", c.relative_step},
              {"hyper_a", c.hyper_a},
              {"hyper_b", c.hyper_b},
              {"residual_exponent", c.exponent == ResidualExponent::Exact ? "exact" : "halved"},
              {"fitra", c.fitra},
              {"target_snr_y", c.target_snr_y},
              {"target_papr", c.target_papr},
              {"fitra_max_iters", c.fitra_max_iters},
              {"bisection_steps", c.bisection_steps},
              {"log10_beta_lo", c.log10_beta_lo},
              {"log10_beta_hi", c.log10_beta_hi},
              {"beta_path_points", c.beta_path_points}};
}

/// Missing keys keep the defaults of `base`.
inline ScenarioConfig scenario_from_json(const Json& j, ScenarioConfig c = {}) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("M", c.m);
  get("N", c.n);
  get("trials", c.trials);
  get("T_MC", c.total_iters);
  get("T_bi", c.burn_in);
  get("seed", c.seed);
  get("mh_moves", c.mh_moves);
  get("step_size", c.step_size);
  get("relative_step", c.relative_step);
  get("hyper_a", c.hyper_a);
  get("hyper_b", c.hyper_b);
  get("fitra", c.fitra);
  get("target_snr_y", c.target_snr_y);
  get("target_papr", c.target_papr);
  get("fitra_max_iters", c.fitra_max_iters);
  get("bisection_steps", c.bisection_steps);
  get("log10_beta_lo", c.log10_beta_lo);
  get("log10_beta_hi", c.log10_beta_hi);
  get("beta_path_points", c.beta_path_points);
  get("threads", c.threads);
  if (j.contains("signal")) c.signal = signal_model_from_string(j.at("signal").get<std::string>());
  if (j.contains("residual_exponent")) {
    const auto e = j.at("residual_exponent").get<std::string>();
    if (e != "exact" && e != "halved") throw std::invalid_argument("residual_exponent: exact|halved");
    c.exponent = e == "exact" ? ResidualExponent::Exact : ResidualExponent::Halved;
  }
  if (j.contains("kinds")) {
    c.kinds.clear();
    for (const auto& k : j.at("kinds")) c.kinds.push_back(coef_step_from_string(k.get<std::string>()));
  }
  c.validate();
  return c;
}

struct EstimateScore {
  Metrics metrics;
  /// Regularization used (FITRA rows only).
  std::optional<double> beta;
};

struct ChainSummary {
  double runtime_s = 0.0;
  double acceptance_rate = 1.0;
  double final_step = 0.0;
  double sigma2_mmse = 0.0;
  double lambda_mmse = 0.0;
};

struct BetaPathPoint {
  double beta;
  double snr_y;
  double papr;
};

struct TrialResult {
  std::size_t trial = 0;
  std::map<std::string, EstimateScore> estimates;
  std::map<std::string, ChainSummary> chains;
  std::vector<BetaPathPoint> beta_path;
  std::map<std::string, std::string> estimator_errors;
  std::optional<std::string> error;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  /// Trials whose value was +inf (excluded from mean / std).
  std::size_t infinite = 0;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<TrialResult> trials;
  /// estimator -> metric name -> summary over successful trials.
  std::map<std::string, std::map<std::string, Summary>> aggregate;
  double runtime_s = 0.0;
};

struct TrialData {
  Vector y;
  Matrix h;
  std::optional<Vector> x_true;
};

/// Coding problem for one trial: a DCT frame plus either a noise-free
/// +-1/N toy signal or a standardized Gaussian measurement vector.
inline TrialData draw_trial_data(const ScenarioConfig& cfg, RngStream& rng) {
  TrialData d;
  d.h = build_dct_frame(cfg.m, cfg.n, rng);
  if (cfg.signal == SignalModel::Toy) {
    Vector x(cfg.n);
    const double amp = 1.0 / static_cast<double>(cfg.n);
    for (Eigen::Index i = 0; i < cfg.n; ++i) x[i] = rng.coin() ? amp : -amp;
    d.y = d.h * x;
    d.x_true = std::move(x);
  } else {
    d.y.resize(cfg.m);
    for (Eigen::Index i = 0; i < cfg.m; ++i) d.y[i] = rng.normal();
    d.y *= std::sqrt(static_cast<double>(cfg.m)) / d.y.norm();
  }
  return d;
}

namespace detail {

struct FitraEval {
  Vector x;
  double snr_y;
  double papr;
};

// A zero solution has no PAPR; it sits at the fully regularized end, PAPR -> 1.
inline FitraEval fitra_eval(const CodingProblem& pb, double beta, const FitraOptions& opt) {
  auto r = fitra(pb, beta, opt);
  const double res_sq = pb.residual(r.x_hat).squaredNorm();
  const double snr = snr_db(pb.y().squaredNorm(), res_sq);
  const double pp = r.x_hat.squaredNorm() > 0.0 ? papr(r.x_hat) : 1.0;
  return {std::move(r.x_hat), snr, pp};
}

}  // namespace detail

struct BetaSearch {
  double beta;
  Vector x;
};

/// Bisection on log10(beta). `too_small(eval)` says the current beta
/// under-regularizes (the target lies at larger beta). The answer is the last
/// nonzero solution on the `feasible_low` side of the bracket (the low-beta end
/// when true), else on the other side. Each solve is warm-started from the
/// previous one.
template <class Pred>
inline BetaSearch bisect_beta(const CodingProblem& pb, const ScenarioConfig& cfg, double lip,
                              Pred too_small, bool feasible_low) {
  double lo = cfg.log10_beta_lo;
  double hi = cfg.log10_beta_hi;
  FitraOptions opt;
  opt.max_iters = cfg.fitra_max_iters;
  opt.lipschitz = lip;
  std::optional<BetaSearch> at_lo, at_hi;
  for (std::size_t k = 0; k < std::max<std::size_t>(cfg.bisection_steps, 1); ++k) {
    const double mid = 0.5 * (lo + hi);
    const double beta = std::pow(10.0, mid);
    auto ev = detail::fitra_eval(pb, beta, opt);
    opt.warm_start = ev.x;
    const bool nonzero = ev.x.squaredNorm() > 0.0;
    if (too_small(ev)) {
      lo = mid;
      if (nonzero) at_lo = BetaSearch{beta, std::move(ev.x)};
    } else {
      hi = mid;
      if (nonzero) at_hi = BetaSearch{beta, std::move(ev.x)};
    }
  }
  auto& first = feasible_low ? at_lo : at_hi;
  auto& second = feasible_low ? at_hi : at_lo;
  if (first) return *first;
  if (second) return *second;
  throw std::domain_error("bisect_beta: every solution on the bracket was zero");
}

inline std::vector<BetaPathPoint> beta_path(const CodingProblem& pb, const ScenarioConfig& cfg,
                                            double lip, std::size_t points) {
  std::vector<BetaPathPoint> out;
  FitraOptions opt;
  opt.max_iters = cfg.fitra_max_iters;
  opt.lipschitz = lip;
  for (std::size_t k = 0; k < points; ++k) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    const double beta = std::pow(10.0, cfg.log10_beta_lo + frac * (cfg.log10_beta_hi - cfg.log10_beta_lo));
    auto ev = detail::fitra_eval(pb, beta, opt);
    opt.warm_start = ev.x;
    out.push_back({beta, ev.snr_y, ev.papr});
  }
  return out;
}

inline TrialResult run_trial(const ScenarioConfig& cfg, std::size_t trial) {
  TrialResult out;
  out.trial = trial;
  RngStream rng = RngStream(cfg.seed).split(trial);
  const TrialData data = draw_trial_data(cfg, rng);
  const CodingProblem pb(data.y, data.h, cfg.hyper_a, cfg.hyper_b);
  // A failing estimator is recorded and the rest of the trial goes on.
  auto guarded = [&](const std::string& name, const auto& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out.estimator_errors[name] = e.what();
    }
  };
  auto score = [&](const std::string& name, VectorCRef x, std::optional<double> beta = {}) {
    guarded(name, [&] {
      auto m = evaluate_metrics(data.x_true, x, data.y, data.h);
      out.estimates[name] = {m, beta};
    });
  };

  // The nuisance estimates feeding FITRA-1 and the Gaussian baseline come from
  // the P-MALA chain when there is one, else from the first chain run.
  std::optional<NuisanceMeans> nuisance;
  for (const auto kind : cfg.kinds) {
    PosteriorConfig pc;
    pc.chain.total_iters = cfg.total_iters;
    pc.chain.burn_in = cfg.burn_in;
    pc.chain.step_size = cfg.step_size;
    pc.step_relative_to_noise = cfg.relative_step;
    pc.kind = kind;
    pc.mh_moves_per_iter = cfg.mh_moves;
    RngStream chain_rng = rng.split(static_cast<std::uint64_t>(kind) + 1);
    const auto t0 = std::chrono::steady_clock::now();
    const auto chain = run_chain(pb, pc, chain_rng);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto nm = nuisance_mmse(chain);
    if (!nuisance || kind == CoefStepKind::PMala) nuisance = nm;
    out.chains[to_string(kind)] = {secs, chain.acceptance_rate, chain.final_step, nm.sigma2, nm.lambda};
    score(to_string(kind) + "_mmse", mmse_estimate(chain).x_hat);
    score(to_string(kind) + "_mmap", mmap_estimate(chain, pb, cfg.exponent).x_hat);
  }

  const double lip = spectral_norm_sq(data.h);
  if (cfg.fitra) {
    if (nuisance) {
      const double beta = 2.0 * nuisance->lambda * nuisance->sigma2;
      FitraOptions opt;
      opt.max_iters = cfg.fitra_max_iters;
      opt.lipschitz = lip;
      score("fitra1", fitra(pb, beta, opt).x_hat, beta);
    }
    guarded("fitra2", [&] {
      const auto f2 = bisect_beta(
          pb, cfg, lip, [&](const detail::FitraEval& e) { return e.snr_y > cfg.target_snr_y; }, true);
      score("fitra2", f2.x, f2.beta);
    });
    guarded("fitra3", [&] {
      const auto f3 = bisect_beta(
          pb, cfg, lip, [&](const detail::FitraEval& e) { return e.papr > cfg.target_papr; }, false);
      score("fitra3", f3.x, f3.beta);
    });
    if (trial == 0 && cfg.beta_path_points > 0) out.beta_path = beta_path(pb, cfg, lip, cfg.beta_path_points);
  }

  if (nuisance) {
    const double prior_var =
        moments(DemocraticParams(static_cast<std::size_t>(cfg.n), nuisance->lambda)).variance;
    const auto refs = reference_solvers(pb, nuisance->sigma2, prior_var);
    score("ls", refs[0].x_hat);
    score("ridge_mmse", refs[1].x_hat);
    score("ridge_map", refs[2].x_hat);
  } else {
    score("ls", pb.h().completeOrthogonalDecomposition().solve(pb.y()));
  }
  return out;
}

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  double sum = 0.0;
  for (double x : v) {
    if (std::isinf(x)) {
      ++s.infinite;
      continue;
    }
    sum += x;
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double x : v)
    if (!std::isinf(x)) ss += (x - s.mean) * (x - s.mean);
  s.std = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

inline void aggregate(ScenarioReport& rep) {
  std::map<std::string, std::map<std::string, std::vector<double>>> cols;
  for (const auto& t : rep.trials) {
    if (t.error) continue;
    for (const auto& [name, e] : t.estimates) {
      cols[name]["snr_y"].push_back(e.metrics.snr_y);
      cols[name]["papr"].push_back(e.metrics.papr);
      if (e.metrics.snr_x) cols[name]["snr_x"].push_back(*e.metrics.snr_x);
    }
    for (const auto& [name, c] : t.chains) {
      cols["chain_" + name]["runtime_s"].push_back(c.runtime_s);
      cols["chain_" + name]["acceptance_rate"].push_back(c.acceptance_rate);
    }
  }
  rep.aggregate.clear();
  for (const auto& [name, metrics] : cols)
    for (const auto& [metric, values] : metrics) rep.aggregate[name][metric] = summarize(values);
}

inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioReport rep;
  rep.config = cfg;
  rep.trials.resize(cfg.trials);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.trials; i = next++) {
      try {
        rep.trials[i] = run_trial(cfg, i);
      } catch (const std::exception& e) {
        rep.trials[i] = TrialResult{};
        rep.trials[i].trial = i;
        rep.trials[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  aggregate(rep);
  return rep;
}

inline Json to_json(const Metrics& m) {
  Json j{{"snr_y", json_number(m.snr_y)}, {"papr", json_number(m.papr)}};
  if (m.snr_x) j["snr_x"] = json_number(*m.snr_x);
  return j;
}

/// Timings are left out when `with_timing` is false so reports compare bit-for-bit.
inline Json to_json(const ScenarioReport& rep, bool with_timing = true) {
  Json j;
  j["config"] = to_json(rep.config);
  j["config_hash"] = config_hash(j["config"]);
  Json trials = Json::array();
  for (const auto& t : rep.trials) {
    Json jt{{"trial", t.trial}};
    if (t.error) jt["error"] = *t.error;
    for (const auto& [name, msg] : t.estimator_errors) jt["estimator_errors"][name] = msg;
    Json est = Json::object();
    for (const auto& [name, e] : t.estimates) {
      Json je = to_json(e.metrics);
      if (e.beta) je["beta"] = json_number(*e.beta);
      est[name] = je;
    }
    jt["estimates"] = est;
    Json ch = Json::object();
    for (const auto& [name, c] : t.chains) {
      Json jc{{"acceptance_rate", json_number(c.acceptance_rate)},
              {"final_step", json_number(c.final_step)},
              {"sigma2_mmse", json_number(c.sigma2_mmse)},
              {"lambda_mmse", json_number(c.lambda_mmse)}};
      if (with_timing) jc["runtime_s"] = c.runtime_s;
      ch[name] = jc;
    }
    jt["chains"] = ch;
    trials.push_back(jt);
  }
  j["trials"] = trials;
  Json agg = Json::object();
  for (const auto& [name, metrics] : rep.aggregate) {
    for (const auto& [metric, s] : metrics) {
      if (!with_timing && metric == "runtime_s") continue;
      agg[name][metric] = {{"mean", json_number(s.mean)},
                           {"std", json_number(s.std)},
                           {"count", s.count},
                           {"infinite", s.infinite}};
    }
  }
  j["aggregate"] = agg;
  if (with_timing) j["runtime_s"] = rep.runtime_s;
  return j;
}

}  // namespace democ::harness
