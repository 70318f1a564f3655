// Command-line front end: sample, prox, code, geweke, scenario, acf.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "democ/coder.hpp"
#include "democ/democratic.hpp"
#include "democ/estimators.hpp"
#include "democ/harness/dct.hpp"
#include "democ/harness/geweke.hpp"
#include "democ/harness/io.hpp"
#include "democ/harness/metrics.hpp"
#include "democ/harness/scenario.hpp"
#include "democ/prox.hpp"
#include "democ/samplers.hpp"

using namespace democ;
using namespace democ::harness;

namespace {

Json with_hash(Json config) {
  Json h{{"config", config}, {"config_hash", config_hash(config)}};
  return h;
}

void emit_json(const Json& j, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json_file(path, j);
}

void emit_table(const Table& t, const std::string& path) {
  if (path.empty() || path == "-")
    write_table(std::cout, t);
  else
    write_table_file(path, t);
}

// ---- sample

struct SampleArgs {
  std::string kind = "exact";
  std::size_t n = 10;
  double lambda = 3.0;
  std::size_t iters = 1000;
  std::size_t burn_in = 0;
  double step = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

void run_sample(const SampleArgs& a) {
  const DemocraticParams p(a.n, a.lambda);
  Json config{{"command", "sample"}, {"generator", a.kind}, {"N", a.n},       {"lambda", a.lambda},
              {"T", a.iters},        {"burn_in", a.burn_in}, {"step", a.step}, {"seed", a.seed}};
  RngStream rng(a.seed);
  std::vector<Vector> xs;
  Json header = with_hash(config);
  header["kind"] = "chain";
  header["N"] = a.n;
  header["seed"] = a.seed;
  header["burn_in"] = a.burn_in;
  if (a.kind == "exact") {
    xs = sample_exact_many(p, a.iters, rng);
  } else {
    ChainConfig cfg;
    cfg.total_iters = a.iters;
    cfg.burn_in = a.burn_in;
    cfg.step_size = a.step;
    const Vector init = sample_exact(p, rng);
    const Chain c = a.kind == "gibbs" ? gibbs_prior_chain(p, cfg, init, rng) : pmala_prior_chain(p, cfg, init, rng);
    xs = c.samples;
    header["acceptance_rate"] = c.acceptance_rate();
    header["final_step"] = c.final_step_size;
  }
  emit_table(samples_table(xs, header), a.out);
}

// ---- prox

void run_prox(const std::vector<double>& values, const std::string& in, double w, const std::string& out) {
  Vector x;
  if (!in.empty()) {
    const auto& col = read_table_file(in).column("x");
    x = Eigen::Map<const Vector>(col.data(), static_cast<Eigen::Index>(col.size()));
  } else {
    x = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (x.size() == 0) throw std::invalid_argument("prox: empty input vector");
  const Vector p = prox_linf(x, w);
  Table t;
  t.header = with_hash(Json{{"command", "prox"}, {"weight", w}, {"N", x.size()}});
  t.header["threshold"] = json_number(prox_linf_threshold(x, w).phi);
  t.names = {"x", "prox"};
  t.columns = {std::vector<double>(x.data(), x.data() + x.size()), std::vector<double>(p.data(), p.data() + p.size())};
  emit_table(t, out);
}

// ---- code

struct CodeArgs {
  std::string problem;
  Eigen::Index m = 50;
  Eigen::Index n = 70;
  std::string signal = "gaussian";
  std::string kind = "pmala";
  std::size_t iters = 12000;
  std::size_t burn_in = 10000;
  std::size_t moves = 20;
  double step = 0.5;
  bool relative_step = false;
  double a = 1e-3;
  double b = 1e-3;
  bool halved = false;
  std::uint64_t seed = 1;
  std::string chain_out;
  std::string problem_out;
  std::string report;
};

void run_code(const CodeArgs& a) {
  Json config{{"command", "code"},  {"kind", a.kind},   {"T_MC", a.iters},  {"T_bi", a.burn_in},
              {"mh_moves", a.moves}, {"step_size", a.step}, {"relative_step", a.relative_step},
              {"hyper_a", a.a},      {"hyper_b", a.b},  {"residual_exponent", a.halved ? "halved" : "exact"},
              {"seed", a.seed}};
  RngStream rng(a.seed);
  ProblemData data;
  if (!a.problem.empty()) {
    data = problem_from_table(read_table_file(a.problem));
    config["problem"] = a.problem;
  } else {
    ScenarioConfig sc;
    sc.m = a.m;
    sc.n = a.n;
    sc.signal = signal_model_from_string(a.signal);
    sc.kinds.clear();
    sc.validate();
    auto d = draw_trial_data(sc, rng);
    data.y = d.y;
    data.h = d.h;
    data.x_true = d.x_true;
    config["M"] = a.m;
    config["N"] = a.n;
    config["signal"] = a.signal;
  }
  if (!a.problem_out.empty()) {
    data.header = with_hash(config);
    data.header["seed"] = a.seed;
    write_table_file(a.problem_out, problem_table(data));
  }
  const CodingProblem pb(data.y, data.h, a.a, a.b);
  PosteriorConfig pc;
  pc.kind = coef_step_from_string(a.kind);
  pc.chain.total_iters = a.iters;
  pc.chain.burn_in = a.burn_in;
  pc.chain.step_size = a.step;
  pc.step_relative_to_noise = a.relative_step;
  pc.mh_moves_per_iter = a.moves;
  RngStream chain_rng = rng.split(1);
  const auto t0 = std::chrono::steady_clock::now();
  const auto chain = run_chain(pb, pc, chain_rng);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json rep = with_hash(config);
  rep["M"] = pb.m();
  rep["N"] = pb.n();
  const auto nm = nuisance_mmse(chain);
  rep["chain"] = {{"acceptance_rate", json_number(chain.acceptance_rate)},
                  {"final_step", json_number(chain.final_step)},
                  {"sigma2_mmse", json_number(nm.sigma2)},
                  {"lambda_mmse", json_number(nm.lambda)},
                  {"runtime_s", secs}};
  Json est = Json::object();
  auto score = [&](const std::string& name, VectorCRef x) {
    try {
      Json j = to_json(evaluate_metrics(data.x_true, x, data.y, data.h));
      j["x_hat"] = json_vector(x);
      est[name] = j;
    } catch (const std::exception& e) {
      est[name] = {{"error", e.what()}};
    }
  };
  const auto exponent = a.halved ? ResidualExponent::Halved : ResidualExponent::Exact;
  score("mmse", mmse_estimate(chain).x_hat);
  score("mmap", mmap_estimate(chain, pb, exponent).x_hat);
  const double beta = 2.0 * nm.lambda * nm.sigma2;
  score("fitra1", fitra(pb, beta).x_hat);
  est["fitra1"]["beta"] = json_number(beta);
  const auto refs = reference_solvers(pb, nm.sigma2, moments(DemocraticParams(static_cast<std::size_t>(pb.n()), nm.lambda)).variance);
  score("ls", refs[0].x_hat);
  score("ridge", refs[1].x_hat);
  rep["estimates"] = est;
  emit_json(rep, a.report);

  if (!a.chain_out.empty()) {
    Json header = with_hash(config);
    header["kind"] = "chain";
    header["N"] = pb.n();
    header["seed"] = a.seed;
    header["burn_in"] = chain.burn_in;
    write_table_file(a.chain_out,
                     samples_table(chain.x_samples, header, {{"sigma2", chain.sigma2_samples}, {"mu", chain.mu_samples}}));
  }
}

// ---- geweke

void run_geweke(GewekeConfig cfg, std::uint64_t seed, std::size_t thin, const std::string& report,
                const std::string& qq_out) {
  Json config{{"command", "geweke"}, {"kind", to_string(cfg.kind)}, {"M", cfg.m},  {"N", cfg.n},
              {"sigma2", cfg.sigma2},    {"mu", cfg.mu},                {"T", cfg.iters}, {"mh_moves", cfg.mh_moves},
              {"relative_step", cfg.relative_step}, {"thin", thin},  {"seed", seed}};
  RngStream rng(seed);
  const auto run = geweke_run(cfg, rng);
  const auto r = geweke_report(run, cfg.mu, thin);
  Json j = with_hash(config);
  const double lam = static_cast<double>(cfg.n) * cfg.mu;
  j["dominant"] = {{"law", {{"shape", cfg.n}, {"rate", lam}}},
                   {"ks_statistic", json_number(r.dominant.ks_statistic)},
                   {"p_value", json_number(r.dominant.p_value)}};
  j["cones"] = {{"counts", r.cone_counts}, {"statistic", json_number(r.cones.statistic)},
                {"p_value", json_number(r.cones.p_value)}};
  j["variance"] = {{"empirical", json_number(r.variance)}, {"expected", json_number(r.variance_expected)}};
  j["acceptance_rate"] = json_number(run.acceptance_rate);
  j["pass"] = r.dominant.p_value > 0.01 && r.cones.p_value > 0.01;
  emit_json(j, report);
  if (!qq_out.empty()) {
    Table t;
    t.header = with_hash(config);
    t.names = {"theoretical", "empirical"};
    t.columns.resize(2);
    for (const auto& [th, em] : r.dominant.qq) {
      t.columns[0].push_back(th);
      t.columns[1].push_back(em);
    }
    write_table_file(qq_out, t);
  }
}

// ---- scenario

void run_scenario_cmd(const std::string& config_path, const std::string& preset, Eigen::Index n2,
                      std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                      std::optional<std::size_t> threads, const std::string& report, const std::string& plot) {
  ScenarioConfig base;
  if (preset == "scenario2")
    base = ScenarioConfig::scenario2(n2);
  else if (preset == "toy")
    base = ScenarioConfig::toy();
  else if (preset != "scenario1")
    throw std::invalid_argument("unknown preset: " + preset);
  ScenarioConfig cfg = config_path.empty() ? base : scenario_from_json(read_json_file(config_path), base);
  if (trials) cfg.trials = *trials;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (!plot.empty() && cfg.beta_path_points == 0) cfg.beta_path_points = 41;
  cfg.validate();
  const auto rep = run_scenario(cfg);
  Json j = to_json(rep);
  if (!config_path.empty()) j["config_file"] = read_json_file(config_path);
  emit_json(j, report);

  if (!plot.empty()) {
    // per-trial scatter: one row per trial, snr_y / papr per estimator
    Table scatter;
    scatter.header = {{"config_hash", j["config_hash"]}, {"plot", "per-trial SNR_y and PAPR"}};
    scatter.names.push_back("trial");
    std::vector<std::string> names;
    for (const auto& [name, _] : rep.aggregate)
      if (name.rfind("chain_", 0) != 0) names.push_back(name);
    scatter.columns.emplace_back();
    for (const auto& name : names) {
      scatter.names.push_back(name + "_snr_y");
      scatter.names.push_back(name + "_papr");
      scatter.columns.emplace_back();
      scatter.columns.emplace_back();
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& t : rep.trials) {
      scatter.columns[0].push_back(static_cast<double>(t.trial));
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto it = t.estimates.find(names[k]);
        scatter.columns[1 + 2 * k].push_back(it == t.estimates.end() ? nan : it->second.metrics.snr_y);
        scatter.columns[2 + 2 * k].push_back(it == t.estimates.end() ? nan : it->second.metrics.papr);
      }
    }
    write_table_file(plot + "_trials.csv", scatter);

    if (!rep.trials.empty() && !rep.trials.front().beta_path.empty()) {
      Table path;
      path.header = {{"config_hash", j["config_hash"]}, {"plot", "FITRA beta path, first trial"}};
      path.names = {"beta", "snr_y", "papr"};
      path.columns.resize(3);
      for (const auto& pt : rep.trials.front().beta_path) {
        path.columns[0].push_back(pt.beta);
        path.columns[1].push_back(pt.snr_y);
        path.columns[2].push_back(pt.papr);
      }
      write_table_file(plot + "_beta_path.csv", path);
    }
  }
}

// ---- acf

void run_acf(const std::string& chain_path, std::size_t max_lag, const std::string& stat,
             std::optional<std::size_t> burn_in, const std::string& out) {
  const Table t = read_table_file(chain_path);
  const auto xs = samples_from_table(t);
  std::size_t start = burn_in ? *burn_in : t.header.value("burn_in", std::size_t{0});
  if (start >= xs.size()) throw std::invalid_argument("acf: burn-in leaves no samples");
  std::vector<double> series;
  for (std::size_t i = start; i < xs.size(); ++i) {
    if (stat == "linf")
      series.push_back(linf_norm(xs[i]));
    else if (stat.size() > 1 && stat[0] == 'x')
      series.push_back(xs[i][static_cast<Eigen::Index>(std::stoul(stat.substr(1)))]);
    else
      throw std::invalid_argument("acf: statistic must be linf or x<j>");
  }
  const auto r = acf(series, max_lag);
  Table lt;
  lt.header = {{"command", "acf"}, {"chain", chain_path}, {"statistic", stat}, {"burn_in", start},
               {"source_config_hash", t.header.value("config_hash", std::string())}};
  lt.names = {"lag", "acf"};
  lt.columns.resize(2);
  for (std::size_t k = 0; k < r.size(); ++k) {
    lt.columns[0].push_back(static_cast<double>(k + 1));
    lt.columns[1].push_back(r[k]);
  }
  emit_table(lt, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Democratic-prior anti-sparse coding toolkit"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "draw from the democratic distribution");
  sample->add_option("--kind", sa.kind, "exact | gibbs | pmala")->check(CLI::IsMember({"exact", "gibbs", "pmala"}));
  sample->add_option("-N,--n", sa.n, "dimension")->check(CLI::PositiveNumber);
  sample->add_option("--lambda", sa.lambda, "rate")->check(CLI::PositiveNumber);
  sample->add_option("-T,--iters", sa.iters, "draws / chain length")->check(CLI::PositiveNumber);
  sample->add_option("--burn-in", sa.burn_in);
  sample->add_option("--step", sa.step, "initial P-MALA proposal variance");
  sample->add_option("--seed", sa.seed);
  sample->add_option("-o,--out", sa.out, "chain CSV (default stdout)");

  std::vector<double> pv;
  std::string pin, pout;
  double pw = 1.0;
  auto* prox = app.add_subcommand("prox", "prox of w * ||.||_inf");
  prox->add_option("values", pv, "input vector");
  prox->add_option("--in", pin, "CSV with an x column");
  prox->add_option("-w,--weight", pw)->required()->check(CLI::PositiveNumber);
  prox->add_option("-o,--out", pout);

  CodeArgs ca;
  auto* code = app.add_subcommand("code", "posterior sampling and estimates for one problem");
  code->add_option("--problem", ca.problem, "problem CSV; generated when absent");
  code->add_option("-M,--m", ca.m);
  code->add_option("-N,--n", ca.n);
  code->add_option("--signal", ca.signal)->check(CLI::IsMember({"gaussian", "toy"}));
  code->add_option("--kind", ca.kind)->check(CLI::IsMember({"gibbs", "pmala"}));
  code->add_option("-T,--iters", ca.iters);
  code->add_option("--burn-in", ca.burn_in);
  code->add_option("--moves", ca.moves, "MH moves per iteration (P-MALA)");
  code->add_option("--step", ca.step);
  code->add_flag("--relative-step", ca.relative_step, "step is a multiple of sigma2 / ||H||^2");
  code->add_option("--hyper-a", ca.a);
  code->add_option("--hyper-b", ca.b);
  code->add_flag("--halved-exponent", ca.halved, "mMAP score with -M/2 on log ||y - Hx||");
  code->add_option("--seed", ca.seed);
  code->add_option("--chain-out", ca.chain_out);
  code->add_option("--problem-out", ca.problem_out);
  code->add_option("-o,--report", ca.report);

  GewekeConfig gc;
  std::string gkind = "gibbs", greport, gqq;
  std::uint64_t gseed = 1;
  std::size_t gthin = 20;
  auto* geweke = app.add_subcommand("geweke", "successive conditional sampling check");
  geweke->add_option("--kind", gkind)->check(CLI::IsMember({"gibbs", "pmala"}));
  geweke->add_option("-M,--m", gc.m);
  geweke->add_option("-N,--n", gc.n);
  geweke->add_option("--sigma2", gc.sigma2);
  geweke->add_option("--mu", gc.mu);
  geweke->add_option("-T,--iters", gc.iters);
  geweke->add_option("--moves", gc.mh_moves);
  geweke->add_option("--step", gc.relative_step, "P-MALA step relative to sigma2 / ||H||^2");
  geweke->add_option("--thin", gthin, "thinning for the KS / chi-square tests");
  geweke->add_option("--seed", gseed);
  geweke->add_option("-o,--report", greport);
  geweke->add_option("--qq", gqq, "Q-Q points CSV");

  std::string sconfig, spreset = "scenario1", sreport, splot;
  Eigen::Index sn2 = 192;
  std::optional<std::size_t> strials, sthreads;
  std::optional<std::uint64_t> sseed;
  auto* scenario = app.add_subcommand("scenario", "Monte Carlo experiment");
  scenario->add_option("-c,--config", sconfig, "JSON config; missing keys come from the preset");
  scenario->add_option("--preset", spreset)->check(CLI::IsMember({"scenario1", "scenario2", "toy"}));
  scenario->add_option("--scenario2-n", sn2);
  scenario->add_option("--trials", strials);
  scenario->add_option("--seed", sseed);
  scenario->add_option("--threads", sthreads);
  scenario->add_option("-o,--report", sreport);
  scenario->add_option("--plot", splot, "prefix for plot CSVs");

  std::string achain, aout, astat = "linf";
  std::size_t alag = 50;
  std::optional<std::size_t> aburn;
  auto* acf_cmd = app.add_subcommand("acf", "autocorrelation of a chain statistic");
  acf_cmd->add_option("chain", achain)->required();
  acf_cmd->add_option("--max-lag", alag);
  acf_cmd->add_option("--stat", astat, "linf or x<j>");
  acf_cmd->add_option("--burn-in", aburn, "default: the value in the chain header");
  acf_cmd->add_option("-o,--out", aout);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) run_sample(sa);
    if (*prox) run_prox(pv, pin, pw, pout);
    if (*code) run_code(ca);
    if (*geweke) {
      gc.kind = coef_step_from_string(gkind);
      run_geweke(gc, gseed, gthin, greport, gqq);
    }
    if (*scenario) run_scenario_cmd(sconfig, spreset, sn2, strials, sseed, sthreads, sreport, splot);
    if (*acf_cmd) run_acf(achain, alag, astat, aburn, aout);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
