#include "axecv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "axecv/axe.hpp"
#include "axecv/baselines.hpp"
#include "axecv/csv.hpp"
#include "axecv/dataset.hpp"
#include "axecv/diagnostics.hpp"
#include "axecv/draws_io.hpp"
#include "axecv/error.hpp"
#include "axecv/gibbs.hpp"
#include "axecv/parallel.hpp"
#include "axecv/synthetic.hpp"

namespace axecv {

namespace {

namespace fs = std::filesystem;

// iIS-A refuses to start above this S * J * N^2 * P without --allow-slow.
constexpr double kSlowBudget = 5e10;

struct Options {
  std::string model;
  std::string roles;
  std::string family = "gaussian";
  std::string cov = "diagonal";
  std::string adjacency;
  double car_alpha = 0.0;
  double st_rho = 0.0;
  int periods = 1;
  double prior_variance = 0.0;  // 0 = flat
  std::string scheme = "lco";
  int k = 10;
  std::string methods = "axe";
  int draws = 4000;
  int burnin = 1000;
  std::string sigma_prior = "scaled";
  double nu = 1.0;
  double psi = 1.0;
  double a = 0.01;
  double b = 0.01;
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = default_thread_count();
  double psis_tail = 0.2;
  bool no_psis = false;
  bool mc_theta = false;
  std::string lrr_variant = "display";
  std::string pseudo_variance = "delta";
  bool allow_slow = false;
  std::string draws_in;

  // simulate
  std::string design = "one_way";
  int sim_j = 8;
  std::string sim_n = "1";
  double alpha_scale = 1.0;
  double rho_test = 0.5;
  double target_size = 0.0;
  int iterations = 60;
  double sim_sigma2 = -1.0;
  double sim_tau2 = 1.0;
  std::string sim_beta = "0";
  int reach = 1;

  // bench
  std::string bench_j = "10,20,40";
  std::string bench_n = "5";
};

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    if constexpr (std::is_integral_v<T>) {
      out.push_back(static_cast<T>(parse_integer(item, what, 0)));
    } else {
      out.push_back(parse_double(item, what, 0));
    }
  }
  if (out.empty()) fail(Errc::BadConfig, std::string(what) + " list is empty");
  return out;
}

Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "poisson" || s == "poisson-log") return Family::poisson_log;
  fail(Errc::BadConfig, "unknown family '" + s + "' (gaussian, poisson)");
}

CovKind parse_cov(const std::string& s) {
  if (s == "diagonal") return CovKind::diagonal;
  if (s == "car") return CovKind::car;
  if (s == "st_car") return CovKind::st_car;
  fail(Errc::BadConfig, "unknown covariance '" + s + "' (diagonal, car, st_car)");
}

// "# roles y=response,..." written by `simulate`.
std::string roles_from_comment(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# roles ", 0) == 0) return line.substr(8);
    if (!line.empty() && line[0] != '#') break;
  }
  return {};
}

class Timer {
 public:
  void mark(const std::string& step, double seconds) { rows_.emplace_back(step, seconds); }
  template <class Fn>
  auto time(const std::string& step, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    mark(step, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return r;
  }
  void write(const fs::path& p, std::uint64_t seed) const {
    std::ofstream out(p);
    if (!out) fail(Errc::IoError, "cannot write " + p.string());
    write_preamble(out, seed);
    out << "step,seconds\n";
    for (const auto& [s, t] : rows_) out << s << ',' << format_double(t) << '\n';
  }

 private:
  std::vector<std::pair<std::string, double>> rows_;
};

std::ofstream open_csv(const fs::path& p, std::uint64_t seed) {
  std::ofstream out(p);
  if (!out) fail(Errc::IoError, "cannot write " + p.string());
  write_preamble(out, seed);
  return out;
}

fs::path out_dir(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) fail(Errc::IoError, "cannot create " + o.out + ": " + ec.message());
  return fs::path(o.out);
}

BuiltModel load_model(const Options& o) {
  if (o.model.empty()) fail(Errc::BadConfig, "--model is required");
  std::string roles = o.roles.empty() ? roles_from_comment(o.model) : o.roles;
  if (roles.empty()) fail(Errc::RoleError, "no --roles given and none recorded in " + o.model);
  const DatasetFile data = load_dataset(o.model, parse_roles(roles));
  BuildOptions b;
  b.family = parse_family(o.family);
  b.prior_infinite = !(o.prior_variance > 0.0);
  if (o.prior_variance > 0.0) b.prior_variance = o.prior_variance;
  b.cov_kind = parse_cov(o.cov);
  b.alpha = o.car_alpha;
  b.rho = o.st_rho;
  b.periods = o.periods;
  if (!o.adjacency.empty()) b.adjacency = read_edge_list(o.adjacency);
  return build_model(data, b);
}

GibbsConfig gibbs_config(const Options& o, Index p2) {
  GibbsConfig g;
  g.draws = o.draws;
  g.burn_in = o.burnin;
  g.seed = o.seed;
  g.threads = o.threads;
  g.a = o.a;
  g.b = o.b;
  g.nu = o.nu;
  if (o.sigma_prior == "scaled") {
    g.sigma_prior = SigmaPrior::scaled;
    g.psi = MatrixXd::Constant(1, 1, o.psi);
  } else if (o.sigma_prior == "iw") {
    g.sigma_prior = SigmaPrior::inverse_wishart;
    g.psi = o.psi * MatrixXd::Identity(p2, p2);
  } else {
    fail(Errc::BadConfig, "unknown sigma prior '" + o.sigma_prior + "' (scaled, iw)");
  }
  g.validate(p2);
  return g;
}

PseudoVariance pseudo_variant(const Options& o) {
  if (o.pseudo_variance == "delta") return PseudoVariance::delta_method;
  if (o.pseudo_variance == "printed") return PseudoVariance::printed_display;
  fail(Errc::BadConfig, "unknown pseudo variance '" + o.pseudo_variance + "' (delta, printed)");
}

struct Fitted {
  PosteriorDraws draws;
  /// The Gaussian model plug-in methods run on (pseudo-response for Poisson).
  ModelSpec gauss;
};

ModelSpec pseudo_model(const PosteriorDraws& draws, const ModelSpec& spec, PseudoVariance variant) {
  if (variant == PseudoVariance::delta_method) return likelihood_model(draws, spec);
  const MatrixXd x = spec.design();
  const VectorXd e = spec.offset ? *spec.offset : VectorXd::Ones(spec.n());
  VectorXd fitted = VectorXd::Zero(spec.n());
  for (Index s = 0; s < draws.size(); ++s) fitted += (x * draws.beta.row(s).transpose()).array().exp().matrix();
  fitted = e.cwiseProduct(fitted) / static_cast<double>(draws.size());
  return with_pseudo_response(spec, glmm_pseudo_response(spec, VectorXd(), fitted, variant));
}

Fitted fit_model(const ModelSpec& spec, const GibbsConfig& cfg, PseudoVariance variant) {
  if (spec.family == Family::gaussian) return {gibbs_run(spec, cfg), spec};
  // Start from the empirical rates, then refit once on the updated pseudo-response.
  const VectorXd start = spec.response.array() + 0.5;
  const ModelSpec first = with_pseudo_response(spec, glmm_pseudo_response(spec, VectorXd(), start, variant));
  const PosteriorDraws d0 = gibbs_run(first, cfg);
  const ModelSpec second = pseudo_model(d0, spec, variant);
  Fitted f{gibbs_run(second, cfg), ModelSpec()};
  f.gauss = pseudo_model(f.draws, spec, variant);
  return f;
}

FoldPlan make_plan(const Options& o, const BuiltModel& bm) {
  const FoldScheme scheme = parse_fold_scheme(o.scheme);
  FoldPlan plan = build_fold_plan(scheme, bm.spec.n(), bm.cluster_labels,
                                  scheme == FoldScheme::kfold ? std::optional<int>(o.k) : std::nullopt, o.seed);
  validate_fold_plan(plan, bm.spec.n());
  return plan;
}

CvResult response_scale(CvResult r, const ModelSpec& spec) {
  for (auto& f : r.folds) f.predicted = to_response_scale(spec, f.predicted, f.rows);
  return r;
}

void check_budget(const Options& o, const ModelSpec& spec, const FoldPlan& plan) {
  const double n = static_cast<double>(spec.n());
  const double cost = static_cast<double>(o.draws) * static_cast<double>(plan.size()) * n * n *
                      static_cast<double>(spec.p());
  if (cost > kSlowBudget && !o.allow_slow) {
    fail(Errc::BadConfig, "iis_a would cost about " + format_double(cost) +
                              " operations (S*J*N^2*P); pass --allow-slow to run it anyway");
  }
}

CvResult run_method(Method m, const Options& o, const ModelSpec& spec, const Fitted& fit,
                    const FoldPlan& plan, const GibbsConfig& gcfg) {
  ImportanceOptions io;
  io.psis = !o.no_psis;
  io.tail_fraction = o.psis_tail;
  io.monte_carlo_theta = o.mc_theta;
  io.seed = o.seed;
  io.threads = o.threads;
  switch (m) {
    case Method::axe: {
      AxeOptions ao;
      ao.threads = o.threads;
      return response_scale(axe_run(fit.gauss, plug_in_estimates(fit.draws), plan, ao), spec);
    }
    case Method::naive: return response_scale(naive_run(fit.draws, fit.gauss, plan), spec);
    case Method::ghost: return ghost_run(fit.draws, spec, plan, o.seed, o.threads);
    case Method::iis_c: return iis_c_run(fit.draws, spec, plan, io);
    case Method::iis_a: return iis_a_run(fit.draws, spec, plan, io);
    case Method::mcv: return response_scale(mcv_run(fit.gauss, gcfg, plan), spec);
  }
  fail(Errc::UnknownMethod, "unhandled method");
}

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_predictions(const fs::path& p, const std::vector<CvResult>& results, const ModelSpec& spec,
                       std::uint64_t seed) {
  auto out = open_csv(p, seed);
  out << "method,fold,row,observed,prediction,ess,khat\n";
  for (const auto& r : results) {
    for (const auto& f : r.folds) {
      for (std::size_t i = 0; i < f.rows.size(); ++i) {
        out << to_string(r.method) << ',' << f.fold_id + 1 << ',' << f.rows[i] + 1 << ','
            << format_double(spec.response(f.rows[i])) << ',' << format_double(f.predicted(static_cast<Index>(i)))
            << ',' << opt_num(f.ess) << ',' << opt_num(f.khat) << '\n';
      }
    }
  }
}

void write_variance(const fs::path& dir, const PosteriorDraws& draws, std::uint64_t seed) {
  const VarianceEstimates v = plug_in_estimates(draws);
  std::ofstream txt(dir / "variance.txt");
  if (!txt) fail(Errc::IoError, "cannot write variance.txt");
  txt << "plug_in=posterior-mean\ntau=" << format_double(v.tau) << '\n';
  if (draws.scaled()) txt << "sigma2=" << format_double(draws.sigma_scale.mean()) << '\n';
  auto csv = open_csv(dir / "sigma_plugin.csv", seed);
  for (Index j = 0; j < v.sigma.cols(); ++j) csv << (j ? "," : "") << 'c' << j + 1;
  csv << '\n';
  for (Index i = 0; i < v.sigma.rows(); ++i) {
    for (Index j = 0; j < v.sigma.cols(); ++j) csv << (j ? "," : "") << format_double(v.sigma(i, j));
    csv << '\n';
  }
}

Fitted obtain_fit(const Options& o, const BuiltModel& bm, const GibbsConfig& gcfg, Timer& timer) {
  const PseudoVariance variant = pseudo_variant(o);
  if (!o.draws_in.empty()) {
    Fitted f{read_draws(o.draws_in), bm.spec};
    if (f.draws.p() != bm.spec.p()) fail(Errc::ManifestMismatch, "draws do not match the model's P");
    if (bm.spec.family != Family::gaussian) f.gauss = pseudo_model(f.draws, bm.spec, variant);
    return f;
  }
  return timer.time("fit", [&] { return fit_model(bm.spec, gcfg, variant); });
}

int cmd_fit(const Options& o, std::ostream& out) {
  const BuiltModel bm = load_model(o);
  const GibbsConfig gcfg = gibbs_config(o, bm.spec.p2());
  Timer timer;
  const fs::path dir = out_dir(o);
  const Fitted fit = timer.time("fit", [&] { return fit_model(bm.spec, gcfg, pseudo_variant(o)); });
  write_draws((dir / "draws").string(), fit.draws);
  write_variance(dir, fit.draws, o.seed);
  timer.write(dir / "timings.csv", o.seed);
  out << "wrote " << fit.draws.size() << " draws to " << (dir / "draws").string() << '\n';
  return 0;
}

std::vector<Method> requested_methods(const Options& o) {
  const auto ms = parse_methods(o.methods);
  if (ms.empty()) fail(Errc::BadConfig, "method list is empty");
  return ms;
}

// Refuses before any sampling starts.
void check_methods_budget(const std::vector<Method>& ms, const Options& o, const ModelSpec& spec,
                          const FoldPlan& plan) {
  if (std::find(ms.begin(), ms.end(), Method::iis_a) != ms.end()) check_budget(o, spec, plan);
}

int cmd_cv(const Options& o, std::ostream& out) {
  const auto methods = requested_methods(o);
  const BuiltModel bm = load_model(o);
  const GibbsConfig gcfg = gibbs_config(o, bm.spec.p2());
  const FoldPlan plan = make_plan(o, bm);
  check_methods_budget(methods, o, bm.spec, plan);
  Timer timer;
  const fs::path dir = out_dir(o);
  const Fitted fit = obtain_fit(o, bm, gcfg, timer);
  std::vector<CvResult> results;
  for (Method m : methods) {
    results.push_back(timer.time(std::string(to_string(m)), [&] { return run_method(m, o, bm.spec, fit, plan, gcfg); }));
  }
  write_predictions(dir / "predictions.csv", results, bm.spec, o.seed);
  timer.write(dir / "timings.csv", o.seed);
  out << "wrote predictions for " << results.size() << " method(s) over " << plan.size() << " folds\n";
  return 0;
}

int cmd_compare(const Options& o, std::ostream& out) {
  auto methods = requested_methods(o);
  std::erase(methods, Method::mcv);
  const BuiltModel bm = load_model(o);
  const GibbsConfig gcfg = gibbs_config(o, bm.spec.p2());
  const FoldPlan plan = make_plan(o, bm);
  const LrrVariant variant = parse_lrr_variant(o.lrr_variant);
  check_methods_budget(methods, o, bm.spec, plan);
  Timer timer;
  const fs::path dir = out_dir(o);
  const Fitted fit = obtain_fit(o, bm, gcfg, timer);
  const CvResult mcv = timer.time("mcv", [&] { return run_method(Method::mcv, o, bm.spec, fit, plan, gcfg); });

  std::vector<CvResult> results;
  std::vector<LrrReport> reports;
  for (Method m : methods) {
    results.push_back(timer.time(std::string(to_string(m)), [&] { return run_method(m, o, bm.spec, fit, plan, gcfg); }));
    reports.push_back(lrr(results.back(), mcv, bm.spec, plan, variant));
  }

  {
    auto csv = open_csv(dir / "lrr.csv", o.seed);
    csv << "method,fold,lrr\n";
    for (const auto& r : reports) {
      for (Index f = 0; f < r.per_fold.size(); ++f) {
        csv << to_string(r.method) << ',' << f + 1 << ','
            << (std::isfinite(r.per_fold(f)) ? format_double(r.per_fold(f)) : std::string("NA")) << '\n';
      }
    }
  }
  const auto rows = summarize_lrr(reports);
  {
    std::ofstream txt(dir / "summary.txt");
    if (!txt) fail(Errc::IoError, "cannot write summary.txt");
    txt << "log RMSE ratio against MCV (" << to_string(variant) << ")\n";
    write_summary_text(txt, rows);
    for (const auto& r : reports) {
      if (!r.excluded.empty()) {
        txt << to_string(r.method) << ": " << r.excluded.size() << " fold(s) excluded, zero MCV error\n";
      }
    }
    write_summary_text(out, rows);
  }
  {
    auto csv = open_csv(dir / "scatter.csv", o.seed);
    csv << "method,fold,row,observed,mcv,approx\n";
    for (const auto& r : results) {
      for (const auto& f : r.folds) {
        const auto& mf = mcv.folds[f.fold_id];
        for (std::size_t i = 0; i < f.rows.size(); ++i) {
          csv << to_string(r.method) << ',' << f.fold_id + 1 << ',' << f.rows[i] + 1 << ','
              << format_double(bm.spec.response(f.rows[i])) << ',' << format_double(mf.predicted(static_cast<Index>(i)))
              << ',' << format_double(f.predicted(static_cast<Index>(i))) << '\n';
        }
      }
    }
  }
  results.insert(results.begin(), mcv);
  write_predictions(dir / "predictions.csv", results, bm.spec, o.seed);
  timer.write(dir / "timings.csv", o.seed);
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
  const auto methods = requested_methods(o);
  const auto js = parse_list<int>(o.bench_j, "bench-j");
  const auto ns = parse_list<int>(o.bench_n, "bench-n");
  const fs::path dir = out_dir(o);
  auto csv = open_csv(dir / "bench.csv", o.seed);
  csv << "method,J,N,P,folds,seconds,seconds_per_fold\n";
  for (int j : js) {
    for (int n : ns) {
      SyntheticConfig sc;
      sc.design = Design::one_way;
      sc.J = j;
      sc.n_per_cluster = {n};
      sc.seed = o.seed;
      const BuiltModel bm = build_model(generate_synthetic(sc));
      const GibbsConfig gcfg = gibbs_config(o, bm.spec.p2());
      const FoldPlan plan = build_fold_plan(FoldScheme::lco, bm.spec.n(), bm.cluster_labels);
      Timer timer;
      const Fitted fit = fit_model(bm.spec, gcfg, PseudoVariance::delta_method);
      for (Method m : methods) {
        const auto t0 = std::chrono::steady_clock::now();
        run_method(m, o, bm.spec, fit, plan, gcfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << to_string(m) << ',' << j << ',' << bm.spec.n() << ',' << bm.spec.p() << ',' << plan.size() << ','
            << format_double(secs) << ',' << format_double(secs / static_cast<double>(plan.size())) << '\n';
        out << to_string(m) << " J=" << j << " N=" << bm.spec.n() << " P=" << bm.spec.p() << ": " << secs << " s\n";
      }
    }
  }
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  SyntheticConfig sc;
  sc.design = parse_design(o.design);
  sc.J = o.sim_j;
  sc.n_per_cluster = parse_list<int>(o.sim_n, "n");
  sc.alpha_scale = o.alpha_scale;
  sc.rho_test = o.rho_test;
  if (o.target_size > 0.0) sc.target_size = o.target_size;
  sc.iterations = o.iterations;
  if (o.sim_sigma2 >= 0.0) sc.sigma2 = o.sim_sigma2;
  sc.tau2 = o.sim_tau2;
  sc.beta = parse_list<double>(o.sim_beta, "beta");
  sc.car_alpha = o.car_alpha;
  sc.lattice_reach = o.reach;
  sc.seed = o.seed;
  const DatasetFile data = generate_synthetic(sc);
  const fs::path dir = out_dir(o);
  save_dataset((dir / "dataset.csv").string(), data, o.seed);
  if (data.adjacency) write_edge_list((dir / "adjacency.txt").string(), *data.adjacency);
  out << "wrote " << data.rows() << " rows to " << (dir / "dataset.csv").string() << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Approximate cross-validated means for hierarchical regression", "axecv"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);

  app.add_option("--model", o.model, "CSV dataset");
  app.add_option("--roles", o.roles, "column=role list (response, fixed, cluster, offset, known_variance)");
  app.add_option("--family", o.family, "gaussian or poisson");
  app.add_option("--cov", o.cov, "diagonal, car or st_car");
  app.add_option("--adjacency", o.adjacency, "edge list for car and st_car");
  app.add_option("--car-alpha", o.car_alpha, "CAR alpha");
  app.add_option("--st-rho", o.st_rho, "temporal rho for st_car");
  app.add_option("--periods", o.periods, "periods T for st_car");
  app.add_option("--prior-variance", o.prior_variance, "fixed-effect prior variance (default flat)");
  app.add_option("--scheme", o.scheme, "loo, lco or kfold");
  app.add_option("--k", o.k, "folds for kfold");
  app.add_option("--method,--methods", o.methods, "comma list of axe, ghost, iis_c, iis_a, mcv, naive");
  app.add_option("--draws", o.draws, "post-burn-in Gibbs draws S");
  app.add_option("--burnin", o.burnin, "burn-in iterations");
  app.add_option("--sigma-prior", o.sigma_prior, "scaled or iw");
  app.add_option("--nu", o.nu, "Sigma prior degrees of freedom");
  app.add_option("--psi", o.psi, "Sigma prior scale");
  app.add_option("--a", o.a, "tau^2 prior shape");
  app.add_option("--b", o.b, "tau^2 prior scale");
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "worker threads");
  app.add_option("--psis-tail", o.psis_tail, "Pareto-smoothed tail fraction");
  app.add_flag("--no-psis", o.no_psis, "use raw importance weights");
  app.add_flag("--mc-theta", o.mc_theta, "integrate held-out effects by simulation in iis_c");
  app.add_option("--lrr-variant", o.lrr_variant, "display or rmse-ratio");
  app.add_option("--pseudo-variance", o.pseudo_variance, "delta or printed");
  app.add_flag("--allow-slow", o.allow_slow, "run iis_a above the cost budget");
  app.add_option("--draws-in", o.draws_in, "reuse posterior draws from a fit directory");
  app.add_option("--design", o.design, "eight_schools_scaled, one_way, cluster_subset, car_lattice");
  app.add_option("--J", o.sim_j, "clusters");
  app.add_option("--n", o.sim_n, "cluster size, or comma list of sizes");
  app.add_option("--alpha-scale", o.alpha_scale, "eight-schools data scaling");
  app.add_option("--rho-test", o.rho_test, "cluster_subset test proportion");
  app.add_option("--target-size", o.target_size, "cluster_subset training size target");
  app.add_option("--iterations", o.iterations, "cluster_subset training sets");
  app.add_option("--sigma2", o.sim_sigma2, "true sigma2");
  app.add_option("--tau2", o.sim_tau2, "true tau2");
  app.add_option("--beta", o.sim_beta, "true fixed effects, intercept first");
  app.add_option("--reach", o.reach, "ring-lattice neighbours per side");
  app.add_option("--bench-j", o.bench_j, "comma list of J for bench");
  app.add_option("--bench-n", o.bench_n, "comma list of cluster sizes for bench");

  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler and save draws");
  auto* cv = app.add_subcommand("cv", "cross-validated predictions per method");
  auto* compare = app.add_subcommand("compare", "compare methods against MCV");
  auto* bench = app.add_subcommand("bench", "time methods on synthetic problems");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset");
  for (auto* s : {fit, cv, compare, bench, simulate}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (o.threads < 1) fail(Errc::BadConfig, "--threads must be >= 1");
    if (*fit) return cmd_fit(o, out);
    if (*cv) return cmd_cv(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*bench) return cmd_bench(o, out);
    if (*simulate) return cmd_simulate(o, out);
  } catch (const Error& e) {
    err << "axecv: " << e.what();
    if (e.fold()) err << " (fold " << *e.fold() + 1 << ")";
    err << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "axecv: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace axecv
