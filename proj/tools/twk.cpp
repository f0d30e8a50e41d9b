// twk: elastic distances, time-warp kernels and the classification protocols
// from the command line.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twk/twk.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : twk::format_double(v);
}

/// Flags shared by every command that needs a measure.
struct MeasureArgs {
  std::string measure;
  std::string kernel;
  std::optional<double> nu;
  double nu_prime = 1.0;
  double lambda = 0.0;
  std::vector<double> g;
  std::string norm = "l1";
  std::optional<std::size_t> corridor;
  std::string boundary = "anchored";
  std::optional<double> xi;
  bool log_domain = false;

  void attach(CLI::App& cmd) {
    auto* m = cmd.add_option("--measure", measure, "distance: lev, dtw, erp, twed, ed, twip1, twip2");
    auto* k = cmd.add_option("--kernel", kernel, "kernel: stwk_lev, stwk_dtw, stwk_erp, stwk_twed, twip1, twip2, euclid_dot");
    m->excludes(k);
    cmd.add_option("--nu", nu, "TWED stiffness (twed, stwk_twed) or TWIP stiffness (twip1, twip2)");
    cmd.add_option("--nu-prime", nu_prime, "stiffness of the exponentiated STWK")->capture_default_str();
    cmd.add_option("--lambda", lambda, "TWED gap penalty")->capture_default_str();
    cmd.add_option("--g", g, "ERP gap value (one number per sample dimension)")->delimiter(',');
    cmd.add_option("--norm", norm, "local norm: l1, l2, l2sq")->capture_default_str();
    cmd.add_option("--corridor", corridor, "Sakoe-Chiba half width");
    cmd.add_option("--boundary", boundary, "anchored or open DP boundary (erp, twed)")->capture_default_str();
    cmd.add_option("--xi", xi, "value of <Omega, Omega>");
    cmd.add_flag("--log-domain", log_domain, "evaluate the exponentiated STWK in log space");
  }

  twk::CostParams cost_params() const {
    twk::CostParams p;
    p.norm = twk::parse_norm(norm);
    p.g = g;
    p.lambda = lambda;
    p.nu = nu.value_or(0.0);
    p.corridor = corridor;
    p.boundary = twk::parse_boundary(boundary);
    p.validate();
    return p;
  }

  bool has_measure() const { return !measure.empty() || !kernel.empty(); }

  twk::Measure build() const {
    if (!kernel.empty()) {
      twk::KernelId id;
      id.family = twk::parse_kernel_family(kernel);
      id.params.nu_prime = nu_prime;
      id.params.nu = nu.value_or(1.0);
      id.params.xi = xi;
      id.params.base = cost_params();
      id.params.corridor = corridor;
      id.params.log_domain = log_domain;
      id.validate();
      return id;
    }
    twk::DistanceId id;
    id.family = twk::parse_distance_family(measure.empty() ? "dtw" : measure);
    id.params = cost_params();
    id.twip_nu = nu.value_or(1.0);
    return id;
  }
};

// --- distance ---

/// "pulses:A", a comma separated list, a digit string (one sample per digit),
/// or any other string (symbols; Levenshtein only).
struct SeriesSource {
  std::optional<twk::TimeSeries> series;
  std::string symbols;
};

SeriesSource parse_source(const std::string& s) {
  if (s == "pulses:A") return {twk::shifted_pulse_pair().first, {}};
  if (s == "pulses:B") return {twk::shifted_pulse_pair().second, {}};
  if (s.find(',') != std::string::npos) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double x = 0.0;
      if (!twk::detail::parse_double(cell, x)) throw twk::error(twk::errc::parse_error, "bad number '" + cell + "' in " + s);
      v.push_back(x);
    }
    return {twk::TimeSeries::univariate(std::move(v)), {}};
  }
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return {twk::series_from_digits(s), s};
  return {std::nullopt, s};
}

int cmd_distance(const std::vector<std::string>& inputs, const MeasureArgs& args) {
  if (inputs.size() != 2) throw twk::error(twk::errc::invalid_params, "distance takes exactly two series");
  const auto a = parse_source(inputs[0]);
  const auto b = parse_source(inputs[1]);
  if (!a.series || !b.series) {
    if (args.measure == "lev" || args.measure.empty()) {
      std::cout << shortest(twk::levenshtein(a.symbols, b.symbols, args.corridor)) << '\n';
      return 0;
    }
    if (args.kernel == "stwk_lev") {
      std::cout << shortest(twk::stwk_lev(a.symbols, b.symbols, args.nu_prime, args.xi.value_or(1.0), args.corridor))
                << '\n';
      return 0;
    }
    throw twk::error(twk::errc::parse_error, "symbol strings only work with --measure lev or --kernel stwk_lev");
  }
  std::cout << shortest(twk::measure_value(args.build(), *a.series, *b.series)) << '\n';
  return 0;
}

// --- datasets for gram / classify ---

struct NamedItems {
  std::string name;
  std::vector<twk::TimeSeries> items;
  std::vector<std::string> symbols;  // set for the Levenshtein string fixture
  std::vector<std::string> ids;
};

NamedItems load_items(const std::string& dataset, const std::string& fixture) {
  NamedItems out;
  if (!fixture.empty()) {
    const auto f = twk::counterexample_fixtures();
    out.name = "fixture:" + fixture;
    if (fixture == "lev") {
      out.symbols = f.lev_strings;
      out.ids = f.lev_strings;
    } else if (fixture == "dtw") {
      out.items = f.dtw_series;
      out.ids = f.dtw_names;
    } else if (fixture == "short") {
      out.items = f.short_series;
      out.ids = f.short_names;
    } else {
      throw twk::error(twk::errc::invalid_params, "unknown fixture '" + fixture + "' (lev, dtw, short)");
    }
    return out;
  }
  const auto ds = twk::load_ucr(dataset);
  out.name = fs::path(dataset).filename().string();
  out.items = ds.items;
  for (std::size_t i = 0; i < ds.size(); ++i) out.ids.push_back(std::to_string(i));
  return out;
}

int cmd_gram(const std::string& dataset, const std::string& fixture, const std::string& out_prefix,
             const MeasureArgs& args, unsigned threads, double tau_rel) {
  if (dataset.empty() == fixture.empty()) throw twk::error(twk::errc::invalid_params, "give exactly one of --dataset or --fixture");
  const NamedItems items = load_items(dataset, fixture);

  twk::GramMatrix gram;
  std::string measure_name;
  json params;
  bool is_dist = true;
  if (!items.symbols.empty()) {
    if (!args.kernel.empty() && args.kernel != "stwk_lev") throw twk::error(twk::errc::invalid_params, "string fixture needs lev or stwk_lev");
    is_dist = args.kernel.empty();
    measure_name = is_dist ? "lev" : "stwk_lev";
    params = is_dist ? json::object() : json{{"nu_prime", args.nu_prime}, {"xi", args.xi.value_or(1.0)}};
  } else {
    const twk::Measure m = args.build();
    measure_name = twk::measure_name(m);
    params = twk::measure_params_json(m);
    is_dist = twk::is_distance(m);
  }

  const std::string csv = out_prefix + ".csv";
  const std::string sidecar = out_prefix + ".json";
  bool cached = false;
  if (fs::exists(csv) && fs::exists(sidecar)) {
    try {
      auto saved = twk::read_gram(out_prefix);
      if (saved.measure == measure_name && saved.params == params && saved.item_ids == items.ids) {
        gram = std::move(saved);
        cached = true;
        std::cerr << "cache hit: " << csv << '\n';
      }
    } catch (const twk::error& e) {
      std::cerr << "ignoring unreadable cache (" << e.what() << ")\n";
    }
  }
  if (!cached) {
    twk::GramMeta meta{measure_name, params, items.ids, is_dist};
    if (!items.symbols.empty()) {
      const double np = args.nu_prime;
      const double xi = args.xi.value_or(1.0);
      gram = twk::build_gram(items.symbols, [&](const std::string& a, const std::string& b) {
        return is_dist ? twk::levenshtein(a, b, args.corridor) : twk::stwk_lev(a, b, np, xi, args.corridor);
      }, meta, threads);
    } else {
      const twk::Measure m = args.build();
      gram = twk::build_gram(items.items, [&](const twk::TimeSeries& a, const twk::TimeSeries& b) {
        return twk::measure_value(m, a, b);
      }, meta, threads);
    }
    twk::write_gram(out_prefix, gram);
  }

  const auto report = twk::definiteness_report(gram, tau_rel);
  json rj = twk::report_json(report);
  rj["kernel"] = measure_name;
  rj["n"] = gram.size();
  std::ofstream(out_prefix + ".spectrum.json") << rj.dump(2) << '\n';
  std::cout << "n=" << gram.size() << " #Pev=" << report.pev_count << " delta_p=" << shortest(twk::round2(report.delta_p))
            << " verdict=" << twk::to_string(report.verdict) << '\n';
  return 0;
}

// --- classify ---

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr const char* kResultsHeader = "# twk-results v1";
constexpr const char* kResultsColumns = "dataset,classifier,measure,mode,params,C,sigma2,train_error,cv_error,test_error";

void append_result(const std::string& path, const std::vector<std::string>& cells) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw twk::error(twk::errc::io_error, "cannot write " + path);
  if (fresh) out << kResultsHeader << '\n' << kResultsColumns << '\n';
  for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
  out << '\n';
}

struct ClassifyArgs {
  std::string train, test, ucr_root, dataset;
  std::string synthetic;  // classes:train_per_class:test_per_class:length:noise
  bool use_synthetic = false;
  std::string classifier = "knn";
  std::string mode = "rbf";
  std::string grid;
  std::optional<double> C, sigma2;
  std::size_t folds = 5;
  std::string model_out;
};

std::tuple<std::string, twk::LabeledDataset, twk::LabeledDataset> load_split(const ClassifyArgs& c, std::uint64_t seed) {
  if (c.use_synthetic) {
    std::vector<double> f;
    std::stringstream ss(c.synthetic);
    std::string cell;
    while (std::getline(ss, cell, ':')) {
      double x = 0.0;
      if (!twk::detail::parse_double(cell, x)) throw twk::error(twk::errc::parse_error, "bad --synthetic spec " + c.synthetic);
      f.push_back(x);
    }
    if (f.size() != 5) throw twk::error(twk::errc::parse_error, "--synthetic wants classes:train:test:length:noise");
    const auto n = [](double v) { return static_cast<std::size_t>(v); };
    return {"synthetic-" + c.synthetic,
            twk::synth_gaussian_classes(n(f[0]), n(f[1]), n(f[3]), f[4], seed, "train"),
            twk::synth_gaussian_classes(n(f[0]), n(f[2]), n(f[3]), f[4], seed + 1, "test")};
  }
  if (!c.ucr_root.empty()) {
    if (c.dataset.empty()) throw twk::error(twk::errc::invalid_params, "--ucr-root needs --dataset");
    auto [tr, te] = twk::load_ucr_pair(c.ucr_root, c.dataset);
    return {c.dataset, std::move(tr), std::move(te)};
  }
  if (c.train.empty() || c.test.empty()) {
    throw twk::error(twk::errc::invalid_params, "give --train and --test, --ucr-root with --dataset, or --synthetic");
  }
  auto tr = twk::load_ucr(c.train);
  auto te = twk::load_ucr(c.test, tr.label_names);
  tr.split = "train";
  te.split = "test";
  return {fs::path(c.train).stem().string(), std::move(tr), std::move(te)};
}

/// Explicit flags pin the corresponding grid axis to a single value.
twk::GridSpec effective_grid(const ClassifyArgs& c, const MeasureArgs& m, const CLI::App& cmd) {
  twk::GridSpec grid = twk::GridSpec::defaults();
  if (!c.grid.empty()) {
    std::ifstream in(c.grid);
    if (!in) throw twk::error(twk::errc::io_error, "cannot read " + c.grid);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw twk::error(twk::errc::parse_error, c.grid + ": " + e.what());
    }
    grid = twk::GridSpec::from_json(j);
  }
  if (c.C) grid.C = {*c.C};
  if (c.sigma2) grid.sigma2 = {*c.sigma2};
  if (m.nu) grid.nu = grid.twip_nu = {*m.nu};
  if (cmd.count("--lambda")) grid.lambda = {m.lambda};
  if (!m.g.empty()) grid.g = {m.g.front()};
  if (cmd.count("--nu-prime")) grid.nu_prime = {m.nu_prime};
  return grid;
}

int cmd_classify(const ClassifyArgs& c, const MeasureArgs& m, const CLI::App& cmd, const std::string& out,
                 std::uint64_t seed, unsigned threads) {
  if (!m.has_measure()) throw twk::error(twk::errc::invalid_params, "classify needs --measure or --kernel");
  const auto [name, train, test] = load_split(c, seed);
  const twk::Measure base = m.build();
  const twk::GridSpec grid = effective_grid(c, m, cmd);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> row;
  if (c.classifier == "knn") {
    const auto loo = twk::loo_metaparam_search(train, base, grid, threads);
    if (loo.degenerate) std::cerr << "warning: fewer than two training items, LOO search skipped\n";
    const auto pred = twk::knn1_predict(twk::distance_matrix(loo.best, test.items, train.items, threads), train.labels);
    const double test_err = twk::error_rate(pred, test.labels);
    row = {csv_quote(name), "1nn", twk::measure_name(loo.best), "", csv_quote(twk::measure_params_json(loo.best).dump()),
           "", "", fixed2(loo.error), "", fixed2(test_err)};
    std::cout << "1-NN " << twk::measure_name(loo.best) << " loo_error=" << fixed2(loo.error)
              << " test_error=" << fixed2(test_err) << '\n';
  } else if (c.classifier == "svm") {
    twk::CvOptions opt;
    opt.folds = c.folds;
    opt.seed = seed;
    opt.mode = twk::parse_kernel_mode(c.mode);
    opt.threads = threads;
    const auto cv = twk::crossval_grid_search(train, base, grid, opt);
    if (cv.nonconverged > 0) std::cerr << "warning: " << cv.nonconverged << " binary machines hit the SMO iteration cap\n";
    const twk::SvmConfig cfg{cv.best, opt.mode, cv.C, cv.sigma2};
    const auto run = twk::svm_fit_predict(cfg, train, test, threads);
    if (!run.model.converged()) std::cerr << "warning: final model did not converge\n";
    const double train_err = twk::error_rate(run.train_pred, train.labels);
    const double test_err = twk::error_rate(run.test_pred, test.labels);
    const bool rbf = opt.mode == twk::KernelMode::rbf;
    row = {csv_quote(name), "svm", twk::measure_name(cv.best), twk::to_string(opt.mode),
           csv_quote(twk::measure_params_json(cv.best).dump()), shortest(cv.C), rbf ? shortest(cv.sigma2) : "",
           fixed2(train_err), fixed2(cv.cv_error), fixed2(test_err)};
    std::cout << "SVM " << twk::measure_name(cv.best) << " C=" << shortest(cv.C);
    if (rbf) std::cout << " sigma2=" << shortest(cv.sigma2);
    std::cout << " train_error=" << fixed2(train_err) << " cv_error=" << fixed2(cv.cv_error)
              << " test_error=" << fixed2(test_err) << '\n';
    if (!c.model_out.empty()) {
      json mj = twk::to_json(run.model);
      mj["measure"] = twk::measure_name(cv.best);
      mj["params"] = twk::measure_params_json(cv.best);
      mj["mode"] = twk::to_string(opt.mode);
      std::ofstream(c.model_out) << mj.dump(2) << '\n';
    }
  } else {
    throw twk::error(twk::errc::invalid_params, "--classifier must be knn or svm");
  }
  if (!out.empty()) append_result(out, row);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "elapsed " << fixed2(secs) << " s\n";
  return 0;
}

// --- verify ---

int cmd_verify(const std::vector<std::string>& only) {
  std::size_t failed = 0;
  std::size_t ran = 0;
  for (const auto& check : twk::cli::all_checks()) {
    if (!only.empty() && std::find(only.begin(), only.end(), check.group) == only.end()) continue;
    ++ran;
    twk::cli::CheckResult r;
    try {
      r = check.run();
    } catch (const std::exception& e) {
      r = {false, "no exception", e.what()};
    }
    failed += r.pass ? 0 : 1;
    std::cout << (r.pass ? "PASS " : "FAIL ") << check.group << " | " << check.name;
    if (!r.pass) std::cout << " | expected " << r.expected << ", got " << r.actual;
    std::cout << '\n';
  }
  if (ran == 0) throw twk::error(twk::errc::invalid_params, "--only matched no check group");
  std::cout << (ran - failed) << "/" << ran << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic distances, summative time-warp kernels and time-warp inner products"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  unsigned threads = 1;
  std::uint64_t seed = 20110101;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", seed, "seed for folds and synthetic data")->capture_default_str();

  MeasureArgs dist_args;
  std::vector<std::string> inputs;
  auto* distance = app.add_subcommand("distance", "value of a distance or kernel between two series");
  distance->add_option("series", inputs, "pulses:A, 0.5,1,2, 0123 or a symbol string")->required()->expected(2);
  dist_args.attach(*distance);

  MeasureArgs gram_args;
  std::string dataset, fixture, out_prefix = "gram";
  double tau_rel = 1e-9;
  auto* gram = app.add_subcommand("gram", "Gram matrix, CSV + JSON sidecar + spectrum report");
  gram->add_option("--dataset", dataset, "UCR-format file");
  gram->add_option("--fixture", fixture, "counter-example set: lev, dtw or short");
  gram->add_option("--out", out_prefix, "output prefix")->capture_default_str();
  gram->add_option("--tau", tau_rel, "positivity threshold relative to max |entry|")->capture_default_str();
  gram_args.attach(*gram);

  MeasureArgs cls_args;
  ClassifyArgs cls;
  std::string results_out;
  auto* classify = app.add_subcommand("classify", "1-NN with LOO selection or SVM with cross-validated grid search");
  classify->add_option("--train", cls.train, "UCR-format training file");
  classify->add_option("--test", cls.test, "UCR-format test file");
  classify->add_option("--ucr-root", cls.ucr_root, "directory holding DATASET/DATASET_TRAIN and _TEST");
  classify->add_option("--dataset", cls.dataset, "dataset name under --ucr-root");
  classify->add_option("--synthetic", cls.synthetic, "warped sinusoids classes:train:test:length:noise")
      ->expected(0, 1)
      ->default_str("3:20:50:40:0.1");
  classify->add_option("--classifier", cls.classifier, "knn or svm")->capture_default_str();
  classify->add_option("--mode", cls.mode, "svm kernel: rbf (over the measure) or direct")->capture_default_str();
  classify->add_option("--grid", cls.grid, "JSON grid file (keys C, sigma2, nu, lambda, g, nu_prime, twip_nu)");
  classify->add_option("--C", cls.C, "fix C instead of searching");
  classify->add_option("--sigma2", cls.sigma2, "fix sigma^2 instead of searching");
  classify->add_option("--folds", cls.folds, "cross-validation folds")->capture_default_str();
  classify->add_option("--out", results_out, "results CSV to append to");
  classify->add_option("--model-out", cls.model_out, "write the final SVM model as JSON");
  cls_args.attach(*classify);

  std::vector<std::string> only;
  auto* verify = app.add_subcommand("verify", "run the published-value and oracle checks");
  verify->add_option("--only", only, "groups: fixtures, pulses, oracle, delta-p");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*distance) return cmd_distance(inputs, dist_args);
    if (*gram) return cmd_gram(dataset, fixture, out_prefix, gram_args, threads, tau_rel);
    if (*classify) {
      cls.use_synthetic = classify->count("--synthetic") > 0;
      if (cls.use_synthetic && cls.synthetic.empty()) cls.synthetic = "3:20:50:40:0.1";
      return cmd_classify(cls, cls_args, *classify, results_out, seed, threads);
    }
    if (*verify) return cmd_verify(only);
  } catch (const twk::error& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
