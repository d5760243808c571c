#include "grm/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <thread>

#include "grm/csv.hpp"
#include "grm/em.hpp"
#include "grm/laplace.hpp"
#include "grm/metrics.hpp"
#include "grm/model.hpp"
#include "grm/rng.hpp"
#include "grm/simulate.hpp"

namespace fs = std::filesystem;

namespace grm {

namespace {

struct Scenario {
  int index = 0;
  int n_subjects = 0;
  int n_items = 0;
  std::string label;
};

std::vector<Scenario> make_scenarios(const std::vector<int>& sample_sizes,
                                     const std::vector<int>& item_counts) {
  std::vector<Scenario> out;
  int index = 0;
  for (int n : sample_sizes)
    for (int m : item_counts) {
      out.push_back({index++, n, m, "s" + std::to_string(n) + "_" + std::to_string(m)});
    }
  return out;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string method_file(FitMethod method) {
  return method == FitMethod::Laplace ? "fit_laplace.json" : "fit_ghq_em.json";
}

// Key identifying a replicate's inputs; a completed fit under a matching key
// is never re-executed.
std::string task_key(const StudyConfig& config, const Scenario& sc, int replicate,
                     std::uint64_t stream_id) {
  return hex64(fnv1a64(sc.label + "|r" + std::to_string(replicate) + "|seed" +
                       std::to_string(config.base_seed) + "|sid" + std::to_string(stream_id) +
                       "|q" + std::to_string(config.quadrature_points)));
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct ReplicateTask {
  const Scenario* scenario = nullptr;
  int replicate = 0;
};

// Simulates (or re-derives) one replicate and runs the missing fits.
void run_replicate(const StudyConfig& config, const Scenario& sc, int replicate, int& fits_run,
                   int& fits_skipped) {
  const fs::path dir =
      fs::path(config.output_dir) / sc.label / ("r" + std::to_string(replicate));
  const std::uint64_t stream_id =
      (static_cast<std::uint64_t>(sc.index) << 20) + static_cast<std::uint64_t>(replicate);
  const std::uint64_t items_seed = derive_seed(config.base_seed, stream_id, 1);
  const std::uint64_t data_seed = derive_seed(config.base_seed, stream_id, 2);
  const std::string key = task_key(config, sc, replicate, stream_id);

  bool key_matches = false;
  const fs::path meta_path = dir / "data.csv.meta.json";
  if (fs::exists(meta_path)) {
    try {
      const nlohmann::json meta = read_json_file(meta_path.string());
      key_matches = meta.value("task_key", "") == key;
    } catch (const std::exception&) {
      key_matches = false;
    }
  }

  std::vector<FitMethod> pending;
  for (FitMethod method : config.methods)
    if (key_matches && fs::exists(dir / method_file(method)))
      ++fits_skipped;
    else
      pending.push_back(method);
  if (pending.empty()) return;

  const ItemSet truth = sample_item_parameters(sc.n_items, items_seed);
  const SimulatedData sim = simulate_dataset(truth, sc.n_subjects, data_seed);
  const ItemSet init = starting_values(sim.data);

  fs::create_directories(dir);
  write_items_csv((dir / "params_true.csv").string(), truth);
  write_responses_csv((dir / "data.csv").string(), sim.data);
  write_items_csv((dir / "init.csv").string(), init);
  nlohmann::json meta{{"seed", data_seed},
                      {"resimulations", sim.resimulations},
                      {"n_subjects", sc.n_subjects},
                      {"n_items", sc.n_items},
                      {"task_key", key}};
  write_text_file(meta_path.string(), meta.dump(2) + "\n");

  FitConfig fit_config = config.fit;
  fit_config.quadrature_points = config.quadrature_points;
  for (FitMethod method : config.methods) {
    if (std::find(pending.begin(), pending.end(), method) == pending.end()) continue;
    FitResult result;
    try {
      result = method == FitMethod::Laplace ? fit_laplace(sim.data, init, fit_config)
                                            : fit_ghq_em(sim.data, init, fit_config);
    } catch (const std::exception&) {
      result.method = method;
      result.status = FitStatus::NumericalFailure;
      result.converged = false;
      result.estimates = init;
      result.loglik = std::nan("");
    }
    write_fit_result((dir / method_file(method)).string(), result);
    ++fits_run;
  }
}

void write_manifest(const StudyConfig& config, const std::vector<Scenario>& scenarios,
                    const StudyRunStats& stats) {
  nlohmann::json j;
  nlohmann::json methods = nlohmann::json::array();
  for (FitMethod m : config.methods) methods.push_back(to_string(m));
  j["config"] = {{"sample_sizes", config.sample_sizes},
                 {"item_counts", config.item_counts},
                 {"replicates", config.replicates},
                 {"base_seed", config.base_seed},
                 {"methods", methods},
                 {"quadrature_points", config.quadrature_points},
                 {"jobs", config.jobs},
                 {"trim_fraction", config.trim_fraction},
                 {"include_nonconverged", config.include_nonconverged},
                 {"max_outer_iterations", config.fit.max_outer_iterations},
                 {"outer_tolerance", config.fit.outer_tolerance},
                 {"inner_tolerance", config.fit.inner_tolerance},
                 {"em_param_tolerance", config.fit.em_param_tolerance}};

  nlohmann::json scen = nlohmann::json::array();
  for (const Scenario& sc : scenarios)
    scen.push_back({{"index", sc.index},
                    {"label", sc.label},
                    {"n_subjects", sc.n_subjects},
                    {"n_items", sc.n_items},
                    {"stream_base", static_cast<std::uint64_t>(sc.index) << 20}});
  j["scenarios"] = std::move(scen);

  std::int64_t total_fit_ms = 0;
  nlohmann::json fits = nlohmann::json::array();
  for (const Scenario& sc : scenarios)
    for (int r = 0; r < config.replicates; ++r)
      for (FitMethod method : config.methods) {
        const fs::path path = fs::path(config.output_dir) / sc.label /
                              ("r" + std::to_string(r)) / method_file(method);
        const FitResult result = read_fit_result(path.string());
        total_fit_ms += result.wall_time_ms;
        fits.push_back({{"scenario", sc.label},
                        {"replicate", r},
                        {"method", to_string(result.method)},
                        {"status", to_string(result.status)},
                        {"wall_time_ms", result.wall_time_ms}});
      }
  j["fits"] = std::move(fits);
  j["total_fit_time_ms"] = total_fit_ms;
  j["fits_run"] = stats.fits_run;
  j["fits_skipped"] = stats.fits_skipped;

  write_text_file((fs::path(config.output_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace

std::vector<double> score_error_grid() {
  std::vector<double> grid;
  for (int k = -16; k <= 16; ++k) grid.push_back(0.25 * k);
  return grid;
}

StudyConfig study_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("study config: ") + e.what());
  }
  StudyConfig config;
  try {
    if (j.contains("sample_sizes")) config.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
    if (j.contains("item_counts")) config.item_counts = j["item_counts"].get<std::vector<int>>();
    if (j.contains("replicates")) config.replicates = j["replicates"].get<int>();
    if (j.contains("base_seed")) config.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("methods")) {
      config.methods.clear();
      for (const auto& m : j["methods"])
        config.methods.push_back(fit_method_from_string(m.get<std::string>()));
    }
    if (j.contains("quadrature_points")) config.quadrature_points = j["quadrature_points"].get<int>();
    if (j.contains("jobs")) config.jobs = j["jobs"].get<int>();
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("trim_fraction")) config.trim_fraction = j["trim_fraction"].get<double>();
    if (j.contains("include_nonconverged"))
      config.include_nonconverged = j["include_nonconverged"].get<bool>();
    if (j.contains("max_outer_iterations"))
      config.fit.max_outer_iterations = j["max_outer_iterations"].get<int>();
    if (j.contains("outer_tolerance")) config.fit.outer_tolerance = j["outer_tolerance"].get<double>();
    if (j.contains("inner_tolerance")) config.fit.inner_tolerance = j["inner_tolerance"].get<double>();
    if (j.contains("em_param_tolerance"))
      config.fit.em_param_tolerance = j["em_param_tolerance"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("study config: ") + e.what());
  }
  if (config.replicates < 1) throw std::domain_error("replicates must be >= 1");
  if (config.sample_sizes.empty() || config.item_counts.empty() || config.methods.empty())
    throw std::domain_error("study grid and methods must be non-empty");
  config.fit.quadrature_points = config.quadrature_points;
  return config;
}

StudyConfig study_config_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return study_config_from_json(text);
}

StudyRunStats run_study(const StudyConfig& config) {
  const std::vector<Scenario> scenarios = make_scenarios(config.sample_sizes, config.item_counts);
  fs::create_directories(config.output_dir);

  std::vector<ReplicateTask> tasks;
  for (const Scenario& sc : scenarios)
    for (int r = 0; r < config.replicates; ++r) tasks.push_back({&sc, r});

  const int jobs = std::max(1, config.jobs);
  std::atomic<std::size_t> next{0};
  std::mutex stats_mutex;
  StudyRunStats stats;
  std::vector<std::string> errors;

  auto worker = [&]() {
    int run = 0, skipped = 0;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        run_replicate(config, *tasks[i].scenario, tasks[i].replicate, run, skipped);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(stats_mutex);
        errors.push_back(tasks[i].scenario->label + "/r" + std::to_string(tasks[i].replicate) +
                         ": " + e.what());
      }
    }
    std::lock_guard<std::mutex> lock(stats_mutex);
    stats.fits_run += run;
    stats.fits_skipped += skipped;
  };

  if (jobs == 1 || tasks.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<std::size_t>(jobs, tasks.size()); ++t)
      pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!errors.empty())
    throw std::runtime_error("study replicate failed: " + errors.front());

  write_manifest(config, scenarios, stats);
  aggregate_study(config.output_dir, config.output_dir, config.trim_fraction,
                  config.include_nonconverged);
  return stats;
}

void aggregate_study(const std::string& in_dir, const std::string& out_dir,
                     double trim_fraction, bool include_nonconverged) {
  const nlohmann::json manifest = read_json_file((fs::path(in_dir) / "manifest.json").string());
  const int replicates = manifest.at("config").at("replicates").get<int>();
  std::vector<FitMethod> methods;
  for (const auto& m : manifest.at("config").at("methods"))
    methods.push_back(fit_method_from_string(m.get<std::string>()));

  fs::create_directories(out_dir);
  std::ofstream summary(fs::path(out_dir) / "summary.csv", std::ios::binary);
  std::ofstream scores(fs::path(out_dir) / "scores.csv", std::ios::binary);
  std::ofstream completion(fs::path(out_dir) / "completion.csv", std::ios::binary);
  std::ofstream loglik(fs::path(out_dir) / "loglik.csv", std::ios::binary);
  summary << "scenario,method,parameter,bias,rmse,rrmse,n\n";
  scores << "scenario,method,psi,mean_err,p2.5,p97.5\n";
  completion << "scenario,method,rate\n";
  loglik << "scenario,replicate,loglik_laplace,loglik_ghq\n";

  const bool have_pair = std::find(methods.begin(), methods.end(), FitMethod::Laplace) !=
                             methods.end() &&
                         std::find(methods.begin(), methods.end(), FitMethod::GhqEm) !=
                             methods.end();
  const std::vector<double> psi_grid = score_error_grid();

  for (const auto& scj : manifest.at("scenarios")) {
    const std::string label = scj.at("label").get<std::string>();
    const int scenario_index = scj.at("index").get<int>();

    std::vector<ItemSet> truths(replicates);
    std::map<FitMethod, std::vector<FitResult>> fits;
    for (int r = 0; r < replicates; ++r) {
      const fs::path dir = fs::path(in_dir) / label / ("r" + std::to_string(r));
      truths[r] = read_items_csv((dir / "params_true.csv").string());
      for (FitMethod method : methods)
        fits[method].push_back(read_fit_result((dir / method_file(method)).string()));
    }

    for (FitMethod method : methods) {
      const std::vector<FitResult>& results = fits[method];

      std::vector<ErrorRecord> records;
      std::vector<ItemSet> est_list, truth_list;
      for (int r = 0; r < replicates; ++r) {
        const FitResult& fit = results[r];
        const bool usable = fit.converged || (include_nonconverged &&
                                              fit.status != FitStatus::NumericalFailure);
        if (!usable || fit.estimates.empty()) continue;
        const auto recs = estimation_errors(fit.estimates, truths[r], scenario_index, r);
        records.insert(records.end(), recs.begin(), recs.end());
        est_list.push_back(fit.estimates);
        truth_list.push_back(truths[r]);
      }

      if (!records.empty()) {
        for (const RecoverySummary& s : recovery_summary(records, trim_fraction))
          summary << label << ',' << to_string(method) << ',' << to_string(s.parameter) << ','
                  << format_double(s.bias) << ',' << format_double(s.rmse) << ','
                  << format_double(s.rrmse) << ',' << s.n << '\n';
        for (const ScoreErrorPoint& pt :
             expected_score_error_curve(est_list, truth_list, psi_grid))
          scores << label << ',' << to_string(method) << ',' << format_double(pt.psi) << ','
                 << format_double(pt.mean_error) << ',' << format_double(pt.p2_5) << ','
                 << format_double(pt.p97_5) << '\n';
      }
      completion << label << ',' << to_string(method) << ','
                 << format_double(completion_rate(results)) << '\n';
    }

    if (have_pair) {
      for (int r = 0; r < replicates; ++r) {
        const double ll_l = fits[FitMethod::Laplace][r].loglik;
        const double ll_g = fits[FitMethod::GhqEm][r].loglik;
        if (!std::isfinite(ll_l) || !std::isfinite(ll_g)) continue;
        loglik << label << ',' << r << ',' << format_double(ll_l) << ',' << format_double(ll_g)
               << '\n';
      }
    }
  }
}

std::vector<FigureRow> emit_likelihood_figure(const ItemSet& items, const ResponseRow& responses,
                                              const QuadratureRule& rule,
                                              const std::vector<double>& psi_grid) {
  if (psi_grid.empty()) throw std::invalid_argument("empty psi grid");
  if (static_cast<int>(items.size()) != responses.size())
    throw DimensionError("response row length does not match item count");

  const ModeResult mode = find_posterior_mode(items, responses, 1e-10);
  const double g_mode = joint_logdensity(items, responses, mode.eta_hat).value;

  auto make_row = [&](double psi, bool is_node, double mass) {
    FigureRow row;
    row.psi = psi;
    row.is_node = is_node;
    row.data_likelihood = std::exp(pattern_loglik(items, responses, psi));
    row.joint_density = std::exp(joint_logdensity(items, responses, psi).value);
    row.laplace_approx =
        std::exp(g_mode - 0.5 * mode.curvature * (psi - mode.eta_hat) * (psi - mode.eta_hat));
    row.ghq_mass = mass;
    row.icc.resize(static_cast<int>(items.size()));
    for (std::size_t j = 0; j < items.size(); ++j)
      row.icc[static_cast<int>(j)] = prob_at_least(items[j], 1, psi);
    return row;
  };

  std::vector<FigureRow> rows;
  rows.reserve(psi_grid.size() + rule.size());
  for (double psi : psi_grid) rows.push_back(make_row(psi, false, 0.0));
  for (int q = 0; q < rule.size(); ++q)
    rows.push_back(make_row(rule.nodes[q], true,
                            rule.weights[q] *
                                std::exp(pattern_loglik(items, responses, rule.nodes[q]))));
  std::stable_sort(rows.begin(), rows.end(), [](const FigureRow& a, const FigureRow& b) {
    if (a.psi != b.psi) return a.psi < b.psi;
    return a.is_node < b.is_node;
  });
  return rows;
}

void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no figure rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "psi,is_node,data_likelihood,joint_density,laplace_approx,ghq_mass";
  for (int j = 0; j < rows.front().icc.size(); ++j) out << ",icc_" << (j + 1);
  out << '\n';
  for (const FigureRow& row : rows) {
    out << format_double(row.psi) << ',' << (row.is_node ? 1 : 0) << ','
        << format_double(row.data_likelihood) << ',' << format_double(row.joint_density) << ','
        << format_double(row.laplace_approx) << ',' << format_double(row.ghq_mass);
    for (int j = 0; j < row.icc.size(); ++j) out << ',' << format_double(row.icc[j]);
    out << '\n';
  }
}

}  // namespace grm
