// Command-line front end: simulate datasets, fit either estimator, run the
// full scenario study, re-aggregate metrics, and emit the likelihood-
// approximation figure data.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "grm/csv.hpp"
#include "grm/em.hpp"
#include "grm/laplace.hpp"
#include "grm/quadrature.hpp"
#include "grm/rng.hpp"
#include "grm/simulate.hpp"
#include "grm/study.hpp"

namespace {

int run_simulate(int items, int subjects, std::uint64_t seed, int max_resim,
                 const std::string& out_data, const std::string& out_params) {
  const grm::ItemSet truth = grm::sample_item_parameters(items, grm::derive_seed(seed, 1));
  const grm::SimulatedData sim =
      grm::simulate_dataset(truth, subjects, grm::derive_seed(seed, 2), max_resim);
  grm::write_items_csv(out_params, truth);
  grm::write_responses_csv(out_data, sim.data);

  nlohmann::json meta{{"seed", seed},
                      {"resimulations", sim.resimulations},
                      {"n_subjects", subjects},
                      {"n_items", items}};
  std::ofstream meta_out(out_data + ".meta.json", std::ios::binary);
  meta_out << meta.dump(2) << "\n";
  std::cout << "wrote " << out_data << " (" << subjects << "x" << items << ", "
            << sim.resimulations << " resimulations) and " << out_params << "\n";
  return 0;
}

int run_fit(const std::string& method, const std::string& data_path, const std::string& init_path,
            int quadpts, int max_iter, const std::string& out_path) {
  const grm::ResponseMatrix data = grm::read_responses_csv(data_path);
  const grm::ItemSet init =
      init_path.empty() ? grm::starting_values(data) : grm::read_items_csv(init_path);

  grm::FitConfig config;
  config.quadrature_points = quadpts;
  if (max_iter > 0) config.max_outer_iterations = max_iter;

  const grm::FitResult result = method == "laplace" ? grm::fit_laplace(data, init, config)
                                                    : grm::fit_ghq_em(data, init, config);
  grm::write_fit_result(out_path, result);
  std::cout << grm::to_string(result.method) << ": status=" << grm::to_string(result.status)
            << " loglik=" << result.loglik << " iterations=" << result.outer_iterations << " ("
            << result.wall_time_ms << " ms)\n";
  return 0;
}

std::vector<int> parse_pattern(const std::string& text) {
  std::vector<int> pattern;
  std::string field;
  std::stringstream ss(text);
  while (std::getline(ss, field, ','))
    pattern.push_back(std::stoi(field));
  return pattern;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded-response IRT estimation engine and simulation study"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Sample item parameters and responses");
  int sim_items = 5, sim_subjects = 100, sim_max_resim = 1000;
  std::uint64_t sim_seed = 1;
  std::string sim_out_data, sim_out_params;
  simulate->add_option("--items", sim_items, "Number of items")->required();
  simulate->add_option("--subjects", sim_subjects, "Number of subjects")->required();
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--max-resim", sim_max_resim, "Maximum dataset redraws");
  simulate->add_option("--out-data", sim_out_data, "Response CSV path")->required();
  simulate->add_option("--out-params", sim_out_params, "Item parameter CSV path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit item parameters to a dataset");
  std::string fit_method, fit_data, fit_init, fit_out;
  int fit_quadpts = 61, fit_max_iter = 0;
  fit->add_option("--method", fit_method, "laplace or ghq-em")
      ->required()
      ->check(CLI::IsMember({"laplace", "ghq-em"}));
  fit->add_option("--data", fit_data, "Response CSV")->required();
  fit->add_option("--params-init", fit_init, "Starting values CSV (default: correlation-based)");
  fit->add_option("--quadpts", fit_quadpts, "Quadrature nodes (ghq-em)");
  fit->add_option("--max-iter", fit_max_iter, "Outer iteration cap");
  fit->add_option("--out", fit_out, "Fit result JSON path")->required();

  // study
  auto* study = app.add_subcommand("study", "Run the scenario grid");
  std::string study_config_path, study_out;
  int study_jobs = 0, study_replicates = 0, study_quadpts = 0;
  std::int64_t study_seed = -1;
  study->add_option("--config", study_config_path, "Study config JSON")->required();
  study->add_option("--jobs", study_jobs, "Parallel fit tasks");
  study->add_option("--out", study_out, "Output directory (overrides config)");
  study->add_option("--replicates", study_replicates, "Replicates per scenario (overrides config)");
  study->add_option("--base-seed", study_seed, "Base seed (overrides config)");
  study->add_option("--quadpts", study_quadpts, "Quadrature nodes (overrides config)");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Re-aggregate a persisted study tree");
  std::string metrics_in, metrics_out;
  double metrics_trim = 0.01;
  bool metrics_include_nonconverged = false;
  metrics->add_option("--in", metrics_in, "Study directory")->required();
  metrics->add_option("--out", metrics_out, "Output directory")->required();
  metrics->add_option("--trim", metrics_trim, "Trim fraction per tail for rRMSE");
  metrics->add_flag("--include-nonconverged", metrics_include_nonconverged,
                    "Include non-converged fits in recovery summaries");

  // figure1
  auto* figure = app.add_subcommand("figure1", "Likelihood approximation figure data");
  std::string fig_params, fig_pattern = "1,1,1,1,1", fig_out;
  int fig_quadpts = 61;
  double fig_from = -4.0, fig_to = 4.0, fig_step = 0.05;
  figure->add_option("--params", fig_params, "Item parameter CSV")->required();
  figure->add_option("--pattern", fig_pattern, "Comma-separated response pattern");
  figure->add_option("--quadpts", fig_quadpts, "Quadrature nodes");
  figure->add_option("--psi-from", fig_from, "Grid start");
  figure->add_option("--psi-to", fig_to, "Grid end");
  figure->add_option("--psi-step", fig_step, "Grid step");
  figure->add_option("--out", fig_out, "Figure CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed())
      return run_simulate(sim_items, sim_subjects, sim_seed, sim_max_resim, sim_out_data,
                          sim_out_params);

    if (fit->parsed())
      return run_fit(fit_method, fit_data, fit_init, fit_quadpts, fit_max_iter, fit_out);

    if (study->parsed()) {
      grm::StudyConfig config = grm::study_config_from_json_file(study_config_path);
      if (study_jobs > 0) config.jobs = study_jobs;
      if (config.jobs <= 0)
        config.jobs = std::max(1u, std::thread::hardware_concurrency());
      if (!study_out.empty()) config.output_dir = study_out;
      if (study_replicates > 0) config.replicates = study_replicates;
      if (study_seed >= 0) config.base_seed = static_cast<std::uint64_t>(study_seed);
      if (study_quadpts > 0) {
        config.quadrature_points = study_quadpts;
        config.fit.quadrature_points = study_quadpts;
      }
      const grm::StudyRunStats stats = grm::run_study(config);
      std::cout << "study complete: " << stats.fits_run << " fits run, " << stats.fits_skipped
                << " skipped; outputs in " << config.output_dir << "\n";
      return 0;
    }

    if (metrics->parsed()) {
      grm::aggregate_study(metrics_in, metrics_out, metrics_trim, metrics_include_nonconverged);
      std::cout << "aggregates written to " << metrics_out << "\n";
      return 0;
    }

    if (figure->parsed()) {
      const grm::ItemSet items = grm::read_items_csv(fig_params);
      const std::vector<int> pattern_vec = parse_pattern(fig_pattern);
      if (pattern_vec.size() != items.size())
        throw grm::DimensionError("pattern length does not match item count");
      Eigen::RowVectorXi pattern(static_cast<int>(pattern_vec.size()));
      for (std::size_t i = 0; i < pattern_vec.size(); ++i)
        pattern[static_cast<int>(i)] = pattern_vec[i];

      const grm::QuadratureRule rule = grm::gauss_hermite_normal(fig_quadpts);
      std::vector<double> grid;
      for (double psi = fig_from; psi <= fig_to + 1e-12; psi += fig_step) grid.push_back(psi);
      const auto rows = grm::emit_likelihood_figure(items, pattern, rule, grid);
      grm::write_figure_csv(fig_out, rows);
      std::cout << "wrote " << rows.size() << " figure rows to " << fig_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
