#include "grm/fit.hpp"

#include <fstream>
#include <json.hpp>

#include "grm/errors.hpp"

namespace grm {

std::string to_string(FitMethod method) {
  return method == FitMethod::Laplace ? "Laplace" : "GhqEm";
}

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "Converged";
    case FitStatus::MaxIterations: return "MaxIterations";
    case FitStatus::LineSearchFailure: return "LineSearchFailure";
    case FitStatus::BoundaryStuck: return "BoundaryStuck";
    case FitStatus::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

FitMethod fit_method_from_string(const std::string& s) {
  if (s == "Laplace") return FitMethod::Laplace;
  if (s == "GhqEm") return FitMethod::GhqEm;
  throw ParseError("unknown fit method: " + s);
}

FitStatus fit_status_from_string(const std::string& s) {
  if (s == "Converged") return FitStatus::Converged;
  if (s == "MaxIterations") return FitStatus::MaxIterations;
  if (s == "LineSearchFailure") return FitStatus::LineSearchFailure;
  if (s == "BoundaryStuck") return FitStatus::BoundaryStuck;
  if (s == "NumericalFailure") return FitStatus::NumericalFailure;
  throw ParseError("unknown fit status: " + s);
}

std::string fit_result_to_json(const FitResult& result) {
  nlohmann::json j;
  j["method"] = to_string(result.method);
  j["converged"] = result.converged;
  j["status"] = to_string(result.status);
  j["loglik"] = result.loglik;
  j["outer_iterations"] = result.outer_iterations;
  j["wall_time_ms"] = result.wall_time_ms;
  nlohmann::json items = nlohmann::json::array();
  for (const ItemParameters& item : result.estimates) {
    items.push_back({{"item", item.item_id},
                     {"a", item.a},
                     {"b1", item.b[0]},
                     {"b2", item.b[1]},
                     {"b3", item.b[2]},
                     {"b4", item.b[3]}});
  }
  j["items"] = std::move(items);
  return j.dump(2) + "\n";
}

FitResult fit_result_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("fit result JSON: ") + e.what());
  }
  try {
    FitResult result;
    result.method = fit_method_from_string(j.at("method").get<std::string>());
    result.converged = j.at("converged").get<bool>();
    result.status = fit_status_from_string(j.at("status").get<std::string>());
    result.loglik = j.at("loglik").get<double>();
    result.outer_iterations = j.at("outer_iterations").get<int>();
    result.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    for (const auto& entry : j.at("items")) {
      ItemParameters item;
      item.item_id = entry.at("item").get<int>();
      item.a = entry.at("a").get<double>();
      item.b << entry.at("b1").get<double>(), entry.at("b2").get<double>(),
          entry.at("b3").get<double>(), entry.at("b4").get<double>();
      result.estimates.push_back(item);
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fit result JSON: ") + e.what());
  }
}

void write_fit_result(const std::string& path, const FitResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << fit_result_to_json(result);
}

FitResult read_fit_result(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fit_result_from_json(text);
}

}  // namespace grm
