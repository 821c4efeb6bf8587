#pragma once

#include "sparseoc/dca.hpp"
#include "sparseoc/elliptic.hpp"
#include "sparseoc/grid.hpp"
#include "sparseoc/pd_baseline.hpp"
#include "sparseoc/problem.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sparseoc {

enum class ExampleKind { example1, example2_comparison, example3_box, custom };
enum class Algorithm { dca, pd };

const char* to_string(ExampleKind kind);
ExampleKind example_from_string(const std::string& name);
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct SweepSpec {
  std::string param;  // gamma, beta, p or alpha
  std::vector<double> values;
};

/// Batch run description. Unset optionals take the example's defaults.
struct RunConfig {
  ExampleKind example = ExampleKind::example1;
  int n = 31;
  std::optional<double> alpha, beta, gamma, p;
  std::optional<std::pair<double, double>> box;
  Algorithm algorithm = Algorithm::dca;
  double outer_tol = 1e-6;
  std::optional<int> max_outer;
  int inner_max_iter = 5000;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  unsigned seed = 0;

  std::optional<QuadratureRule> quadrature;
  SolverKind linear_solver = SolverKind::conjugate_gradient;
  double c0 = 0.0;
  std::optional<double> gradient_weight;
  double y_d_constant = 1.0;  // custom example only
  double f_constant = 0.0;

  // Primal-dual baseline and comparison mode.
  std::optional<double> epsilon;
  Row2Sign row2_sign = Row2Sign::adjoint_consistent;
  double regularization_error = 0.0075;
  RegularizationMeasure regularization_measure = RegularizationMeasure::exact_sup;
};

/// Example defaults merged with the config.
struct ResolvedConfig {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, p = 0.0;
  std::optional<std::pair<double, double>> box;
  QuadratureRule quadrature = QuadratureRule::trapezoid;
  double gradient_weight = 0.0;
  int max_outer = 0;
  double epsilon = 0.0;
};

ResolvedConfig resolve(const RunConfig& config);
void validate(const RunConfig& config);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

std::pair<double, double> parse_box(const std::string& text);
SweepSpec parse_sweep(const std::string& text);

ControlProblem build_example(const RunConfig& config);

struct SweepRow {
  double value = 0.0;
  double cost = 0.0;
  Index null_entries = 0;
  int iterations = 0;
  bool converged = false;
};

struct ComparisonRow {
  std::string algorithm;
  std::string regularization;  // "gamma" or "epsilon"
  double parameter = 0.0;
  double re = 0.0;
  double cost = 0.0;
  Index null_entries = 0;
  Index near_zero_entries = 0;  // |u| <= 1e-3
  int iterations = 0;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  SolveReport dca;
  SolveReport pd;
  Field u0;
};

SolveReport run_single(const RunConfig& config);
std::vector<SweepRow> run_sweep(const RunConfig& config);
ComparisonResult run_comparison(const RunConfig& config);

/// Executes the config and writes its outputs; returns a process exit code.
int run(const RunConfig& config);

void write_iterations_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& records);
void write_field_csv(const std::filesystem::path& path, const Grid& grid, const Field& field);
Field read_field_csv(const std::filesystem::path& path, const Grid& grid);
void write_sweep_csv(const std::filesystem::path& path, const std::string& param, const std::vector<SweepRow>& rows);
void write_comparison_csv(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows);

}  // namespace sparseoc
