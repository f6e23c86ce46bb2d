#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qlsys/energy.hpp"
#include "qlsys/expression.hpp"
#include "qlsys/grid.hpp"
#include "qlsys/optimizer.hpp"
#include "qlsys/weights.hpp"

namespace qlsys {

enum class Mode { solve, oracle, sphere, halfspace, gradcheck };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

struct Diagnostic {
  std::size_t line = 0;    // 1-based, 0 when not tied to a line
  std::size_t column = 0;  // 1-based, 0 when not tied to a column
  std::string message;

  std::string str() const;
};

class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// An expression together with where it came from in the spec file.
struct SourcedExpression {
  Expression expr;
  std::string key;
  std::size_t line = 0;
};

struct ProblemSpec {
  Mode mode = Mode::solve;

  DomainKind domain_kind = DomainKind::box;
  std::vector<Interval> extents;
  std::vector<std::size_t> resolution;
  std::optional<SourcedExpression> mask;  // inside where the value is >= 0

  WeightSpec weight = WeightSpec::gaussian(1.0);
  double weight_shift = 0.0;

  std::vector<SourcedExpression> boundary;  // u1, u2, ...
  std::optional<std::vector<double>> bound;

  bool tensor_diagonal = false;
  std::map<std::string, SourcedExpression> tensor;  // key d<i>_<a>

  SolveOptions solver;

  std::optional<SourcedExpression> source;  // oracle h
  double damping = 1.0;
  std::size_t picard_iters = 500;
  bool compare = false;

  std::size_t candidates = 4096;
  std::optional<std::vector<double>> pole;
  bool normalize = false;

  std::vector<double> radii;
  double spacing = 0.0;
  std::size_t halfspace_dim = 2;
  std::vector<Interval> window;

  double fd_step = 1e-5;
  double gradcheck_tolerance = 1e-6;

  std::string field_path = "field.txt";
  std::string field_second_path = "field_second.txt";
  std::string summary_path = "summary.json";
  std::string history_path = "history.csv";
  std::string timings_path = "timings.json";

  std::size_t space_dim() const;
  std::size_t components() const { return boundary.size(); }
};

/// Parses `key = value` lines grouped under `[section]` headers; `#` starts a
/// comment. Every problem found is collected; SpecError carries all of them.
ProblemSpec parse_problem(std::string_view text, Mode mode);

/// Grid for the box or masked-box domain of a spec.
GridPtr build_spec_grid(const ProblemSpec& spec);

/// Boundary data from the spec's expressions. A non-finite value is reported
/// as a SpecError naming the expression's line and the node coordinates.
BoundaryData sample_spec_boundary(const ProblemSpec& spec, const GridPtr& grid);

/// Coefficient tensor from the [tensor] section (identity when absent).
CoefficientTensor spec_tensor(const ProblemSpec& spec);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace qlsys
