#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace qlsys {

enum class NodeClass : std::uint8_t { interior, boundary, exterior };

std::string_view to_string(NodeClass c);
NodeClass node_class_from_string(std::string_view s);

enum class DomainKind { box, masked_box, half_ball };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using PointPredicate = std::function<bool(std::span<const double>)>;

/// Description of the continuous domain to be discretized.
///
/// For `half_ball` the domain is {x_n >= 0, |x| <= radius}; `extents` is the
/// bounding box of the lattice and must cover [-R,R]^{n-1} x [0,R].
struct DomainSpec {
  DomainKind kind = DomainKind::box;
  std::vector<Interval> extents;
  PointPredicate mask;
  double radius = 0.0;

  static DomainSpec box(std::vector<Interval> extents);
  static DomainSpec masked_box(std::vector<Interval> extents, PointPredicate mask);
  /// Half-ball B_R^+ in `dim` dimensions with its tight bounding box.
  static DomainSpec half_ball(std::size_t dim, double radius);
};

/// Uniform tensor-product lattice with per-node classification.
///
/// Nodes are numbered row-major: the last axis varies fastest. Cells are the
/// lattice hypercubes whose 2^n corners all lie in the domain; they are
/// identified by their lowest corner.
class Grid {
 public:
  /// Builds a grid from explicit node classes; the classes must satisfy the
  /// interior/boundary/exterior invariants or std::invalid_argument is thrown.
  Grid(std::vector<std::size_t> dims, std::vector<double> spacing,
       std::vector<double> origin, std::vector<NodeClass> classes);

  std::size_t dim() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<double>& origin() const { return origin_; }
  std::size_t node_count() const { return classes_.size(); }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }

  NodeClass node_class(std::size_t node) const { return classes_[node]; }
  bool in_domain(std::size_t node) const { return classes_[node] != NodeClass::exterior; }
  const std::vector<NodeClass>& classes() const { return classes_; }

  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  /// Position of `node` in boundary_nodes(), or npos.
  std::size_t boundary_slot(std::size_t node) const { return boundary_slot_[node]; }

  std::vector<std::size_t> multi_index(std::size_t node) const;
  std::size_t linear_index(std::span<const std::size_t> idx) const;
  void coords(std::size_t node, std::span<double> out) const;
  std::vector<double> coords(std::size_t node) const;

  /// Index of the axis neighbour at offset +1/-1, or npos past the lattice.
  std::size_t neighbor(std::size_t node, std::size_t axis, int dir) const;
  bool on_lattice_face(std::size_t node) const;

  double cell_volume() const { return cell_volume_; }
  std::size_t corners_per_cell() const { return std::size_t{1} << dim(); }
  /// Lowest-corner node of every active cell, ascending.
  const std::vector<std::size_t>& cells() const { return cells_; }
  /// Node offset of corner `c` (bit k of c set means +1 along axis k).
  std::size_t corner_offset(std::size_t c) const { return corner_offsets_[c]; }
  /// Active cell whose lowest corner is `node`, or npos.
  std::size_t cell_at(std::size_t node) const { return cell_at_[node]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> spacing_;
  std::vector<double> origin_;
  std::vector<std::size_t> strides_;
  std::vector<NodeClass> classes_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<std::size_t> boundary_slot_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> cell_at_;
  std::vector<std::size_t> corner_offsets_;
  double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Discretizes `domain` with `resolution` nodes per axis.
GridPtr build_grid(const DomainSpec& domain, std::span<const std::size_t> resolution);

/// Node count per axis giving spacing `h` on the domain's extents; throws if
/// an extent is not an integer multiple of h.
std::vector<std::size_t> resolution_for_spacing(const DomainSpec& domain, double h);

/// Vector-valued nodal function with `components` values per node.
class Field {
 public:
  Field(GridPtr grid, std::size_t components);
  Field(GridPtr grid, std::size_t components, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t components() const { return components_; }

  std::span<double> at(std::size_t node) {
    return {values_.data() + node * components_, components_};
  }
  std::span<const double> at(std::size_t node) const {
    return {values_.data() + node * components_, components_};
  }
  double& operator()(std::size_t node, std::size_t c) { return values_[node * components_ + c]; }
  double operator()(std::size_t node, std::size_t c) const {
    return values_[node * components_ + c];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  GridPtr grid_;
  std::size_t components_;
  std::vector<double> values_;
};

/// Dirichlet data, one vector per node of grid.boundary_nodes() (same order).
struct BoundaryData {
  GridPtr grid;
  std::size_t components = 0;
  std::vector<double> values;

  std::span<const double> at_slot(std::size_t slot) const {
    return {values.data() + slot * components, components};
  }
};

using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Evaluates `expr` at every boundary node; throws on non-finite values.
BoundaryData sample_boundary(const GridPtr& grid, const VectorFunction& expr);

/// Field with every in-domain node set to `expr` (exterior nodes zero).
Field sample_field(const GridPtr& grid, const VectorFunction& expr);

/// Copy of `boundary` values into the boundary nodes of a zero field.
Field field_from_boundary(const BoundaryData& boundary);

/// Sub-field over an axis-aligned window whose faces lie on lattice planes.
/// The window grid is reclassified: in-domain nodes on its faces become
/// boundary nodes.
Field restrict_field(const Field& field, std::span<const Interval> window);

}  // namespace qlsys
