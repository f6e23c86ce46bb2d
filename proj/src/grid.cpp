#include "qlsys/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlsys {

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::interior: return "interior";
    case NodeClass::boundary: return "boundary";
    case NodeClass::exterior: return "exterior";
  }
  return "exterior";
}

NodeClass node_class_from_string(std::string_view s) {
  if (s == "interior") return NodeClass::interior;
  if (s == "boundary") return NodeClass::boundary;
  if (s == "exterior") return NodeClass::exterior;
  throw std::invalid_argument("unknown node class '" + std::string(s) + "'");
}

DomainSpec DomainSpec::box(std::vector<Interval> extents) {
  DomainSpec d;
  d.kind = DomainKind::box;
  d.extents = std::move(extents);
  return d;
}

DomainSpec DomainSpec::masked_box(std::vector<Interval> extents, PointPredicate mask) {
  DomainSpec d;
  d.kind = DomainKind::masked_box;
  d.extents = std::move(extents);
  d.mask = std::move(mask);
  return d;
}

DomainSpec DomainSpec::half_ball(std::size_t dim, double radius) {
  DomainSpec d;
  d.kind = DomainKind::half_ball;
  d.radius = radius;
  d.extents.assign(dim, Interval{-radius, radius});
  if (dim > 0) d.extents.back() = Interval{0.0, radius};
  return d;
}

namespace {

std::vector<std::size_t> make_strides(const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

// Classification rule shared by build_grid and restrict_field.
std::vector<NodeClass> classify(const std::vector<std::size_t>& dims,
                                const std::vector<bool>& inside) {
  const auto strides = make_strides(dims);
  const std::size_t n = inside.size();
  std::vector<NodeClass> classes(n, NodeClass::exterior);
  for (std::size_t node = 0; node < n; ++node) {
    if (!inside[node]) continue;
    bool boundary = false;
    for (std::size_t k = 0; k < dims.size() && !boundary; ++k) {
      const std::size_t i = (node / strides[k]) % dims[k];
      if (i == 0 || i + 1 == dims[k]) {
        boundary = true;
      } else if (!inside[node - strides[k]] || !inside[node + strides[k]]) {
        boundary = true;
      }
    }
    classes[node] = boundary ? NodeClass::boundary : NodeClass::interior;
  }
  return classes;
}

}  // namespace

Grid::Grid(std::vector<std::size_t> dims, std::vector<double> spacing,
           std::vector<double> origin, std::vector<NodeClass> classes)
    : dims_(std::move(dims)),
      spacing_(std::move(spacing)),
      origin_(std::move(origin)),
      strides_(make_strides(dims_)),
      classes_(std::move(classes)) {
  const std::size_t n = dims_.size();
  if (n == 0) throw std::invalid_argument("grid needs at least one axis");
  if (spacing_.size() != n || origin_.size() != n)
    throw std::invalid_argument("grid spacing/origin rank mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    if (dims_[k] < 2) throw std::invalid_argument("grid axis needs at least 2 nodes");
    if (!(spacing_[k] > 0.0) || !std::isfinite(spacing_[k]))
      throw std::invalid_argument("grid spacing must be positive and finite");
    if (!std::isfinite(origin_[k])) throw std::invalid_argument("grid origin must be finite");
  }
  if (classes_.size() != product(dims_))
    throw std::invalid_argument("node class count does not match grid dims");

  std::vector<bool> inside(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) inside[i] = classes_[i] != NodeClass::exterior;
  if (classify(dims_, inside) != classes_)
    throw std::invalid_argument("node classes violate the interior/boundary invariants");

  boundary_slot_.assign(classes_.size(), npos);
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i] == NodeClass::interior) {
      interior_.push_back(i);
    } else if (classes_[i] == NodeClass::boundary) {
      boundary_slot_[i] = boundary_.size();
      boundary_.push_back(i);
    }
  }

  cell_volume_ = 1.0;
  for (double h : spacing_) cell_volume_ *= h;

  const std::size_t ncorners = corners_per_cell();
  corner_offsets_.resize(ncorners);
  for (std::size_t c = 0; c < ncorners; ++c) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (c & (std::size_t{1} << k)) off += strides_[k];
    corner_offsets_[c] = off;
  }

  cell_at_.assign(classes_.size(), npos);
  for (std::size_t node = 0; node < classes_.size(); ++node) {
    bool lower_corner = true;
    for (std::size_t k = 0; k < n && lower_corner; ++k)
      if ((node / strides_[k]) % dims_[k] + 1 == dims_[k]) lower_corner = false;
    if (!lower_corner) continue;
    bool active = true;
    for (std::size_t c = 0; c < ncorners && active; ++c)
      active = inside[node + corner_offsets_[c]];
    if (active) {
      cell_at_[node] = cells_.size();
      cells_.push_back(node);
    }
  }
}

std::vector<std::size_t> Grid::multi_index(std::size_t node) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t k = 0; k < dim(); ++k) idx[k] = (node / strides_[k]) % dims_[k];
  return idx;
}

std::size_t Grid::linear_index(std::span<const std::size_t> idx) const {
  std::size_t node = 0;
  for (std::size_t k = 0; k < dim(); ++k) node += idx[k] * strides_[k];
  return node;
}

void Grid::coords(std::size_t node, std::span<double> out) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    const auto i = (node / strides_[k]) % dims_[k];
    out[k] = origin_[k] + static_cast<double>(i) * spacing_[k];
  }
}

std::vector<double> Grid::coords(std::size_t node) const {
  std::vector<double> x(dim());
  coords(node, x);
  return x;
}

std::size_t Grid::neighbor(std::size_t node, std::size_t axis, int dir) const {
  const std::size_t i = (node / strides_[axis]) % dims_[axis];
  if (dir < 0) return i == 0 ? npos : node - strides_[axis];
  return i + 1 == dims_[axis] ? npos : node + strides_[axis];
}

bool Grid::on_lattice_face(std::size_t node) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    const std::size_t i = (node / strides_[k]) % dims_[k];
    if (i == 0 || i + 1 == dims_[k]) return true;
  }
  return false;
}

GridPtr build_grid(const DomainSpec& domain, std::span<const std::size_t> resolution) {
  const std::size_t n = domain.extents.size();
  if (n == 0) throw std::invalid_argument("domain has no axes");
  if (resolution.size() != n)
    throw std::invalid_argument("resolution rank does not match domain extents");
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = domain.extents[k];
    if (!std::isfinite(e.lo) || !std::isfinite(e.hi) || !(e.hi > e.lo))
      throw std::invalid_argument("degenerate extent on axis " + std::to_string(k + 1));
    if (resolution[k] < 3)
      throw std::invalid_argument("resolution must be at least 3 nodes per axis");
  }
  if (domain.kind == DomainKind::masked_box && !domain.mask)
    throw std::invalid_argument("masked_box domain requires a mask predicate");
  if (domain.kind == DomainKind::half_ball) {
    const double R = domain.radius;
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("half_ball radius must be > 0");
    const double slack = 1e-12 * R;
    for (std::size_t k = 0; k < n; ++k) {
      const double lo_needed = (k + 1 == n) ? 0.0 : -R;
      if (domain.extents[k].lo > lo_needed + slack || domain.extents[k].hi < R - slack)
        throw std::invalid_argument("bounding box does not cover the half-ball");
    }
  }

  std::vector<std::size_t> dims(resolution.begin(), resolution.end());
  std::vector<double> spacing(n), origin(n);
  for (std::size_t k = 0; k < n; ++k) {
    origin[k] = domain.extents[k].lo;
    spacing[k] = (domain.extents[k].hi - domain.extents[k].lo) / static_cast<double>(dims[k] - 1);
  }

  const std::size_t count = product(dims);
  const auto strides = make_strides(dims);
  std::vector<bool> inside(count, true);
  std::vector<double> x(n);
  for (std::size_t node = 0; node < count; ++node) {
    for (std::size_t k = 0; k < n; ++k)
      x[k] = origin[k] + static_cast<double>((node / strides[k]) % dims[k]) * spacing[k];
    switch (domain.kind) {
      case DomainKind::box: break;
      case DomainKind::masked_box: inside[node] = domain.mask(x); break;
      case DomainKind::half_ball: {
        const double R = domain.radius;
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        inside[node] = x[n - 1] >= -1e-12 * R && std::sqrt(r2) <= R * (1.0 + 1e-12);
        break;
      }
    }
  }

  auto classes = classify(dims, inside);
  auto grid = std::make_shared<const Grid>(std::move(dims), std::move(spacing), std::move(origin),
                                           std::move(classes));
  if (grid->interior_nodes().empty()) throw std::invalid_argument("grid has an empty interior");
  return grid;
}

std::vector<std::size_t> resolution_for_spacing(const DomainSpec& domain, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("spacing must be positive");
  std::vector<std::size_t> res;
  for (const auto& e : domain.extents) {
    const double cells = (e.hi - e.lo) / h;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw std::invalid_argument("extent is not a multiple of the spacing");
    res.push_back(static_cast<std::size_t>(rounded) + 1);
  }
  return res;
}

Field::Field(GridPtr grid, std::size_t components)
    : grid_(std::move(grid)), components_(components) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (components_ == 0) throw std::invalid_argument("field needs at least one component");
  values_.assign(grid_->node_count() * components_, 0.0);
}

Field::Field(GridPtr grid, std::size_t components, std::vector<double> values)
    : grid_(std::move(grid)), components_(components), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (components_ == 0) throw std::invalid_argument("field needs at least one component");
  if (values_.size() != grid_->node_count() * components_)
    throw std::invalid_argument("field value count does not match grid");
}

BoundaryData sample_boundary(const GridPtr& grid, const VectorFunction& expr) {
  BoundaryData bd;
  bd.grid = grid;
  std::vector<double> x(grid->dim());
  for (std::size_t node : grid->boundary_nodes()) {
    grid->coords(node, x);
    auto v = expr(x);
    if (bd.components == 0) {
      if (v.empty()) throw std::invalid_argument("boundary expression returned no components");
      bd.components = v.size();
      bd.values.reserve(grid->boundary_nodes().size() * v.size());
    } else if (v.size() != bd.components) {
      throw std::invalid_argument("boundary expression changed its component count");
    }
    for (double vi : v) {
      if (!std::isfinite(vi)) {
        std::string where;
        for (std::size_t k = 0; k < x.size(); ++k)
          where += (k ? ", " : "") + std::to_string(x[k]);
        throw std::domain_error("non-finite boundary value at node (" + where + ")");
      }
      bd.values.push_back(vi);
    }
  }
  return bd;
}

Field sample_field(const GridPtr& grid, const VectorFunction& expr) {
  std::vector<double> x(grid->dim());
  std::vector<double> values;
  std::size_t ncomp = 0;
  for (std::size_t node = 0; node < grid->node_count(); ++node) {
    if (!grid->in_domain(node)) continue;
    grid->coords(node, x);
    auto v = expr(x);
    if (ncomp == 0) {
      ncomp = v.size();
      if (ncomp == 0) throw std::invalid_argument("field expression returned no components");
      values.assign(grid->node_count() * ncomp, 0.0);
    }
    if (v.size() != ncomp) throw std::invalid_argument("field expression changed component count");
    for (std::size_t c = 0; c < ncomp; ++c) {
      if (!std::isfinite(v[c])) throw std::domain_error("non-finite field value");
      values[node * ncomp + c] = v[c];
    }
  }
  return Field(grid, ncomp, std::move(values));
}

Field field_from_boundary(const BoundaryData& boundary) {
  Field U(boundary.grid, boundary.components);
  const auto& nodes = boundary.grid->boundary_nodes();
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    auto src = boundary.at_slot(s);
    auto dst = U.at(nodes[s]);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return U;
}

Field restrict_field(const Field& field, std::span<const Interval> window) {
  const Grid& g = field.grid();
  const std::size_t n = g.dim();
  if (window.size() != n) throw std::invalid_argument("window rank does not match grid");

  std::vector<std::size_t> lo(n), dims(n);
  std::vector<double> origin(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double h = g.spacing()[k];
    const double a = (window[k].lo - g.origin()[k]) / h;
    const double b = (window[k].hi - g.origin()[k]) / h;
    const double ra = std::round(a), rb = std::round(b);
    if (std::abs(a - ra) > 1e-9 || std::abs(b - rb) > 1e-9)
      throw std::invalid_argument("window is not aligned to grid nodes on axis " +
                                  std::to_string(k + 1));
    if (ra < 0.0 || rb > static_cast<double>(g.dims()[k] - 1) || rb - ra < 1.0)
      throw std::invalid_argument("window is outside the grid or thinner than one cell");
    lo[k] = static_cast<std::size_t>(ra);
    dims[k] = static_cast<std::size_t>(rb - ra) + 1;
    origin[k] = g.origin()[k] + static_cast<double>(lo[k]) * h;
  }

  const std::size_t count = product(dims);
  const auto strides = make_strides(dims);
  const std::size_t N = field.components();
  std::vector<bool> inside(count);
  std::vector<double> values(count * N);
  std::vector<std::size_t> idx(n);
  for (std::size_t node = 0; node < count; ++node) {
    for (std::size_t k = 0; k < n; ++k) idx[k] = lo[k] + (node / strides[k]) % dims[k];
    const std::size_t parent = g.linear_index(idx);
    inside[node] = g.in_domain(parent);
    auto src = field.at(parent);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(node * N));
  }
  auto classes = classify(dims, inside);
  auto sub = std::make_shared<const Grid>(std::move(dims), g.spacing(), std::move(origin),
                                          std::move(classes));
  return Field(std::move(sub), N, std::move(values));
}

}  // namespace qlsys
