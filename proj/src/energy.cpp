#include "qlsys/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "qlsys/parallel.hpp"

namespace qlsys {

CoefficientTensor CoefficientTensor::identity(std::size_t space_dim, std::size_t components) {
  return CoefficientTensor(space_dim, components, nullptr);
}

CoefficientTensor CoefficientTensor::general(std::size_t space_dim, std::size_t components,
                                             EntryFunction fn) {
  if (!fn) throw std::invalid_argument("coefficient tensor needs an entry function");
  return CoefficientTensor(space_dim, components, std::move(fn));
}

CoefficientTensor CoefficientTensor::diagonal(std::size_t space_dim, std::size_t components,
                                              DiagonalFunction fn) {
  if (!fn) throw std::invalid_argument("coefficient tensor needs a diagonal function");
  const std::size_t order = space_dim * components;
  return CoefficientTensor(space_dim, components,
                           [fn = std::move(fn), order](std::span<const double> x,
                                                       std::span<double> entries) {
                             std::vector<double> diag(order);
                             fn(x, diag);
                             std::fill(entries.begin(), entries.end(), 0.0);
                             for (std::size_t r = 0; r < order; ++r)
                               entries[r * order + r] = diag[r];
                           });
}

void CoefficientTensor::evaluate(std::span<const double> x, std::span<double> entries) const {
  const std::size_t nN = order();
  if (entries.size() != nN * nN) throw std::invalid_argument("tensor entry buffer has wrong size");
  if (!fn_) {
    for (std::size_t r = 0; r < nN; ++r)
      for (std::size_t c = 0; c < nN; ++c) entries[r * nN + c] = r == c ? 1.0 : 0.0;
    return;
  }
  fn_(x, entries);
  for (double v : entries)
    if (!std::isfinite(v)) throw std::domain_error("coefficient tensor has non-finite entries");
}

double CoefficientTensor::evaluate_symmetric(std::span<const double> x,
                                             std::span<double> entries) const {
  evaluate(x, entries);
  const std::size_t nN = order();
  double delta = 0.0;
  for (std::size_t r = 0; r < nN; ++r) {
    for (std::size_t c = r + 1; c < nN; ++c) {
      const double a = entries[r * nN + c];
      const double b = entries[c * nN + r];
      delta = std::max(delta, 0.5 * std::abs(a - b));
      const double s = 0.5 * (a + b);
      entries[r * nN + c] = s;
      entries[c * nN + r] = s;
    }
  }
  return delta;
}

namespace {

void check_tensor(const CoefficientTensor* A, const Grid& g, std::size_t N) {
  if (A && (A->space_dim() != g.dim() || A->components() != N))
    throw std::invalid_argument("coefficient tensor shape does not match the field");
}

void check_finite(const Field& U) {
  for (double v : U.values())
    if (!std::isfinite(v)) throw std::domain_error("field contains non-finite values");
}

}  // namespace

EnergyAssembler::EnergyAssembler(GridPtr grid, std::size_t components, const Weight& weight,
                                 const CoefficientTensor* tensor)
    : grid_(std::move(grid)), components_(components), weight_(weight) {
  const Grid& g = *grid_;
  check_tensor(tensor, g, components_);
  if (tensor && !tensor->is_identity()) {
    const std::size_t nN = g.dim() * components_;
    const auto& cells = g.cells();
    cell_tensor_.resize(cells.size() * nN * nN);
    std::vector<double> mid(g.dim());
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      g.coords(cells[ci], mid);
      for (std::size_t k = 0; k < g.dim(); ++k) mid[k] += 0.5 * g.spacing()[k];
      const double d = tensor->evaluate_symmetric(
          mid, std::span<double>(cell_tensor_.data() + ci * nN * nN, nN * nN));
      sym_delta_ = std::max(sym_delta_, d);
    }
  }
}

double EnergyAssembler::evaluate(const Field& U, std::vector<double>& cell_energy,
                                 Field* grad) const {
  const Grid& g = *grid_;
  if (U.grid().node_count() != g.node_count() || U.grid().dims() != g.dims() ||
      U.components() != components_)
    throw std::invalid_argument("field does not match the assembler's grid");
  check_finite(U);

  const std::size_t n = g.dim();
  const std::size_t N = components_;
  const std::size_t ncorn = g.corners_per_cell();
  const std::size_t m = ncorn / 2;
  const std::size_t nN = n * N;
  const double vol = g.cell_volume();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double inv_corn = 1.0 / static_cast<double>(ncorn);
  const auto& cells = g.cells();
  const auto& h = g.spacing();
  const bool identity = cell_tensor_.empty();

  cell_energy.resize(cells.size());
  if (grad) corner_grad_.assign(cells.size() * ncorn * N, 0.0);

  parallel_for(cells.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> u(ncorn * N), ubar(N), fprime(N), d(n * m * N), dbar(nN);
    for (std::size_t ci = begin; ci < end; ++ci) {
      const std::size_t base = cells[ci];
      for (std::size_t c = 0; c < ncorn; ++c) {
        auto v = U.at(base + g.corner_offset(c));
        std::copy(v.begin(), v.end(), u.begin() + static_cast<std::ptrdiff_t>(c * N));
      }
      for (std::size_t a = 0; a < N; ++a) {
        double s = 0.0;
        for (std::size_t c = 0; c < ncorn; ++c) s += u[c * N + a];
        ubar[a] = s * inv_corn;
      }
      double f = 0.0, gval = 0.0;
      weight_.eval_into(ubar, f, fprime, gval);
      const double rho = std::exp(f);

      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t bit = std::size_t{1} << k;
        std::size_t e = 0;
        for (std::size_t c = 0; c < ncorn; ++c) {
          if (c & bit) continue;
          for (std::size_t a = 0; a < N; ++a)
            d[(k * m + e) * N + a] = (u[(c | bit) * N + a] - u[c * N + a]) / h[k];
          ++e;
        }
        for (std::size_t a = 0; a < N; ++a) {
          double s = 0.0;
          for (std::size_t ee = 0; ee < m; ++ee) s += d[(k * m + ee) * N + a];
          dbar[k * N + a] = s * inv_m;
        }
      }

      const double* S = identity ? nullptr : cell_tensor_.data() + ci * nN * nN;
      auto Sv = [S, nN](std::size_t r, std::size_t c) {
        return S ? S[r * nN + c] : (r == c ? 1.0 : 0.0);
      };

      // Same-direction pairs use the mean of edge products, cross-direction
      // pairs the product of edge means.
      double Q = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < N; ++a) {
          for (std::size_t b = 0; b < N; ++b) {
            double s = 0.0;
            for (std::size_t e = 0; e < m; ++e) s += d[(k * m + e) * N + a] * d[(k * m + e) * N + b];
            Q += Sv(k * N + a, k * N + b) * (s * inv_m);
          }
        }
      }
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          if (l == k) continue;
          for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b)
              Q += Sv(k * N + a, l * N + b) * (dbar[k * N + a] * dbar[l * N + b]);
        }

      const double E = vol * rho * Q;
      if (!std::isfinite(E)) throw std::domain_error("non-finite cell energy");
      cell_energy[ci] = E;

      if (!grad) continue;
      double* out = corner_grad_.data() + ci * ncorn * N;
      const double scale = vol * rho;
      for (std::size_t c = 0; c < ncorn; ++c)
        for (std::size_t a = 0; a < N; ++a) out[c * N + a] = scale * Q * fprime[a] * inv_corn;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t bit = std::size_t{1} << k;
        std::size_t e = 0;
        for (std::size_t c = 0; c < ncorn; ++c) {
          if (c & bit) continue;
          for (std::size_t a = 0; a < N; ++a) {
            double t = 0.0;
            for (std::size_t b = 0; b < N; ++b) t += Sv(k * N + a, k * N + b) * d[(k * m + e) * N + b];
            double t2 = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
              if (l == k) continue;
              for (std::size_t b = 0; b < N; ++b) t2 += Sv(k * N + a, l * N + b) * dbar[l * N + b];
            }
            const double val = scale * (t + t2) * (2.0 * inv_m) / h[k];
            out[(c | bit) * N + a] += val;
            out[c * N + a] -= val;
          }
          ++e;
        }
      }
    }
  });

  if (grad) {
    if (grad->grid().node_count() != g.node_count() || grad->components() != N)
      throw std::invalid_argument("gradient field does not match the grid");
    std::fill(grad->values().begin(), grad->values().end(), 0.0);
    const auto& interior = g.interior_nodes();
    parallel_for(interior.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t ii = begin; ii < end; ++ii) {
        const std::size_t p = interior[ii];
        auto out = grad->at(p);
        for (std::size_t c = 0; c < ncorn; ++c) {
          const std::size_t ci = g.cell_at(p - g.corner_offset(c));
          if (ci == Grid::npos) continue;
          const double* src = corner_grad_.data() + (ci * ncorn + c) * N;
          for (std::size_t a = 0; a < N; ++a) out[a] += src[a];
        }
      }
    });
  }
  return compensated_sum(cell_energy);
}

EnergyValue energy(const Field& U, const Weight& w, const CoefficientTensor* A) {
  EnergyAssembler assembler(U.grid_ptr(), U.components(), w, A);
  EnergyValue ev;
  ev.value = assembler.evaluate(U, ev.cell_contributions);
  ev.symmetrization_delta = assembler.symmetrization_delta();

  // Empirical integrability of the gradient; isotropic |DU|^2 per cell.
  const Grid& g = U.grid();
  const std::size_t n = g.dim(), N = U.components(), ncorn = g.corners_per_cell();
  const std::size_t m = ncorn / 2;
  std::vector<double> grad2(g.cells().size());
  for (std::size_t ci = 0; ci < g.cells().size(); ++ci) {
    const std::size_t base = g.cells()[ci];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t bit = std::size_t{1} << k;
      for (std::size_t c = 0; c < ncorn; ++c) {
        if (c & bit) continue;
        for (std::size_t a = 0; a < N; ++a) {
          const double dk = (U(base + g.corner_offset(c | bit), a) - U(base + g.corner_offset(c), a)) /
                            g.spacing()[k];
          s += dk * dk / static_cast<double>(m);
        }
      }
    }
    grad2[ci] = s;
  }
  for (double q : {2.0, 2.5, 3.0}) {
    std::vector<double> terms(grad2.size());
    for (std::size_t ci = 0; ci < grad2.size(); ++ci)
      terms[ci] = g.cell_volume() * std::pow(grad2[ci], 0.5 * q);
    ev.q_norms.emplace_back(q, compensated_sum(terms));
  }
  return ev;
}

Field grad_energy(const Field& U, const Weight& w, const CoefficientTensor* A) {
  EnergyAssembler assembler(U.grid_ptr(), U.components(), w, A);
  std::vector<double> cells;
  Field grad(U.grid_ptr(), U.components());
  assembler.evaluate(U, cells, &grad);
  return grad;
}

Field el_residual(const Field& U, const Weight& w, const CoefficientTensor* A) {
  const Grid& g = U.grid();
  const std::size_t n = g.dim(), N = U.components(), nN = n * N;
  check_tensor(A, g, N);
  check_finite(U);
  const bool identity = !A || A->is_identity();
  const auto& h = g.spacing();

  Field R(U.grid_ptr(), N);
  std::vector<double> fprime(N), fp_tmp(N), mid(N), x(n), xq(n), Sp(nN * nN), Sq(nN * nN);
  std::vector<double> div(N), Fplus(N), Fminus(N);

  auto rho_of = [&](std::span<const double> v) {
    double f = 0.0, gv = 0.0;
    w.eval_into(v, f, fp_tmp, gv);
    return std::exp(f);
  };
  auto tensor_at = [&](std::span<const double> pt, std::vector<double>& S) {
    if (!identity) A->evaluate_symmetric(pt, S);
  };
  auto Sv = [&](const std::vector<double>& S, std::size_t r, std::size_t c) {
    return identity ? (r == c ? 1.0 : 0.0) : S[r * nN + c];
  };

  for (std::size_t p : g.interior_nodes()) {
    auto Up = U.at(p);
    double f_p = 0.0, g_p = 0.0;
    w.eval_into(Up, f_p, fprime, g_p);
    g.coords(p, x);
    std::fill(div.begin(), div.end(), 0.0);

    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t qp = p + g.stride(i), qm = p - g.stride(i);
      auto Uqp = U.at(qp);
      auto Uqm = U.at(qm);
      for (std::size_t a = 0; a < N; ++a) mid[a] = 0.5 * (Up[a] + Uqp[a]);
      const double rho_p = rho_of(mid);
      for (std::size_t a = 0; a < N; ++a) mid[a] = 0.5 * (Up[a] + Uqm[a]);
      const double rho_m = rho_of(mid);
      xq = x;
      xq[i] = x[i] + 0.5 * h[i];
      tensor_at(xq, Sq);
      xq[i] = x[i] - 0.5 * h[i];
      tensor_at(xq, Sp);
      for (std::size_t b = 0; b < N; ++b)
        for (std::size_t a = 0; a < N; ++a)
          div[b] += (Sv(Sq, i * N + b, i * N + a) * rho_p * (Uqp[a] - Up[a]) -
                     Sv(Sp, i * N + b, i * N + a) * rho_m * (Up[a] - Uqm[a])) /
                    (h[i] * h[i]);
    }

    if (!identity) {
      // Mixed derivatives d_i(rho S_ij d_j U) by nested central differences.
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          bool any = false;
          for (int sgn : {+1, -1}) {
            const std::size_t q = sgn > 0 ? p + g.stride(i) : p - g.stride(i);
            g.coords(q, xq);
            tensor_at(xq, Sq);
            auto& F = sgn > 0 ? Fplus : Fminus;
            std::fill(F.begin(), F.end(), 0.0);
            bool block_nonzero = false;
            for (std::size_t b = 0; b < N; ++b)
              for (std::size_t a = 0; a < N; ++a)
                if (Sv(Sq, i * N + b, j * N + a) != 0.0) block_nonzero = true;
            if (!block_nonzero) continue;
            any = true;
            const std::size_t qj_p = g.neighbor(q, j, +1), qj_m = g.neighbor(q, j, -1);
            if (qj_p == Grid::npos || qj_m == Grid::npos || !g.in_domain(qj_p) || !g.in_domain(qj_m))
              throw std::domain_error("mixed tensor entries need in-domain diagonal neighbours");
            const double rho_q = rho_of(U.at(q));
            for (std::size_t b = 0; b < N; ++b)
              for (std::size_t a = 0; a < N; ++a)
                F[b] += rho_q * Sv(Sq, i * N + b, j * N + a) * (U(qj_p, a) - U(qj_m, a)) / (2.0 * h[j]);
          }
          if (any)
            for (std::size_t b = 0; b < N; ++b) div[b] += (Fplus[b] - Fminus[b]) / (2.0 * h[i]);
        }
    }

    tensor_at(x, Sp);
    double grad2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < N; ++a)
          for (std::size_t c = 0; c < N; ++c) {
            const double s = Sv(Sp, i * N + a, j * N + c);
            if (s == 0.0) continue;
            const double di = (U(p + g.stride(i), a) - U(p - g.stride(i), a)) / (2.0 * h[i]);
            const double dj = (U(p + g.stride(j), c) - U(p - g.stride(j), c)) / (2.0 * h[j]);
            grad2 += s * di * dj;
          }

    const double inv_rho = std::exp(-f_p);
    for (std::size_t b = 0; b < N; ++b) R(p, b) = -inv_rho * div[b] + 0.5 * fprime[b] * grad2;
  }
  return R;
}

namespace {

// SplitMix64; platform independent.
std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

EllipticityBounds ellipticity_bounds(const CoefficientTensor& A,
                                     std::span<const std::vector<double>> points,
                                     std::size_t sample_dirs) {
  if (sample_dirs == 0) throw std::invalid_argument("ellipticity_bounds needs sample_dirs >= 1");
  if (points.empty()) throw std::invalid_argument("ellipticity_bounds needs sample points");
  const std::size_t nN = A.order();

  std::vector<std::vector<double>> dirs;
  for (std::size_t r = 0; r < nN; ++r) {
    std::vector<double> e(nN, 0.0);
    e[r] = 1.0;
    dirs.push_back(std::move(e));
  }
  std::uint64_t state = 0x5EED;
  for (std::size_t s = 0; s < sample_dirs; ++s) {
    std::vector<double> xi(nN);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : xi) {
        v = 2.0 * (static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53) - 1.0;
        norm += v * v;
      }
    } while (norm < 1e-8);
    norm = std::sqrt(norm);
    for (auto& v : xi) v /= norm;
    dirs.push_back(std::move(xi));
  }

  EllipticityBounds b{std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
  std::vector<double> S(nN * nN);
  for (const auto& x : points) {
    A.evaluate(x, S);
    for (const auto& xi : dirs) {
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < nN; ++r) {
        den += xi[r] * xi[r];
        for (std::size_t c = 0; c < nN; ++c) num += S[r * nN + c] * xi[r] * xi[c];
      }
      const double q = num / den;
      b.lower = std::min(b.lower, q);
      b.upper = std::max(b.upper, q);
    }
  }
  return b;
}

double gradient_check(const Field& U, const Weight& w, const CoefficientTensor* A,
                      double step_scale) {
  EnergyAssembler assembler(U.grid_ptr(), U.components(), w, A);
  std::vector<double> cells;
  Field grad(U.grid_ptr(), U.components());
  assembler.evaluate(U, cells, &grad);

  double umax = 0.0;
  for (double v : U.values()) umax = std::max(umax, std::abs(v));
  const double step = step_scale * (1.0 + umax);

  Field work = U;
  double max_diff = 0.0, max_fd = 0.0;
  for (std::size_t p : U.grid().interior_nodes())
    for (std::size_t a = 0; a < U.components(); ++a) {
      const double orig = work(p, a);
      work(p, a) = orig + step;
      const double ep = assembler.evaluate(work, cells);
      work(p, a) = orig - step;
      const double em = assembler.evaluate(work, cells);
      work(p, a) = orig;
      const double fd = (ep - em) / (2.0 * step);
      max_diff = std::max(max_diff, std::abs(fd - grad(p, a)));
      max_fd = std::max(max_fd, std::abs(fd));
    }
  return max_diff / std::max(max_fd, std::numeric_limits<double>::min());
}

}  // namespace qlsys
