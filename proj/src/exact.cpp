#include "isingspec/exact.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace isingspec {

namespace {

struct BondTable {
  // neighbor multiset per site (bond +e convention, so an extent-2 periodic
  // axis lists the partner twice)
  std::vector<std::vector<int>> nbrs;
  std::vector<double> site_field;  // h_lat + beta * virtual neighbor count
  int64_t n_bonds = 0;
};

BondTable build_bonds(const ModelParams& params, const GridGeometry& geom) {
  BondTable tbl;
  const auto n = geom.n_sites();
  tbl.nbrs.resize(static_cast<size_t>(n));
  tbl.site_field.resize(static_cast<size_t>(n));
  const double h_lat = params.lattice_field();
  for (int64_t x = 0; x < n; ++x) {
    for (int ax = 0; ax < geom.dim(); ++ax) {
      if (!geom.axis_has_bonds(ax)) continue;
      const int64_t y = geom.neighbor(x, ax, +1);
      if (y >= 0) {
        tbl.nbrs[x].push_back(static_cast<int>(y));
        tbl.nbrs[y].push_back(static_cast<int>(x));
        ++tbl.n_bonds;
      }
    }
    tbl.site_field[x] = h_lat + params.beta * geom.virtual_neighbors(x);
  }
  return tbl;
}

struct BlockSums {
  double w = 0.0;
  std::vector<double> ws;    // w * sigma_i
  std::vector<double> wss;   // w * sigma_i sigma_j, packed i < j
};

// Sums over Gray-code states [k0, k1). shift stabilizes the exponent.
BlockSums enumerate_block(const BondTable& tbl, double beta, int n_sites,
                          uint64_t k0, uint64_t k1, double shift) {
  BlockSums acc;
  acc.ws.assign(n_sites, 0.0);
  const int n_pairs = n_sites * (n_sites - 1) / 2;
  acc.wss.assign(n_pairs, 0.0);

  std::vector<double> sigma(n_sites);
  const uint64_t g0 = k0 ^ (k0 >> 1);
  for (int i = 0; i < n_sites; ++i) sigma[i] = (g0 >> i) & 1 ? 1.0 : -1.0;

  double bond_sum = 0.0, field_sum = 0.0;
  for (int x = 0; x < n_sites; ++x) {
    field_sum += tbl.site_field[x] * sigma[x];
    for (int y : tbl.nbrs[x]) bond_sum += sigma[x] * sigma[y];
  }
  bond_sum *= 0.5;  // each bond entry was visited from both endpoints

  for (uint64_t k = k0; k < k1; ++k) {
    const double w = std::exp(beta * bond_sum + field_sum - shift);
    acc.w += w;
    int p = 0;
    for (int i = 0; i < n_sites; ++i) {
      const double wsi = w * sigma[i];
      acc.ws[i] += wsi;
      for (int j = i + 1; j < n_sites; ++j) acc.wss[p++] += wsi * sigma[j];
    }
    if (k + 1 < k1) {
      const int t = std::countr_zero(k + 1);
      double nsum = 0.0;
      for (int y : tbl.nbrs[t]) nsum += sigma[y];
      bond_sum -= 2.0 * sigma[t] * nsum;
      field_sum -= 2.0 * tbl.site_field[t] * sigma[t];
      sigma[t] = -sigma[t];
    }
  }
  return acc;
}

}  // namespace

ExactMoments enumerate_moments(const ModelParams& params,
                               const std::vector<int64_t>& extents, Boundary bc,
                               int n_threads, int site_cap) {
  params.validate();
  if (static_cast<int>(extents.size()) != params.d)
    throw std::invalid_argument("extents do not match the model dimension");
  GridGeometry geom(extents, bc);
  const int64_t n64 = geom.n_sites();
  if (n64 > site_cap)
    throw std::invalid_argument("enumeration site cap exceeded");
  const int n = static_cast<int>(n64);

  const BondTable tbl = build_bonds(params, geom);
  double shift = params.beta * static_cast<double>(tbl.n_bonds);
  for (double f : tbl.site_field) shift += std::abs(f);

  const uint64_t n_states = uint64_t(1) << n;
  // fixed block partition (independent of thread count) for reproducibility
  const int n_blocks = n >= 16 ? 64 : 1;
  std::vector<BlockSums> partials(n_blocks);

  if (n_threads <= 1 || n_blocks == 1) {
    for (int b = 0; b < n_blocks; ++b) {
      const uint64_t k0 = n_states * uint64_t(b) / n_blocks;
      const uint64_t k1 = n_states * uint64_t(b + 1) / n_blocks;
      partials[b] = enumerate_block(tbl, params.beta, n, k0, k1, shift);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int b = next.fetch_add(1);
        if (b >= n_blocks) return;
        const uint64_t k0 = n_states * uint64_t(b) / n_blocks;
        const uint64_t k1 = n_states * uint64_t(b + 1) / n_blocks;
        partials[b] = enumerate_block(tbl, params.beta, n, k0, k1, shift);
      }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(n_threads, n_blocks);
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BlockSums total;
  total.ws.assign(n, 0.0);
  total.wss.assign(n * (n - 1) / 2, 0.0);
  for (const auto& p : partials) {
    total.w += p.w;
    for (int i = 0; i < n; ++i) total.ws[i] += p.ws[i];
    for (size_t q = 0; q < total.wss.size(); ++q) total.wss[q] += p.wss[q];
  }

  ExactMoments m;
  m.params = params;
  m.geom = geom;
  m.log_partition = shift + std::log(total.w);
  m.one_point.resize(n);
  m.two_point.assign(static_cast<size_t>(n) * n, 1.0);
  for (int i = 0; i < n; ++i) m.one_point[i] = total.ws[i] / total.w;
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = total.wss[p++] / total.w;
      m.two_point[static_cast<size_t>(i) * n + j] = v;
      m.two_point[static_cast<size_t>(j) * n + i] = v;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Transfer matrix

StripMoments strip_transfer_moments(const ModelParams& params, int64_t length,
                                    int width, Boundary bc_length,
                                    Boundary bc_width, int64_t t_cap) {
  params.validate();
  if (params.d != 2)
    throw std::invalid_argument("strip transfer matrix is two-dimensional");
  if (width < 1 || width > 8)
    throw std::invalid_argument("strip width cap exceeded (W <= 8)");
  if (length < 1 || length > 4096)
    throw std::invalid_argument("strip length cap exceeded (N <= 4096)");
  if (bc_length == Boundary::Plus || bc_width == Boundary::Plus)
    throw std::invalid_argument("plus bc is not supported by the strip oracle");
  if (bc_length == Boundary::Periodic && length < 2)
    throw std::invalid_argument("periodic strip needs length >= 2");
  if (t_cap < 0 || t_cap > length - 1) t_cap = length - 1;

  const int K = 1 << width;
  const double h_lat = params.lattice_field();
  const double beta = params.beta;

  auto spin = [](int state, int i) { return (state >> i) & 1 ? 1.0 : -1.0; };

  // weight exponent internal to one column (vertical bonds + field)
  std::vector<double> intra(K, 0.0);
  for (int c = 0; c < K; ++c) {
    double e = 0.0;
    if (width > 1) {
      for (int i = 0; i + 1 < width; ++i) e += beta * spin(c, i) * spin(c, i + 1);
      // the wrap bond; for width 2 this doubles the (0,1) coupling, matching
      // the +e bond convention used by the enumeration and the samplers
      if (bc_width == Boundary::Periodic)
        e += beta * spin(c, width - 1) * spin(c, 0);
    }
    for (int i = 0; i < width; ++i) e += h_lat * spin(c, i);
    intra[c] = e;
  }

  Eigen::MatrixXd M(K, K);
  for (int c = 0; c < K; ++c)
    for (int cp = 0; cp < K; ++cp) {
      double inter = 0.0;
      for (int i = 0; i < width; ++i) inter += spin(c, i) * spin(cp, i);
      M(c, cp) = std::exp(0.5 * intra[c] + beta * inter + 0.5 * intra[cp]);
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("transfer matrix eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd Q = es.eigenvectors();
  const double scale = lam.cwiseAbs().maxCoeff();
  const Eigen::VectorXd ls = lam / scale;

  // powers ls^p for p in [0, length]
  Eigen::MatrixXd pow_ls(K, length + 1);
  pow_ls.col(0).setOnes();
  for (int64_t p = 1; p <= length; ++p)
    pow_ls.col(p) = pow_ls.col(p - 1).cwiseProduct(ls);

  // spin operators in the eigenbasis
  std::vector<Eigen::MatrixXd> Srot(width);
  for (int i = 0; i < width; ++i) {
    Eigen::VectorXd diag(K);
    for (int c = 0; c < K; ++c) diag(c) = spin(c, i);
    Srot[i] = Q.transpose() * diag.asDiagonal() * Q;
  }

  StripMoments out;
  out.params = params;
  out.length = length;
  out.width = width;
  out.bc_length = bc_length;
  out.bc_width = bc_width;
  out.t_cap = t_cap;
  out.one_point.assign(static_cast<size_t>(length) * width, 0.0);
  out.two_from_origin.assign(static_cast<size_t>((t_cap + 1)) * width * width, 0.0);

  if (bc_length == Boundary::Periodic) {
    const double zs = pow_ls.col(length).sum();
    out.log_partition = length * std::log(scale) + std::log(zs);

    for (int i = 0; i < width; ++i) {
      const double val =
          Srot[i].diagonal().cwiseProduct(pow_ls.col(length)).sum() / zs;
      for (int64_t t = 0; t < length; ++t)
        out.one_point[static_cast<size_t>(t) * width + i] = val;
    }
    for (int i = 0; i < width; ++i)
      for (int j = 0; j < width; ++j) {
        // Tr[S_i M^t S_j M^{N-t}] / Tr[M^N]
        for (int64_t t = 0; t <= t_cap; ++t) {
          double num = 0.0;
          for (int a = 0; a < K; ++a) {
            double inner = 0.0;
            for (int b = 0; b < K; ++b)
              inner += Srot[i](a, b) * pow_ls(b, t) * Srot[j](b, a);
            num += inner * pow_ls(a, length - t);
          }
          out.two_from_origin[static_cast<size_t>(t * width + j) * width + i] =
              num / zs;
        }
      }
  } else {
    Eigen::VectorXd u(K);
    for (int c = 0; c < K; ++c) u(c) = std::exp(0.5 * intra[c]);
    const Eigen::VectorXd ur = Q.transpose() * u;
    const double zs = ur.cwiseAbs2().cwiseProduct(pow_ls.col(length - 1)).sum();
    out.log_partition = (length - 1) * std::log(scale) + std::log(zs);

    for (int i = 0; i < width; ++i) {
      const Eigen::VectorXd siu = Srot[i] * ur;
      for (int64_t t = 0; t < length; ++t) {
        const Eigen::VectorXd left = ur.cwiseProduct(pow_ls.col(t));
        const Eigen::VectorXd right = ur.cwiseProduct(pow_ls.col(length - 1 - t));
        // u^T M^t S_i M^{N-1-t} u
        out.one_point[static_cast<size_t>(t) * width + i] =
            left.dot(Srot[i] * right) / zs;
      }
    }
    std::vector<Eigen::VectorXd> a(width);
    for (int i = 0; i < width; ++i) a[i] = Srot[i] * ur;
    for (int64_t t = 0; t <= t_cap; ++t) {
      const Eigen::VectorXd tail = ur.cwiseProduct(pow_ls.col(length - 1 - t));
      for (int j = 0; j < width; ++j) {
        const Eigen::VectorXd c = Srot[j] * tail;
        for (int i = 0; i < width; ++i) {
          out.two_from_origin[static_cast<size_t>(t * width + j) * width + i] =
              a[i].cwiseProduct(pow_ls.col(t)).dot(c) / zs;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inequality verifiers

GksReport verify_gks(const ExactMoments& m, double tol) {
  GksReport rep;
  rep.min_truncated = 1.0;
  const int64_t n = m.geom.n_sites();
  for (int64_t x = 0; x < n; ++x)
    for (int64_t y = x; y < n; ++y)
      rep.min_truncated = std::min(rep.min_truncated, m.truncated(x, y));
  rep.pass = rep.min_truncated >= -tol;
  return rep;
}

GksReport verify_gks(const StripMoments& m, double tol) {
  GksReport rep;
  rep.min_truncated = 1.0;
  for (int64_t t = 0; t <= m.t_cap; ++t)
    for (int i = 0; i < m.width; ++i)
      for (int j = 0; j < m.width; ++j)
        rep.min_truncated = std::min(rep.min_truncated, m.truncated(i, t, j));
  rep.pass = rep.min_truncated >= -tol;
  return rep;
}

namespace {

// translation-averaged two-point function on a periodic box
std::vector<double> averaged_correlation(const ExactMoments& m) {
  const auto& ext = m.geom.extents();
  const int64_t n = m.geom.n_sites();
  std::vector<double> corr(static_cast<size_t>(n), 0.0);
  for (int64_t x = 0; x < n; ++x) {
    const auto cx = m.geom.coords_of(x);
    for (int64_t v = 0; v < n; ++v) {
      auto cv = m.geom.coords_of(v);
      std::vector<int64_t> cy(cx.size());
      for (size_t ax = 0; ax < cx.size(); ++ax)
        cy[ax] = (cx[ax] + cv[ax]) % ext[ax];
      corr[static_cast<size_t>(v)] += m.two(x, m.geom.linear_index(cy));
    }
  }
  for (auto& c : corr) c /= static_cast<double>(n);
  return corr;
}

void record(SmmReport& rep, double slack, double tol) {
  ++rep.comparisons;
  if (slack < -tol) {
    ++rep.violations;
    rep.worst = std::min(rep.worst, slack);
  }
}

}  // namespace

SmmReport verify_smm(const ExactMoments& m, double tol) {
  if (m.geom.dim() != 2)
    throw std::invalid_argument("reflection checks are implemented for d=2");
  const auto& ext = m.geom.extents();
  SmmReport rep;

  if (m.geom.bc() == Boundary::Periodic) {
    const auto corr = averaged_correlation(m);
    auto C = [&](int64_t v0, int64_t v1) {
      v0 = ((v0 % ext[0]) + ext[0]) % ext[0];
      v1 = ((v1 % ext[1]) + ext[1]) % ext[1];
      return corr[static_cast<size_t>(v0 * ext[1] + v1)];
    };
    // axis families: non-increasing in the periodic distance along one
    // coordinate at fixed other coordinate
    for (int64_t v0 = 0; v0 < ext[0]; ++v0)
      for (int64_t d1 = 0; d1 + 1 <= ext[1] / 2; ++d1)
        record(rep, C(v0, d1) - C(v0, d1 + 1), tol);
    for (int64_t v1 = 0; v1 < ext[1]; ++v1)
      for (int64_t d0 = 0; d0 + 1 <= ext[0] / 2; ++d0)
        record(rep, C(d0, v1) - C(d0 + 1, v1), tol);

    // diagonal reflections: exact two-sided symmetries only on square
    // boxes of even extent
    if (ext[0] == ext[1] && ext[0] % 2 == 0) {
      const int64_t L = ext[0];
      auto centered = [L](int64_t v) {
        v = ((v % L) + L) % L;
        return v > L / 2 ? v - L : v;
      };
      const int64_t n = m.geom.n_sites();
      for (int diag = 0; diag < 2; ++diag) {
        auto side = [&](int64_t x0, int64_t x1) {
          const int64_t d = centered(diag == 0 ? x0 - x1 : x0 + x1);
          if (d == 0 || d == L / 2) return 0;  // on the reflection circle
          return d > 0 ? 1 : -1;
        };
        auto reflect = [&](int64_t y0, int64_t y1) {
          int64_t r0 = diag == 0 ? y1 : (L - y1) % L;
          int64_t r1 = diag == 0 ? y0 : (L - y0) % L;
          return r0 * L + r1;
        };
        for (int64_t x = 0; x < n; ++x) {
          const int sx = side(x / L, x % L);
          if (sx == 0) continue;
          for (int64_t y = 0; y < n; ++y) {
            const int sy = side(y / L, y % L);
            if (sy != sx) continue;
            const int64_t ry = reflect(y / L, y % L);
            if (ry == y) continue;
            record(rep, m.two(x, y) - m.two(x, ry), tol);
          }
        }
      }
    }
  } else {
    // finite open box: the exact symmetries are the mid-line reflections
    const int64_t n = m.geom.n_sites();
    for (int ax = 0; ax < 2; ++ax) {
      const int64_t E = ext[ax];
      if (E < 2) continue;
      auto side = [&](const std::vector<int64_t>& c) {
        const int64_t s = 2 * c[ax] - (E - 1);
        return s == 0 ? 0 : (s > 0 ? 1 : -1);
      };
      for (int64_t x = 0; x < n; ++x) {
        const auto cx = m.geom.coords_of(x);
        const int sx = side(cx);
        if (sx == 0) continue;
        for (int64_t y = 0; y < n; ++y) {
          auto cy = m.geom.coords_of(y);
          const int sy = side(cy);
          if (sy != sx) continue;
          cy[ax] = E - 1 - cy[ax];
          const int64_t ry = m.geom.linear_index(cy);
          if (ry == y) continue;
          record(rep, m.two(x, y) - m.two(x, ry), tol);
        }
      }
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

GhsReport verify_ghs(const ModelParams& params,
                     const std::vector<int64_t>& extents, Boundary bc,
                     const std::vector<double>& h_grid, double tol,
                     int n_threads) {
  if (h_grid.size() < 3)
    throw std::invalid_argument("GHS check needs at least 3 field values");
  for (size_t i = 0; i < h_grid.size(); ++i) {
    if (h_grid[i] < 0.0)
      throw std::invalid_argument("GHS field grid must be nonnegative");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1]))
      throw std::invalid_argument("GHS field grid must be strictly increasing");
  }

  std::vector<double> mag(h_grid.size());
  std::vector<ExactMoments> moments(h_grid.size());
  for (size_t i = 0; i < h_grid.size(); ++i) {
    ModelParams p = params;
    p.h = h_grid[i];
    moments[i] = enumerate_moments(p, extents, bc, n_threads);
    double m = 0.0;
    for (double v : moments[i].one_point) m += v;
    mag[i] = m / static_cast<double>(moments[i].one_point.size());
  }

  GhsReport rep;
  rep.max_second_difference = -1e300;
  for (size_t i = 1; i + 1 < h_grid.size(); ++i) {
    const double dl = h_grid[i] - h_grid[i - 1];
    const double dr = h_grid[i + 1] - h_grid[i];
    const double d2 = 2.0 *
                      ((mag[i + 1] - mag[i]) / dr - (mag[i] - mag[i - 1]) / dl) /
                      (dl + dr);
    rep.max_second_difference = std::max(rep.max_second_difference, d2);
  }
  rep.concavity_pass = rep.max_second_difference <= tol;

  // truncated correlations at h > 0 dominated by the h = 0 correlations
  ModelParams p0 = params;
  p0.h = 0.0;
  const ExactMoments base = enumerate_moments(p0, extents, bc, n_threads);
  rep.dominance_pass = true;
  const int64_t n = base.geom.n_sites();
  for (size_t i = 0; i < h_grid.size(); ++i) {
    if (h_grid[i] == 0.0) continue;
    for (int64_t x = 0; x < n && rep.dominance_pass; ++x)
      for (int64_t y = 0; y < n; ++y)
        if (moments[i].truncated(x, y) > base.two(x, y) + tol) {
          rep.dominance_pass = false;
          break;
        }
  }
  rep.pass = rep.concavity_pass && rep.dominance_pass;
  return rep;
}

}  // namespace isingspec
