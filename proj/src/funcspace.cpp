#include "gie/funcspace.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "gie/errors.hpp"

namespace gie {

Point3 GridFunction::center(int i, int j, int k) const {
  return lo + Point3((i + 0.5) * spacing.x(), (j + 0.5) * spacing.y(), (k + 0.5) * spacing.z());
}

GridFunction make_grid_function(const Point3& lo, const Point3& hi, std::array<int, 3> shape) {
  for (int k = 0; k < 3; ++k) {
    if (shape[k] < 4) throw PreconditionViolated("grid shape components must be >= 4");
    if (!(hi[k] > lo[k])) throw PreconditionViolated("empty box");
  }
  GridFunction f;
  f.lo = lo;
  f.hi = hi;
  f.shape = shape;
  f.spacing = Point3((hi.x() - lo.x()) / shape[0], (hi.y() - lo.y()) / shape[1], (hi.z() - lo.z()) / shape[2]);
  f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.size()));
  return f;
}

GridFunction sample(const Point3& lo, const Point3& hi, std::array<int, 3> shape,
                    const std::function<double(const Point3&)>& fn) {
  GridFunction f = make_grid_function(lo, hi, shape);
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) f.values[static_cast<Eigen::Index>(f.index(i, j, k))] = fn(f.center(i, j, k));
  return f;
}

GridFunction from_volume_grid(const VolumeGrid& g, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != g.size()) throw LengthMismatch("cell values length != cell count");
  GridFunction f = make_grid_function(g.box_lo, g.box_hi, g.shape);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& ix = g.index[c];
    f.values[static_cast<Eigen::Index>(f.index(ix[0], ix[1], ix[2]))] = v[static_cast<Eigen::Index>(c)];
  }
  return f;
}

Eigen::VectorXd to_volume_grid(const GridFunction& f, const VolumeGrid& g) {
  if (f.shape != g.shape) throw LengthMismatch("grid shapes differ");
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& ix = g.index[c];
    v[static_cast<Eigen::Index>(c)] = f.values[static_cast<Eigen::Index>(f.index(ix[0], ix[1], ix[2]))];
  }
  return v;
}

double sup_norm(const GridFunction& f) { return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0; }

double l2_norm(const GridFunction& f) { return std::sqrt(f.values.squaredNorm() * f.cell_volume()); }

double mollifier_density(double eps, const Point3& X) {
  if (!(eps > 0.0)) throw PreconditionViolated("eps must be positive");
  return std::pow(std::numbers::pi * eps, -1.5) * std::exp(-X.squaredNorm() / eps);
}

double mollifier_fourier(double eps, const Point3& xi) {
  if (!(eps > 0.0)) throw PreconditionViolated("eps must be positive");
  return std::exp(-eps * xi.squaredNorm() / 4.0);
}

double mollifier_fourier_numeric(double eps, const Point3& xi, int n) {
  if (!(eps > 0.0)) throw PreconditionViolated("eps must be positive");
  const double L = 12.0 * std::sqrt(eps), h = 2.0 * L / (n - 1);
  double prod = 1.0;
  for (int a = 0; a < 3; ++a) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      double x = -L + k * h;
      double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
      s += w * std::exp(-x * x / eps) * std::cos(x * xi[a]);
    }
    prod *= s * h / std::sqrt(std::numbers::pi * eps);
  }
  return prod;
}

GridFunction mollify(const GridFunction& f, double eps) {
  if (!(eps > 0.0)) throw PreconditionViolated("eps must be positive");
  GridFunction out = f;
  const double cut = 6.0 * std::sqrt(eps);
  Eigen::VectorXd cur = f.values;
  for (int axis = 0; axis < 3; ++axis) {
    const double h = f.spacing[axis];
    const int r = static_cast<int>(std::floor(cut / h));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    double mass = 0.0;
    for (int k = -r; k <= r; ++k) {
      double x = k * h;
      w[static_cast<std::size_t>(k + r)] = std::exp(-x * x / eps);
      mass += w[static_cast<std::size_t>(k + r)];
    }
    for (double& x : w) x /= mass;

    Eigen::VectorXd next = Eigen::VectorXd::Zero(cur.size());
    const int n = f.shape[axis];
    for (int i = 0; i < f.shape[0]; ++i)
      for (int j = 0; j < f.shape[1]; ++j)
        for (int k = 0; k < f.shape[2]; ++k) {
          int idx[3] = {i, j, k};
          const int c = idx[axis];
          double acc = 0.0;
          for (int o = std::max(-r, -c); o <= std::min(r, n - 1 - c); ++o) {
            idx[axis] = c + o;
            acc += w[static_cast<std::size_t>(o + r)] * cur[static_cast<Eigen::Index>(f.index(idx[0], idx[1], idx[2]))];
          }
          next[static_cast<Eigen::Index>(f.index(i, j, k))] = acc;
        }
    cur.swap(next);
  }
  out.values = cur;
  return out;
}

double negative_norm(const GridFunction& f, int m1) {
  if (m1 < 0) throw PreconditionViolated("m1 must be >= 0");
  const int nx = f.shape[0], ny = f.shape[1], nz = f.shape[2];
  const std::size_t n = f.size();
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  fftw_plan plan = fftw_plan_dft_3d(nx, ny, nz, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = f.values[static_cast<Eigen::Index>(i)];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);

  const Point3 L = f.extent();
  const double dv = f.cell_volume(), vol = L.x() * L.y() * L.z();
  auto freq = [](int k, int nk, double len) {
    int s = k <= nk / 2 ? k : k - nk;
    return 2.0 * std::numbers::pi * s / len;
  };
  double acc = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) {
        const auto& c = buf[f.index(i, j, k)];
        double a2 = c[0] * c[0] + c[1] * c[1];
        double xi2 = std::pow(freq(i, nx, L.x()), 2) + std::pow(freq(j, ny, L.y()), 2) + std::pow(freq(k, nz, L.z()), 2);
        acc += a2 * std::pow(1.0 + xi2, -m1);
      }
  fftw_destroy_plan(plan);
  fftw_free(buf);
  return std::sqrt(acc * dv * dv / vol);
}

double negative_norm_bound(const GridFunction& f) {
  Point3 L = f.extent();
  return std::sqrt(L.x() * L.y() * L.z());
}

nlohmann::json to_json(const GridFunction& f) {
  return {{"lo", {f.lo.x(), f.lo.y(), f.lo.z()}},
          {"hi", {f.hi.x(), f.hi.y(), f.hi.z()}},
          {"shape", f.shape},
          {"values", std::vector<double>(f.values.data(), f.values.data() + f.values.size())}};
}

namespace {
constexpr char kMagic[8] = {'G', 'I', 'E', 'G', 'R', 'I', 'D', '1'};
}

void save_binary(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);
  os.write(kMagic, sizeof kMagic);
  std::int32_t shape[3] = {f.shape[0], f.shape[1], f.shape[2]};
  os.write(reinterpret_cast<const char*>(shape), sizeof shape);
  double box[6] = {f.lo.x(), f.lo.y(), f.lo.z(), f.hi.x(), f.hi.y(), f.hi.z()};
  os.write(reinterpret_cast<const char*>(box), sizeof box);
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(sizeof(double) * f.size()));
}

GridFunction load_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::string(magic, 8) != std::string(kMagic, 8)) throw Error("not a grid function file: " + path);
  std::int32_t shape[3];
  double box[6];
  is.read(reinterpret_cast<char*>(shape), sizeof shape);
  is.read(reinterpret_cast<char*>(box), sizeof box);
  GridFunction f = make_grid_function({box[0], box[1], box[2]}, {box[3], box[4], box[5]}, {shape[0], shape[1], shape[2]});
  is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(sizeof(double) * f.size()));
  if (!is) throw Error("truncated grid function file: " + path);
  return f;
}

}  // namespace gie
