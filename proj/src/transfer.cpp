#include "fkghost/transfer.hpp"

#include <cmath>
#include <stdexcept>

#include "fkghost/lattice.hpp"

namespace fkghost {

StripSpec::StripSpec() : beta(critical_beta()) {}

StripSpec::StripSpec(int width_, double beta_, double big_h_, VerticalBoundary vertical_)
    : width(width_), vertical(vertical_), beta(beta_), big_h(big_h_) {
  validate();
}

void StripSpec::validate() const {
  if (width < 1 || width > 14)
    throw std::invalid_argument("strip width must be between 1 and 14");
  if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
  if (big_h < 0) throw std::invalid_argument("field H must be >= 0");
}

namespace {

double column_energy(uint32_t state, int width, VerticalBoundary vertical) {
  double e = 0.0;
  auto spin = [state](int w) { return (state >> w) & 1 ? 1.0 : -1.0; };
  for (int w = 0; w + 1 < width; ++w) e += spin(w) * spin(w + 1);
  if (vertical == VerticalBoundary::Periodic && width > 2) e += spin(width - 1) * spin(0);
  if (vertical == VerticalBoundary::Periodic && width == 2) e += spin(1) * spin(0);
  return e;
}

double column_field(uint32_t state, int width) {
  double m = 0.0;
  for (int w = 0; w < width; ++w) m += (state >> w) & 1 ? 1.0 : -1.0;
  return m;
}

void require_symmetric(const Eigen::MatrixXd& t) {
  if (t.rows() != t.cols()) throw std::invalid_argument("transfer matrix must be square");
  const double scale = t.cwiseAbs().maxCoeff();
  const double asym = (t - t.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw std::invalid_argument("transfer matrix asymmetry beyond tolerance");
}

}  // namespace

Eigen::MatrixXd build_symmetric_transfer(const StripSpec& spec) {
  spec.validate();
  const int dim = spec.dim();
  Eigen::VectorXd half_diag(dim), field(dim);
  for (int s = 0; s < dim; ++s) {
    half_diag[s] = 0.5 * spec.beta * column_energy(static_cast<uint32_t>(s), spec.width,
                                                   spec.vertical) +
                   0.5 * spec.big_h * column_field(static_cast<uint32_t>(s), spec.width);
  }
  Eigen::MatrixXd t(dim, dim);
  for (int s = 0; s < dim; ++s) {
    for (int sp = 0; sp < dim; ++sp) {
      double coupling = 0.0;
      for (int w = 0; w < spec.width; ++w) {
        double a = (s >> w) & 1 ? 1.0 : -1.0;
        double b = (sp >> w) & 1 ? 1.0 : -1.0;
        coupling += a * b;
      }
      t(s, sp) = std::exp(spec.beta * coupling + half_diag[s] + half_diag[sp]);
    }
  }
  return t;
}

Spectrum spectrum(const Eigen::MatrixXd& t) {
  require_symmetric(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const int dim = static_cast<int>(t.rows());
  Spectrum spec;
  spec.eigenvalues.resize(dim);
  spec.vectors.resize(dim, dim);
  // Eigen returns ascending order; flip to descending
  for (int i = 0; i < dim; ++i) {
    spec.eigenvalues[i] = solver.eigenvalues()[dim - 1 - i];
    spec.vectors.col(i) = solver.eigenvectors().col(dim - 1 - i);
  }
  // deterministic signs: top vector entrywise positive, others first
  // nonzero component positive
  for (int i = 0; i < dim; ++i) {
    double pick = 0.0;
    for (int r = 0; r < dim; ++r) {
      if (std::abs(spec.vectors(r, i)) > 1e-14) {
        pick = spec.vectors(r, i);
        break;
      }
    }
    if (pick < 0) spec.vectors.col(i) *= -1.0;
  }
  return spec;
}

double mass_gap(const StripSpec& spec) {
  auto t = build_symmetric_transfer(spec);
  require_symmetric(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const int dim = static_cast<int>(t.rows());
  const double l1 = solver.eigenvalues()[dim - 1], l2 = solver.eigenvalues()[dim - 2];
  if (!(l1 > 0) || l2 / l1 > 1.0 - 1e-14)
    throw std::runtime_error("degenerate leading eigenvalues; gap not resolved");
  return std::log(l1 / l2);
}

PsdCheck check_reflection_positivity(const Eigen::MatrixXd& t) {
  auto s = spectrum(t);
  PsdCheck check;
  check.lambda1 = s.eigenvalues[0];
  check.min_eig_t = s.eigenvalues[s.eigenvalues.size() - 1];
  Eigen::MatrixXd deflated = t - check.lambda1 * s.top() * s.top().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated);
  check.min_eig_t_minus_p1 = solver.eigenvalues().minCoeff();
  return check;
}

std::vector<double> column_covariance_decay(const StripSpec& spec, const Eigen::VectorXd& f,
                                            const Eigen::VectorXd& g,
                                            const std::vector<int>& k_list) {
  spec.validate();
  const int dim = spec.dim();
  if (f.size() != dim || g.size() != dim)
    throw std::invalid_argument("observables must have dimension 2^W");
  for (int k : k_list)
    if (k < 0) throw std::invalid_argument("separations must be >= 0");

  auto s = spectrum(build_symmetric_transfer(spec));
  const double l1 = s.eigenvalues[0];
  // stationary weights v1(s)^2; coefficients a_i = sum_s F(s) v1(s) v_i(s)
  Eigen::VectorXd fv = f.cwiseProduct(s.top());
  Eigen::VectorXd gv = g.cwiseProduct(s.top());
  Eigen::VectorXd a = s.vectors.transpose() * fv;
  Eigen::VectorXd b = s.vectors.transpose() * gv;

  std::vector<double> out;
  out.reserve(k_list.size());
  for (int k : k_list) {
    double acc = 0.0;
    for (int i = 1; i < dim; ++i)
      acc += a[i] * b[i] * std::pow(s.eigenvalues[i] / l1, k);
    out.push_back(acc);
  }
  return out;
}

Eigen::VectorXd column_magnetization(int width) {
  Eigen::VectorXd f(1 << width);
  for (int s = 0; s < (1 << width); ++s) f[s] = column_field(static_cast<uint32_t>(s), width);
  return f;
}

std::vector<TmScanRow> tm_mass_scan(int width, double beta, const std::vector<double>& h_grid,
                                    VerticalBoundary vertical) {
  std::vector<TmScanRow> rows;
  for (double h : h_grid) {
    StripSpec spec(width, beta, h, vertical);
    auto t = build_symmetric_transfer(spec);
    auto s = spectrum(t);
    auto psd = check_reflection_positivity(t);
    TmScanRow row;
    row.width = width;
    row.big_h = h;
    row.lambda1 = s.eigenvalues[0];
    row.lambda2 = s.eigenvalues[1];
    row.gap = std::log(row.lambda1 / row.lambda2);
    row.min_eig_t = psd.min_eig_t;
    row.min_eig_t_minus_p1 = psd.min_eig_t_minus_p1;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fkghost
