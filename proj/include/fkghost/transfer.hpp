#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace fkghost {

enum class VerticalBoundary : uint8_t { Free = 0, Periodic = 1 };

struct StripSpec {
  int width = 1;  // sites per column, 1..14
  VerticalBoundary vertical = VerticalBoundary::Free;
  double beta;
  double big_h = 0.0;

  StripSpec();
  StripSpec(int width_, double beta_, double big_h_,
            VerticalBoundary vertical_ = VerticalBoundary::Free);
  void validate() const;
  int dim() const { return 1 << width; }
};

// Symmetric splitting: half the intra-column energy and half the field on
// each side, so T(s,s') = exp(beta sum_w s_w s'_w + beta/2 (E(s)+E(s'))
// + H/2 sum_w (s_w + s'_w)).
Eigen::MatrixXd build_symmetric_transfer(const StripSpec& spec);

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXd vectors;      // columns aligned with eigenvalues
  const Eigen::VectorXd top() const { return vectors.col(0); }
};

Spectrum spectrum(const Eigen::MatrixXd& t);

// ln(lambda1 / lambda2); the strip analog of the axial mass.
double mass_gap(const StripSpec& spec);

struct PsdCheck {
  double min_eig_t = 0.0;
  double min_eig_t_minus_p1 = 0.0;
  double lambda1 = 0.0;
};

// Minimum eigenvalues of T and of T - lambda1 v1 v1^T.
PsdCheck check_reflection_positivity(const Eigen::MatrixXd& t);

// Cov(F(X_0), G(X_k)) for the stationary column chain, spectrally.
std::vector<double> column_covariance_decay(const StripSpec& spec, const Eigen::VectorXd& f,
                                            const Eigen::VectorXd& g,
                                            const std::vector<int>& k_list);

// Per-column magnetization observable sum_w s_w.
Eigen::VectorXd column_magnetization(int width);

struct TmScanRow {
  int width = 0;
  double big_h = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  double min_eig_t = 0.0;
  double min_eig_t_minus_p1 = 0.0;
};

std::vector<TmScanRow> tm_mass_scan(int width, double beta, const std::vector<double>& h_grid,
                                    VerticalBoundary vertical = VerticalBoundary::Free);

}  // namespace fkghost
