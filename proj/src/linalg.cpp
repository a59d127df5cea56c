#include "duo/linalg.hpp"

#include <limits>

namespace duo::linalg {

Eigen::MatrixXd inverse(const Eigen::MatrixXd& m, double* condition) {
  if (condition != nullptr) *condition = condition_number(m);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m).inverse();
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double relative_min_singular_value(const Eigen::MatrixXd& rows) {
  if (rows.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const auto& s = svd.singularValues();
  // Fewer singular values than rows means the rows cannot be independent.
  if (s.size() < rows.rows() || s(0) <= 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  Eigen::VectorXd out(n * n);
  Eigen::Index pos = 0;
  for (Eigen::Index j = 0; j < n; ++j) out(pos++) = h(j, j).real();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      out(pos++) = h(j, k).real();
      out(pos++) = h(j, k).imag();
    }
  }
  return out;
}

bool is_hermitian(const Eigen::MatrixXcd& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Eigen::MatrixXcd tensor(std::span<const Eigen::MatrixXcd> factors) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& f : factors) out = kron(f, out);
  return out;
}

Eigen::VectorXd tensor(std::span<const Eigen::VectorXd> factors) {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (const auto& f : factors) out = kron(f, out);
  return out;
}

}  // namespace duo::linalg
