#include "step_system.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tpf::detail {

namespace {
using Eigen::Index;
using Stride3 = Eigen::InnerStride<Eigen::Dynamic>;
}  // namespace

Eigen::VectorXd interleave(const Field& mu, const Field& phi, const Field& sigma) {
  const Index m = mu.size();
  Eigen::VectorXd y(3 * m);
  for (Index i = 0; i < m; ++i) {
    y[3 * i] = mu[i];
    y[3 * i + 1] = phi[i];
    y[3 * i + 2] = sigma[i];
  }
  return y;
}

Field component(const Eigen::VectorXd& y, int comp) {
  return Eigen::Map<const Eigen::VectorXd, 0, Stride3>(y.data() + comp, y.size() / 3, Stride3(3));
}

StepSystem::StepSystem(const Grid& grid, const ModelParams& params,
                       const SchemePotential& potential, const NonlinearitySpec& nonlin,
                       const RadauTableau& tableau, double dt)
    : grid_(grid),
      params_(params),
      potential_(potential),
      nonlin_(nonlin),
      tab_(tableau),
      dt_(dt),
      s_(tableau.stages),
      m_(static_cast<Index>(grid.size())) {}

Field StepSystem::stage_field(const Eigen::VectorXd& Z, int stage, int comp) const {
  return Eigen::Map<const Eigen::VectorXd, 0, Stride3>(Z.data() + stage * 3 + comp, m_,
                                                       Stride3(3 * s_));
}

void StepSystem::set_stage_field(Eigen::VectorXd& Z, int stage, int comp, const Field& v) const {
  Eigen::Map<Eigen::VectorXd, 0, Stride3>(Z.data() + stage * 3 + comp, m_, Stride3(3 * s_)) = v;
}

Eigen::VectorXd StepSystem::replicate(const Eigen::VectorXd& y) const {
  Eigen::VectorXd Z(size());
  for (Index i = 0; i < m_; ++i)
    for (int j = 0; j < s_; ++j) Z.segment<3>(index(i, j, 0)) = y.segment<3>(3 * i);
  return Z;
}

Eigen::VectorXd StepSystem::last_stage(const Eigen::VectorXd& Z) const {
  Eigen::VectorXd y(3 * m_);
  for (Index i = 0; i < m_; ++i) y.segment<3>(3 * i) = Z.segment<3>(index(i, s_ - 1, 0));
  return y;
}

Eigen::VectorXd StepSystem::mass_apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd r(y.size());
  for (Index i = 0; i < y.size() / 3; ++i) {
    r[3 * i] = params_.alpha * y[3 * i] + y[3 * i + 1];
    r[3 * i + 1] = params_.beta * y[3 * i + 1];
    r[3 * i + 2] = y[3 * i + 2];
  }
  return r;
}

Eigen::VectorXd StepSystem::mass_transpose_apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd r(y.size());
  for (Index i = 0; i < y.size() / 3; ++i) {
    r[3 * i] = params_.alpha * y[3 * i];
    r[3 * i + 1] = y[3 * i] + params_.beta * y[3 * i + 1];
    r[3 * i + 2] = y[3 * i + 2];
  }
  return r;
}

StageCoefficients StepSystem::coefficients(const Eigen::VectorXd& Z, int stage) const {
  StageCoefficients c;
  c.mu = stage_field(Z, stage, 0);
  c.phi = stage_field(Z, stage, 1);
  c.sigma = stage_field(Z, stage, 2);
  const double chi = params_.chi;
  c.E = c.sigma.array() + chi * (1.0 - c.phi.array()) - c.mu.array();
  c.P.resize(m_);
  c.dP.resize(m_);
  c.ddP.resize(m_);
  c.h.resize(m_);
  c.dh.resize(m_);
  c.ddh.resize(m_);
  c.dF2.resize(m_);
  c.dF3.resize(m_);
  for (Index i = 0; i < m_; ++i) {
    const double r = c.phi[i];
    c.P[i] = nonlin_.P.eval(r, 0);
    c.dP[i] = nonlin_.P.eval(r, 1);
    c.ddP[i] = nonlin_.P.eval(r, 2);
    c.h[i] = nonlin_.h.eval(r, 0);
    c.dh[i] = nonlin_.h.eval(r, 1);
    c.ddh[i] = nonlin_.h.eval(r, 2);
    c.dF2[i] = potential_.derivative(r, 2);
    c.dF3[i] = potential_.derivative(r, 3);
  }
  return c;
}

void StepSystem::residual(const Eigen::VectorXd& Z, const Eigen::VectorXd& y_prev,
                          const Field& u1, const Field& u2, Eigen::VectorXd& G,
                          double* scale) const {
  const double chi = params_.chi;

  // f at every stage, stored with the stage layout. Fabs holds the sum of the
  // magnitudes of the terms of f, used to scale the convergence test.
  Eigen::VectorXd F(size());
  Eigen::VectorXd Fabs(scale ? size() : 0);
  for (int j = 0; j < s_; ++j) {
    const Field mu = stage_field(Z, j, 0);
    const Field phi = stage_field(Z, j, 1);
    const Field sigma = stage_field(Z, j, 2);
    const Field Lmu = grid_.apply_laplacian(mu);
    const Field Lphi = grid_.apply_laplacian(phi);
    const Field Lsigma = grid_.apply_laplacian(sigma);
    for (Index i = 0; i < m_; ++i) {
      const double r = phi[i];
      const double P = nonlin_.P.eval(r, 0);
      const double E = sigma[i] + chi * (1.0 - r) - mu[i];
      const double PE = P * E;
      const double hu = nonlin_.h.eval(r, 0) * u1[i];
      const double dF = potential_.derivative(r, 1);
      F[index(i, j, 0)] = Lmu[i] + PE - hu;
      F[index(i, j, 1)] = Lphi[i] - dF + mu[i] + chi * sigma[i];
      F[index(i, j, 2)] = Lsigma[i] - chi * Lphi[i] - PE + u2[i];
      if (scale) {
        Fabs[index(i, j, 0)] = std::abs(Lmu[i]) + std::abs(PE) + std::abs(hu);
        Fabs[index(i, j, 1)] =
            std::abs(Lphi[i]) + std::abs(dF) + std::abs(mu[i]) + chi * std::abs(sigma[i]);
        Fabs[index(i, j, 2)] =
            std::abs(Lsigma[i]) + chi * std::abs(Lphi[i]) + std::abs(PE) + std::abs(u2[i]);
      }
    }
  }

  G.resize(size());
  const auto& a = tab_.a;
  const double alpha = params_.alpha, beta = params_.beta;
  double sc = 0.0;
  for (Index i = 0; i < m_; ++i) {
    const Eigen::Vector3d yp = y_prev.segment<3>(3 * i);
    for (int st = 0; st < s_; ++st) {
      const Eigen::Vector3d z = Z.segment<3>(index(i, st, 0));
      const Eigen::Vector3d d = z - yp;
      Eigen::Vector3d g(alpha * d[0] + d[1], beta * d[1], d[2]);
      for (int j = 0; j < s_; ++j) g -= dt_ * a(st, j) * F.segment<3>(index(i, j, 0));
      G.segment<3>(index(i, st, 0)) = g;
      if (scale) {
        Eigen::Vector3d m(alpha * std::abs(z[0]) + std::abs(z[1]) + alpha * std::abs(yp[0]) +
                              std::abs(yp[1]),
                          beta * (std::abs(z[1]) + std::abs(yp[1])),
                          std::abs(z[2]) + std::abs(yp[2]));
        for (int j = 0; j < s_; ++j)
          m += dt_ * std::abs(a(st, j)) * Fabs.segment<3>(index(i, j, 0));
        sc = std::max(sc, m.maxCoeff());
      }
    }
  }
  if (scale) *scale = sc;
}

Eigen::SparseMatrix<double> StepSystem::jacobian(const Eigen::VectorXd& Z, const Field& u1,
                                                 bool coupled) const {
  const auto& L = grid_.laplacian();
  const double chi = params_.chi;
  const auto& a = tab_.a;

  // Local (non-Laplacian) part of df/dy at every stage and node.
  std::vector<Eigen::Matrix3d> local(static_cast<std::size_t>(s_ * m_));
  for (int j = 0; j < s_; ++j) {
    const Field mu = stage_field(Z, j, 0);
    const Field phi = stage_field(Z, j, 1);
    const Field sigma = stage_field(Z, j, 2);
    for (Index i = 0; i < m_; ++i) {
      Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
      J(1, 0) = 1.0;
      if (coupled) {
        const double r = phi[i];
        const double P = nonlin_.P.eval(r, 0);
        const double dP = nonlin_.P.eval(r, 1);
        const double E = sigma[i] + chi * (1.0 - r) - mu[i];
        const double dh = nonlin_.h.eval(r, 1);
        J(0, 0) = -P;
        J(0, 1) = dP * E - chi * P - dh * u1[i];
        J(0, 2) = P;
        J(1, 1) = -potential_.derivative(r, 2);
        J(1, 2) = chi;
        J(2, 0) = P;
        J(2, 1) = -dP * E + chi * P;
        J(2, 2) = -P;
      }
      local[static_cast<std::size_t>(j * m_ + i)] = J;
    }
  }

  Eigen::Matrix3d mass;
  mass << params_.alpha, 1.0, 0.0, 0.0, params_.beta, 0.0, 0.0, 0.0, 1.0;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(s_ * s_) * (9 + 4 * L.nonZeros() / m_) *
                static_cast<std::size_t>(m_));
  for (Index node = 0; node < m_; ++node) {
    for (int st = 0; st < s_; ++st) {
      for (int j = 0; j < s_; ++j) {
        const double w = dt_ * a(st, j);
        Eigen::Matrix3d B = -w * local[static_cast<std::size_t>(j * m_ + node)];
        if (st == j) B += mass;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(index(node, st, r), index(node, j, c), B(r, c));
      }
    }
  }
  // Laplacian part: -dt a_{st,j} L(row, col) [[1,0,0],[0,1,0],[0,-chi,1]].
  for (Index col = 0; col < L.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, col); it; ++it) {
      const Index row = it.row();
      const double l = it.value();
      for (int st = 0; st < s_; ++st) {
        for (int j = 0; j < s_; ++j) {
          const double w = -dt_ * a(st, j) * l;
          trips.emplace_back(index(row, st, 0), index(col, j, 0), w);
          trips.emplace_back(index(row, st, 1), index(col, j, 1), w);
          trips.emplace_back(index(row, st, 2), index(col, j, 2), w);
          trips.emplace_back(index(row, st, 2), index(col, j, 1), -chi * w);
        }
      }
    }
  }

  Eigen::SparseMatrix<double> A(size(), size());
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

Eigen::VectorXd StepSystem::stage_rhs(const Eigen::VectorXd& y_prev,
                                      const Eigen::VectorXd& sources) const {
  const Eigen::VectorXd My = mass_apply(y_prev);
  Eigen::VectorXd rhs(size());
  const auto& a = tab_.a;
  for (Index i = 0; i < m_; ++i) {
    for (int st = 0; st < s_; ++st) {
      Eigen::Vector3d g = My.segment<3>(3 * i);
      for (int j = 0; j < s_; ++j) g += dt_ * a(st, j) * sources.segment<3>(index(i, j, 0));
      rhs.segment<3>(index(i, st, 0)) = g;
    }
  }
  return rhs;
}

bool StepSystem::phi_inside(const Eigen::VectorXd& Z, double lower, double upper) const {
  for (Index i = 0; i < m_; ++i)
    for (int j = 0; j < s_; ++j) {
      const double r = Z[index(i, j, 1)];
      if (!(r > lower && r < upper)) return false;
    }
  return true;
}

}  // namespace tpf::detail
