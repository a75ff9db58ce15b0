#include "jpsa/autorule.hpp"

#include "jpsa/io_formats.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace jpsa {

namespace {

// Every solved system carries this extra ridge; mu I already regularizes.
constexpr double kSolveRidge = 1e-10;

// Solves (A + ridge I) Z = B for symmetric positive definite A.
Matrix spd_solve(Matrix a, const Matrix& b, const char* what) {
  a.diagonal().array() += kSolveRidge;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Matrix> ldlt(a);
    throw NumericalError(std::string(what) + ": system is not positive definite (rcond estimate " +
                         io::format_real(ldlt.rcond()) + ")");
  }
  return llt.solve(b);
}

void check_shapes(const AdmmState& st, const Matrix& x) {
  const auto d_out = st.theta.rows();
  const auto d_in = st.theta.cols();
  if (x.rows() != d_in) throw InputError("admm: input has " + std::to_string(x.rows()) + " rows, theta expects " +
                                         std::to_string(d_in));
  const auto n = x.cols();
  auto expect = [&](const Matrix& m, Eigen::Index r, Eigen::Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw InputError(std::string("admm: ") + name + " is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" + std::to_string(c));
    }
  };
  expect(st.h, d_out, n, "H");
  expect(st.q, d_out, n, "Q");
  expect(st.s, d_out, n, "S");
  expect(st.g, d_out, d_in, "G");
  expect(st.lambda1, d_out, n, "Lambda1");
  expect(st.lambda2, d_out, d_in, "Lambda2");
  expect(st.lambda3, d_out, n, "Lambda3");
  expect(st.lambda4, d_out, n, "Lambda4");
  if (!(st.mu > 0)) throw InputError("admm: penalty mu must be > 0");
}

}  // namespace

AdmmState AdmmState::initial(const Matrix& theta0, const Matrix& x, double mu0) {
  if (theta0.cols() != x.rows()) throw InputError("admm: theta0 columns must equal input rows");
  const auto d_out = theta0.rows();
  const auto d_in = theta0.cols();
  const auto n = x.cols();
  AdmmState st;
  st.theta = theta0;
  st.h = theta0 * x;
  st.g = Matrix::Zero(d_out, d_in);
  st.q = Matrix::Zero(d_out, n);
  st.s = Matrix::Zero(d_out, n);
  st.lambda1 = Matrix::Zero(d_out, n);
  st.lambda2 = Matrix::Zero(d_out, d_in);
  st.lambda3 = Matrix::Zero(d_out, n);
  st.lambda4 = Matrix::Zero(d_out, n);
  st.mu = mu0;
  return st;
}

LayerGrams LayerGrams::compute(const Matrix& x, const SparseMatrix& lf) {
  if (lf.rows() != x.cols() || lf.cols() != x.cols()) {
    throw InputError("layer grams: Laplacian is " + std::to_string(lf.rows()) + "x" + std::to_string(lf.cols()) +
                     " but the input has " + std::to_string(x.cols()) + " columns");
  }
  LayerGrams g;
  g.xxt = x * x.transpose();
  const Matrix xl = (lf.transpose() * x.transpose()).transpose();  // X L, L symmetric
  g.xlxt = xl * x.transpose();
  g.xlxt = 0.5 * (g.xlxt + g.xlxt.transpose()).eval();
  return g;
}

Matrix prox_nonneg(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix prox_unit_ball(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double nrm = out.col(k).norm();
    if (nrm > 1.0) out.col(k) /= nrm;
  }
  return out;
}

Matrix update_theta(const AdmmState& st, const Matrix& x, const LayerGrams& grams, double eta) {
  check_shapes(st, x);
  const double mu = st.mu;
  const Matrix numer = (mu * (st.h + st.q + st.s) + st.lambda1 + st.lambda3 + st.lambda4) * x.transpose() +
                       mu * st.g + st.lambda2;
  Matrix denom = eta * grams.xlxt + 3.0 * mu * grams.xxt;
  denom.diagonal().array() += mu;
  // theta * denom = numer, denom symmetric.
  return spd_solve(denom, numer.transpose(), "update_theta").transpose();
}

Matrix update_theta(const AdmmState& st, const Matrix& x, const SparseMatrix& lf, double eta) {
  return update_theta(st, x, LayerGrams::compute(x, lf), eta);
}

Matrix update_h_pretrain(const AdmmState& st, const Matrix& x) {
  check_shapes(st, x);
  Matrix lhs = st.g * st.g.transpose();
  lhs.diagonal().array() += st.mu;
  const Matrix rhs = st.g * x + st.mu * (st.theta * x) - st.lambda1;
  return spd_solve(lhs, rhs, "update_h");
}

Matrix update_g(const AdmmState& st, const Matrix& x) {
  check_shapes(st, x);
  Matrix lhs = st.h * st.h.transpose();
  lhs.diagonal().array() += st.mu;
  const Matrix rhs = st.h * x.transpose() + st.mu * st.theta - st.lambda2;
  return spd_solve(lhs, rhs, "update_g");
}

Matrix update_q(const AdmmState& st, const Matrix& x) {
  check_shapes(st, x);
  return prox_nonneg(st.theta * x - st.lambda3 / st.mu);
}

Matrix update_s(const AdmmState& st, const Matrix& x) {
  check_shapes(st, x);
  return prox_unit_ball(st.theta * x - st.lambda4 / st.mu);
}

Multipliers update_multipliers(const AdmmState& st, const Matrix& x) {
  check_shapes(st, x);
  const Matrix tx = st.theta * x;
  return {st.lambda1 + st.mu * (st.h - tx), st.lambda2 + st.mu * (st.g - st.theta),
          st.lambda3 + st.mu * (st.q - tx), st.lambda4 + st.mu * (st.s - tx)};
}

std::string AutoRuleReport::to_csv() const {
  std::string out = "iter,r_H,r_G,r_Q,r_S,mu,objective\n";
  for (const auto& row : trace) {
    out += std::to_string(row.iter) + "," + io::format_real(row.r_h) + "," + io::format_real(row.r_g) + "," +
           io::format_real(row.r_q) + "," + io::format_real(row.r_s) + "," + io::format_real(row.mu) + "," +
           io::format_real(row.objective) + "\n";
  }
  return out;
}

double autorule_objective(const Matrix& theta, const Matrix& x, const LayerGrams& grams, double eta) {
  const Matrix recon = x - theta.transpose() * (theta * x);
  return 0.5 * recon.squaredNorm() + 0.5 * eta * (theta * grams.xlxt * theta.transpose()).trace();
}

AutoRuleResult solve_layer_admm(const Matrix& x, const LayerGrams& grams, const Matrix& theta0, double graph_weight,
                                const AdmmConfig& cfg, const HUpdate& h_update, const LayerObjective& objective) {
  cfg.validate();
  if (!(graph_weight >= 0)) throw InputError("admm: graph weight must be nonnegative");
  if (!theta0.allFinite()) throw NumericalError("admm: theta0 has non-finite entries");

  AutoRuleResult result;
  AdmmState st = AdmmState::initial(theta0, x, cfg.mu0);
  auto& rep = result.report;
  for (int t = 0; t < cfg.max_iters; ++t) {
    st.theta = update_theta(st, x, grams, graph_weight);
    st.h = h_update(st, x);
    st.g = update_g(st, x);
    st.q = update_q(st, x);
    st.s = update_s(st, x);
    auto mult = update_multipliers(st, x);
    st.lambda1 = std::move(mult.lambda1);
    st.lambda2 = std::move(mult.lambda2);
    st.lambda3 = std::move(mult.lambda3);
    st.lambda4 = std::move(mult.lambda4);

    const Matrix tx = st.theta * x;
    AdmmTraceRow row;
    row.iter = t + 1;
    row.r_h = (st.h - tx).norm();
    row.r_g = (st.g - st.theta).norm();
    row.r_q = (st.q - tx).norm();
    row.r_s = (st.s - tx).norm();
    row.mu = st.mu;
    row.objective = objective ? objective(st.theta) : 0.0;
    const bool finite = st.theta.allFinite() && st.h.allFinite() && st.g.allFinite() && st.lambda1.allFinite() &&
                        st.lambda2.allFinite() && st.lambda3.allFinite() && st.lambda4.allFinite() &&
                        std::isfinite(row.objective);
    if (!finite) throw NumericalError("admm: non-finite value at iteration " + std::to_string(t + 1));
    rep.trace.push_back(row);
    rep.iterations = t + 1;
    rep.r_h = row.r_h;
    rep.r_g = row.r_g;
    rep.r_q = row.r_q;
    rep.r_s = row.r_s;

    st.mu = std::min(cfg.rho * st.mu, cfg.mu_max);
    if (row.r_h < cfg.eps && row.r_g < cfg.eps && row.r_q < cfg.eps && row.r_s < cfg.eps) {
      rep.converged = true;
      break;
    }
  }
  result.theta = st.theta;
  result.state = std::move(st);
  return result;
}

AutoRuleResult autorule_fit(const Matrix& x, const SparseMatrix& lf, const Matrix& theta0, double eta,
                            const AdmmConfig& cfg) {
  if (theta0.cols() != x.rows()) {
    throw InputError("autorule_fit: theta0 is " + std::to_string(theta0.rows()) + "x" + std::to_string(theta0.cols()) +
                     " but the input dimension is " + std::to_string(x.rows()));
  }
  const LayerGrams grams = LayerGrams::compute(x, lf);
  return solve_layer_admm(
      x, grams, theta0, eta, cfg, [](const AdmmState& st, const Matrix& xin) { return update_h_pretrain(st, xin); },
      [&](const Matrix& theta) { return autorule_objective(theta, x, grams, eta); });
}

}  // namespace jpsa
