#include "koopcheck/excitability.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

#include "koopcheck/error.hpp"

namespace koopcheck {

namespace {

// Bracket values below this norm carry no rank but stay available as fields
// (their deeper brackets may be nonzero).
constexpr double kBracketValueFloor = 1e-6;
constexpr int kMaxBracketDepth = 4;

int svd_rank(const Eigen::MatrixXd& a, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) ++rank;
  }
  return rank;
}

double orthogonal_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& w) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
  return (w - q * (q.transpose() * w)).norm();
}

}  // namespace

nlohmann::json ExcitabilityCertificate::to_json() const {
  nlohmann::json witness_list = nlohmann::json::array();
  for (const auto& w : witnesses) {
    witness_list.push_back(
        {{"column", w.column},
         {"parent", w.parent},
         {"point", std::vector<double>(w.point.data(), w.point.data() + w.point.size())}});
  }
  std::vector<double> basis_row_major;
  basis_row_major.reserve(basis.size());
  for (int r = 0; r < basis.rows(); ++r) {
    for (int c = 0; c < basis.cols(); ++c) basis_row_major.push_back(basis(r, c));
  }
  return {{"rows", basis.rows()},      {"cols", basis.cols()},
          {"basis", basis_row_major},  {"rank", rank},
          {"excitable", excitable},    {"tolerance", tolerance},
          {"seed", seed},              {"witnesses", witness_list}};
}

ExcitabilityCertificate excitability_basis(const ControlAffineSystem& sys, const Box& box,
                                           std::uint64_t seed, double tol, int budget) {
  box.validate();
  const int n = sys.state_dim();
  if (box.dim() != n) {
    throw InvalidArgumentError("excitability_basis: box dimension mismatch");
  }
  if (budget <= 0) budget = 100 * n;

  ExcitabilityCertificate cert;
  cert.tolerance = tol;
  cert.seed = seed;
  cert.basis = sys.input_matrix();

  const CounterRng rng(seed);
  std::uint64_t round = 0;
  int rejected_rounds = 0;
  while (cert.basis.cols() < n && rejected_rounds < budget) {
    const Eigen::VectorXd x = box.sample(rng, round * static_cast<std::uint64_t>(n));
    ++round;
    const Eigen::MatrixXd jac = sys.jacobian(x);
    bool accepted = false;
    // The column list grows while we scan it, so images of freshly accepted
    // columns are tried within the same round.
    for (int c = 0; c < cert.basis.cols() && cert.basis.cols() < n; ++c) {
      const Eigen::VectorXd w = jac * cert.basis.col(c);
      if (orthogonal_residual(cert.basis, w) > tol * w.norm()) {
        cert.basis.conservativeResize(Eigen::NoChange, cert.basis.cols() + 1);
        cert.basis.col(cert.basis.cols() - 1) = w;
        cert.witnesses.push_back({static_cast<int>(cert.basis.cols()) - 1, c, x});
        accepted = true;
      }
    }
    rejected_rounds = accepted ? 0 : rejected_rounds + 1;
  }

  cert.rank = svd_rank(cert.basis, tol);
  cert.excitable = (cert.rank == n);
  return cert;
}

int kalman_rank(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G, double tol) {
  const auto n = F.rows();
  if (F.cols() != n || G.rows() != n || G.cols() < 1) {
    throw InvalidArgumentError("kalman_rank: dimension mismatch between F and G");
  }
  const auto m = G.cols();
  Eigen::MatrixXd ctrb(n, n * m);
  Eigen::MatrixXd block = G;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * m, m) = block;
    block = F * block;
  }
  return svd_rank(ctrb, tol);
}

Eigen::VectorXd lie_bracket(const VectorField& a, const VectorField& b,
                            const Eigen::VectorXd& x, double step_scale) {
  const Eigen::MatrixXd jb = fd_jacobian(b, x, step_scale);
  const Eigen::MatrixXd ja = fd_jacobian(a, x, step_scale);
  const Eigen::VectorXd va = a(x);
  const Eigen::VectorXd vb = b(x);
  if (!va.allFinite() || !vb.allFinite()) {
    throw EvaluationError("lie_bracket: non-finite field value");
  }
  return jb * va - ja * vb;
}

int larc_dimension(const ControlAffineSystem& sys, const Eigen::VectorXd& x0, int max_depth,
                   double tol) {
  if (max_depth < 1) throw InvalidArgumentError("larc_dimension requires max_depth >= 1");
  if (max_depth > kMaxBracketDepth) {
    throw DepthLimitError("larc_dimension: bracket nesting beyond depth " +
                          std::to_string(kMaxBracketDepth) + " is numerically unreliable");
  }
  const int n = sys.state_dim();
  if (x0.size() != n) throw InvalidArgumentError("larc_dimension: anchor has wrong dimension");

  struct Field {
    VectorField eval;
    int depth = 0;
    bool constant = false;  // brackets of two constant fields vanish
  };
  std::vector<Field> fields;
  fields.push_back({[&sys](const Eigen::VectorXd& y) { return sys.drift(y); }, 0, false});
  for (int j = 0; j < sys.input_dim(); ++j) {
    const Eigen::VectorXd g = sys.input_matrix().col(j);
    fields.push_back({[g](const Eigen::VectorXd&) { return g; }, 0, true});
  }

  std::vector<Eigen::VectorXd> values;
  auto collect = [&](const Eigen::VectorXd& v) {
    if (v.norm() >= kBracketValueFloor) values.push_back(v);
  };
  for (const auto& field : fields) collect(field.eval(x0));

  auto current_rank = [&]() {
    if (values.empty()) return 0;
    Eigen::MatrixXd v(n, static_cast<int>(values.size()));
    for (size_t c = 0; c < values.size(); ++c) v.col(static_cast<int>(c)) = values[c];
    return svd_rank(v, tol);
  };

  int rank = current_rank();
  for (int depth = 1; depth <= max_depth && rank < n; ++depth) {
    // Half the significant digits are lost per nesting level; widen the step
    // accordingly.
    const double step = std::pow(std::numeric_limits<double>::epsilon(),
                                 1.0 / static_cast<double>(depth + 2));
    const size_t before = fields.size();
    for (size_t i = 0; i < before; ++i) {
      for (size_t j = i + 1; j < before; ++j) {
        if (std::max(fields[i].depth, fields[j].depth) != depth - 1) continue;
        if (fields[i].constant && fields[j].constant) continue;
        VectorField a = fields[i].eval;
        VectorField b = fields[j].eval;
        Field bracket{[a, b, step](const Eigen::VectorXd& y) {
                        return lie_bracket(a, b, y, step);
                      },
                      depth, false};
        collect(bracket.eval(x0));
        fields.push_back(std::move(bracket));
      }
    }
    rank = current_rank();
  }
  return rank;
}

}  // namespace koopcheck
