#include "lire/ot.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "lire/corpus_io.hpp"
#include "lire/errors.hpp"
#include "lire/rng.hpp"

namespace lire {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_matrix(const TokenMatrix& m) {
  return {m.data.data(), m.rows, m.cols};
}

void check_token_matrix(const TokenMatrix& m, const char* what) {
  if (m.rows < 1 || m.cols < 1) throw data_error(std::string(what) + ": empty token matrix");
}

template <class T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T read_le(std::istream& in, const std::string& path) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw data_error("truncated projection file: " + path);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

Eigen::MatrixXd cost_matrix(const TokenMatrix& teacher, const TokenMatrix& student) {
  check_token_matrix(teacher, "cost_matrix");
  check_token_matrix(student, "cost_matrix");
  if (teacher.cols != student.cols)
    throw data_error("cost_matrix: dimension mismatch (" + std::to_string(teacher.cols) +
                     " vs " + std::to_string(student.cols) + ")");
  Eigen::MatrixXd c =
      (1.0 - (as_matrix(teacher) * as_matrix(student).transpose()).array())
          .cwiseMax(0.0)
          .cwiseMin(2.0)
          .matrix();
  if (!c.allFinite()) throw data_error("cost_matrix: non-finite cost");
  return c;
}

TransportPlan sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b, double epsilon, int max_iter, double tol) {
  const auto m = cost.rows();
  const auto n = cost.cols();
  if (m < 1 || n < 1) throw data_error("sinkhorn: empty cost matrix");
  if (a.size() != m || b.size() != n)
    throw data_error("sinkhorn: marginal sizes do not match the cost matrix");
  if (!cost.allFinite()) throw data_error("sinkhorn: non-finite cost");
  if (!(a.array() > 0.0).all() || !(b.array() > 0.0).all())
    throw data_error("sinkhorn: marginals must be strictly positive");
  if (std::abs(a.sum() - 1.0) > 1e-9 || std::abs(b.sum() - 1.0) > 1e-9)
    throw data_error("sinkhorn: marginals must sum to 1");
  if (!(epsilon > 0.0)) throw config_error("sinkhorn: epsilon must be positive");
  if (!(tol > 0.0)) throw config_error("sinkhorn: tol must be positive");
  if (max_iter < 1) throw config_error("sinkhorn: max_iter must be >= 1");

  // std::exp per entry: Eigen's vectorized exp clamps huge-negative arguments
  // to the smallest normal instead of underflowing to zero, which would mask
  // the kernel-underflow condition below.
  Eigen::MatrixXd kernel =
      cost.unaryExpr([epsilon](double c) { return std::exp(-c / epsilon); });
  if ((kernel.rowwise().sum().array() == 0.0).any() ||
      (kernel.colwise().sum().array() == 0.0).any())
    throw numeric_error("sinkhorn: kernel underflow at epsilon " + std::to_string(epsilon) +
                        "; use a larger epsilon");

  Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  // Row/col sums of P = diag(u) K diag(v) are u.*(Kv) and v.*(K'u), so the
  // violation check needs no explicit plan; Kv is shared with the next update.
  Eigen::VectorXd kv = kernel * v;
  Eigen::VectorXd ktu(n);
  double violation = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    u = a.array() / kv.array();
    ktu.noalias() = kernel.transpose() * u;
    v = b.array() / ktu.array();
    if (!u.allFinite() || !v.allFinite())
      throw numeric_error("sinkhorn: scaling overflow at epsilon " + std::to_string(epsilon) +
                          "; use a larger epsilon");
    kv.noalias() = kernel * v;
    violation = std::max((u.array() * kv.array() - a.array()).abs().maxCoeff(),
                         (v.array() * ktu.array() - b.array()).abs().maxCoeff());
    if (violation <= tol) {
      TransportPlan result;
      result.plan = u.asDiagonal() * kernel * v.asDiagonal();
      result.row_marginal = a;
      result.col_marginal = b;
      result.epsilon = epsilon;
      result.iterations = it;
      return result;
    }
  }
  throw numeric_error("sinkhorn: no convergence after " + std::to_string(max_iter) +
                      " iterations (marginal violation " + std::to_string(violation) + ")");
}

// Alignment cost matrices at small epsilon sometimes need a few tens of
// thousands of scaling rounds; iterations are cheap, so give the internal
// solver a far larger budget than the bare API default before declaring
// non-convergence.
constexpr int kAlignmentIterBudget = 1000000;

AlignmentResult alignment_loss(const TokenMatrix& teacher,
                               const TokenMatrix& student_projected, double epsilon) {
  Eigen::MatrixXd cost = cost_matrix(teacher, student_projected);
  Eigen::VectorXd a = Eigen::VectorXd::Constant(teacher.rows, 1.0 / teacher.rows);
  Eigen::VectorXd b =
      Eigen::VectorXd::Constant(student_projected.rows, 1.0 / student_projected.rows);
  AlignmentResult result;
  result.plan = sinkhorn(cost, a, b, epsilon, kAlignmentIterBudget);
  result.loss = (result.plan.plan.array() * cost.array()).sum();
  return result;
}

TokenMatrix apply_projection(const TokenMatrix& raw, const Eigen::MatrixXd& W) {
  check_token_matrix(raw, "apply_projection");
  if (W.rows() != W.cols() || W.rows() != raw.cols)
    throw data_error("apply_projection: projection must be " + std::to_string(raw.cols) + "x" +
                     std::to_string(raw.cols));
  Eigen::MatrixXd y = as_matrix(raw) * W;
  TokenMatrix out;
  out.rows = raw.rows;
  out.cols = raw.cols;
  out.data.resize(raw.data.size());
  for (int r = 0; r < raw.rows; ++r) {
    double norm = y.row(r).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw numeric_error("apply_projection: degenerate norm for projected row " +
                          std::to_string(r));
    for (int c = 0; c < raw.cols; ++c)
      out.data[static_cast<size_t>(r) * raw.cols + c] = y(r, c) / norm;
  }
  return out;
}

Eigen::MatrixXd projection_grad(const TokenMatrix& teacher, const TokenMatrix& raw_student,
                                const Eigen::MatrixXd& W, const Eigen::MatrixXd& plan) {
  check_token_matrix(teacher, "projection_grad");
  check_token_matrix(raw_student, "projection_grad");
  if (teacher.cols != raw_student.cols || W.rows() != W.cols() || W.rows() != raw_student.cols)
    throw data_error("projection_grad: dimension mismatch");
  if (plan.rows() != teacher.rows || plan.cols() != raw_student.rows)
    throw data_error("projection_grad: plan shape does not match the token counts");

  auto teacher_m = as_matrix(teacher);
  auto raw = as_matrix(raw_student);
  Eigen::MatrixXd y = raw * W;

  // dL/ds_hat with C = 1 - T s_hat': row j is -sum_i P[i][j] t_i
  Eigen::MatrixXd g_hat = -(plan.transpose() * teacher_m);

  // Pull back through the row normalization s_hat = y / |y|.
  Eigen::MatrixXd g_y(raw_student.rows, raw_student.cols);
  for (int j = 0; j < raw_student.rows; ++j) {
    double norm = y.row(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw numeric_error("projection_grad: degenerate norm for projected row " +
                          std::to_string(j));
    Eigen::RowVectorXd s_hat = y.row(j) / norm;
    double along = g_hat.row(j).dot(s_hat);
    g_y.row(j) = (g_hat.row(j) - along * s_hat) / norm;
  }
  return raw.transpose() * g_y;
}

ProjectionStudent distill_projection(const std::vector<BitextPair>& bitext, double lr,
                                     int epochs, double epsilon, uint64_t seed) {
  if (bitext.empty()) throw config_error("distill: no bitext pairs");
  if (lr < 0.0 || !std::isfinite(lr)) throw config_error("distill: bad learning rate");
  if (epochs < 1) throw config_error("distill: epochs must be >= 1");
  const int dim = bitext.front().teacher.cols;
  for (auto& pair : bitext) {
    check_token_matrix(pair.teacher, "distill");
    check_token_matrix(pair.student, "distill");
    if (pair.teacher.cols != dim || pair.student.cols != dim)
      throw data_error("distill: bitext pairs must share one dimension");
  }

  ProjectionStudent student;
  student.W = Eigen::MatrixXd::Identity(dim, dim);
  student.learning_rate = lr;
  student.epochs = epochs;
  student.loss_trace.reserve(epochs);

  Rng rng(derive_seed(seed, "distill"));
  std::vector<int> order(bitext.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses(bitext.size());

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order);
    for (int idx : order) {
      const auto& pair = bitext[idx];
      try {
        TokenMatrix projected = apply_projection(pair.student, student.W);
        AlignmentResult aligned = alignment_loss(pair.teacher, projected, epsilon);
        if (!std::isfinite(aligned.loss))
          throw numeric_error("non-finite alignment loss");
        losses[idx] = aligned.loss;
        student.W.noalias() -=
            lr * projection_grad(pair.teacher, pair.student, student.W, aligned.plan.plan);
        if (!student.W.allFinite()) throw numeric_error("projection diverged");
      } catch (const numeric_error& e) {
        throw numeric_error("distill: epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
    // Mean in pair order, not visit order, so the trace is reproducible for
    // a given W regardless of the shuffle.
    double sum = 0.0;
    for (double l : losses) sum += l;
    student.loss_trace.push_back(sum / static_cast<double>(losses.size()));
  }
  return student;
}

void write_projection(const Eigen::MatrixXd& W, const std::string& path) {
  if (W.rows() != W.cols() || W.rows() < 1)
    throw data_error("write_projection: W must be square and non-empty");
  std::string out;
  out.append("LIRW", 4);
  put_le<uint32_t>(out, static_cast<uint32_t>(W.rows()));
  for (Eigen::Index r = 0; r < W.rows(); ++r)
    for (Eigen::Index c = 0; c < W.cols(); ++c) put_le<double>(out, W(r, c));
  write_file_atomic(path, out);
}

Eigen::MatrixXd read_projection(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4)) throw data_error("truncated projection file: " + path);
  if (std::memcmp(magic, "LIRW", 4) != 0) throw data_error("bad magic in " + path);
  auto dim = read_le<uint32_t>(in, path);
  if (dim == 0) throw data_error(path + ": dimension must be positive");
  Eigen::MatrixXd W(dim, dim);
  for (uint32_t r = 0; r < dim; ++r)
    for (uint32_t c = 0; c < dim; ++c) W(r, c) = read_le<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof())
    throw data_error(path + ": trailing bytes after projection");
  return W;
}

}  // namespace lire
