#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lire/types.hpp"

namespace lire {

inline constexpr double kSinkhornEpsilon = 0.05;
inline constexpr double kSinkhornTol = 1e-6;
inline constexpr int kSinkhornMaxIter = 10000;

// Cosine distance between unit rows: C[i][j] = 1 - t_i . s_j, clamped to [0, 2].
Eigen::MatrixXd cost_matrix(const TokenMatrix& teacher, const TokenMatrix& student);

struct TransportPlan {
  Eigen::MatrixXd plan;
  Eigen::VectorXd row_marginal;
  Eigen::VectorXd col_marginal;
  double epsilon = 0.0;
  int iterations = 0;
};

// Entropic OT by alternating scaling of K = exp(-C / epsilon):
//   u <- a / (K v),  v <- b / (K' u),  P = diag(u) K diag(v)
// until the worst marginal violation drops to tol. Kernel underflow and
// non-convergence raise numeric errors (the fix is a larger epsilon).
TransportPlan sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b, double epsilon = kSinkhornEpsilon,
                       int max_iter = kSinkhornMaxIter, double tol = kSinkhornTol);

struct AlignmentResult {
  double loss = 0.0;  // <P, C>
  TransportPlan plan;
};

// Transport cost between teacher tokens and projected student tokens under
// uniform marginals.
AlignmentResult alignment_loss(const TokenMatrix& teacher,
                               const TokenMatrix& student_projected,
                               double epsilon = kSinkhornEpsilon);

struct BitextPair {
  TokenMatrix teacher;
  TokenMatrix student;  // raw, projected through W during training
};

// Rows of `raw` mapped through W (row vector times matrix) and re-normalized
// to unit length. A zero or non-finite row norm is a numeric error.
TokenMatrix apply_projection(const TokenMatrix& raw, const Eigen::MatrixXd& W);

// d<P, C(W)>/dW with the plan held fixed; includes the Jacobian of the row
// re-normalization.
Eigen::MatrixXd projection_grad(const TokenMatrix& teacher, const TokenMatrix& raw_student,
                                const Eigen::MatrixXd& W, const Eigen::MatrixXd& plan);

struct ProjectionStudent {
  Eigen::MatrixXd W;
  double learning_rate = 0.0;
  int epochs = 0;
  std::vector<double> loss_trace;  // per-epoch mean alignment loss
};

// Trains W (initialized to identity) by sequential per-pair gradient steps.
// Each step recomputes the transport plan, then treats it as constant while
// stepping W. Pair order is shuffled each epoch from the seed; the epoch mean
// is accumulated in pair order, so a zero learning rate gives a constant
// trace.
ProjectionStudent distill_projection(const std::vector<BitextPair>& bitext, double lr,
                                     int epochs, double epsilon = kSinkhornEpsilon,
                                     uint64_t seed = 0);

// Projection file: magic "LIRW", u32 dim, then dim*dim float64 little-endian,
// row-major.
void write_projection(const Eigen::MatrixXd& W, const std::string& path);
Eigen::MatrixXd read_projection(const std::string& path);

}  // namespace lire
