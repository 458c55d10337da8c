#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "sympatch/errors.hpp"
#include "sympatch/model.hpp"

namespace sympatch {

template <class S>
using SparseMatrix = Eigen::SparseMatrix<S, Eigen::ColMajor, int>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Triplets = std::vector<Eigen::Triplet<S, int>>;

/// Sums duplicate entries. Throws DomainError on an index outside [0, n).
template <class S>
SparseMatrix<S> assemble_from_triplets(int n, const Triplets<S>& triplets);

enum class SolverMethod { Direct, Iterative };
std::string to_string(SolverMethod m);

struct SolverOptions {
  SolverMethod method = SolverMethod::Direct;
  double tolerance = 1e-8;  // accepted relative residual
  int max_iterations = 20000;
  double ilut_drop = 1e-5;
  int ilut_fill = 40;
};

struct LinearSolveReport {
  double residual_norm_relative = 0.0;  // recomputed from the returned solution
  int iterations = 0;
  SolverMethod method = SolverMethod::Direct;
};

class SolveFailure : public SolverError {
 public:
  SolveFailure(const std::string& what, LinearSolveReport report) : SolverError(what), report_(report) {}
  const LinearSolveReport& report() const { return report_; }

 private:
  LinearSolveReport report_;
};

/// Factorizes once, then solves for any number of right-hand sides.
template <class S>
class LinearSolver {
 public:
  LinearSolver(const SparseMatrix<S>& A, SolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws SolveFailure when the relative residual exceeds the tolerance.
  Vector<S> solve(const Vector<S>& b, LinearSolveReport* report = nullptr) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const SparseMatrix<S>* A_;
  SolverOptions options_;
  int n_ = 0;
};

template <class S>
Vector<S> solve(const SparseMatrix<S>& A, const Vector<S>& b, const SolverOptions& options = {},
                LinearSolveReport* report = nullptr);

/// Matrix Market coordinate dump, for debugging.
template <class S>
void write_matrix_market(const SparseMatrix<S>& A, const std::string& path);

}  // namespace sympatch
