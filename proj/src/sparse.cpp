#include "sympatch/sparse.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/SparseExtra>

namespace sympatch {

std::string to_string(SolverMethod m) { return m == SolverMethod::Direct ? "direct" : "iterative"; }

template <class S>
SparseMatrix<S> assemble_from_triplets(int n, const Triplets<S>& triplets) {
  if (n < 0) throw DomainError("negative matrix dimension");
  for (const auto& t : triplets)
    if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n)
      throw DomainError("triplet index (" + std::to_string(t.row()) + ", " + std::to_string(t.col()) +
                        ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  SparseMatrix<S> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

template <class S>
struct LinearSolver<S>::Impl {
  std::unique_ptr<Eigen::UmfPackLU<SparseMatrix<S>>> lu;
  std::unique_ptr<Eigen::BiCGSTAB<SparseMatrix<S>, Eigen::IncompleteLUT<S>>> krylov;
  SparseMatrix<S> copy;
};

template <class S>
LinearSolver<S>::LinearSolver(const SparseMatrix<S>& A, SolverOptions options)
    : impl_(std::make_unique<Impl>()), options_(options), n_(int(A.rows())) {
  if (A.rows() != A.cols()) throw DomainError("matrix must be square");
  impl_->copy = A;
  A_ = &impl_->copy;
  if (n_ == 0) return;
  if (options_.method == SolverMethod::Direct) {
    // FE operators are structurally symmetric: order A + A' by nested dissection, falling back to
    // AMD when this UMFPACK build lacks METIS.
    int code = 0;
    for (double ordering : {double(UMFPACK_ORDERING_METIS), double(UMFPACK_ORDERING_AMD)}) {
      impl_->lu = std::make_unique<Eigen::UmfPackLU<SparseMatrix<S>>>();
      impl_->lu->umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
      impl_->lu->umfpackControl()(UMFPACK_ORDERING) = ordering;
      impl_->lu->compute(*A_);
      if (impl_->lu->info() == Eigen::Success) break;
      code = impl_->lu->umfpackFactorizeReturncode();
      if (code == UMFPACK_WARNING_singular_matrix || code == UMFPACK_ERROR_out_of_memory) break;
    }
    if (impl_->lu->info() != Eigen::Success) {
      const std::string why = code == UMFPACK_ERROR_out_of_memory ? "out of memory"
                              : code == UMFPACK_WARNING_singular_matrix ? "singular matrix"
                                                                        : "UMFPACK status " + std::to_string(code);
      throw SolveFailure("sparse LU factorization failed: " + why, {0.0, 0, SolverMethod::Direct});
    }
  } else {
    impl_->krylov = std::make_unique<Eigen::BiCGSTAB<SparseMatrix<S>, Eigen::IncompleteLUT<S>>>();
    impl_->krylov->preconditioner().setDroptol(options_.ilut_drop);
    impl_->krylov->preconditioner().setFillfactor(options_.ilut_fill);
    impl_->krylov->setMaxIterations(options_.max_iterations);
    impl_->krylov->setTolerance(options_.tolerance * 0.1);
    impl_->krylov->compute(*A_);
    if (impl_->krylov->info() != Eigen::Success)
      throw SolveFailure("incomplete factorization failed", {0.0, 0, SolverMethod::Iterative});
  }
}

template <class S>
LinearSolver<S>::~LinearSolver() = default;
template <class S>
LinearSolver<S>::LinearSolver(LinearSolver&&) noexcept = default;
template <class S>
LinearSolver<S>& LinearSolver<S>::operator=(LinearSolver&&) noexcept = default;

template <class S>
Vector<S> LinearSolver<S>::solve(const Vector<S>& b, LinearSolveReport* report) const {
  if (b.size() != n_) throw DomainError("right-hand side size does not match the matrix");
  LinearSolveReport rep;
  rep.method = options_.method;
  Vector<S> x = Vector<S>::Zero(n_);
  const double bnorm = b.norm();
  if (n_ > 0 && bnorm > 0.0) {
    if (impl_->lu) {
      x = impl_->lu->solve(b);
      if (impl_->lu->info() != Eigen::Success) throw SolveFailure("sparse LU solve failed", rep);
    } else {
      x = impl_->krylov->solve(b);
      rep.iterations = int(impl_->krylov->iterations());
    }
    rep.residual_norm_relative = (*A_ * x - b).norm() / bnorm;
  }
  if (report) *report = rep;
  if (!(rep.residual_norm_relative <= options_.tolerance))
    throw SolveFailure("linear solve residual " + std::to_string(rep.residual_norm_relative) +
                           " exceeds tolerance " + std::to_string(options_.tolerance),
                       rep);
  return x;
}

template <class S>
Vector<S> solve(const SparseMatrix<S>& A, const Vector<S>& b, const SolverOptions& options,
                LinearSolveReport* report) {
  return LinearSolver<S>(A, options).solve(b, report);
}

template <class S>
void write_matrix_market(const SparseMatrix<S>& A, const std::string& path) {
  if (!Eigen::saveMarket(A, path)) throw Error("cannot write matrix to '" + path + "'");
}

template SparseMatrix<double> assemble_from_triplets<double>(int, const Triplets<double>&);
template SparseMatrix<cplx> assemble_from_triplets<cplx>(int, const Triplets<cplx>&);
template class LinearSolver<double>;
template class LinearSolver<cplx>;
template Vector<double> solve<double>(const SparseMatrix<double>&, const Vector<double>&, const SolverOptions&,
                                      LinearSolveReport*);
template Vector<cplx> solve<cplx>(const SparseMatrix<cplx>&, const Vector<cplx>&, const SolverOptions&,
                                  LinearSolveReport*);
template void write_matrix_market<double>(const SparseMatrix<double>&, const std::string&);
template void write_matrix_market<cplx>(const SparseMatrix<cplx>&, const std::string&);

}  // namespace sympatch
