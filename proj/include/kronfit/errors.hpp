#pragma once

#include <stdexcept>
#include <string>

namespace kronfit {

struct NotSymmetric : std::runtime_error {
  explicit NotSymmetric(double asym)
      : std::runtime_error("matrix is not symmetric (relative asymmetry " +
                           std::to_string(asym) + ")") {}
};

struct NotPositiveDefinite : std::runtime_error {
  int index;
  double eigenvalue;
  NotPositiveDefinite(int idx, double ev)
      : std::runtime_error("matrix is not positive definite (eigenvalue " +
                           std::to_string(ev) + " at index " + std::to_string(idx) + ")"),
        index(idx),
        eigenvalue(ev) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct SingularCovariance : std::runtime_error {
  double min_eigenvalue;
  double suggested_ridge;
  SingularCovariance(double ev, double ridge)
      : std::runtime_error("sample covariance is numerically singular (min eigenvalue " +
                           std::to_string(ev) + "); a ridge of " + std::to_string(ridge) +
                           "*I would restore definiteness but is never applied silently"),
        min_eigenvalue(ev),
        suggested_ridge(ridge) {}
};

struct SingularNormalEquations : std::runtime_error {
  SingularNormalEquations() : std::runtime_error("weighted design W^{1/2}E is rank deficient") {}
};

struct HessianNotPd : std::runtime_error {
  double min_eigenvalue;
  explicit HessianNotPd(double ev)
      : std::runtime_error("estimated expected Hessian is not positive definite (min eigenvalue " +
                           std::to_string(ev) + "); one-step update aborted"),
        min_eigenvalue(ev) {}
};

struct NotOveridentified : std::runtime_error {
  NotOveridentified() : std::runtime_error("model is just identified: n(n+1)/2 - s = 0") {}
};

struct RankDeficientContrast : std::runtime_error {
  RankDeficientContrast() : std::runtime_error("contrast matrix is rank deficient") {}
};

struct UnsupportedFactorDim : std::runtime_error {
  int factor;
  int dim;
  UnsupportedFactorDim(int f, int d)
      : std::runtime_error("factor " + std::to_string(f) + " has dimension " + std::to_string(d) +
                           "; 2x2 shrinkage requires all factor dimensions equal to 2 "
                           "(use renormalize instead)"),
        factor(f),
        dim(d) {}
};

struct NonPositiveDiagonal : std::runtime_error {
  int index;
  explicit NonPositiveDiagonal(int idx)
      : std::runtime_error("diagonal entry " + std::to_string(idx) + " is not strictly positive"),
        index(idx) {}
};

struct EmptyFile : std::runtime_error {
  explicit EmptyFile(const std::string& path) : std::runtime_error("no data rows in " + path) {}
};

struct RaggedRows : std::runtime_error {
  long row;
  RaggedRows(long r, long expect, long got)
      : std::runtime_error("row " + std::to_string(r) + " has " + std::to_string(got) +
                           " cells, expected " + std::to_string(expect)),
        row(r) {}
};

struct NonNumericCell : std::runtime_error {
  long row;
  long col;
  NonNumericCell(long r, long c, const std::string& cell)
      : std::runtime_error("cell (" + std::to_string(r) + "," + std::to_string(c) +
                           ") is not numeric: \"" + cell + "\""),
        row(r),
        col(c) {}
};

}  // namespace kronfit
