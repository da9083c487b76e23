#pragma once

#include <cstddef>

#include "mvgad/matrix.hpp"

namespace mvgad::numerics {

struct Standardized {
  DenseMatrix values;
  DenseVector means;
  // Sample standard deviation (ddof = 1); 1 for zero-variance columns.
  DenseVector scales;
};

// Column-wise z-scores. Zero-variance columns become all zeros.
Standardized standardize(const DenseMatrix& x);

struct EigenDecomposition {
  DenseVector eigenvalues;   // ascending
  DenseMatrix eigenvectors;  // column j pairs with eigenvalues[j]
};

inline constexpr int kMaxSweepsPerEigenvalue = 50;

// Householder tridiagonalization followed by implicit-shift QL iteration.
// Eigenvectors are unit length with their first component of magnitude
// > 1e-12 made positive, so the output is a deterministic function of the
// input bytes.
EigenDecomposition sym_eig(const DenseMatrix& a);

struct PcaModel {
  DenseVector means;
  DenseVector scales;
  // cols x cols; column j is the direction of the j-th largest eigenvalue of
  // the correlation matrix.
  DenseMatrix components;
  DenseVector explained_variance_ratio;
  std::size_t m = 1;
};

// Correlation-matrix PCA. m is the smallest count whose cumulative explained
// variance ratio reaches variance_threshold.
PcaModel pca_fit(const DenseMatrix& x, double variance_threshold);

// Standardizes x with the model's means/scales and projects onto the first m
// components.
DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x);

}  // namespace mvgad::numerics
