#pragma once

#include <vector>

#include "mgp/latent_process.hpp"
#include "mgp/linalg.hpp"

namespace mgp {

struct ModelParams;  // model.hpp

enum class ModelKind { smgp, nmgp, gnmgp };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// stationary squared-exponential: amp^2 exp(-(t-t2)^2 / (2 len^2))
double rbf(double t, double t2, double amp, double len);

// nonstationary unit-amplitude kernel with input-dependent length-scale,
// l1 = l(t), l2 = l(t2):
//   sqrt(2 l1 l2 / (l1^2 + l2^2)) exp(-(t-t2)^2 / (l1^2 + l2^2))
// reduces to exp(-(t-t2)^2 / (2 d^2)) when l1 == l2 == d
double gibbs(double t, double t2, double l1, double l2);

// separable nonstationary scalar kernel: s1 s2 gibbs(t,t2,l1,l2)
double nmgp_k(double t, double t2, double l1, double l2, double s1, double s2);

// nonseparable cross-channel block: kval * (L1 L2^T), generally nonsymmetric
// for t != t2.  kval is the gibbs value at (t, t2).
Matrix gnmgp_block(double t, double t2, const Matrix& l1, const Matrix& l2, double kval);

// Latent-function values of a model evaluated on an arbitrary set of times,
// normalized so one covariance formula serves all three kinds:
//   entry((i,a),(j,b)) = sd(i) sd(j) gibbs(t_i,t_j,len_i,len_j) * coreg
// with coreg = (L_i L_j^T)(a,b) per-time for the nonseparable kind and
// (L L^T)(a,b) constant otherwise.  The stationary kind appears as constant
// len, sd = amp; the nonseparable kind has sd identically 1.
struct KernelSlice {
  ModelKind kind = ModelKind::smgp;
  Vector times;
  Vector len;                 // l(t) > 0
  Vector sd;                  // sigma(t) (ones for the nonseparable kind)
  Matrix coreg_const;         // lower-triangular L (constant kinds)
  std::vector<Matrix> coreg;  // per-time lower-triangular L(t) (nonseparable)

  Eigen::Index n() const { return times.size(); }
  Eigen::Index m() const;
};

// latents taken directly at their knots (at == the model grid)
KernelSlice kernel_slice(const ModelParams& p, const Vector& grid);
// latents extended to `at` via conditional_mean under their priors
KernelSlice kernel_slice(const ModelParams& p, const Vector& grid, const Vector& at);

double cov_entry(const KernelSlice& r, Eigen::Index i, Eigen::Index a,
                 const KernelSlice& c, Eigen::Index j, Eigen::Index b);

// full cross covariance, dimension-major on both sides (index = m*N + n)
Matrix cross_cov(const KernelSlice& rows, const KernelSlice& cols);

// N*M model covariance in dimension-major order: B kron K for the separable
// kinds, gathered gnmgp blocks otherwise; symmetrized against rounding.
SymMatrix assemble_cov(const ModelParams& p, const Vector& times);

// time-only gram of a slice, K(i,j) = sd_i sd_j gibbs(...); for separable
// kinds the model covariance is (L L^T) kron this
Matrix time_gram(const KernelSlice& s);

}  // namespace mgp
